import pytest

from enwalk.synth import SynthConfig, generate


@pytest.fixture(scope="session")
def synth_small():
    """A 200-node planted network shared by read-only tests."""
    return generate(SynthConfig(n_nodes=200, rng_seed=11))
