"""Command-line pipeline: synth / ingest / dynamics / walk / embed /
pagerank / mrf / trust-fit / eval / compare.

Every subcommand reads and writes only the documented file formats,
echoes its effective parameters to `<out-dir>/<command>.config.json`,
and exits 0 on success, 1 on validation/usage errors, 2 on I/O errors.
Flags override entries of an optional flat `key=value` config file
(`--config`). ENWALK_WORKERS overrides the default worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import baselines, dynamics, embedding, evaluation, graph, synth, walks
from .errors import ConfigError, ParseError, ValidationError


class _ArgumentParser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _default_workers() -> int:
    env = os.environ.get("ENWALK_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"ENWALK_WORKERS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def _read_config_file(path) -> dict:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(path, line_no, "expected key=value")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(value, default):
    if isinstance(default, bool):
        return str(value).lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


def _effective(args, defaults: dict) -> dict:
    """Merge flag values (win) over config-file values over defaults."""
    file_values = _read_config_file(args.config) if args.config else {}
    merged = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
        elif key in file_values:
            merged[key] = _coerce(file_values[key], default)
        else:
            merged[key] = default
    return merged

def _echo(out_dir, command: str, params: dict):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {"command": command, "parameters": params}
    with open(out_dir / f"{command}.config.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------

def _cmd_synth(args):
    defaults = dict(n=2000, spam_frac=0.05, vigilant_frac=0.5, seed=0,
                    out_dir=".")
    p = _effective(args, defaults)
    cfg = synth.SynthConfig(n_nodes=p["n"], spam_fraction=p["spam_frac"],
                            vigilant_fraction=p["vigilant_frac"],
                            rng_seed=p["seed"])
    g, labels = synth.generate(cfg)
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    graph.save_graph(g, out / "edges.tsv", out / "users.jsonl")
    graph.save_labels(labels, out / "labels.tsv")
    _echo(out, "synth", p)
    print(f"synth: {g.n_nodes} nodes, {g.n_edges} edges, "
          f"{sum(labels.values())} spammers -> {out}")


def _load(p):
    g = graph.load_graph(p["edges"], p["users"])
    if p.get("labels"):
        graph.apply_labels(g, graph.load_labels(p["labels"]))
    return g


def _cmd_ingest(args):
    defaults = dict(edges=None, users=None, labels=None, out_dir=".")
    p = _effective(args, defaults)
    _require(p, "edges", "users")
    g = _load(p)
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    graph.save_graph(g, out / "edges.tsv", out / "users.jsonl")
    _echo(out, "ingest", p)
    print(f"ingest: {g.n_nodes} nodes, {g.n_edges} edges "
          f"(dropped self-loops: {g.dropped_self_loops}, "
          f"merged duplicates: {g.merged_duplicates}, "
          f"defaulted records: {g.defaulted_records}) -> {out}")


def _cmd_dynamics(args):
    defaults = dict(edges=None, users=None, out_dir=".")
    p = _effective(args, defaults)
    _require(p, "edges", "users")
    g = _load(p)
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    dynamics.dump_pair_table(g, out / "pairs.tsv")
    _echo(out, "dynamics", p)
    print(f"dynamics: {g.n_edges} edge pair rows -> {out / 'pairs.tsv'}")


def _cmd_walk(args):
    defaults = dict(edges=None, users=None, strategy="enwalk", direction="out",
                    p=0.25, q=0.25, r=0.25, s=0.25, rho=1.0, gamma=1.0,
                    walks=10, length=80, seed=0, workers=0, out_dir=".")
    p = _effective(args, defaults)
    _require(p, "edges", "users")
    g = _load(p)
    workers = p["workers"] or _default_workers()
    cfg = walks.WalkConfig(
        walks_per_node=p["walks"], walk_length=p["length"], rng_seed=p["seed"],
        direction=p["direction"], strategy=p["strategy"],
        bias=walks.BiasWeights(p["p"], p["q"], p["r"], p["s"]),
        rho=p["rho"], gamma=p["gamma"], workers=workers)
    corpus = walks.generate_corpus(cfg, g)
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    walks.save_walks(corpus, out / "walks.txt")
    _echo(out, "walk", p)
    print(f"walk: {len(corpus)} walks ({p['strategy']}) -> {out / 'walks.txt'}")


def _cmd_embed(args):
    defaults = dict(walks=None, dim=128, window=10, negatives=5, epochs=5,
                    step_size=0.025, noise_exponent=0.75, seed=0,
                    deterministic=True, out_dir=".")
    p = _effective(args, defaults)
    _require(p, "walks")
    corpus = walks.load_walks(p["walks"])
    cfg = embedding.EmbedConfig(
        dimension=p["dim"], window=p["window"], negatives=p["negatives"],
        epochs=p["epochs"], step_size=p["step_size"],
        noise_exponent=p["noise_exponent"], rng_seed=p["seed"],
        deterministic_mode=p["deterministic"])
    emb = embedding.train(corpus, cfg)
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    embedding.save_embeddings(emb, out / "embeddings.txt")
    _echo(out, "embed", p)
    losses = ", ".join(f"{x:.4f}" for x in emb.epoch_losses)
    print(f"embed: {emb.n_nodes} x {emb.dimension} (epoch losses: {losses}) "
          f"-> {out / 'embeddings.txt'}")


def _cmd_trust_fit(args):
    defaults = dict(users=None, labels=None, sample_per_class=400, seed=0,
                    out_dir=".")
    p = _effective(args, defaults)
    _require(p, "users", "labels")
    ids, records = graph.load_users(p["users"])
    labels = graph.load_labels(p["labels"])
    rng = np.random.default_rng(p["seed"])
    by_class = {0: [], 1: []}
    for i, node_id in enumerate(ids):
        if node_id in labels:
            by_class[labels[node_id]].append(i)
    chosen = []
    for cls in (0, 1):
        members = by_class[cls]
        take = min(p["sample_per_class"], len(members))
        if take < len(members):
            members = [members[j] for j in
                       rng.choice(len(members), size=take, replace=False)]
        chosen.extend(members)
    feats = np.array([records[i].trust_features for i in chosen])
    # trustworthiness target: 1 for clean users, 0 for spammers
    targets = np.array([1.0 - labels[ids[i]] for i in chosen])
    model = baselines.fit_trust(feats, targets)
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    baselines.save_trust(model, out / "trust.json")
    _echo(out, "trust-fit", p)
    print(f"trust-fit: {len(chosen)} examples -> {out / 'trust.json'}")


def _cmd_pagerank(args):
    defaults = dict(edges=None, users=None, variant="traditional",
                    trust_model=None, damping=0.15, tol=1e-12,
                    max_iters=1000, out_dir=".")
    p = _effective(args, defaults)
    _require(p, "edges", "users")
    g = _load(p)
    trust = baselines.load_trust(p["trust_model"]) if p["trust_model"] else None
    cfg = baselines.PageRankConfig(damping=p["damping"], tolerance=p["tol"],
                                   max_iterations=p["max_iters"],
                                   variant=p["variant"])
    result = baselines.pagerank(g, cfg, trust)
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    scores = {node_id: float(result.spamicity[i]) for i, node_id in enumerate(g.ids)}
    evaluation.save_scores(scores, out / "scores.tsv")
    _echo(out, "pagerank", p)
    status = "converged" if result.converged else "NOT converged"
    print(f"pagerank[{p['variant']}]: {status} in {result.iterations} "
          f"iterations -> {out / 'scores.tsv'}")


def _cmd_mrf(args):
    defaults = dict(edges=None, users=None, trust_model=None,
                    message_damping=0.5, tol=1e-10, max_iters=500, out_dir=".")
    p = _effective(args, defaults)
    _require(p, "edges", "users", "trust_model")
    g = _load(p)
    trust = baselines.load_trust(p["trust_model"])
    cfg = baselines.MRFConfig(message_damping=p["message_damping"],
                              tolerance=p["tol"], max_iterations=p["max_iters"])
    result = baselines.lbp_marginals(g, cfg, trust)
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    scores = {node_id: float(result.spamicity[i]) for i, node_id in enumerate(g.ids)}
    evaluation.save_scores(scores, out / "scores.tsv")
    with open(out / "beliefs.tsv", "w", encoding="utf-8") as fh:
        for i, node_id in enumerate(g.ids):
            b = result.beliefs[i]
            fh.write(f"{node_id}\t{b[0]:.10g}\t{b[1]:.10g}\t{b[2]:.10g}\n")
    _echo(out, "mrf", p)
    status = "converged" if result.converged else "NOT converged"
    print(f"mrf: {status} in {result.iterations} iterations -> {out}")


def _cmd_eval(args):
    defaults = dict(embeddings=None, labels=None, folds=10, seed=0,
                    l2=1e-3, out_dir=".")
    p = _effective(args, defaults)
    _require(p, "embeddings", "labels")
    emb = embedding.load_embeddings(p["embeddings"])
    labels = graph.load_labels(p["labels"])
    missing = [node_id for node_id in emb.ids if node_id not in labels]
    if missing:
        raise ValidationError(f"labels missing for {len(missing)} embedded node(s)")
    y = np.array([labels[node_id] for node_id in emb.ids])
    report = evaluation.cross_validate(emb.vectors, y, folds=p["folds"],
                                       seed=p["seed"], ids=emb.ids, l2=p["l2"])
    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    payload = {"precision": report.precision, "recall": report.recall,
               "f1": report.f1, "accuracy": report.accuracy,
               "folds": report.folds, "seed": report.seed}
    _write_json(out / "report.json", payload)
    _echo(out, "eval", p)
    print("eval: " + " ".join(f"{k}={payload[k]:.4f}" for k in
                              ("precision", "recall", "f1", "accuracy")))


def _cmd_compare(args):
    defaults = dict(labels=None, out_dir=".")
    p = _effective(args, defaults)
    _require(p, "labels")
    if not args.scores:
        raise ConfigError("at least one --scores name=path is required")
    tables = {}
    for item in args.scores:
        if "=" not in item:
            raise ConfigError(f"--scores expects name=path, got {item!r}")
        name, _, path = item.partition("=")
        tables[name] = evaluation.load_scores(path)
    labels = graph.load_labels(p["labels"])
    n_values = tuple(args.at) if args.at else (100,)
    report = evaluation.compare_models(tables, labels, n_values=n_values)

    out = Path(p["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    payload = {"n_nodes": report["n_nodes"], "n_spammers": report["n_spammers"],
               "models": {name: {"auc": row["auc"],
                                 "precision_at_n": row["precision_at_n"]}
                          for name, row in report["models"].items()}}
    _write_json(out / "report.json", payload)
    with open(out / "cdf.tsv", "w", encoding="utf-8") as fh:
        for name, row in report["models"].items():
            for pct, value in row["cdf"]:
                fh.write(f"{pct}\t{name}\t{value:.10g}\n")
    _echo(out, "compare", dict(p, scores=list(args.scores), at=list(n_values)))
    print(f"compare: {len(tables)} models -> {out / 'report.json'}")
    for name, row in report["models"].items():
        pn = " ".join(f"P@{k}={v:.4f}" for k, v in row["precision_at_n"].items())
        print(f"  {name:<16} AUC={row['auc']:.4f} {pn}")


def _require(params: dict, *keys):
    for key in keys:
        if not params.get(key):
            raise ConfigError(f"--{key.replace('_', '-')} is required "
                              "(flag or config file)")


# ---------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------

def _add_common(sp):
    sp.add_argument("--config", help="flat key=value config file (flags win)")
    sp.add_argument("--out-dir", dest="out_dir", help="output directory")


def build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="enwalk",
                             description="spam-dynamics-biased walk embedding pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate a planted-spammer network")
    sp.add_argument("--n", type=int)
    sp.add_argument("--spam-frac", dest="spam_frac", type=float)
    sp.add_argument("--vigilant-frac", dest="vigilant_frac", type=float)
    sp.add_argument("--seed", type=int)
    _add_common(sp)
    sp.set_defaults(func=_cmd_synth)

    sp = sub.add_parser("ingest", help="load, validate and normalize a graph")
    sp.add_argument("--edges")
    sp.add_argument("--users")
    sp.add_argument("--labels")
    _add_common(sp)
    sp.set_defaults(func=_cmd_ingest)

    sp = sub.add_parser("dynamics", help="dump per-edge pair features")
    sp.add_argument("--edges")
    sp.add_argument("--users")
    _add_common(sp)
    sp.set_defaults(func=_cmd_dynamics)

    sp = sub.add_parser("walk", help="generate a walk corpus")
    sp.add_argument("--edges")
    sp.add_argument("--users")
    sp.add_argument("--strategy", choices=("enwalk", "uniform", "node2vec",
                                           "return-inout"))
    sp.add_argument("--direction", choices=("out", "undirected"))
    sp.add_argument("--p", type=float)
    sp.add_argument("--q", type=float)
    sp.add_argument("--r", type=float)
    sp.add_argument("--s", type=float)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--walks", type=int)
    sp.add_argument("--length", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)
    _add_common(sp)
    sp.set_defaults(func=_cmd_walk)

    sp = sub.add_parser("embed", help="train embeddings from a walk corpus")
    sp.add_argument("--walks")
    sp.add_argument("--dim", type=int)
    sp.add_argument("--window", type=int)
    sp.add_argument("--negatives", type=int)
    sp.add_argument("--epochs", type=int)
    sp.add_argument("--step-size", dest="step_size", type=float)
    sp.add_argument("--noise-exponent", dest="noise_exponent", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--deterministic", action="store_true", default=None)
    _add_common(sp)
    sp.set_defaults(func=_cmd_embed)

    sp = sub.add_parser("trust-fit", help="fit the trust regression")
    sp.add_argument("--users")
    sp.add_argument("--labels")
    sp.add_argument("--sample-per-class", dest="sample_per_class", type=int)
    sp.add_argument("--seed", type=int)
    _add_common(sp)
    sp.set_defaults(func=_cmd_trust_fit)

    sp = sub.add_parser("pagerank", help="rank by a PageRank variant")
    sp.add_argument("--edges")
    sp.add_argument("--users")
    sp.add_argument("--variant", choices=("traditional", "trust"))
    sp.add_argument("--trust-model", dest="trust_model")
    sp.add_argument("--damping", type=float)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--max-iters", dest="max_iters", type=int)
    _add_common(sp)
    sp.set_defaults(func=_cmd_pagerank)

    sp = sub.add_parser("mrf", help="rank by 3-state belief propagation")
    sp.add_argument("--edges")
    sp.add_argument("--users")
    sp.add_argument("--trust-model", dest="trust_model")
    sp.add_argument("--message-damping", dest="message_damping", type=float)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--max-iters", dest="max_iters", type=int)
    _add_common(sp)
    sp.set_defaults(func=_cmd_mrf)

    sp = sub.add_parser("eval", help="cross-validated classification metrics")
    sp.add_argument("--embeddings")
    sp.add_argument("--labels")
    sp.add_argument("--folds", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--l2", type=float)
    _add_common(sp)
    sp.set_defaults(func=_cmd_eval)

    sp = sub.add_parser("compare", help="ranking comparison across models")
    sp.add_argument("--scores", action="append",
                    help="name=path of a scores.tsv (repeatable)")
    sp.add_argument("--labels")
    sp.add_argument("--at", action="append", type=int,
                    help="precision@n cutoff (repeatable, default 100)")
    _add_common(sp)
    sp.set_defaults(func=_cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except (ConfigError, ParseError, ValidationError) as exc:
        print(f"enwalk {args.command}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"enwalk {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
