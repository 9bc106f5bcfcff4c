"""Directed weighted follower graph with per-node behavior records.

The graph is immutable once built: node ids are mapped to dense integer
indices (insertion order: users file first, then edge-only nodes), edges
are stored as CSR adjacency in both directions, and every node carries a
UserRecord. Loaders accept the on-disk formats `edges.tsv` / `users.jsonl`
/ `labels.tsv`.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ValidationError

logger = logging.getLogger(__name__)

N_TRUST_FEATURES = 8


@dataclass
class UserRecord:
    """Behavioral counters for one account.

    `trust_features` holds, in order: blacklist-URL count, tweet count,
    mention count, duplicate-tweet count, adult/bad-word tweet count,
    violent-word tweet count, promotional-word tweet count, total activity
    time in days.
    """

    followers: int = 0
    followings: int = 0
    active_days: frozenset = frozenset()
    fraud_tweets: int = 0
    total_tweets: int = 0
    mentions: dict = field(default_factory=dict)
    trust_features: tuple = (0.0,) * N_TRUST_FEATURES
    suspended: bool | None = None

    def validate(self):
        if self.followers < 0 or self.followings < 0:
            raise ValidationError("follower/following counts must be >= 0")
        if self.fraud_tweets < 0 or self.total_tweets < 0:
            raise ValidationError("tweet counts must be >= 0")
        if self.fraud_tweets > self.total_tweets:
            raise ValidationError(
                f"fraud_tweets ({self.fraud_tweets}) exceeds total_tweets ({self.total_tweets})"
            )
        if any(d < 0 for d in self.active_days):
            raise ValidationError("active day indices must be >= 0")
        if len(self.trust_features) != N_TRUST_FEATURES:
            raise ValidationError(
                f"expected {N_TRUST_FEATURES} trust features, got {len(self.trust_features)}"
            )
        if any(not np.isfinite(x) or x < 0 for x in self.trust_features):
            raise ValidationError("trust features must be finite and >= 0")
        if any(c <= 0 for c in self.mentions.values()):
            raise ValidationError("mention counts must be positive")


@dataclass
class AdjacencyView:
    """CSR adjacency under one direction convention ("out" or "undirected")."""

    direction: str
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray

    def neighbors(self, v: int):
        """(neighbor indices, edge weights) arrays for node v."""
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    @property
    def n_edges(self) -> int:
        return len(self.indices)


def _build_csr(n, src, dst, weight):
    order = np.lexsort((dst, src))
    src, dst, weight = src[order], dst[order], weight[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, dst.copy(), weight.copy()


class SpamGraph:
    """Directed weighted follower graph; edge u->v means "u follows v"."""

    def __init__(self, ids, records, edges, dropped_self_loops=0,
                 merged_duplicates=0, defaulted_records=0):
        """Build from node ids (defines the index mapping), their records,
        and an iterable of (src_index, dst_index, weight) with no self
        loops or duplicates remaining.
        """
        self.ids = list(ids)
        self._index = {node_id: i for i, node_id in enumerate(self.ids)}
        if len(self._index) != len(self.ids):
            raise ValidationError("duplicate node ids")
        self.records = list(records)
        if len(self.records) != len(self.ids):
            raise ValidationError("one record required per node")
        for rec in self.records:
            rec.validate()

        edges = list(edges)
        n = len(self.ids)
        self.edge_src = np.asarray([e[0] for e in edges], dtype=np.int64)
        self.edge_dst = np.asarray([e[1] for e in edges], dtype=np.int64)
        self.edge_weight = np.asarray([e[2] for e in edges], dtype=np.float64)
        if len(self.edge_src) and (self.edge_src.min() < 0 or self.edge_src.max() >= n
                                   or self.edge_dst.min() < 0 or self.edge_dst.max() >= n):
            raise ValidationError("edge endpoint out of range")
        if np.any(self.edge_src == self.edge_dst):
            raise ValidationError("self loops must be dropped before construction")
        if np.any(self.edge_weight <= 0) or not np.all(np.isfinite(self.edge_weight)):
            raise ValidationError("edge weights must be positive and finite")

        self.dropped_self_loops = dropped_self_loops
        self.merged_duplicates = merged_duplicates
        self.defaulted_records = defaulted_records

        self._views: dict[str, AdjacencyView] = {}

    # -- index mapping -------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.ids)

    @property
    def n_edges(self) -> int:
        return len(self.edge_src)

    def node_index(self, node_id: str) -> int:
        try:
            return self._index[node_id]
        except KeyError:
            raise KeyError(f"unknown node id: {node_id!r}") from None

    def node_id(self, index: int) -> str:
        return self.ids[index]

    # -- adjacency -----------------------------------------------------

    def view(self, direction: str = "out") -> AdjacencyView:
        """Adjacency under `direction`: "out" follows edges as stored,
        "undirected" merges both directions (opposite weights summed).
        """
        if direction not in ("out", "undirected"):
            raise ValidationError(f"unknown direction: {direction!r}")
        if direction not in self._views:
            if direction == "out":
                src, dst, w = self.edge_src, self.edge_dst, self.edge_weight
            else:
                pair = {}
                for s, d, w_ in zip(self.edge_src, self.edge_dst, self.edge_weight):
                    key = (min(s, d), max(s, d))
                    pair[key] = pair.get(key, 0.0) + w_
                src = np.array([k for key in pair for k in key], dtype=np.int64)
                dst = np.array([k for key in pair for k in reversed(key)], dtype=np.int64)
                w = np.repeat(np.fromiter(pair.values(), dtype=np.float64, count=len(pair)), 2)
            indptr, indices, weights = _build_csr(self.n_nodes, src, dst, w)
            self._views[direction] = AdjacencyView(direction, indptr, indices, weights)
        return self._views[direction]

    def out_neighbors(self, v: int):
        return self.view("out").neighbors(v)

    def undirected_edges(self):
        """Unique undirected node pairs (u < v) as an (E, 2) int array."""
        if self.n_edges == 0:
            return np.empty((0, 2), dtype=np.int64)
        lo = np.minimum(self.edge_src, self.edge_dst)
        hi = np.maximum(self.edge_src, self.edge_dst)
        return np.unique(np.stack([lo, hi], axis=1), axis=0)


# ---------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------

_USER_KEYS = {"id", "followers", "followings", "active_days", "fraud_tweets",
              "total_tweets", "mentions", "trust_features", "suspended"}


def _record_from_json(obj, path, line_no) -> tuple[str, UserRecord]:
    if not isinstance(obj, dict) or "id" not in obj:
        raise ParseError(path, line_no, "user record must be an object with an 'id' key")
    unknown = set(obj) - _USER_KEYS
    if unknown:
        raise ParseError(path, line_no, f"unknown keys: {sorted(unknown)}")
    try:
        rec = UserRecord(
            followers=int(obj.get("followers", 0)),
            followings=int(obj.get("followings", 0)),
            active_days=frozenset(int(d) for d in obj.get("active_days", [])),
            fraud_tweets=int(obj.get("fraud_tweets", 0)),
            total_tweets=int(obj.get("total_tweets", 0)),
            mentions={str(k): int(v) for k, v in (obj.get("mentions") or {}).items()},
            trust_features=tuple(float(x) for x in obj.get("trust_features",
                                                           (0.0,) * N_TRUST_FEATURES)),
            suspended=None if obj.get("suspended") is None else bool(obj["suspended"]),
        )
        rec.validate()
    except (TypeError, ValueError) as exc:
        raise ParseError(path, line_no, str(exc)) from None
    return str(obj["id"]), rec


def load_users(path) -> tuple[list[str], list[UserRecord]]:
    """Read users.jsonl; preserves file order (defines node indexing)."""
    ids, records = [], []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, line_no, f"invalid JSON: {exc.msg}") from None
            node_id, rec = _record_from_json(obj, path, line_no)
            ids.append(node_id)
            records.append(rec)
    return ids, records


def _parse_edge_line(line, path, line_no):
    parts = line.split("\t")
    if len(parts) not in (2, 3):
        raise ParseError(path, line_no, f"expected 2 or 3 tab-separated fields, got {len(parts)}")
    src, dst = parts[0], parts[1]
    if not src or not dst:
        raise ParseError(path, line_no, "empty endpoint id")
    if len(parts) == 3:
        try:
            weight = float(parts[2])
        except ValueError:
            raise ParseError(path, line_no, f"bad weight: {parts[2]!r}") from None
    else:
        weight = 1.0
    if not np.isfinite(weight) or weight <= 0:
        raise ValidationError(f"{path}:{line_no}: edge weight must be positive, got {weight}")
    return src, dst, weight


def load_graph(edges_path, users_path) -> SpamGraph:
    """Build a SpamGraph from edges.tsv + users.jsonl.

    Self loops are dropped (counted), duplicate edges merged by summing
    weights (counted), and endpoints missing from the users file get a
    default all-zero record (counted).
    """
    ids, records = load_users(users_path)
    index = {node_id: i for i, node_id in enumerate(ids)}
    if len(index) != len(ids):
        raise ValidationError(f"duplicate user ids in {users_path}")

    merged: dict[tuple[int, int], float] = {}
    dropped = 0
    duplicates = 0
    defaulted = 0
    with open(edges_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            src, dst, weight = _parse_edge_line(line, edges_path, line_no)
            if src == dst:
                dropped += 1
                continue
            for endpoint in (src, dst):
                if endpoint not in index:
                    index[endpoint] = len(ids)
                    ids.append(endpoint)
                    records.append(UserRecord())
                    defaulted += 1
            key = (index[src], index[dst])
            if key in merged:
                merged[key] += weight
                duplicates += 1
            else:
                merged[key] = weight

    if dropped:
        logger.warning("dropped %d self loop(s) from %s", dropped, edges_path)
    if defaulted:
        logger.warning("created %d default record(s) for edge-only nodes", defaulted)

    edges = [(s, d, w) for (s, d), w in merged.items()]
    return SpamGraph(ids, records, edges, dropped_self_loops=dropped,
                     merged_duplicates=duplicates, defaulted_records=defaulted)


def save_graph(graph: SpamGraph, edges_path, users_path):
    """Write the graph back out in the loadable formats (canonical order)."""
    with open(users_path, "w", encoding="utf-8") as fh:
        for node_id, rec in zip(graph.ids, graph.records):
            obj = {
                "id": node_id,
                "followers": rec.followers,
                "followings": rec.followings,
                "active_days": sorted(rec.active_days),
                "fraud_tweets": rec.fraud_tweets,
                "total_tweets": rec.total_tweets,
                "mentions": {k: rec.mentions[k] for k in sorted(rec.mentions)},
                "trust_features": list(rec.trust_features),
            }
            if rec.suspended is not None:
                obj["suspended"] = rec.suspended
            fh.write(json.dumps(obj) + "\n")
    order = np.lexsort((graph.edge_dst, graph.edge_src))
    with open(edges_path, "w", encoding="utf-8") as fh:
        for k in order:
            s, d = graph.edge_src[k], graph.edge_dst[k]
            w = graph.edge_weight[k]
            fh.write(f"{graph.ids[s]}\t{graph.ids[d]}\t{w:g}\n")


def load_labels(path) -> dict[str, int]:
    """Read labels.tsv (`node<TAB>0|1`)."""
    labels = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or parts[1] not in ("0", "1"):
                raise ParseError(path, line_no, "expected `node<TAB>0|1`")
            labels[parts[0]] = int(parts[1])
    return labels


def save_labels(labels: dict[str, int], path):
    with open(path, "w", encoding="utf-8") as fh:
        for node_id in labels:
            fh.write(f"{node_id}\t{labels[node_id]}\n")


def apply_labels(graph: SpamGraph, labels: dict[str, int]):
    """Override records' suspended flags from a labels mapping."""
    for node_id, value in labels.items():
        graph.records[graph.node_index(node_id)].suspended = bool(value)


def graph_labels(graph: SpamGraph) -> dict[str, int]:
    """suspended flags as a {node_id: 0|1} mapping (unknown -> 0)."""
    return {node_id: int(bool(rec.suspended))
            for node_id, rec in zip(graph.ids, graph.records)}
