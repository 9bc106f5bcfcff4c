import json

import numpy as np
import pytest

from enwalk.errors import ParseError, ValidationError
from enwalk.graph import (SpamGraph, UserRecord, apply_labels, load_graph,
                          load_labels, save_graph)


def write_users(path, rows):
    with open(path, "w") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def write_edges(path, lines):
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


@pytest.fixture
def two_node_files(tmp_path):
    users = tmp_path / "users.jsonl"
    edges = tmp_path / "edges.tsv"
    write_users(users, [
        {"id": "a", "followers": 10, "followings": 5, "active_days": [1, 2, 3],
         "fraud_tweets": 1, "total_tweets": 4, "mentions": {"@x": 2}},
        {"id": "b", "followers": 3, "followings": 7, "active_days": [2, 3],
         "fraud_tweets": 0, "total_tweets": 2, "mentions": {}},
    ])
    write_edges(edges, ["a\tb", "b\ta"])
    return edges, users


def test_minimal_load(two_node_files):
    g = load_graph(*two_node_files)
    assert g.n_nodes == 2
    assert g.n_edges == 2
    assert g.dropped_self_loops == 0
    assert g.defaulted_records == 0


def test_self_loop_dropped(tmp_path, two_node_files):
    edges = tmp_path / "e2.tsv"
    write_edges(edges, ["a\tb", "a\ta"])
    g = load_graph(edges, two_node_files[1])
    assert g.n_edges == 1
    assert g.dropped_self_loops == 1


def test_edge_only_node_gets_default_record(tmp_path, two_node_files):
    edges = tmp_path / "e3.tsv"
    write_edges(edges, ["a\tc"])
    g = load_graph(edges, two_node_files[1])
    assert g.defaulted_records == 1
    rec = g.records[g.node_index("c")]
    assert rec.followers == 0 and rec.total_tweets == 0


def test_duplicate_edges_merge_weights(tmp_path, two_node_files):
    edges = tmp_path / "e4.tsv"
    write_edges(edges, ["a\tb\t1.5", "a\tb\t2.0"])
    g = load_graph(edges, two_node_files[1])
    assert g.n_edges == 1
    assert g.merged_duplicates == 1
    assert g.edge_weight[0] == pytest.approx(3.5)


def test_comment_lines_skipped(tmp_path, two_node_files):
    edges = tmp_path / "e5.tsv"
    write_edges(edges, ["# header", "a\tb"])
    assert load_graph(edges, two_node_files[1]).n_edges == 1


def test_malformed_edge_line_names_line_number(tmp_path, two_node_files):
    edges = tmp_path / "e6.tsv"
    write_edges(edges, ["a\tb", "a b c d"])
    with pytest.raises(ParseError, match=":2:"):
        load_graph(edges, two_node_files[1])


def test_nonpositive_weight_rejected(tmp_path, two_node_files):
    edges = tmp_path / "e7.tsv"
    write_edges(edges, ["a\tb\t0"])
    with pytest.raises(ValidationError):
        load_graph(edges, two_node_files[1])


def test_malformed_user_json(tmp_path, two_node_files):
    users = tmp_path / "u2.jsonl"
    users.write_text('{"id": "a"\n')
    with pytest.raises(ParseError, match=":1:"):
        load_graph(two_node_files[0], users)


def test_fraud_exceeding_total_rejected(tmp_path, two_node_files):
    users = tmp_path / "u3.jsonl"
    write_users(users, [{"id": "a", "fraud_tweets": 3, "total_tweets": 1},
                        {"id": "b"}])
    with pytest.raises(ParseError):
        load_graph(two_node_files[0], users)


def test_unreadable_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_graph(tmp_path / "missing.tsv", tmp_path / "missing.jsonl")


def test_insertion_order_indexing(tmp_path):
    users = tmp_path / "users.jsonl"
    edges = tmp_path / "edges.tsv"
    write_users(users, [{"id": "x"}, {"id": "y"}])
    write_edges(edges, ["y\tz", "x\ty"])
    g = load_graph(edges, users)
    assert g.node_index("x") == 0
    assert g.node_index("y") == 1
    assert g.node_index("z") == 2  # edge-only node appended after users file


def test_node_index_bijection(two_node_files):
    g = load_graph(*two_node_files)
    for node_id in g.ids:
        assert g.node_id(g.node_index(node_id)) == node_id
    with pytest.raises(KeyError):
        g.node_index("never-seen")


def test_round_trip(tmp_path, two_node_files):
    g = load_graph(*two_node_files)
    edges2 = tmp_path / "rt_edges.tsv"
    users2 = tmp_path / "rt_users.jsonl"
    save_graph(g, edges2, users2)
    g2 = load_graph(edges2, users2)
    assert g2.ids == g.ids
    assert g2.records == g.records
    first = {(s, d, w) for s, d, w in zip(g.edge_src, g.edge_dst, g.edge_weight)}
    second = {(s, d, w) for s, d, w in zip(g2.edge_src, g2.edge_dst, g2.edge_weight)}
    assert first == second


def test_out_adjacency_matches_edge_list(two_node_files):
    g = load_graph(*two_node_files)
    for v in range(g.n_nodes):
        nbrs, _ = g.out_neighbors(v)
        expected = sorted(int(d) for s, d in zip(g.edge_src, g.edge_dst) if s == v)
        assert sorted(int(x) for x in nbrs) == expected


def test_undirected_view_merges_weights(tmp_path):
    users = tmp_path / "users.jsonl"
    edges = tmp_path / "edges.tsv"
    write_users(users, [{"id": "a"}, {"id": "b"}])
    write_edges(edges, ["a\tb\t2.0", "b\ta\t3.0"])
    g = load_graph(edges, users)
    view = g.view("undirected")
    nbrs, weights = view.neighbors(0)
    assert list(nbrs) == [1]
    assert weights[0] == pytest.approx(5.0)


def test_labels_load_and_apply(tmp_path, two_node_files):
    labels_path = tmp_path / "labels.tsv"
    labels_path.write_text("a\t1\nb\t0\n")
    labels = load_labels(labels_path)
    assert labels == {"a": 1, "b": 0}
    g = load_graph(*two_node_files)
    apply_labels(g, labels)
    assert g.records[g.node_index("a")].suspended is True
    assert g.records[g.node_index("b")].suspended is False


def test_labels_bad_value(tmp_path):
    path = tmp_path / "labels.tsv"
    path.write_text("a\t2\n")
    with pytest.raises(ParseError):
        load_labels(path)


def test_record_validation_direct():
    with pytest.raises(ValidationError):
        UserRecord(fraud_tweets=2, total_tweets=1).validate()
    with pytest.raises(ValidationError):
        UserRecord(trust_features=(1.0,) * 7).validate()
    UserRecord(active_days=frozenset({0, 5}), trust_features=(0.0,) * 8).validate()


def test_graph_constructor_rejects_bad_edges():
    recs = [UserRecord(), UserRecord()]
    with pytest.raises(ValidationError):
        SpamGraph(["a", "b"], recs, [(0, 0, 1.0)])
    with pytest.raises(ValidationError):
        SpamGraph(["a", "b"], recs, [(0, 1, -1.0)])
    with pytest.raises(ValidationError):
        SpamGraph(["a", "b"], recs, [(0, 5, 1.0)])
