import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netshift.cli import main, parse_dim, resolve_threads
from netshift.graph import Graph
from netshift.io import (
    InputError,
    dumps,
    read_csv_matrix,
    read_edge_list,
    read_graph,
    read_json,
    write_csv,
    write_edge_list,
    write_graph,
    write_json,
)


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 15))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    return Graph.from_edges(n, chosen)


@settings(max_examples=40, deadline=None)
@given(g=graphs(), ext=st.sampled_from([".mtx", ".tsv"]))
def test_graph_round_trip(tmp_path_factory, g, ext):
    path = tmp_path_factory.mktemp("rt") / f"g{ext}"
    write_graph(g, path)
    back = read_graph(path, n=g.n)
    assert np.array_equal(back.adj, g.adj)


def test_edge_list_parsing(tmp_path):
    p = tmp_path / "e.tsv"
    p.write_text("# comment\n0\t1\n1\t0\n2\t3  # trailing\n\n")
    g = read_edge_list(p)
    assert g.n == 4 and g.n_edges == 2
    assert read_edge_list(p, n=10).n == 10
    for body, msg in [("0\t1\t2\n", "two columns"), ("a\tb\n", "non-integer"), ("1\t1\n", "self-loop"), ("-1\t2\n", "negative")]:
        p.write_text(body)
        with pytest.raises(InputError, match=msg):
            read_edge_list(p)
    p.write_text("0\t5\n")
    with pytest.raises(InputError, match="out of range"):
        read_edge_list(p, n=3)
    with pytest.raises(InputError):
        read_edge_list(tmp_path / "missing.tsv")


def test_matrix_market_errors(tmp_path):
    p = tmp_path / "bad.mtx"
    p.write_text("not a matrix\n")
    with pytest.raises(InputError):
        read_graph(p)
    p.write_text("%%MatrixMarket matrix coordinate pattern general\n2 3 1\n1 2\n")
    with pytest.raises(InputError, match="square"):
        read_graph(p)


def test_json_and_csv_round_trip(tmp_path):
    obj = {"b": np.array([1.0, np.nan]), "a": [np.int64(3), True], "c": {"x": np.float32(0.5)}}
    write_json(tmp_path / "o.json", obj)
    assert read_json(tmp_path / "o.json") == {"a": [3, True], "b": [1.0, None], "c": {"x": 0.5}}
    assert dumps(obj) == dumps(dict(reversed(list(obj.items()))))
    M = np.array([[1.0, 2.5e-17], [np.nan, -3.0]])
    write_csv(tmp_path / "m.csv", ["a", "b"], M.tolist())
    back = read_csv_matrix(tmp_path / "m.csv")
    assert np.array_equal(np.isnan(back), np.isnan(M)) and np.array_equal(back[~np.isnan(M)], M[~np.isnan(M)])


def test_parse_dim():
    assert parse_dim("3") == 3 and parse_dim("2,1") == (2, 1) and parse_dim("3,0") == 3
    for bad in ("0", "x", "1,2,3", "-1,2"):
        with pytest.raises(Exception):
            parse_dim(bad)


def test_thread_resolution(monkeypatch):
    monkeypatch.setenv("NETSHIFT_THREADS", "3")
    assert resolve_threads(None) == 3
    assert resolve_threads(2) == 2
    monkeypatch.setenv("NETSHIFT_THREADS", "many")
    with pytest.raises(InputError):
        resolve_threads(None)
    monkeypatch.delenv("NETSHIFT_THREADS")
    assert resolve_threads(None) >= 1


@pytest.fixture(scope="module")
def simulated(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    assert main(["simulate", "--model", "sbm", "--n", "200", "--shift-frac", "0.5", "--rng-seed", "7", "--out", str(out)]) == 0
    return out


def test_simulate_outputs(simulated):
    truth = read_json(simulated / "truth.json")
    assert truth["schema"] == 1 and truth["model"] == "sbm"
    assert len(truth["unshifted"]) == 100
    assert truth["manifest"]["command"] == "simulate" and truth["manifest"]["rng_seed"] == 7
    assert read_graph(simulated / "g1.mtx").n == 200


def test_simulate_variants(tmp_path):
    assert main(["simulate", "--model", "sbm", "--n", "60", "--shift-frac", "0", "--out", str(tmp_path / "a")]) == 0
    assert not np.any(read_json(tmp_path / "a" / "truth.json")["Y_true"])
    assert main(["simulate", "--model", "grdpg", "--n", "60", "--out", str(tmp_path / "b")]) == 0
    assert read_json(tmp_path / "b" / "truth.json")["signature1"] == [2, 1]
    assert main(["simulate", "--model", "rankmix", "--n", "60", "--format", "tsv", "--out", str(tmp_path / "c")]) == 0
    t = read_json(tmp_path / "c" / "truth.json")
    assert t["signature1"] == [2, 0] and t["signature2"] == [3, 0]
    assert (tmp_path / "c" / "g1.tsv").exists()
    assert main(["simulate", "--model", "rdpg", "--n", "60", "--d", "2", "--out", str(tmp_path / "d")]) == 0
    assert main(["simulate", "--model", "sbm", "--shift-frac", "2", "--out", str(tmp_path / "e")]) == 2
    assert main(["simulate", "--model", "nope", "--out", str(tmp_path / "f")]) == 2
    assert not (tmp_path / "e").exists()


def test_compare_self_with_seeds(simulated, tmp_path):
    g = str(simulated / "g1.mtx")
    rc = main(["compare", "--a1", g, "--a2", g, "--dim", "3", "--seeds", "0,1,2", "--alpha", "0.05", "--out", str(tmp_path), "--shifts-csv"])
    assert rc == 0
    rep = read_json(tmp_path / "report.json")
    assert rep["schema"] == 1 and len(rep["unshifted"]) == 200
    assert rep["seeds"] == [0, 1, 2] and "trace" not in rep
    rows = read_csv_matrix(tmp_path / "shifts.csv")
    assert rows.shape == (200, 7) and not rows[:, 3].any()


def test_compare_seedfree_accuracy_and_determinism(simulated, tmp_path):
    args = ["compare", "--a1", str(simulated / "g1.mtx"), "--a2", str(simulated / "g2.mtx"), "--dim", "3",
            "--candidates", "1000", "--seed-size", "3", "--alpha", "0.05", "--filter-alpha", "0.3", "--rng-seed", "42"]
    assert main(args + ["--out", str(tmp_path / "a"), "--threads", "1"]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--threads", "2"]) == 0
    a = (tmp_path / "a" / "report.json").read_bytes()
    assert a == (tmp_path / "b" / "report.json").read_bytes()
    rep = json.loads(a)
    truth = read_json(simulated / "truth.json")
    est = np.zeros(200, bool)
    est[rep["unshifted"]] = True
    tru = np.zeros(200, bool)
    tru[truth["unshifted"]] = True
    assert np.mean(est == tru) >= 0.9
    assert rep["trace"]["candidates"] == 1000
    assert set(rep["manifest"]["inputs"]) == {str(simulated / "g1.mtx"), str(simulated / "g2.mtx")}


def test_compare_bad_inputs(simulated, tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("0\tx\n")
    out = tmp_path / "out"
    g = str(simulated / "g1.mtx")
    assert main(["compare", "--a1", str(bad), "--a2", g, "--out", str(out)]) == 2
    assert main(["compare", "--a1", g, "--a2", str(tmp_path / "missing.mtx"), "--out", str(out)]) == 2
    assert main(["compare", "--a1", g, "--a2", g, "--seeds", "0,1,999", "--out", str(out)]) == 2
    assert main(["compare", "--a1", g, "--a2", g, "--seeds", "0,1", "--out", str(out)]) == 2
    assert main(["compare", "--a1", g, "--a2", g, "--alpha", "1.5", "--out", str(out)]) == 2
    small = tmp_path / "small.tsv"
    small.write_text("0\t1\n")
    assert main(["compare", "--a1", g, "--a2", str(small), "--out", str(out)]) == 2
    assert not out.exists()


def test_embed_command(simulated, tmp_path):
    g = str(simulated / "g1.mtx")
    assert main(["embed", "--graph", g, "--dim", "auto", "--out", str(tmp_path / "a")]) == 0
    meta = read_json(tmp_path / "a" / "embedding.json")
    X = read_csv_matrix(tmp_path / "a" / "embedding.csv")
    assert meta["selected_dim"] == 3 and X.shape == (200, 3)
    assert read_csv_matrix(tmp_path / "a" / "eigenvalues.csv").shape == (200, 2)
    assert main(["embed", "--graph", g, "--dim", "2", "--out", str(tmp_path / "b")]) == 0
    assert read_csv_matrix(tmp_path / "b" / "embedding.csv").shape == (200, 2)
    assert main(["embed", "--graph", g, "--dim", "zero", "--out", str(tmp_path / "c")]) == 2
    assert main(["embed", "--graph", g, "--dim", "500", "--out", str(tmp_path / "c")]) == 2


def test_embed_rank_one_input(tmp_path):
    # complete graph: adjacency J - I, leading eigenpair (n - 1, 1/sqrt(n))
    n = 6
    p = tmp_path / "k6.tsv"
    p.write_text("".join(f"{u}\t{v}\n" for u in range(n) for v in range(u + 1, n)))
    assert main(["embed", "--graph", str(p), "--dim", "1", "--out", str(tmp_path)]) == 0
    X = read_csv_matrix(tmp_path / "embedding.csv")
    assert np.allclose(X, np.sqrt((n - 1) / n))


def test_mirror_command(simulated, tmp_path):
    g1, g2 = str(simulated / "g1.mtx"), str(simulated / "g2.mtx")
    assert main(["mirror", g1, g1, "--dim", "3", "--candidates", "100", "--out", str(tmp_path / "a")]) == 0
    m = read_json(tmp_path / "a" / "mirror.json")
    assert m["D"] == [[0.0, 0.0], [0.0, 0.0]] and m["mode"] == "network"
    assert main(["mirror", "--glob", str(simulated / "g*.mtx"), "--vertex", "5", "--candidates", "100",
                 "--out", str(tmp_path / "b")]) == 0
    m = read_json(tmp_path / "b" / "mirror.json")
    assert m["mode"] == "vertex" and m["labels"] == ["g1", "g2"] and len(m["iso"]) == 2
    small = tmp_path / "s.tsv"
    small.write_text("0\t1\n")
    assert main(["mirror", g1, str(small), "--out", str(tmp_path / "c")]) == 2
    assert main(["mirror", g1, "--out", str(tmp_path / "c")]) == 2
    assert main(["mirror", g1, g2, "--vertex", "999", "--out", str(tmp_path / "c")]) == 2
    assert not (tmp_path / "c").exists()


def test_mirror_planted_regimes(tmp_path):
    from drift import epoch_snapshots

    graphs, _ = epoch_snapshots(120, 3, 4, rng_seed=11)
    paths = []
    for t, g in enumerate(graphs + graphs[-1:]):
        p = tmp_path / f"snap{t:02d}.mtx"
        write_graph(g, p)
        paths.append(str(p))
    assert len(paths) == 13
    assert main(["mirror", *paths, "--candidates", "100", "--rng-seed", "1", "--out", str(tmp_path / "m")]) == 0
    iso = np.array(read_json(tmp_path / "m" / "mirror.json")["iso"])
    steps = np.diff(iso)
    top2 = np.sort(steps)[-2:]
    assert sorted(np.argsort(steps)[-2:].tolist()) == [3, 7]
    assert top2.min() > 3 * np.sort(steps)[-3]


def test_internal_error_exit_code(monkeypatch, simulated, tmp_path):
    import netshift.cli as cli

    def boom(*args, **kwargs):
        raise RuntimeError("unexpected")

    monkeypatch.setattr(cli, "embed", boom)
    assert main(["embed", "--graph", str(simulated / "g1.mtx"), "--dim", "3", "--out", str(tmp_path / "x")]) == 1
    assert not (tmp_path / "x").exists()


def test_version_and_help(capsys):
    assert main(["--version"]) == 0
    assert main([]) == 2
