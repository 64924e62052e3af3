"""CLI behavior and the exit-code contract."""

import json

import pytest

from trisketch.cli import main
from trisketch.graphio import read_graph

from conftest import K3_SEED, K3_TEXT


@pytest.fixture
def k3_file(tmp_path):
    path = tmp_path / "k3.txt"
    path.write_text(K3_TEXT)
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_gen_planted_writes_header(tmp_path, capsys):
    out = str(tmp_path / "g.txt")
    code, stdout, _ = run_cli(capsys, "gen", "planted", "100", "300", "7", "--out", out)
    assert code == 0
    text = open(out).read()
    assert text.splitlines()[0] == "100 300"
    assert "planted=" in stdout


def test_gen_bipartite_is_triangle_free(tmp_path, capsys):
    from trisketch.oracle import has_triangle

    out = str(tmp_path / "b.txt")
    code, _, _ = run_cli(capsys, "gen", "bipartite", "100", "200", "7", "--out", out)
    assert code == 0
    assert not has_triangle(read_graph(out))


def test_gen_er_accepts_float_degree(tmp_path, capsys):
    out = str(tmp_path / "e.txt")
    code, _, _ = run_cli(capsys, "gen", "er", "50", "3.5", "9", "--out", out)
    assert code == 0
    assert read_graph(out).m == 88  # ceil(50 * 3.5 / 2)


def test_gen_infeasible_exits_2(tmp_path, capsys):
    code, _, err = run_cli(capsys, "gen", "planted", "3", "2", "7", "--out", str(tmp_path / "x"))
    assert code == 2
    assert "error" in err


def test_detect_fixture_yes(k3_file, capsys):
    code, stdout, _ = run_cli(
        capsys, "detect", "--graph", k3_file, "--seed", K3_SEED, "--preset", "reduced"
    )
    assert code == 0
    assert stdout.strip() == "YES 0 2 1"


def test_detect_is_deterministic(k3_file, capsys):
    args = ("detect", "--graph", k3_file, "--seed", K3_SEED, "--preset", "reduced")
    first = run_cli(capsys, *args)
    second = run_cli(capsys, *args)
    assert first == second


def test_detect_triangle_free_no(tmp_path, capsys):
    graph = str(tmp_path / "b.txt")
    run_cli(capsys, "gen", "bipartite", "40", "80", "3", "--out", graph)
    code, stdout, _ = run_cli(capsys, "detect", "--graph", graph, "--seed", "ab", "--preset", "reduced")
    assert code == 0
    assert stdout.strip() == "NO"


def test_detect_instrument_emits_csv(k3_file, capsys):
    code, stdout, _ = run_cli(
        capsys, "detect", "--graph", k3_file, "--seed", K3_SEED, "--preset", "reduced",
        "--instrument",
    )
    assert code == 0
    assert "i,r,classes,materialized,collisions" in stdout


def test_certify_verify_round_trip(tmp_path, capsys):
    graph = str(tmp_path / "b.txt")
    cert = str(tmp_path / "b.cert")
    run_cli(capsys, "gen", "bipartite", "40", "80", "5", "--out", graph)
    code, stdout, _ = run_cli(
        capsys, "certify", "--graph", graph, "--seed", "0123", "--preset", "reduced", "--out", cert
    )
    assert code == 0 and "NO" in stdout
    code, stdout, _ = run_cli(capsys, "verify", "--graph", graph, "--cert", cert)
    assert code == 0
    assert stdout.strip() == "AcceptNo"


def test_verify_yes_certificate(k3_file, tmp_path, capsys):
    cert = str(tmp_path / "k3.cert")
    run_cli(capsys, "certify", "--graph", k3_file, "--seed", K3_SEED, "--preset", "reduced",
            "--out", cert)
    code, stdout, _ = run_cli(capsys, "verify", "--graph", k3_file, "--cert", cert)
    assert code == 0
    assert stdout.startswith("AcceptYes")


def test_verify_mismatched_graph_exits_1(tmp_path, capsys):
    graph_a = str(tmp_path / "a.txt")
    graph_b = str(tmp_path / "b.txt")
    cert = str(tmp_path / "a.cert")
    run_cli(capsys, "gen", "bipartite", "40", "80", "5", "--out", graph_a)
    run_cli(capsys, "gen", "bipartite", "40", "80", "6", "--out", graph_b)
    run_cli(capsys, "certify", "--graph", graph_a, "--seed", "02", "--preset", "reduced", "--out", cert)
    code, stdout, _ = run_cli(capsys, "verify", "--graph", graph_b, "--cert", cert)
    assert code == 1
    assert stdout.startswith("Reject")


def test_verify_tampered_value_exits_1(tmp_path, capsys):
    graph = str(tmp_path / "g.txt")
    cert = str(tmp_path / "g.cert")
    run_cli(capsys, "gen", "bipartite", "40", "80", "7", "--out", graph)
    run_cli(capsys, "certify", "--graph", graph, "--seed", "03", "--preset", "reduced", "--out", cert)
    obj = json.loads(open(cert).read())
    obj["class_logs"][0]["sigma"][0] = "424242"
    open(cert, "w").write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")
    code, stdout, _ = run_cli(capsys, "verify", "--graph", graph, "--cert", cert)
    assert code == 1
    assert stdout.startswith("RejectReplay")


def test_verify_garbage_exits_2(tmp_path, k3_file, capsys):
    cert = str(tmp_path / "junk.cert")
    open(cert, "w").write("{not json")
    code, _, err = run_cli(capsys, "verify", "--graph", k3_file, "--cert", cert)
    assert code == 2
    assert "schema error" in err


def test_audit_passes(tmp_path, capsys):
    graph = str(tmp_path / "g.txt")
    csv_out = str(tmp_path / "audit.csv")
    run_cli(capsys, "gen", "er", "64", "5.0", "11", "--out", graph)
    code, stdout, _ = run_cli(
        capsys, "audit", "--graph", graph, "--seed", "04", "--preset", "reduced", "--out", csv_out
    )
    assert code == 0
    assert "accounting: PASS" in stdout
    assert "keep-concentration: PASS" in stdout
    assert open(csv_out).readline().strip() == "i,r,classes,materialized,collisions"


def test_audit_corrupt_counters_exits_3(tmp_path, capsys):
    graph = str(tmp_path / "g.txt")
    run_cli(capsys, "gen", "er", "64", "5.0", "11", "--out", graph)
    code, stdout, _ = run_cli(
        capsys, "audit", "--graph", graph, "--seed", "04", "--preset", "reduced",
        "--corrupt-counters",
    )
    assert code == 3
    assert "accounting: FAIL" in stdout


def test_bench_row_count(tmp_path, capsys):
    out = str(tmp_path / "bench.csv")
    code, _, _ = run_cli(capsys, "bench", "--n-values", "32,64", "--out", out)
    assert code == 0
    lines = open(out).read().strip().splitlines()
    assert len(lines) == 3  # header + 2 rows


def test_hitrate_csv(tmp_path, capsys):
    out = str(tmp_path / "hits.csv")
    code, _, _ = run_cli(capsys, "hitrate", "--n-values", "16,32", "--trials", "4", "--out", out)
    assert code == 0
    lines = open(out).read().strip().splitlines()
    assert lines[0].startswith("n,trials,single_group_hits")
    assert len(lines) == 3


def test_unknown_param_exits_2(k3_file, capsys):
    code, _, err = run_cli(
        capsys, "detect", "--graph", k3_file, "--seed", "01", "--param", "bogus=1"
    )
    assert code == 2
    assert "schema error" in err


def test_param_override_small_modulus(k3_file, capsys):
    code, stdout, _ = run_cli(
        capsys, "detect", "--graph", k3_file, "--seed", "01", "--preset", "reduced",
        "--param", "p_field=10007",
    )
    assert code == 0
    assert stdout.strip() in ("NO",) or stdout.startswith("YES")


def test_missing_graph_exits_2(capsys):
    code, _, err = run_cli(capsys, "detect", "--graph", "/nonexistent", "--seed", "01")
    assert code == 2
    assert "error" in err
