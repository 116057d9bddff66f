import json

import pytest

from detrelay.cli import main
from detrelay.network import chain, gen_random, parse, point_to_point, save, serialize, validate


@pytest.fixture
def fig1(tmp_path):
    path = tmp_path / "p2p.json"
    save(point_to_point(5, 4), path)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_capacity_prints_value(capsys, fig1):
    code, out, _ = run(capsys, "capacity", fig1)
    assert code == 0 and out.strip() == "4"


def test_capacity_of_edgeless_network(capsys, tmp_path):
    path = tmp_path / "empty.json"
    save(point_to_point(3, 0), path)
    code, out, _ = run(capsys, "capacity", str(path))
    assert code == 0 and out.strip() == "0"


def test_capacity_malformed_file(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"layers": 2,\n  ]')
    code, _, err = run(capsys, "capacity", str(path))
    assert code == 2
    assert "line 2, column" in err


def test_capacity_invalid_network(capsys, tmp_path):
    doc = json.loads(serialize(point_to_point(2, 1)))
    doc["edges"].append({"from": ["S", 9], "to": ["D", 0]})
    path = tmp_path / "dangling.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "capacity", str(path))
    assert code == 2 and "dangling" in err


def test_capacity_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, "capacity", str(tmp_path / "nope.json"))
    assert code == 2


def test_report_json(capsys, fig1, tmp_path):
    report = tmp_path / "report.json"
    paths = tmp_path / "paths.json"
    code, _, _ = run(capsys, "capacity", fig1, "--report-json", str(report), "--paths-out", str(paths))
    assert code == 0
    doc = json.loads(report.read_text())
    assert doc["capacity"] == 4
    assert doc["iterations"] == doc["capacity"] + 1 == len(doc["counters"])
    assert doc["bound_violations"] == []
    for key in ("k1", "k2", "k3", "explorations", "rank_checks"):
        assert key in doc["counters"][0]
    assert json.loads(paths.read_text())["k"] == 4


def test_check_agrees(capsys, fig1):
    code, out, _ = run(capsys, "check", fig1)
    assert code == 0 and "capacity=4" in out


def test_check_edgeless(capsys, tmp_path):
    path = tmp_path / "empty.json"
    save(chain([[[0, 0]], [[0], [0]]]), path)
    code, out, _ = run(capsys, "check", str(path))
    assert code == 0 and "capacity=0" in out


def test_check_oversized(capsys, tmp_path):
    path = tmp_path / "big.json"
    net = gen_random(5, 3, 1, 0.5, 0)
    save(net, path)
    code, _, err = run(capsys, "check", str(path), "--oracle-bound", "1")
    assert code == 2 and "bound" in err


def test_check_fuzz(capsys, tmp_path):
    code, out, _ = run(capsys, "check", "--fuzz", "60", "--jobs", "2", "--dump-dir", str(tmp_path))
    assert code == 0 and "60/60" in out
    assert list(tmp_path.iterdir()) == []


def test_check_needs_input(capsys):
    assert run(capsys, "check")[0] == 2


def test_gen_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "gen", "--layers", "4", "--seed", "7", "-o", str(a))[0] == 0
    assert run(capsys, "gen", "--layers", "4", "--seed", "7", "-o", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert validate(parse(a.read_text())) == []


def test_gen_zero_density(capsys):
    code, out, _ = run(capsys, "gen", "--density", "0", "--seed", "3")
    assert code == 0 and parse(out).edges == ()


@pytest.mark.parametrize("argv", [
    ["gen", "--layers", "1"],
    ["gen", "--density", "2"],
    ["gen", "--max-levels", "0"],
])
def test_gen_bad_flags(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_unknown_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["gen", "--bogus"])
    assert info.value.code == 2


def test_scheme_and_simulate_identity_chain(capsys, tmp_path):
    net_path, scheme_path = tmp_path / "net.json", tmp_path / "scheme.json"
    eye = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    save(chain([eye, eye]), net_path)
    assert run(capsys, "scheme", str(net_path), "-o", str(scheme_path))[0] == 0
    code, out, _ = run(capsys, "simulate", str(scheme_path), "--message", "101")
    assert code == 0
    assert "received 101" in out and "decoded 101 ok" in out


def test_simulate_random(capsys, tmp_path):
    net_path, scheme_path = tmp_path / "net.json", tmp_path / "scheme.json"
    save(gen_random(4, 3, 3, 0.5, 11), net_path)
    assert run(capsys, "scheme", str(net_path), "-o", str(scheme_path))[0] == 0
    code, out, _ = run(capsys, "simulate", str(scheme_path), "--random", "100", "--seed", "1")
    assert code == 0 and "100/100" in out


def test_simulate_length_mismatch(capsys, fig1, tmp_path):
    scheme_path = tmp_path / "scheme.json"
    run(capsys, "scheme", fig1, "-o", str(scheme_path))
    assert run(capsys, "simulate", str(scheme_path), "--message", "101")[0] == 2
    assert run(capsys, "simulate", str(scheme_path), "--message", "10x1")[0] == 2


def test_simulate_rejects_dependent_scheme(capsys, tmp_path):
    net = chain([[[1, 1], [1, 1]]])
    doc = json.loads(serialize(net))
    doc.update(k=2, relay_maps={}, paths=[
        [{"from": ["S", 0], "to": ["D", 0]}], [{"from": ["S", 1], "to": ["D", 1]}]])
    path = tmp_path / "scheme.json"
    path.write_text(json.dumps(doc))
    assert run(capsys, "simulate", str(path), "--random", "3")[0] == 2


def test_bench(capsys):
    code, out, _ = run(capsys, "bench", "--instances", "20", "--layers", "4")
    assert code == 0
    assert "instances 20" in out and "violations 0" in out
