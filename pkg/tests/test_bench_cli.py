import math
import subprocess
import sys

import pytest

from bsf import bench as B
from bsf.cli import main
from bsf.errors import MissingCell
from bsf.instances import InstanceSpec, example_graph, generate, read_instance, write_instance

from conftest import FIXTURES


def _rec(inst, method, t, status="Optimal"):
    return B.RunRecord(inst, method, status, 1.0, 1.0, 0.0, t, 0, 0)


def test_profile_example():
    recs = [_rec("p1", "A", 1), _rec("p2", "A", 4), _rec("p1", "B", 2), _rec("p2", "B", 2)]
    ratios, _ = B.performance_ratios(recs)
    assert [ratios[p]["A"] for p in ("p1", "p2")] == [1, 2]
    assert [ratios[p]["B"] for p in ("p1", "p2")] == [2, 1]
    a, b = B.performance_profile(recs)
    assert a(1) == b(1) == 0.5
    assert a(2) == b(2) == 1.0
    assert a(0.99) == 0.0


def test_profile_single_method_and_failures():
    recs = [_rec("p1", "A", 3), _rec("p2", "A", 5, "TimeLimit"), _rec("p3", "A", 7)]
    (curve,) = B.performance_profile(recs)
    assert curve(1) == pytest.approx(2 / 3)
    recs = [_rec("p1", "A", 1), _rec("p1", "B", 2, "TimeLimit"), _rec("p2", "A", 1), _rec("p2", "B", 2, "Feasible")]
    _, b = B.performance_profile(recs)
    assert b.points == [] and b(1e9) == 0.0


def test_profile_curves_are_monotone():
    recs = [_rec(f"p{i}", m, (i * 7 + j * 3) % 11 + 1) for i in range(12) for j, m in enumerate("ABC")]
    for c in B.performance_profile(recs):
        rhos = [r for _, r in c.points]
        taus = [t for t, _ in c.points]
        assert rhos == sorted(rhos) and taus == sorted(taus)
        assert all(0 <= r <= 1 for r in rhos) and taus[0] >= 1


def test_missing_cell():
    with pytest.raises(MissingCell):
        B.performance_profile([_rec("p1", "A", 1), _rec("p1", "B", 1), _rec("p2", "A", 1)])


def test_csv_round_trip():
    recs = [B.RunRecord("i1", "bp", "Optimal", 4.0, 4.0, 0.0, 12.5, 3, 40),
            B.RunRecord("i2", "flow", "TimeLimit", math.nan, 2.0, math.nan, 60000.0, 99, 0),
            B.RunRecord("i3", "flow-maxmin", "Feasible", 3.0, 5.0, math.nan, 1.0, 1, 0)]
    text = B.format_records(recs)
    assert text.splitlines()[0] == ",".join(B.FIELDS)
    back = B.parse_records(text)
    assert B.format_records(back) == text
    assert back[0] == recs[0]
    assert math.isnan(back[1].value)
    assert back[2].gap == pytest.approx(2 / 3)


def test_record_gap_definition():
    assert B.record_gap("bp", 10, 8) == pytest.approx(0.2)
    assert B.record_gap("flow", 0, 0) == 0
    assert B.record_gap("flow-maxmin", 3, 4) == pytest.approx(1 / 3)


@pytest.mark.parametrize("method", B.METHODS)
def test_run_method_on_example(method):
    rec, forest = B.run_method(example_graph(), 2, method, time_limit=30, name="ex8")
    forest.validate(example_graph(), 2)
    if method == "flow-maxmin":
        assert rec.value == 3 and forest.value_maxmin == 3
    elif method in ("approx", "heur"):
        assert rec.value == forest.value_minmax >= 4
    else:
        assert rec.value == 4 and rec.status == "Optimal" and rec.gap == 0


def test_run_method_rejects_unknown():
    with pytest.raises(ValueError):
        B.run_method(example_graph(), 2, "magic")


# -- command line -------------------------------------------------------------


def test_cli_gen_and_solve(tmp_path, capsys):
    out = tmp_path / "new" / "g.txt"
    assert main(["gen", "--n", "7", "--p", "0.5", "--k", "2", "--seed", "3", "--out", str(out)]) == 0
    g, k = read_instance(out)
    assert (g, k) == generate(InstanceSpec(7, 0.5, 2, seed=3))
    assert main(["gen", "--n", "6", "--p", "0.1", "--k", "2", "--out", str(tmp_path / "bad.txt")]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["solve", "--in", str(tmp_path / "missing.txt")]) == 2
    assert "missing.txt" in capsys.readouterr().err


def test_cli_solve_example_with_bp(tmp_path, capsys):
    csv_path = tmp_path / "runs.csv"
    sol = tmp_path / "sol.txt"
    code = main(["solve", "--in", str(FIXTURES / "example8.txt"), "--method", "bp", "--csv", str(csv_path),
                 "--out", str(sol)])
    assert code == 0
    (rec,) = B.read_records(csv_path)
    assert rec.value == 4 and rec.gap == 0 and rec.status == "Optimal"
    assert sol.read_text().strip()
    main(["solve", "--in", str(FIXTURES / "example8.txt"), "--method", "approx", "--csv", str(csv_path)])
    assert [r.method for r in B.read_records(csv_path)] == ["bp", "approx"]
    main(["solve", "--in", str(FIXTURES / "example8.txt"), "--method", "oracle"])
    assert B.parse_records(capsys.readouterr().out)[0].value == 4


def test_cli_oracle_too_large(tmp_path, capsys):
    path = tmp_path / "big.txt"
    g, k = generate(InstanceSpec(15, 0.5, 2, seed=1))
    write_instance(g, k, path)
    assert main(["solve", "--in", str(path), "--method", "oracle"]) == 2
    assert "TooLarge" in capsys.readouterr().err


def test_cli_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as ex:
        main(["solve", "--method", "bp"])
    assert ex.value.code == 2
    assert "--in" in capsys.readouterr().err


def test_cli_export_model(tmp_path):
    src = str(FIXTURES / "example8.txt")
    for model in ("flow", "flow-maxmin", "cyc", "partition"):
        out = tmp_path / f"{model}.mps"
        assert main(["export-model", "--in", src, "--model", model, "--out", str(out)]) == 0
        assert out.read_text().rstrip().endswith("ENDATA")
    out = tmp_path / "cyc.lp"
    assert main(["export-model", "--in", src, "--model", "cyc", "--out", str(out)]) == 0
    assert "min" in out.read_text().lower()


def test_cli_bench_and_profile(tmp_path, capsys):
    d = tmp_path / "inst"
    d.mkdir()
    for s in range(10):
        g, k = generate(InstanceSpec(6, 0.5, 2, seed=s))
        write_instance(g, k, d / f"i{s:02d}.txt")
    csv_path = tmp_path / "bench.csv"
    methods = "approx,heur,bp"
    assert main(["bench", "--dir", str(d), "--methods", methods, "--time-limit", "20", "--csv", str(csv_path)]) == 0
    recs = B.read_records(csv_path)
    assert len(recs) == 10 * 3
    assert [(r.instance, r.method) for r in recs[:3]] == [("i00", m) for m in methods.split(",")]
    prof = tmp_path / "profile.csv"
    capsys.readouterr()
    assert main(["profile", "--csv", str(csv_path), "--out", str(prof)]) == 0
    assert prof.read_text().startswith("method,tau,rho")
    assert "tau" in capsys.readouterr().out
    assert main(["bench", "--dir", str(d), "--methods", "bp,nope"]) == 2
    assert main(["bench", "--dir", str(tmp_path / "empty-missing")]) == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "g.txt"
    res = subprocess.run([sys.executable, "-m", "bsf", "gen", "--n", "5", "--p", "0.6", "--k", "2", "--out", str(out)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and out.exists()
