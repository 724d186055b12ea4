import csv
import json

import pytest

from matconvex import acceptance, cli, report
from matconvex.report import (EXIT_DISAGREE, EXIT_INPUT, EXIT_PASS, EXIT_REFUTED, Report,
                              run_classify, run_gap_search)


def run(args, capsys):
    try:
        code = cli.main(args)
    except SystemExit as exc:
        code = exc.code
    return code, capsys.readouterr()


def test_classify_monotone_sqrt(capsys):
    code, out = run(["classify", "x^0.5 on (0.1,9)", "--n", "2", "--kind", "monotone",
                     "--trials", "300"], capsys)
    assert code == EXIT_PASS
    assert "D1=" in out.out and "D2=" in out.out and "min eigenvalue" in out.out


def test_classify_cube_refuted_with_witness(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out = run(["classify", "poly[0,0,0,1] on (0.1,2)", "--n", "2", "--kind", "convex",
                     "--trials", "300", "--json", str(path)], capsys)
    assert code == EXIT_REFUTED
    data = json.loads(path.read_text())
    assert data["schema"] == 1 and data["witnesses"]
    a = data["witnesses"][0]["A"]
    assert len(a) == 2 and all(len(z) == 2 for z in a[0])


def test_classify_square_boundary(capsys):
    code, _ = run(["classify", "x^2 on (-1,1)", "--kind", "convex", "--trials", "200"], capsys)
    assert code == EXIT_PASS


def test_classify_concave_kind(capsys):
    code, _ = run(["classify", "log(1 + x) on (0.1, 4)", "--kind", "concave",
                   "--trials", "200"], capsys)
    assert code == EXIT_PASS


@pytest.mark.parametrize("args", [["classify", "x^^2"], ["classify", "log(x) on (-1,2)"],
                                  ["construct", "--n", "2", "--m", "3", "--interval", "-1,1"],
                                  ["construct", "--n", "2", "--m", "4", "--interval", "-1,1",
                                   "--target", "concave"],
                                  ["gap-search", "--n", "1", "--degree", "1", "--interval", "0,1"]])
def test_input_errors_exit_3(args, capsys):
    code, out = run(args, capsys)
    assert code == EXIT_INPUT and "error" in out.err


def test_power_examples(capsys):
    for p, mono, conv in (("0.5", True, False), ("2", False, True), ("3", False, False)):
        code, rep = report.run_power(float(p))
        assert code == EXIT_PASS
        assert rep.verdicts["is_2monotone"] is mono and rep.verdicts["is_2convex"] is conv
    _, rep = report.run_power(2.0)
    assert all(row["convex_det"] == 0 for row in rep.details["table"])
    _, rep = report.run_power(3.0)
    assert all(row["convex_det"] == -1 for row in rep.details["table"])
    code, out = run(["power", "0.5"], capsys)
    assert code == EXIT_PASS and "is_2monotone" in out.out


def test_scan_line(tmp_path, capsys):
    path = tmp_path / "scan.csv"
    code, _ = run(["scan-line", "exp(x)", "--kind", "convex", "--csv", str(path)], capsys)
    assert code == EXIT_REFUTED
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["radius", "worst_minor", "worst_min_eigenvalue"] and len(rows) >= 2
    assert run(["scan-line", "poly[0,1]", "--kind", "monotone"], capsys)[0] == EXIT_PASS
    assert run(["scan-line", "poly[1,0,1]", "--kind", "convex"], capsys)[0] == EXIT_PASS


def test_construct(capsys):
    code, out = run(["construct", "--n", "2", "--m", "4", "--interval=-1,1",
                     "--target", "convex-monotone"], capsys)
    assert code == EXIT_PASS and "coefficients" in out.out and "129 points" in out.out


def test_gap_search_json_stdout(capsys):
    code, out = run(["gap-search", "--n", "1", "--degree", "3", "--interval", "0.1,2",
                     "--json", "-"], capsys)
    assert code == EXIT_PASS
    data = json.loads(out.out)
    assert data["command"] == "gap-search" and data["verdicts"]["replayed"]


def test_seed_from_environment(monkeypatch, tmp_path, capsys):
    monkeypatch.setenv("MATCONVEX_SEED", "123")
    path = tmp_path / "r.json"
    run(["classify", "x^3 on (0.1, 2)", "--trials", "50", "--json", str(path)], capsys)
    assert json.loads(path.read_text())["seed"] == 123


def test_bad_seed_rejected(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["classify", "x^2", "--seed", "-1"])
    assert info.value.code == EXIT_INPUT


def test_bad_seed_environment(monkeypatch, capsys):
    monkeypatch.setenv("MATCONVEX_SEED", "abc")
    code, out = run(["classify", "x^2"], capsys)
    assert code == EXIT_INPUT and "MATCONVEX_SEED" in out.err


def test_report_json_round_trip_and_determinism():
    _, a = run_classify("exp(x) on (0.1, 4)", 2, "convex", trials=200, seed=5)
    _, b = run_classify("exp(x) on (0.1, 4)", 2, "convex", trials=200, seed=5)
    assert a.to_json(include_wall_time=False) == b.to_json(include_wall_time=False)
    back = Report.from_json(a.to_json())
    assert back.to_json() == a.to_json()
    assert "wall_time" not in json.loads(a.to_json(include_wall_time=False))


def test_gap_report_determinism():
    a = run_gap_search(1, 3, "0.1,2", seed=3)[1].to_json(include_wall_time=False)
    b = run_gap_search(1, 3, "0.1,2", seed=3)[1].to_json(include_wall_time=False)
    assert a == b


def test_disagreement_exit_code(monkeypatch):
    from matconvex.calculus import DefinitionalResult
    from matconvex.criteria import Kind

    def never_refutes(f, n, kind, trials, seed, tol, window=None):
        return DefinitionalResult(f.label, n, Kind.CONVEX, trials, 0, 0.0, None)

    monkeypatch.setattr(report, "definitional_test", never_refutes)
    code, rep = run_classify("x^3 on (0.1, 2)", 2, "convex", trials=10)
    assert code == EXIT_DISAGREE and rep.details["consistent"] is False


def test_selftest_pass_and_json(capsys):
    assert cli.main(["selftest", "--only", "1", "2", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["passed"] and [r["criterion"] for r in data["results"]] == [1, 2]


def test_selftest_broken_tolerance_fails(monkeypatch, capsys):
    monkeypatch.setitem(acceptance.TOLERANCES, "closed_form", -1.0)
    assert cli.main(["selftest", "--only", "2"]) == 1
    assert "[FAIL]" in capsys.readouterr().out
