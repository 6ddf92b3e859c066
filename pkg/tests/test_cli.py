import csv
import io
import json

import numpy as np
import pytest

from emdensys import io as eio
from emdensys.cli import EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_NONCONVERGENCE, EXIT_OK, main

from conftest import BUBBLE, SUBCRITICAL, bubble_field


def run(tmp_path, command, config, *extra):
    path = tmp_path / f"{command}.json"
    path.write_text(json.dumps(config))
    return main([command, "--config", str(path), *extra])


def params(p):
    return p.as_dict()


def read_csv(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


# classify


def test_classify_critical_example(tmp_path, capsys):
    code = run(tmp_path, "classify", {"params": {"n": 3, "p": 11, "q": 3, "r": 0, "s": 0}},
               "--out", str(tmp_path / "o"))
    assert code == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["regime"] == "Critical"
    assert report["a"] == 4 and report["b"] == 12
    assert (tmp_path / "o" / "classify.csv").is_file()


@pytest.mark.parametrize(
    "p, q",
    [(1, 2), (1.5, 1.5)],
    ids=["ordering_violated", "below_admissibility"],
)
def test_classify_rejects(tmp_path, p, q):
    n = 3 if p == 1 else 4
    assert run(tmp_path, "classify", {"params": {"n": n, "p": p, "q": q, "r": 0, "s": 0}}) == EXIT_INVALID


def test_unknown_key_names_path(tmp_path, capsys):
    cfg = {"params": {"n": 3, "p": 5, "q": 5, "r": 0, "s": 0, "pp": 1}}
    assert run(tmp_path, "classify", cfg) == EXIT_INVALID
    assert "config.params.pp" in capsys.readouterr().err


def test_bad_json_and_missing_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["classify", "--config", str(bad)]) == EXIT_INVALID
    assert main(["classify", "--config", str(tmp_path / "none.json")]) == EXIT_INVALID
    assert main(["frobnicate"]) == EXIT_INVALID


# solve


def test_solve_bubble(tmp_path, capsys):
    out = tmp_path / "bubble"
    cfg = {"params": params(BUBBLE), "solver": {"extend_to": None}}
    assert run(tmp_path, "solve", cfg, "--out", str(out)) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert abs(summary["beta_star"] - 1.0) <= 1e-8
    assert {"u.csv", "v.csv", "diagnostics.json"} <= {p.name for p in out.iterdir()}
    assert "class_history" in json.loads((out / "diagnostics.json").read_text())


def test_solve_bracket_without_widening_fails(tmp_path):
    cfg = {"params": params(BUBBLE),
           "solver": {"beta_bracket": [5, 6], "max_widenings": 0, "extend_to": None}}
    assert run(tmp_path, "solve", cfg) == EXIT_NONCONVERGENCE


def test_solve_bracket_recovers_after_widening(tmp_path, capsys):
    cfg = {"params": params(BUBBLE), "solver": {"beta_bracket": [5, 6], "extend_to": None}}
    assert run(tmp_path, "solve", cfg) == EXIT_OK
    assert abs(json.loads(capsys.readouterr().out)["beta_star"] - 1.0) <= 1e-8


def test_solve_both_methods_agree(tmp_path, capsys):
    cfg = {"params": params(BUBBLE), "solver": {"method": "both", "extend_to": None}}
    assert run(tmp_path, "solve", cfg) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["method"] == "Picard"


# verify

TH4_CASES = [
    {"n": 5, "q": 1.2, "s": 0.3},
    {"n": 3, "q": 2.5, "s": 0},
    {"n": 4, "q": 1.5, "s": 0.25},
]


def test_verify_th4_cases(tmp_path):
    out = tmp_path / "v"
    assert run(tmp_path, "verify", {"th4_cases": TH4_CASES}, "--out", str(out)) == EXIT_OK
    rows = read_csv(out / "checks.csv")
    assert [r["check_name"] for r in rows] == [f"th4_integral[{i}]" for i in range(3)]
    assert [float(r["predicted"]) for r in rows] == pytest.approx([0.6125, 4.0, 1.125], rel=1e-12)
    assert all(float(r["rel_error"]) <= 1e-6 for r in rows)
    assert json.loads((out / "checks.json").read_text())["all_pass"] is True


@pytest.fixture(scope="module")
def subcritical_dir(tmp_path_factory, subcritical_extended):
    path = tmp_path_factory.mktemp("subcritical")
    eio.save_state(path, subcritical_extended)
    return path


def test_verify_subcritical_suite_passes(tmp_path, subcritical_dir):
    out = tmp_path / "checks"
    assert run(tmp_path, "verify", {"state": str(subcritical_dir)}, "--out", str(out)) == EXIT_OK
    names = {r["check_name"] for r in read_csv(out / "checks.csv")}
    assert {"theorem4", "comparison", "decay_u", "decay_v", "green_residual"} <= names


def test_verify_corrupted_state_fails(tmp_path, subcritical_dir):
    bad = tmp_path / "bad"
    bad.mkdir()
    for name in ("u.csv", "diagnostics.json"):
        (bad / name).write_text((subcritical_dir / name).read_text())
    v = eio.read_field(subcritical_dir / "v.csv")
    eio.write_field(bad / "v.csv", type(v)(v.grid, 2.0 * v.values, 2.0 * v.value_at_zero,
                                            v.tail, v.origin_power, v.nonnegative))
    out = tmp_path / "checks"
    cfg = {"state": str(bad), "checks": ["theorem4"]}
    assert run(tmp_path, "verify", cfg, "--out", str(out)) == EXIT_CHECK_FAILED
    (row,) = read_csv(out / "checks.csv")
    assert row["pass"] == "false"


def test_verify_missing_state(tmp_path):
    assert run(tmp_path, "verify", {"state": str(tmp_path / "absent")}) == EXIT_INVALID


def test_verify_unknown_check(tmp_path):
    assert run(tmp_path, "verify", {"th4_cases": TH4_CASES, "checks": ["nope"]}) == EXIT_INVALID


# sweep


def test_sweep_regime_column(tmp_path):
    cfg = {"sweep": {"n": 3, "p": 6, "q": [2.0, 2.5, 3.0, 3.5], "r": 0, "s": 0}}
    out = tmp_path / "s"
    assert run(tmp_path, "sweep", cfg, "--out", str(out)) == EXIT_OK
    rows = read_csv(out / "sweep.csv")
    assert [r["regime"] for r in rows] == ["Subcritical", "Subcritical", "Critical", "Supercritical"]


def test_sweep_critical_hyperbola(tmp_path):
    cfg = {"sweep": {"n": 3, "p": "critical_hyperbola", "q": [2.5, 3, 4, 5]}}
    out = tmp_path / "s"
    assert run(tmp_path, "sweep", cfg, "--out", str(out), "--format", "csv") == EXIT_OK
    rows = read_csv(out / "sweep.csv")
    assert len(rows) == 4
    for row in rows:
        p, q = float(row["p"]), float(row["q"])
        assert abs(p * q - (2 * p + 2 * q + 5)) <= 1e-10
        assert row["critical_condition"] == "true"


def test_sweep_random_residuals(tmp_path):
    out = tmp_path / "s"
    cfg = {"sweep": {"random": {"count": 1000, "seed": 7}}}
    assert run(tmp_path, "sweep", cfg, "--out", str(out), "--format", "csv") == EXIT_OK
    rows = read_csv(out / "sweep.csv")
    assert len(rows) == 1000
    res = np.array([[float(r["eq3_residual_u"]), float(r["eq3_residual_v"])] for r in rows])
    assert res.max() <= 1e-12


def test_sweep_is_deterministic_across_jobs(tmp_path):
    cfg = {"sweep": {"random": {"count": 200, "seed": 3}}}
    assert run(tmp_path, "sweep", cfg, "--out", str(tmp_path / "a"), "--format", "csv") == EXIT_OK
    assert run(tmp_path, "sweep", cfg, "--out", str(tmp_path / "b"), "--format", "csv",
               "--jobs", "2") == EXIT_OK
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()


def test_sweep_marks_invalid_tuples(tmp_path):
    cfg = {"sweep": {"n": 3, "p": 1, "q": 2, "r": 0, "s": 0}}
    out = tmp_path / "s"
    assert run(tmp_path, "sweep", cfg, "--out", str(out)) == EXIT_OK
    (row,) = read_csv(out / "sweep.csv")
    assert row["valid"] == "false" and row["regime"] == ""


def test_sweep_empty_range(tmp_path):
    cfg = {"sweep": {"n": 3, "p": 6, "q": [], "r": 0, "s": 0}}
    assert run(tmp_path, "sweep", cfg) == EXIT_INVALID


# potential


def test_potential_of_bubble_power(tmp_path):
    field = tmp_path / "f.csv"
    eio.write_field(field, bubble_field(power=5.0))
    out = tmp_path / "w"
    assert run(tmp_path, "potential", {"field": str(field)}, "--out", str(out)) == EXIT_OK
    w = eio.read_field(out / "potential.csv")
    mask = w.rho <= 1e3
    expected = (1 + w.rho[mask] ** 2 / 3) ** -0.5
    assert np.max(np.abs(w.values[mask] / expected - 1)) <= 1e-8


def test_potential_rejects_non_integrable(tmp_path):
    field = tmp_path / "f.csv"
    eio.write_field(field, bubble_field())
    assert run(tmp_path, "potential", {"field": str(field)}) == EXIT_INVALID
