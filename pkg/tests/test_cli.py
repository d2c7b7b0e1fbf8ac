import json
import subprocess
import sys

import numpy as np
import pytest

from _cli_support import DATA, GOLDEN, WORKED_EXAMPLES, load_matrix, normalise, reverify, run_cli
from gateaux.cli import matrix_from_doc, resolve_tol, InputFailure


@pytest.mark.parametrize("name", sorted(WORKED_EXAMPLES))
def test_golden_reports(name):
    code, report, _ = run_cli(WORKED_EXAMPLES[name])
    golden = json.loads((GOLDEN / f"{name}.json").read_text())
    assert code == golden["exit_code"]
    assert normalise(report) == golden["report"]
    reverify(report)


def test_worked_example_values():
    code, rep, _ = run_cli(WORKED_EXAMPLES["derivative_identity"])
    assert code == 0 and rep["value"] == pytest.approx(1.0)
    code, rep, _ = run_cli(WORKED_EXAMPLES["orthogonal_pair"])
    assert code == 0 and rep["verdict"] == "Orthogonal"
    assert np.allclose(np.abs(np.array(rep["certificate"]["eta"]["re"])), [2**-0.5] * 2, atol=1e-8)
    code, rep, _ = run_cli(WORKED_EXAMPLES["not_orthogonal_pair"])
    assert code == 1 and rep["verdict"] == "NotOrthogonal"
    assert rep["witness"]["lambda"]["re"] == pytest.approx(-0.5, abs=1e-8)
    assert rep["witness"]["achieved_norm"] == pytest.approx(0.5, abs=1e-8)
    code, rep, _ = run_cli(WORKED_EXAMPLES["orthogonal_subspace"])
    assert code == 0
    assert np.allclose(np.array(rep["certificate"]["density"]["re"]), np.eye(2) / 2, atol=1e-8)


def test_missing_file_is_named():
    code, rep, err = run_cli(["derivative", "--A", "eye2.json", "--B", "missing.json"])
    assert code == 2 and rep is None
    assert "missing.json" in err


@pytest.mark.parametrize("argv", [
    ["derivative", "--A", "eye2.json", "--B", "eye3.json"],
    ["derivative", "--A", "bad_shape.json", "--B", "eye2.json"],
    ["orthogonal", "--A", "truncated.json", "--B", "eye2.json"],
    ["orthogonal", "--A", "eye2.json"],
    ["orthogonal", "--A", "eye2.json", "--B", "eye2.json", "--subspace", "traceless"],
    ["orthogonal", "--A", "eye2.json", "--subspace", "no_such_dir"],
    ["povm", "validate", "--povm", "eye2.json"],
    ["frobnicate"],
    ["derivative", "--A", "eye2.json"],
])
def test_input_errors_exit_2(argv):
    code, _, err = run_cli(argv)
    assert code == 2
    assert err.strip()


def test_fd_check_random_pair():
    code, rep, _ = run_cli(["derivative", "--A", "rand5_a.json", "--B", "rand5_b.json", "--fd-check"])
    assert code == 0
    assert rep["fd"]["delta"] <= 1e-5
    assert rep["fd"]["monotonicity_violations"] == 0
    a, b = load_matrix(DATA / "rand5_a.json"), load_matrix(DATA / "rand5_b.json")
    t = 1e-7
    plain = (np.linalg.norm(a + t * b, 2) - np.linalg.norm(a, 2)) / t
    assert abs(rep["value"] - plain) <= 1e-5
    reverify(rep)


def test_phase_rotates_direction():
    code, rep, _ = run_cli(["derivative", "--A", "rand5_a.json", "--B", "rand5_a.json", "--phase", str(np.pi)])
    assert code == 0
    assert rep["value"] == pytest.approx(-np.linalg.norm(load_matrix(DATA / "rand5_a.json"), 2), rel=1e-10)
    reverify(rep)


def test_verification_failure_exit_3():
    code, rep, err = run_cli(["derivative", "--A", "rand5_a.json", "--B", "rand5_b.json", "--tol", "1e-30"])
    assert code == 3
    assert rep["tolerances"]["certificate"] == 1e-30
    assert "re-verification" in err


def test_tolerance_precedence(monkeypatch):
    monkeypatch.setenv("GATEAUX_TOL", "1e-4")
    assert resolve_tol(None, 1e-8) == 1e-4
    assert resolve_tol(1e-6, 1e-8) == 1e-6
    code, rep, _ = run_cli(WORKED_EXAMPLES["orthogonal_pair"])
    assert rep["tolerances"]["certificate"] == 1e-4
    code, rep, _ = run_cli(WORKED_EXAMPLES["orthogonal_pair"] + ["--tol", "1e-9"])
    assert rep["tolerances"]["certificate"] == 1e-9
    monkeypatch.setenv("GATEAUX_TOL", "loose")
    code, _, _ = run_cli(WORKED_EXAMPLES["orthogonal_pair"])
    assert code == 2
    monkeypatch.delenv("GATEAUX_TOL")
    assert resolve_tol(None, 1e-8) == 1e-8


def test_indeterminate_exit_4(monkeypatch):
    import gateaux.cli as cli
    from gateaux.orthogonality import OrthogonalityDecision, Verdict

    monkeypatch.setattr(cli, "bj_pair", lambda a, b, seed=1: OrthogonalityDecision(
        verdict=Verdict.INDETERMINATE, norm=1.0, residuals={"gap": 1e-10}))
    code, rep, err = run_cli(WORKED_EXAMPLES["orthogonal_pair"])
    assert code == 4 and rep["verdict"] == "Indeterminate"
    assert "Indeterminate" in err


def test_seed_is_embedded_and_deterministic():
    argv = ["orthogonal", "--A", "rand5_a.json", "--B", "rand5_b.json", "--seed", "7"]
    c1, r1, _ = run_cli(argv)
    c2, r2, _ = run_cli(argv)
    assert r1["seed"] == 7 and c1 == c2 and r1 == r2
    reverify(r1)


def test_matrix_parser():
    m = matrix_from_doc({"rows": 1, "cols": 2, "re": [[1, 2]], "im": [[0, -1]]})
    assert np.array_equal(m, [[1, 2 - 1j]])
    with pytest.raises(InputFailure):
        matrix_from_doc({"rows": 1, "cols": 1, "re": [[float("nan")]], "im": [[0]]})
    with pytest.raises(InputFailure):
        matrix_from_doc([1, 2])


def test_povm_commands():
    code, rep, _ = run_cli(["povm", "validate", "--povm", "povm2.json"])
    assert code == 0 and rep["valid"] and rep["quantum_probability"]
    code, rep, _ = run_cli(["povm", "integrate", "--povm", "povm2.json", "--f", "f2.json"])
    assert code == 0
    m = np.array(rep["integral"]["re"]) + 1j * np.array(rep["integral"]["im"])
    assert np.allclose(m, np.diag([2, 1j]))


def test_povm_validate_flags_invalid(tmp_path):
    doc = {"labels": ["a", "b"], "dim": 1,
           "effects": {"a": {"re": [[1]], "im": [[0]]}, "b": {"re": [[1]], "im": [[0]]}}}
    (tmp_path / "double.json").write_text(json.dumps(doc))
    code, rep, _ = run_cli(["povm", "validate", "--povm", "double.json"], cwd=tmp_path)
    assert code == 1 and not rep["quantum_probability"]


def test_selftest_vacuous_and_fault():
    code, rep, err = run_cli(["selftest", "--count", "0"])
    assert code == 0 and rep["passed"]
    assert "warning" in err and "vacuous" in err
    code, rep, err = run_cli(["selftest", "--seed", "3", "--count", "2", "--inject-fault", "phase-criterion"])
    assert code == 5
    assert "phase-criterion" in err and "--seed 3" in err
    assert [s["name"] for s in rep["suites"] if not s["passed"]] == ["phase-criterion"]


def test_selftest_seed_1_count_50():
    code, rep, err = run_cli(["selftest", "--seed", "1", "--count", "50"])
    assert code == 0 and rep["passed"]
    assert len(rep["suites"]) == 12
    assert all(s["cases"] > 0 for s in rep["suites"])
    assert "pair-orthogonality" in err


def test_console_entry_point_streams():
    out = subprocess.run([sys.executable, "-m", "gateaux.cli", *WORKED_EXAMPLES["derivative_identity"]],
                         cwd=DATA, capture_output=True, text=True, check=False)
    assert out.returncode == 0
    assert json.loads(out.stdout)["value"] == pytest.approx(1.0)
    assert out.stderr == ""
