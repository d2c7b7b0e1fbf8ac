"""Command-line front end.

Commands: ``derivative``, ``orthogonal``, ``povm validate``, ``povm integrate``
and ``selftest``.  Matrices are read from JSON files
``{"rows": r, "cols": c, "re": [[...]], "im": [[...]]}``; every report is a
single JSON document on standard output and diagnostics go to standard error.

Exit codes: 0 success / Orthogonal, 1 NotOrthogonal (or an invalid POVM),
2 parse or shape error, 3 verification failure, 4 Indeterminate, 5 self-test
suite failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .derivative import gd_fd_oracle, gd_opnorm
from .errors import GateauxError, InvalidInputError, VerificationError
from .linalg import op_norm
from .orthogonality import Verdict, bj_pair, bj_subspace
from .povm import FinitePovm, integrate_scalar, povm_from_json, validate_povm

EXIT_OK = 0
EXIT_NOT_ORTHOGONAL = 1
EXIT_INPUT = 2
EXIT_VERIFY = 3
EXIT_INDETERMINATE = 4
EXIT_SUITE = 5

DEFAULT_TOL = {"derivative": 1e-8, "pair": 1e-8, "subspace": 1e-6}
FD_AGREEMENT = 1e-5


class InputFailure(Exception):
    """Unreadable or malformed input; maps to exit code 2."""


# ---------------------------------------------------------------------------
# I/O helpers
# ---------------------------------------------------------------------------


def _read_json(path: str):
    p = Path(path)
    if not p.is_file():
        raise InputFailure(f"{path}: no such file")
    raw = p.read_bytes()
    try:
        return json.loads(raw), hashlib.sha256(raw).hexdigest()
    except json.JSONDecodeError as exc:
        raise InputFailure(f"{path}: invalid JSON ({exc})") from None


def matrix_from_doc(doc, where: str = "matrix") -> np.ndarray:
    """Parse a MatrixFile document, checking declared dimensions and finiteness."""
    if not isinstance(doc, dict):
        raise InputFailure(f"{where}: expected a JSON object")
    try:
        rows, cols = int(doc["rows"]), int(doc["cols"])
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc.get("im", np.zeros((rows, cols))), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputFailure(f"{where}: malformed matrix file ({exc})") from None
    if re.shape != (rows, cols) or im.shape != (rows, cols):
        raise InputFailure(f"{where}: declared {rows}x{cols} but re has shape {re.shape} and im {im.shape}")
    m = re + 1j * im
    if not np.all(np.isfinite(m)):
        raise InputFailure(f"{where}: entries must be finite")
    return m


def matrix_to_doc(m: np.ndarray) -> dict:
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    return {"rows": m.shape[0], "cols": m.shape[1], "re": m.real.tolist(), "im": m.imag.tolist()}


def vector_to_doc(x: np.ndarray) -> dict:
    x = np.asarray(x, dtype=complex).reshape(-1)
    return {"re": x.real.tolist(), "im": x.imag.tolist()}


def complex_to_doc(z: complex) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def load_matrix(path: str):
    doc, digest = _read_json(path)
    return matrix_from_doc(doc, path), {"path": path, "sha256": digest}


def resolve_tol(flag: Optional[float], default: float) -> float:
    """``--tol`` wins over ``GATEAUX_TOL``, which wins over the command default."""
    if flag is not None:
        return float(flag)
    env = os.environ.get("GATEAUX_TOL")
    if env:
        try:
            return float(env)
        except ValueError:
            raise InputFailure(f"GATEAUX_TOL={env!r} is not a number") from None
    return default


def emit(report: dict) -> None:
    json.dump(report, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def diag(message: str) -> None:
    print(message, file=sys.stderr)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def run_derivative(args) -> int:
    a, a_info = load_matrix(args.A)
    b, b_info = load_matrix(args.B)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise InputFailure(f"A and B must be square of equal size, got {a.shape} and {b.shape}")
    tol = resolve_tol(args.tol, DEFAULT_TOL["derivative"])
    direction = b if args.phase is None else np.exp(1j * args.phase) * b
    r = gd_opnorm(a, direction)
    eta = r.certificate
    norm_a = op_norm(a)
    report = {
        "command": "derivative",
        "inputs": {"A": a_info, "B": b_info},
        "phase": args.phase,
        "value": r.value,
        "certificate": {"eta": vector_to_doc(eta)},
        "tolerances": {"certificate": tol, "fd_agreement": FD_AGREEMENT},
        "seed": args.seed,
    }
    if norm_a > 0:
        residuals = {
            "norm_attainment": float(abs(np.linalg.norm(a @ eta) - norm_a)),
            "value_identity": float(abs(np.vdot(a @ eta, direction @ eta).real / norm_a - r.value)),
        }
        scale = max(1.0, norm_a)
    else:
        residuals = {"value_identity": float(abs(np.linalg.norm(direction @ eta) - r.value))}
        scale = 1.0
    report["residuals"] = residuals
    code = EXIT_OK
    if any(v > tol * scale for v in residuals.values()):
        diag(f"error: certificate failed re-verification {residuals}")
        code = EXIT_VERIFY
    if args.fd_check:
        fd, trace = gd_fd_oracle(a, direction, tol=1e-7)
        delta = abs(fd - r.value)
        bound = FD_AGREEMENT * max(1.0, op_norm(direction))
        report["fd"] = {"value": fd, "delta": delta, "bound": bound, "steps": len(trace.steps),
                        "monotonicity_violations": trace.violations()}
        if delta > bound:
            diag(f"error: finite-difference mismatch |delta|={delta:.3e} > {bound:.3e}")
            code = EXIT_VERIFY
    emit(report)
    return code


def _load_subspace(directory: str):
    d = Path(directory)
    if not d.is_dir():
        raise InputFailure(f"{directory}: not a directory")
    files = sorted(d.glob("*.json"))
    if not files:
        raise InputFailure(f"{directory}: contains no *.json matrix files")
    mats, infos = [], []
    for f in files:
        m, info = load_matrix(str(f))
        mats.append(m)
        infos.append(info)
    return mats, infos


def run_orthogonal(args) -> int:
    a, a_info = load_matrix(args.A)
    if a.shape[0] != a.shape[1]:
        raise InputFailure(f"A must be square, got {a.shape}")
    if (args.B is None) == (args.subspace is None):
        raise InputFailure("give exactly one of --B or --subspace")
    report = {"command": "orthogonal", "seed": args.seed}
    if args.B is not None:
        b, b_info = load_matrix(args.B)
        if b.shape != a.shape:
            raise InputFailure(f"B has shape {b.shape}, A has {a.shape}")
        tol = resolve_tol(args.tol, DEFAULT_TOL["pair"])
        report.update(mode="pair", inputs={"A": a_info, "B": b_info})
        decision = bj_pair(a, b, seed=args.seed)
        bs = [b]
    else:
        bs, infos = _load_subspace(args.subspace)
        if any(m.shape != a.shape for m in bs):
            raise InputFailure("every subspace matrix must have the shape of A")
        tol = resolve_tol(args.tol, DEFAULT_TOL["subspace"])
        report.update(mode="subspace", inputs={"A": a_info, "subspace": infos})
        decision = bj_subspace(a, bs, seed=args.seed)
    report["tolerances"] = {"certificate": tol, "decrease_margin": 1e-9}
    report["verdict"] = decision.verdict.value
    report["norm"] = decision.norm
    norm_a = op_norm(a)
    code = EXIT_OK
    if decision.verdict is Verdict.ORTHOGONAL:
        if args.B is not None:
            eta = decision.certificate
            residuals = {
                "inner": float(abs(np.vdot(a @ eta, bs[0] @ eta))),
                "norm_attainment": float(abs(np.linalg.norm(a @ eta) - norm_a)),
            }
            report["certificate"] = {"eta": vector_to_doc(eta)}
            ok = residuals["inner"] <= tol * max(1.0, norm_a * op_norm(bs[0])) and \
                residuals["norm_attainment"] <= tol * max(1.0, norm_a)
        else:
            rho = decision.certificate.matrix
            attain = float(abs(np.trace(rho @ a.conj().T @ a).real - norm_a**2))
            cons = [float(abs(np.trace(rho @ a.conj().T @ b))) for b in bs]
            residuals = {"attain": attain, "constraints": cons}
            report["certificate"] = {"density": matrix_to_doc(rho)}
            ok = attain <= tol * max(norm_a**2, 1e-300) and all(
                c <= tol * norm_a * op_norm(b) for c, b in zip(cons, bs))
        report["residuals"] = residuals
        if not ok:
            diag(f"error: certificate failed re-verification {residuals}")
            code = EXIT_VERIFY
    elif decision.verdict is Verdict.NOT_ORTHOGONAL:
        w = decision.witness
        achieved = float(op_norm(a - w))
        if args.B is not None:
            report["witness"] = {"lambda": complex_to_doc(decision.coefficients[0]), "achieved_norm": achieved}
        else:
            report["witness"] = {"coefficients": vector_to_doc(decision.coefficients), "w": matrix_to_doc(w),
                                 "achieved_norm": achieved}
        report["residuals"] = {"decrease": norm_a - achieved}
        code = EXIT_NOT_ORTHOGONAL
        if norm_a - achieved < 1e-9:
            diag("error: witness failed re-verification")
            code = EXIT_VERIFY
    else:
        report["residuals"] = {k: v for k, v in decision.residuals.items()}
        diag("note: evidence insufficient for either verdict (Indeterminate)")
        code = EXIT_INDETERMINATE
    emit(report)
    return code


def _load_povm(path: str) -> tuple:
    doc, digest = _read_json(path)
    try:
        nu = povm_from_json(doc)
    except InvalidInputError as exc:
        raise InputFailure(f"{path}: {exc}") from None
    return nu, {"path": path, "sha256": digest}


def run_povm_validate(args) -> int:
    nu, info = _load_povm(args.povm)
    rep = validate_povm(nu)
    emit({
        "command": "povm validate",
        "inputs": {"povm": info},
        "valid": rep.valid,
        "quantum_probability": rep.quantum_probability,
        "violations": rep.violations,
        "total_spectrum": [float(x) for x in rep.total_spectrum],
    })
    return EXIT_OK if rep.valid else EXIT_NOT_ORTHOGONAL


def _scalar_function(doc, nu: FinitePovm, where: str) -> dict:
    values = doc.get("values") if isinstance(doc, dict) else None
    if not isinstance(values, dict):
        raise InputFailure(f"{where}: expected {{\"values\": {{label: number or {{re, im}}}}}}")
    out = {}
    for x in nu.labels:
        key = str(x)
        if key not in values:
            raise InputFailure(f"{where}: f is undefined at label {x!r}")
        v = values[key]
        try:
            out[x] = complex(v["re"], v.get("im", 0.0)) if isinstance(v, dict) else complex(v)
        except (KeyError, TypeError, ValueError):
            raise InputFailure(f"{where}: bad value for label {x!r}") from None
    return out


def run_povm_integrate(args) -> int:
    nu, info = _load_povm(args.povm)
    doc, digest = _read_json(args.f)
    f = _scalar_function(doc, nu, args.f)
    m = integrate_scalar(f, nu)
    emit({
        "command": "povm integrate",
        "inputs": {"povm": info, "f": {"path": args.f, "sha256": digest}},
        "integral": matrix_to_doc(m),
    })
    return EXIT_OK


def run_selftest(args) -> int:
    from .suites import SUITE_NAMES, run_suites

    if args.inject_fault is not None and args.inject_fault not in SUITE_NAMES:
        raise InputFailure(f"--inject-fault: unknown suite {args.inject_fault!r}")
    if args.count is not None and args.count < 0:
        raise InputFailure("--count must be nonnegative")
    if args.count == 0:
        diag("warning: --count 0 runs no instances; the self-test passes vacuously")
    results = run_suites(seed=args.seed, count=args.count, fault=args.inject_fault)
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "ok" if r.passed else "FAIL"
        worst = ", ".join(f"{k}={v:.3e}" for k, v in sorted(r.worst.items()))
        diag(f"{status:4} {r.name:26} cases={r.cases:4d} failures={len(r.failures):3d} {worst}")
    emit({
        "command": "selftest",
        "seed": args.seed,
        "count": args.count,
        "passed": not failed,
        "suites": [
            {"name": r.name, "cases": r.cases, "failures": len(r.failures), "passed": r.passed,
             "worst": r.worst, "notes": r.notes, "first_failures": [m for _, m in r.failures[:3]],
             "seconds": round(r.seconds, 3)}
            for r in results
        ],
    })
    if failed:
        count = "" if args.count is None else f" --count {args.count}"
        if args.inject_fault is not None:
            count += f" --inject-fault {args.inject_fault}"
        for r in failed:
            diag(f"suite {r.name} failed ({len(r.failures)} cases); reproduce with: "
                 f"gateaux selftest --seed {args.seed}{count}")
        return EXIT_SUITE
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gateaux", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("derivative", help="Gateaux derivative of the operator norm at A in direction B")
    d.add_argument("--A", required=True, help="MatrixFile for the base point")
    d.add_argument("--B", required=True, help="MatrixFile for the direction")
    d.add_argument("--phase", type=float, default=None, help="rotate the direction by e^{i phase}")
    d.add_argument("--fd-check", action="store_true", help="also run the finite-difference oracle")
    d.add_argument("--tol", type=float, default=None, help="certificate re-verification tolerance")
    d.add_argument("--seed", type=int, default=1)
    d.set_defaults(func=run_derivative)

    o = sub.add_parser("orthogonal", help="Birkhoff-James orthogonality of A to B or to a subspace")
    o.add_argument("--A", required=True)
    o.add_argument("--B", default=None)
    o.add_argument("--subspace", default=None, help="directory of MatrixFiles spanning the subspace")
    o.add_argument("--tol", type=float, default=None)
    o.add_argument("--seed", type=int, default=1)
    o.set_defaults(func=run_orthogonal)

    pv = sub.add_parser("povm", help="finite POVM utilities")
    psub = pv.add_subparsers(dest="povm_command", required=True)
    v = psub.add_parser("validate", help="check effects and normalisation")
    v.add_argument("--povm", required=True)
    v.set_defaults(func=run_povm_validate)
    i = psub.add_parser("integrate", help="integrate a scalar function against a POVM")
    i.add_argument("--povm", required=True)
    i.add_argument("--f", required=True, help='JSON {"values": {label: number or {"re","im"}}}')
    i.set_defaults(func=run_povm_integrate)

    s = sub.add_parser("selftest", help="run the seeded property suites")
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--count", type=int, default=None, help="instances per suite (default: suite defaults)")
    s.add_argument("--inject-fault", nargs="?", const="derivative-oracle", default=None,
                   help="sabotage the named suite (test hook)")
    s.set_defaults(func=run_selftest)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputFailure as exc:
        diag(f"error: {exc}")
        return EXIT_INPUT
    except InvalidInputError as exc:
        diag(f"error: {exc}")
        return EXIT_INPUT
    except VerificationError as exc:
        diag(f"error: verification failed: {exc}")
        return EXIT_VERIFY
    except GateauxError as exc:
        diag(f"error: {exc}")
        return EXIT_VERIFY


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
