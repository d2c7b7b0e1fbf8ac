"""Property suites with independent oracles.

Each suite draws seeded random instances, runs the library, and checks the
outcome against an oracle that does not share code with the library's
kernels (LAPACK through ``numpy.linalg``, brute-force grids, difference
quotients, or instances that are correct by construction).  The CLI
``selftest`` command and the acceptance tests both run these suites.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .derivative import gd_blockfun, gd_fd_oracle, gd_opnorm, gd_phase_profile
from .opspace import DualFunctional, cb_factorization, ucp_from_vector
from .orthogonality import Verdict, bj_pair, bj_subspace
from .povm import (
    FinitePovm,
    MatrixFunction,
    amplified_state,
    compress_measure,
    gd_commutative_certificate,
    integrate_block_measure,
    state_to_block_measure,
)


@dataclass
class SuiteResult:
    """Outcome of one suite: case counts, failing cases and worst observed residuals."""

    name: str
    cases: int = 0
    failures: list = field(default_factory=list)
    worst: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, key: str, value: float, larger_is_worse: bool = True) -> None:
        old = self.worst.get(key)
        if old is None or (value > old if larger_is_worse else value < old):
            self.worst[key] = float(value)

    def fail(self, case: int, message: str) -> None:
        self.failures.append((case, message))


# ---------------------------------------------------------------------------
# oracles and generators
# ---------------------------------------------------------------------------


def spectral_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a), 2))


def cgauss(rng: np.random.Generator, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def unit(rng: np.random.Generator, n: int) -> np.ndarray:
    x = cgauss(rng, n)
    return x / np.linalg.norm(x)


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(cgauss(rng, n, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def with_top_multiplicity(rng: np.random.Generator, n: int, r: int, top: float = 1.0) -> np.ndarray:
    """Random ``n x n`` matrix whose largest singular value ``top`` has multiplicity ``r``."""
    rest = rng.uniform(0.1, 0.8, size=n - r) * top
    s = np.concatenate([np.full(r, top), rest])
    return haar_unitary(rng, n) @ np.diag(s) @ haar_unitary(rng, n).conj().T


def grid_min_norm(a, b) -> float:
    """Brute-force ``min_lambda ||A + lambda B||``: a 101 x 101 grid of radius ``2||A||/||B||``, then local polish.

    The five best grid points (and ``lambda = 0``) seed Nelder--Mead runs on
    the LAPACK spectral norm.
    """
    na, nb = spectral_norm(a), spectral_norm(b)
    radius = 2 * na / nb
    axis = np.linspace(-radius, radius, 101)
    lam = (axis[:, None] + 1j * axis[None, :]).reshape(-1)
    stack = a[None] + lam[:, None, None] * b[None]
    vals = np.linalg.norm(stack, ord=2, axis=(1, 2))
    order = np.argsort(vals)[:5]
    best = min(float(vals.min()), na)
    h = axis[1] - axis[0]

    def f(p):
        return spectral_norm(a + complex(p[0], p[1]) * b)

    for start in [0j] + [lam[i] for i in order]:
        for width in (h, h * 1e-3):
            p0 = np.array([start.real, start.imag])
            simplex = np.array([p0, p0 + [width, 0], p0 + [0, width]])
            res = minimize(f, p0, method="Nelder-Mead",
                           options={"initial_simplex": simplex, "xatol": 1e-12, "fatol": 1e-14, "maxiter": 1500})
            best = min(best, float(res.fun))
    return best


# ---------------------------------------------------------------------------
# derivative suites (1-4)
# ---------------------------------------------------------------------------


def suite_derivative_oracle(seed: int = 1, count: int = 200, fault: bool = False, traces: Optional[list] = None) -> SuiteResult:
    """Closed-form derivative against the finite-difference quotient."""
    res = SuiteResult("derivative-oracle")
    rng = np.random.default_rng(seed)
    for case in range(count):
        n = int(rng.integers(2, 9))
        a, b = cgauss(rng, n, n), cgauss(rng, n, n)
        value = gd_opnorm(a, b).value + (1e-3 if fault else 0.0)
        fd, trace = gd_fd_oracle(a, b, tol=1e-7)
        if traces is not None:
            traces.append(trace)
        err = abs(value - fd)
        bound = 1e-5 * max(1.0, spectral_norm(b))
        res.record("abs_error", err)
        res.record("error_over_bound", err / bound)
        res.cases += 1
        if err > bound:
            res.fail(case, f"n={n}: |gd - fd| = {err:.3e} > {bound:.3e}")
    return res


def suite_lumer(seed: int = 1, count: int = 100, fault: bool = False) -> SuiteResult:
    """``gd(I, B) = lambda_max(Re B)``."""
    res = SuiteResult("lumer-identity")
    rng = np.random.default_rng(seed)
    for case in range(count):
        n = int(rng.integers(2, 9))
        b = cgauss(rng, n, n)
        expected = float(np.linalg.eigvalsh((b + b.conj().T) / 2)[-1])
        value = gd_opnorm(np.eye(n), b).value + (1e-6 if fault else 0.0)
        err = abs(value - expected)
        res.record("abs_error", err)
        res.cases += 1
        if err > 1e-10:
            res.fail(case, f"n={n}: |gd(I,B) - lambda_max(Re B)| = {err:.3e}")
    return res


def suite_monotonicity(traces: list, fault: bool = False) -> SuiteResult:
    """Difference quotients never increase as ``t`` shrinks (slack 1e-12)."""
    res = SuiteResult("quotient-monotonicity")
    for case, trace in enumerate(traces):
        qs = trace.quotients
        if fault and len(qs) > 1:
            qs = qs.copy()
            qs[-1] += 1e-6
        jumps = np.diff(qs)
        worst = float(jumps.max()) if jumps.size else -np.inf
        res.record("max_increase", worst)
        res.cases += 1
        bad = int(np.sum(jumps > 1e-12))
        if bad:
            res.fail(case, f"{bad} monotonicity violations (max increase {worst:.3e})")
    res.notes["steps_checked"] = int(sum(len(t.steps) for t in traces))
    return res


def suite_homogeneity(seed: int = 1, count: int = 100, fault: bool = False) -> SuiteResult:
    """Positive homogeneity and sublinearity of ``B -> gd(A, B)``."""
    res = SuiteResult("homogeneity-sublinearity")
    rng = np.random.default_rng(seed)
    for case in range(count):
        n = int(rng.integers(2, 9))
        a, b1, b2 = cgauss(rng, n, n), cgauss(rng, n, n), cgauss(rng, n, n)
        base = gd_opnorm(a, b1).value
        for alpha in (0.5, 2.0, 10.0):
            scaled = gd_opnorm(a, alpha * b1).value * (1.001 if fault else 1.0)
            rel = abs(scaled - alpha * base) / max(abs(alpha * base), 1e-300)
            res.record("homogeneity_rel", rel)
            if rel > 1e-10:
                res.fail(case, f"alpha={alpha}: relative homogeneity defect {rel:.3e}")
        lhs = gd_opnorm(a, b1 + b2).value
        rhs = base + gd_opnorm(a, b2).value
        res.record("sublinearity_excess", lhs - rhs)
        if lhs > rhs + 1e-9:
            res.fail(case, f"sublinearity violated by {lhs - rhs:.3e}")
        res.cases += 1
    return res


# ---------------------------------------------------------------------------
# pair orthogonality suites (5-6)
# ---------------------------------------------------------------------------

MARGIN = 1e-7


def pair_instances(seed: int = 1, count: int = 100):
    """Random ``4 x 4`` pairs; every other base point has a doubled top singular value.

    A simple top singular value makes ``K* A* B K`` a nonzero scalar, so both
    verdicts only occur once repeated top singular values are included.
    """
    rng = np.random.default_rng(seed)
    out = []
    for case in range(count):
        if case % 2:
            a = with_top_multiplicity(rng, 4, 2, top=float(rng.uniform(0.5, 3.0)))
        else:
            a = cgauss(rng, 4, 4)
        out.append((a, cgauss(rng, 4, 4)))
    return out


def oracle_pair_verdict(a, b):
    """Grid-oracle verdict: ``NotOrthogonal`` if the decrease is at least 1e-7, ``Orthogonal`` if it is rounding-level, else ``None`` (margin case)."""
    na = spectral_norm(a)
    decrease = na - grid_min_norm(a, b)
    if decrease >= MARGIN:
        return Verdict.NOT_ORTHOGONAL, decrease
    if decrease <= 1e-12 * na:
        return Verdict.ORTHOGONAL, decrease
    return None, decrease


def suite_bhatia_semrl(seed: int = 1, count: int = 100, fault: bool = False, cache: Optional[list] = None) -> SuiteResult:
    """``bj_pair`` verdicts against brute-force minimisation of ``||A + lambda B||``."""
    res = SuiteResult("pair-orthogonality")
    tally = {"Orthogonal": 0, "NotOrthogonal": 0, "margin": 0}
    for case, (a, b) in enumerate(pair_instances(seed, count)):
        expected, decrease = oracle_pair_verdict(a, b)
        decision = bj_pair(a, b)
        verdict = decision.verdict
        if fault and verdict is Verdict.ORTHOGONAL:
            verdict = Verdict.NOT_ORTHOGONAL
        if cache is not None:
            cache.append((a, b, expected, verdict))
        res.cases += 1
        if expected is None:
            tally["margin"] += 1
            continue
        tally[expected.value] += 1
        if verdict is not expected:
            res.fail(case, f"bj_pair says {verdict.value}, grid oracle {expected.value} (decrease {decrease:.3e})")
            continue
        if verdict is Verdict.ORTHOGONAL:
            eta = decision.certificate
            inner = abs(np.vdot(a @ eta, b @ eta))
            nres = abs(np.linalg.norm(a @ eta) - spectral_norm(a))
            res.record("inner_residual", inner)
            res.record("norm_residual", nres)
            if inner > 1e-8 or nres > 1e-8:
                res.fail(case, f"certificate residuals inner={inner:.3e} norm={nres:.3e}")
        else:
            achieved = spectral_norm(a - decision.witness)
            res.record("witness_decrease", spectral_norm(a) - achieved, larger_is_worse=False)
            if achieved > spectral_norm(a) - 1e-9:
                res.fail(case, "witness does not decrease the norm by 1e-9")
    res.notes.update(tally)
    return res


def suite_phase_criterion(cache: list, fault: bool = False) -> SuiteResult:
    """``min_phi D_phi >= -1e-7`` on a 360-point grid exactly when the pair is orthogonal."""
    res = SuiteResult("phase-criterion")
    phis = np.arange(360) * (2 * np.pi / 360)
    for case, (a, b, expected, verdict) in enumerate(cache):
        if expected is None:
            continue
        low = float(gd_phase_profile(a, b, phis).min())
        crit = low >= -1e-7
        if fault:
            crit = not crit
        res.cases += 1
        res.record("min_phase_derivative_orthogonal" if verdict is Verdict.ORTHOGONAL else "min_phase_derivative_not",
                    low, larger_is_worse=verdict is not Verdict.ORTHOGONAL)
        if crit != (verdict is Verdict.ORTHOGONAL):
            res.fail(case, f"phase criterion {crit} but bj_pair {verdict.value} (min D = {low:.3e})")
    return res


# ---------------------------------------------------------------------------
# subspace orthogonality suites (7-8)
# ---------------------------------------------------------------------------


def feasible_subspace_instance(rng: np.random.Generator):
    """``A`` with a repeated top singular value, a density ``rho`` on its maximal subspace, and ``B_j`` with ``tr(rho A* B_j) = 0``.

    Each random ``B'_j`` is corrected along ``A``:
    ``B_j = B'_j - tr(rho A* B'_j)/tr(rho A* A) A``.
    """
    k = int(rng.integers(2, 7))
    r = int(rng.integers(1, k + 1))
    top = float(rng.uniform(0.5, 3.0))
    u, v = haar_unitary(rng, k), haar_unitary(rng, k)
    s = np.concatenate([np.full(r, top), rng.uniform(0.1, 0.8, size=k - r) * top])
    a = u @ np.diag(s) @ v.conj().T
    rank = int(rng.integers(1, r + 1))
    g = cgauss(rng, r, rank)
    sig = g @ g.conj().T
    sig /= np.trace(sig).real
    vk = v[:, :r]
    rho = vk @ sig @ vk.conj().T
    m = int(rng.integers(1, 5))
    bs = []
    for _ in range(m):
        bp = cgauss(rng, k, k)
        coef = np.trace(rho @ a.conj().T @ bp) / np.trace(rho @ a.conj().T @ a)
        bs.append(bp - coef * a)
    return a, bs


def suite_subspace_feasible(seed: int = 1, count: int = 50, fault: bool = False) -> SuiteResult:
    res = SuiteResult("subspace-feasible")
    rng = np.random.default_rng(seed)
    for case in range(count):
        a, bs = feasible_subspace_instance(rng)
        decision = bj_subspace(a, bs, seed=seed)
        res.cases += 1
        if decision.verdict is not Verdict.ORTHOGONAL or fault:
            res.fail(case, f"expected Orthogonal, got {decision.verdict.value}")
            continue
        rho = decision.certificate.matrix
        na = spectral_norm(a)
        attain = abs(np.trace(rho @ a.conj().T @ a).real - na**2) / na**2
        res.record("attain_rel", attain)
        w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
        res.record("density_lambda_min", float(w[0]), larger_is_worse=False)
        if attain > 1e-6 or w[0] < -1e-10 or abs(np.trace(rho).real - 1) > 1e-10:
            res.fail(case, f"density certificate defect: attain {attain:.3e}, lambda_min {w[0]:.3e}")
        for j, b in enumerate(bs):
            rel = abs(np.trace(rho @ a.conj().T @ b)) / (na * spectral_norm(b))
            res.record("constraint_rel", rel)
            if rel > 1e-6:
                res.fail(case, f"|tr(rho A* B_{j})| relative defect {rel:.3e}")
    return res


def infeasible_subspace_instance(rng: np.random.Generator):
    """``A`` and ``B_list`` whose span contains a planted descent direction.

    ``D = A + R/2`` with ``||R|| <= ||A||`` has ``gd(A, -D) < 0``; the list is
    ``D`` plus random matrices, mixed by a random invertible matrix so the
    planted direction is not a list element.
    """
    k = int(rng.integers(2, 7))
    a = cgauss(rng, k, k) if rng.uniform() < 0.5 else with_top_multiplicity(rng, k, int(rng.integers(1, k + 1)))
    r = cgauss(rng, k, k)
    r *= spectral_norm(a) / spectral_norm(r)
    raw = [a + 0.5 * r] + [cgauss(rng, k, k) for _ in range(int(rng.integers(0, 4)))]
    mix = cgauss(rng, len(raw), len(raw)) + 2 * np.eye(len(raw))
    bs = [sum(mix[i, j] * raw[j] for j in range(len(raw))) for i in range(len(raw))]
    return a, bs


def suite_subspace_infeasible(seed: int = 1, count: int = 50, fault: bool = False) -> SuiteResult:
    res = SuiteResult("subspace-infeasible")
    rng = np.random.default_rng(seed)
    for case in range(count):
        a, bs = infeasible_subspace_instance(rng)
        decision = bj_subspace(a, bs, seed=seed)
        res.cases += 1
        if decision.verdict is not Verdict.NOT_ORTHOGONAL:
            res.fail(case, f"expected NotOrthogonal, got {decision.verdict.value}")
            continue
        w = sum(c * b for c, b in zip(decision.coefficients, bs))
        if fault:
            w = 0 * w
        decrease = spectral_norm(a) - spectral_norm(a - w)
        res.record("decrease", decrease, larger_is_worse=False)
        if decrease < 1e-9:
            res.fail(case, f"witness decrease {decrease:.3e} < 1e-9")
    return res


# ---------------------------------------------------------------------------
# factorisation and ucp suites (9-10)
# ---------------------------------------------------------------------------


def _amplify_reference(apply: Callable, w: np.ndarray, m: int, k: int) -> np.ndarray:
    """``[phi(w_pq)]`` assembled block by block from an ``mk x mk`` realisation."""
    rows = []
    for p in range(m):
        rows.append(np.hstack([apply(w[p * k:(p + 1) * k, q * k:(q + 1) * k]) for q in range(m)]))
    return np.vstack(rows)


def suite_factorization(seed: int = 1, count: int = 50, fault: bool = False, samples: int = 20,
                        cc_samples: int = 10) -> SuiteResult:
    res = SuiteResult("functional-factorization")
    rng = np.random.default_rng(seed)
    for case in range(count):
        n, k = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        f = DualFunctional(unit(rng, n * k), unit(rng, n * k))
        fac = cb_factorization(f, n, k)
        wl, wr = fac.W_left, fac.W_right

        def apply(x):
            return wl.conj().T @ x @ wr

        worst = 0.0
        for _ in range(samples):
            u = cgauss(rng, n * k, n * k)
            lhs = f.zeta.conj() @ u @ f.xi
            phi_u = _amplify_reference(apply, u, n, k)
            rhs = fac.xi_prime.conj() @ phi_u @ fac.eta + (1e-6 if fault else 0.0)
            worst = max(worst, abs(lhs - rhs))
        res.record("reproduction", worst)
        nl, nr = spectral_norm(wl), spectral_norm(wr)
        res.record("contraction_norm", max(nl, nr))
        cc = -np.inf
        for m in range(1, 4):
            for _ in range(cc_samples):
                w = cgauss(rng, m * k, m * k)
                cc = max(cc, spectral_norm(_amplify_reference(apply, w, m, k)) - spectral_norm(w))
        res.record("cc_excess", cc)
        res.cases += 1
        if worst > 1e-9:
            res.fail(case, f"n={n},k={k}: reproduction residual {worst:.3e}")
        if max(nl, nr) > 1 + 1e-12:
            res.fail(case, f"n={n},k={k}: factor norm {max(nl, nr):.15f}")
        if cc > 1e-9:
            res.fail(case, f"n={n},k={k}: complete contractivity excess {cc:.3e}")
    return res


def suite_ucp(seed: int = 1, count: int = 50, fault: bool = False, samples: int = 20) -> SuiteResult:
    res = SuiteResult("ucp-construction")
    rng = np.random.default_rng(seed)
    for case in range(count):
        n, k = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        xi = unit(rng, n * k)
        phi, eta = ucp_from_vector(xi, n, k)
        v = phi.stinespring_isometry
        iso = float(np.max(np.abs(v.conj().T @ v - np.eye(n))))

        def apply(x):
            return v.conj().T @ np.kron(x, np.eye(phi.multiplicity)) @ v

        choi = np.zeros((k * n, k * n), dtype=complex)
        for i in range(k):
            for j in range(k):
                e = np.zeros((k, k))
                e[i, j] = 1.0
                choi[i * n:(i + 1) * n, j * n:(j + 1) * n] = apply(e)
        lmin = float(np.linalg.eigvalsh((choi + choi.conj().T) / 2)[0])
        worst = 0.0
        for _ in range(samples):
            s = cgauss(rng, n * k, n * k)
            lhs = eta.conj() @ _amplify_reference(apply, s, n, k) @ eta
            rhs = xi.conj() @ s @ xi + (1e-6 if fault else 0.0)
            worst = max(worst, abs(lhs - rhs))
        res.record("isometry", iso)
        res.record("choi_lambda_min", lmin, larger_is_worse=False)
        res.record("pairing", worst)
        res.cases += 1
        if iso > 1e-10:
            res.fail(case, f"V*V - I = {iso:.3e}")
        if lmin < -1e-10:
            res.fail(case, f"Choi lambda_min {lmin:.3e}")
        if worst > 1e-9:
            res.fail(case, f"pairing residual {worst:.3e}")
    return res


# ---------------------------------------------------------------------------
# measure suites (11-12)
# ---------------------------------------------------------------------------


def random_quantum_measure(rng: np.random.Generator, n: int, size: int) -> FinitePovm:
    """Effects ``V_x* V_x`` from the row blocks of a random isometry ``C^n -> C^{n |X|}``."""
    q, _ = np.linalg.qr(cgauss(rng, n * size, n))
    effects = [q[x * n:(x + 1) * n].conj().T @ q[x * n:(x + 1) * n] for x in range(size)]
    return FinitePovm(tuple(f"x{i}" for i in range(size)), np.stack(effects))


def suite_povm_round_trip(seed: int = 1, count: int = 50, fault: bool = False) -> SuiteResult:
    res = SuiteResult("povm-round-trip")
    rng = np.random.default_rng(seed)
    for case in range(count):
        n, size = int(rng.integers(1, 5)), int(rng.integers(1, 6))
        omega = random_quantum_measure(rng, n, size)
        total = float(np.max(np.abs(omega.effects.sum(axis=0) - np.eye(n))))
        nu = state_to_block_measure(omega)
        f = MatrixFunction(omega.labels, cgauss(rng, size, n, n))
        eta = unit(rng, n * n)
        lhs = eta.conj() @ amplified_state(f, omega) @ eta
        rhs = eta.conj() @ integrate_block_measure(f, nu) @ eta + (1e-6 if fault else 0.0)
        pairing = abs(lhs - rhs)
        comp = compress_measure(nu, eta)
        w = comp.W
        direct = max(abs(comp.xi.conj() @ (w.conj().T @ e @ w) @ comp.xi - eta.conj() @ e @ eta) for e in nu.effects)
        res.record("measure_total", total)
        res.record("pairing", pairing)
        res.record("compress_identity", direct)
        res.cases += 1
        if total > 1e-10:
            res.fail(case, f"generated measure is not normalised ({total:.3e})")
        if pairing > 1e-10:
            res.fail(case, f"pairing residual {pairing:.3e}")
        if direct > 1e-10:
            res.fail(case, f"compression identity residual {direct:.3e}")
    return res


def suite_commutative(seed: int = 1, count: int = 50, fault: bool = False) -> SuiteResult:
    res = SuiteResult("commutative-derivative")
    rng = np.random.default_rng(seed)
    validated = 0
    for case in range(count):
        n, size = int(rng.integers(1, 5)), int(rng.integers(1, 6))
        labels = tuple(range(size))
        f = MatrixFunction(labels, cgauss(rng, size, n, n))
        g = MatrixFunction(labels, cgauss(rng, size, n, n))
        value = gd_blockfun(f, g).value + (1e-3 if fault else 0.0)
        fd, _ = gd_fd_oracle(f.values, g.values, tol=1e-7)
        err = abs(value - fd)
        res.record("abs_error", err)
        cert = gd_commutative_certificate(f, g)
        res.cases += 1
        if err > 1e-5:
            res.fail(case, f"|gd_blockfun - fd| = {err:.3e}")
        if cert.validated:
            validated += 1
            nu = cert.measure
            int_f = sum(e * np.kron(np.ones((n, n)), v) for e, v in zip(nu.effects, f.values))
            gap = abs(spectral_norm(int_f) - max(spectral_norm(v) for v in f.values))
            res.record("norm_attainment", gap)
            if gap > 1e-6:
                res.fail(case, f"||int F dnu|| - ||F|| = {gap:.3e}")
    res.notes["validated"] = validated
    res.notes["validation_rate"] = validated / count if count else 1.0
    return res


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

SUITE_NAMES = (
    "derivative-oracle",
    "lumer-identity",
    "quotient-monotonicity",
    "homogeneity-sublinearity",
    "pair-orthogonality",
    "phase-criterion",
    "subspace-feasible",
    "subspace-infeasible",
    "functional-factorization",
    "ucp-construction",
    "povm-round-trip",
    "commutative-derivative",
)

DEFAULT_COUNTS = {
    "derivative-oracle": 200,
    "lumer-identity": 100,
    "homogeneity-sublinearity": 100,
    "pair-orthogonality": 100,
    "subspace-feasible": 50,
    "subspace-infeasible": 50,
    "functional-factorization": 50,
    "ucp-construction": 50,
    "povm-round-trip": 50,
    "commutative-derivative": 50,
}


def run_suites(seed: int = 1, count: Optional[int] = None, fault: Optional[str] = None,
               only: Optional[set] = None) -> list:
    """Run every suite (or those in ``only``) and return their :class:`SuiteResult` objects.

    ``count`` overrides every suite's default instance count; ``fault`` names
    a suite whose check is deliberately sabotaged (test hook).
    """

    def n_of(name):
        return DEFAULT_COUNTS[name] if count is None else count

    def want(name):
        return only is None or name in only

    results = []
    traces: list = []
    cache: list = []
    plan = [
        ("derivative-oracle", lambda: suite_derivative_oracle(seed, n_of("derivative-oracle"), fault == "derivative-oracle", traces)),
        ("lumer-identity", lambda: suite_lumer(seed, n_of("lumer-identity"), fault == "lumer-identity")),
        ("quotient-monotonicity", lambda: suite_monotonicity(traces, fault == "quotient-monotonicity")),
        ("homogeneity-sublinearity", lambda: suite_homogeneity(seed, n_of("homogeneity-sublinearity"), fault == "homogeneity-sublinearity")),
        ("pair-orthogonality", lambda: suite_bhatia_semrl(seed, n_of("pair-orthogonality"), fault == "pair-orthogonality", cache)),
        ("phase-criterion", lambda: suite_phase_criterion(cache, fault == "phase-criterion")),
        ("subspace-feasible", lambda: suite_subspace_feasible(seed, n_of("subspace-feasible"), fault == "subspace-feasible")),
        ("subspace-infeasible", lambda: suite_subspace_infeasible(seed, n_of("subspace-infeasible"), fault == "subspace-infeasible")),
        ("functional-factorization", lambda: suite_factorization(seed, n_of("functional-factorization"), fault == "functional-factorization")),
        ("ucp-construction", lambda: suite_ucp(seed, n_of("ucp-construction"), fault == "ucp-construction")),
        ("povm-round-trip", lambda: suite_povm_round_trip(seed, n_of("povm-round-trip"), fault == "povm-round-trip")),
        ("commutative-derivative", lambda: suite_commutative(seed, n_of("commutative-derivative"), fault == "commutative-derivative")),
    ]
    needs = {"quotient-monotonicity": "derivative-oracle", "phase-criterion": "pair-orthogonality"}
    selected = {name for name, _ in plan if want(name)}
    for dep_of, dep in needs.items():
        if dep_of in selected:
            selected.add(dep)
    for name, job in plan:
        if name not in selected:
            continue
        t0 = time.perf_counter()
        r = job()
        r.seconds = time.perf_counter() - t0
        if want(name):
            results.append(r)
    return results
