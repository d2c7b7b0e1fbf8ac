"""Birkhoff--James orthogonality of matrices in the operator norm.

``A`` is orthogonal to a subspace ``Y`` when ``||A|| <= ||A - y||`` for every
``y`` in ``Y``.  Both verdicts are certificate-backed:

* Orthogonal ships a unit vector (pair case) or a density matrix (subspace
  case) whose defining equations are re-checked before returning.
* NotOrthogonal ships a witness ``w`` with ``||A - w|| <= ||A|| - 1e-9``,
  checked by a fresh norm evaluation.

When neither kind of evidence can be produced the verdict is Indeterminate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInputError, NotFoundError, VerificationError
from .linalg import (
    as_matrix,
    dagger,
    eigh_stack,
    hermitian_part,
    max_singular_subspace,
    op_norm,
    op_norms,
    phase_fix,
    svd,
)
from .numrange import contains_zero, range_point_certificate

DECREASE_MARGIN = 1e-9
CERT_TOL = 1e-8
FW_TOL = 1e-12
FW_INDETERMINATE = 1e-8
FW_MAX_ITERS = 20000


class Verdict(enum.Enum):
    ORTHOGONAL = "Orthogonal"
    NOT_ORTHOGONAL = "NotOrthogonal"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class DensityMatrix:
    """Positive semidefinite matrix with unit trace."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "rho", square=True)
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - dagger(m))) > 1e-12 * scale:
            raise InvalidInputError("density matrix must be Hermitian")
        m = hermitian_part(m)
        if abs(np.trace(m).real - 1) > 1e-10:
            raise InvalidInputError(f"density matrix must have unit trace (trace {np.trace(m).real:.3e})")
        lmin = float(eigh_stack(m[None])[0][0, 0])
        if lmin < -1e-10:
            raise InvalidInputError(f"density matrix must be PSD (lambda_min {lmin:.3e})")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expect(self, z) -> complex:
        """The state ``z -> tr(rho z)``."""
        return complex(np.trace(self.matrix @ np.asarray(z, dtype=complex)))


@dataclass(frozen=True)
class OrthogonalityDecision:
    """Verdict plus the evidence backing it.

    ``certificate`` is a unit vector (pair) or :class:`DensityMatrix`
    (subspace) for Orthogonal.  For NotOrthogonal, ``witness`` is the matrix
    ``w`` with ``||A - w|| = achieved_norm < ||A||`` and ``coefficients`` its
    expansion (``w = -lambda B`` for a pair, ``w = sum c_j B_j`` for a
    subspace).  ``residuals`` maps names to the re-measured defects.
    """

    verdict: Verdict
    certificate: object = None
    witness: Optional[np.ndarray] = None
    coefficients: Optional[np.ndarray] = None
    achieved_norm: Optional[float] = None
    norm: float = 0.0
    residuals: dict = field(default_factory=dict)

    @property
    def orthogonal(self) -> bool:
        return self.verdict is Verdict.ORTHOGONAL


def _pair_inputs(a, b):
    a = as_matrix(a, "A", square=True)
    b = as_matrix(b, "B", square=True)
    if a.shape != b.shape:
        raise InvalidInputError(f"A and B must have the same shape, got {a.shape} and {b.shape}")
    return a, b


# ---------------------------------------------------------------------------
# pair orthogonality
# ---------------------------------------------------------------------------


def _line_search(a, d, norm_a, scale):
    """Best ``t > 0`` on a geometric grid for ``||A + t D||``; returns ``(t, norm)``."""
    ts = scale * 2.0 ** -np.arange(0, 48)
    norms = op_norms(a[None] + ts[:, None, None] * d[None])
    i = int(np.argmin(norms))
    return float(ts[i]), float(norms[i])


_STENCIL = np.array([1, 1j, -1, -1j, 1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])


def _refine_lambda(a, b, lam0: complex, width: float, rounds: int = 80) -> complex:
    """Local polish of ``lambda -> ||A + lambda B||``: batched compass search with step halving."""
    lam, best = lam0, op_norm(a + lam0 * b)
    step = width
    for _ in range(rounds):
        cand = lam + step * _STENCIL
        vals = op_norms(a[None] + cand[:, None, None] * b[None])
        i = int(np.argmin(vals))
        if vals[i] < best:
            lam, best = complex(cand[i]), float(vals[i])
        else:
            step *= 0.5
            if step < 1e-13 * max(abs(lam), 1e-300):
                break
    return lam


def pair_witness(a, b, theta: Optional[float] = None):
    """Search ``lambda`` with ``||A + lambda B|| < ||A||``.

    With a separating angle ``theta`` from the numerical-range test the
    search follows ``e^{i theta}``, otherwise it scans 64 directions.  The best
    grid point is polished locally.  Returns ``(lambda, achieved_norm)``.
    """
    a, b = _pair_inputs(a, b)
    norm_a, norm_b = op_norm(a), op_norm(b)
    scale = 2 * norm_a / norm_b
    angles = [theta] if theta is not None else list(np.arange(64) * (2 * math.pi / 64))
    best = (0j, norm_a)
    for ang in angles:
        ph = complex(np.exp(1j * ang))
        t, val = _line_search(a, ph * b, norm_a, scale)
        if val < best[1]:
            best = (t * ph, val)
    lam = best[0]
    if lam != 0:
        lam = _refine_lambda(a, b, lam, 0.25 * abs(lam))
    return lam, op_norm(a + lam * b)


def bj_pair(a, b, seed: int = 0) -> OrthogonalityDecision:
    """Decide ``||A|| <= ||A + lambda B||`` for all complex ``lambda``.

    Orthogonality holds exactly when some unit ``eta`` has ``||A eta|| = ||A||``
    and ``<A eta, B eta> = 0``, i.e. when ``0`` lies in the numerical range of
    ``K* A* B K`` for ``K`` spanning the maximal right-singular subspace of
    ``A``.

    >>> bj_pair(np.eye(2), np.diag([1.0, -1.0])).verdict.value
    'Orthogonal'
    """
    a, b = _pair_inputs(a, b)
    dim = a.shape[0]
    norm_a, norm_b = op_norm(a), op_norm(b)
    if norm_a == 0 or norm_b == 0:
        if norm_a == 0:
            eta = np.zeros(dim, dtype=complex)
            eta[0] = 1.0
        else:
            eta = svd(a).right[:, 0]
        return OrthogonalityDecision(Verdict.ORTHOGONAL, certificate=eta, norm=norm_a,
                                     residuals={"inner": 0.0, "norm": 0.0})
    k = max_singular_subspace(a).columns
    c = dagger(k) @ dagger(a) @ b @ k / (norm_a * norm_b)
    zm = contains_zero(c, tol=1e-10)
    if zm.contains:
        try:
            cert = range_point_certificate(c, 0.0, tol=1e-10)
        except NotFoundError:
            cert = None
        if cert is not None:
            eta = phase_fix(k @ cert.vector)
            eta = eta / np.linalg.norm(eta)
            inner = abs(np.vdot(a @ eta, b @ eta))
            nres = abs(np.linalg.norm(a @ eta) - norm_a)
            if inner <= CERT_TOL * max(1.0, norm_a * norm_b) and nres <= CERT_TOL * max(1.0, norm_a):
                return OrthogonalityDecision(Verdict.ORTHOGONAL, certificate=eta, norm=norm_a,
                                             residuals={"inner": float(inner), "norm": float(nres)})
        lam, achieved = pair_witness(a, b)
    else:
        lam, achieved = pair_witness(a, b, theta=zm.theta)
        if norm_a - achieved < DECREASE_MARGIN:
            lam, achieved = pair_witness(a, b)
    decrease = norm_a - achieved
    if decrease >= DECREASE_MARGIN:
        return OrthogonalityDecision(Verdict.NOT_ORTHOGONAL, witness=-lam * b, coefficients=np.array([lam]),
                                     achieved_norm=achieved, norm=norm_a, residuals={"decrease": float(decrease)})
    return OrthogonalityDecision(Verdict.INDETERMINATE, norm=norm_a,
                                 residuals={"support_value": float(zm.support_value), "decrease": float(decrease)})


# ---------------------------------------------------------------------------
# density-matrix feasibility by Frank--Wolfe
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of :func:`density_face_feasibility`.

    ``status`` is ``"feasible"``, ``"infeasible"`` or ``"indeterminate"``.
    ``values`` holds ``tr(sigma C_j)`` at the final iterate and ``gradient``
    the Hermitian gradient ``G`` of ``f``.  ``lambda_min(G) > 0`` certifies
    infeasibility: every density ``sigma'`` then has ``tr(sigma' G) > 0``,
    whereas a feasible one would give 0.  ``certified`` records whether that
    certificate was obtained.
    """

    status: str
    density: Optional[DensityMatrix]
    objective: float
    values: np.ndarray
    gradient: np.ndarray
    gradient_min: float
    iterations: int
    certified: bool = False

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def _values(sigma, cs):
    return np.einsum("ij,kji->k", sigma, cs)


def _gradient(vals, cs):
    return np.einsum("k,kij->ij", np.conj(vals), cs) + np.einsum("k,kji->ij", vals, np.conj(cs))


def _polish(sigma, cs, vals, steps: int = 30):
    """Gauss--Newton on the factorisation ``sigma = Y Y*`` for ``tr(Y* C_j Y) = 0``, ``||Y||_F = 1``.

    Each step is the minimum-norm solution of the linearised system, so the
    iterate moves to a nearby point of the feasible set; positivity is
    automatic in the factored form.  Returns the improved density or None.
    """
    d = sigma.shape[0]
    w, v = eigh_stack(hermitian_part(sigma)[None])
    y = v[0] * np.sqrt(np.clip(w[0], 0, None))
    f0 = float(np.sum(np.abs(vals) ** 2))
    best, best_f = None, f0
    for _ in range(steps):
        cy = cs @ y  # C_j Y
        ycs = dagger(y)[None] @ cs  # Y* C_j
        a = np.einsum("il,kil->k", np.conj(y), cy)
        res = np.concatenate([a.real, a.imag, [np.sum(np.abs(y) ** 2) - 1]])
        f = float(np.sum(np.abs(a) ** 2))
        if f < best_f:
            best, best_f = y.copy(), f
        if f <= 1e-30:
            break
        d_re = cy + np.swapaxes(ycs, 1, 2)  # da_j / dRe(Y_il)
        d_im = -1j * cy + 1j * np.swapaxes(ycs, 1, 2)  # da_j / dIm(Y_il)
        jac_a = np.concatenate([d_re.reshape(len(cs), -1), d_im.reshape(len(cs), -1)], axis=1)
        jac_n = np.concatenate([2 * y.real.reshape(-1), 2 * y.imag.reshape(-1)])
        jac = np.vstack([jac_a.real, jac_a.imag, jac_n[None]])
        step = np.linalg.lstsq(jac, -res, rcond=None)[0]
        half = d * d
        y = y + step[:half].reshape(d, d) + 1j * step[half:].reshape(d, d)
    if best is None:
        return None
    cand = hermitian_part(best @ dagger(best))
    return cand / np.trace(cand).real


def density_face_feasibility(c_list: Sequence, tol: float = FW_TOL, max_iters: int = FW_MAX_ITERS,
                             indeterminate: float = FW_INDETERMINATE) -> FeasibilityResult:
    """Find a density ``sigma`` with ``tr(sigma C_j) = 0`` for all ``j``.

    Frank--Wolfe minimises ``f(sigma) = sum_j |tr(sigma C_j)|^2`` over density
    matrices: the linear step is the rank-one projector onto a bottom
    eigenvector of the gradient and the step length is exact on the
    quadratic.  Every 25 iterations a Gauss--Newton correction is attempted, which
    converges quadratically once the iterate is near the feasible set.

    ``f <= tol`` is feasible; ``lambda_min(G) > 0`` certifies infeasibility;
    a budget-exhausted run with ``f`` in ``(tol, indeterminate]`` is
    indeterminate, and above that band it is an (uncertified) infeasible
    indication.
    """
    if len(c_list) == 0:
        raise InvalidInputError("C_list must be nonempty")
    cs = np.stack([as_matrix(c, f"C[{j}]", square=True) for j, c in enumerate(c_list)])
    d = cs.shape[1]
    sigma = np.eye(d, dtype=complex) / d
    scale = max(1.0, float(np.max(np.abs(cs))))
    it = 0
    while True:
        vals = _values(sigma, cs)
        f = float(np.sum(np.abs(vals) ** 2))
        g = _gradient(vals, cs)
        w, v = eigh_stack(hermitian_part(g)[None])
        gmin = float(w[0, 0])
        if f <= tol:
            if f > 0:
                cand = _polish(sigma, cs, vals)
                if cand is not None:
                    cvals = _values(cand, cs)
                    cf = float(np.sum(np.abs(cvals) ** 2))
                    if cf < f:
                        sigma, vals, f = cand, cvals, cf
                        g = _gradient(vals, cs)
            return FeasibilityResult("feasible", DensityMatrix(sigma), f, vals, g, gmin, it)
        if gmin > 1e-13 * scale * math.sqrt(f):
            return FeasibilityResult("infeasible", None, f, vals, g, gmin, it, certified=True)
        if it >= max_iters:
            status = "indeterminate" if f <= indeterminate else "infeasible"
            return FeasibilityResult(status, None, f, vals, g, gmin, it)
        it += 1
        if it % 25 == 0:
            cand = _polish(sigma, cs, vals)
            if cand is not None:
                if np.sum(np.abs(_values(cand, cs)) ** 2) < f:
                    sigma = cand
                    continue
        x = v[0][:, 0]
        target = np.einsum("i,kij,j->k", np.conj(x), cs, x)
        delta = target - vals
        den = float(np.sum(np.abs(delta) ** 2))
        if den == 0:
            gamma = 0.0
        else:
            gamma = float(np.clip(-np.real(np.vdot(delta, vals)) / den, 0.0, 1.0))
        if gamma == 0.0:
            # no progress along the vertex direction; only the affine step can help
            cand = _polish(sigma, cs, vals)
            if cand is None:
                status = "indeterminate" if f <= indeterminate else "infeasible"
                return FeasibilityResult(status, None, f, vals, g, gmin, it)
            sigma = cand
            continue
        sigma = (1 - gamma) * sigma + gamma * np.outer(x, np.conj(x))


# ---------------------------------------------------------------------------
# subspace orthogonality
# ---------------------------------------------------------------------------


def _top_pairs(m):
    """Top singular pairs ``(sigma, u, v)`` of a stack of square matrices."""
    w, vecs = eigh_stack(dagger(m) @ m)
    v = vecs[..., :, -1]
    mv = np.einsum("bij,bj->bi", m, v)
    s = np.linalg.norm(mv, axis=1)
    u = mv / np.where(s > 0, s, 1)[:, None]
    return s, u, v


def subspace_witness(a, bs, direction: Optional[np.ndarray] = None, seed: int = 0, restarts: int = 64,
                     steps: int = 500):
    """Search ``c`` with ``||A - sum c_j B_j|| < ||A||``.

    A supplied descent ``direction`` (coefficients) is line-searched first;
    otherwise, or if it fails, batched subgradient descent runs from
    ``restarts`` random starts with step halving.  Returns ``(c, norm)``.
    """
    a = np.asarray(a, dtype=complex)
    bs = np.asarray(bs, dtype=complex)
    norm_a = op_norm(a)
    bnorm = op_norms(bs)
    best_c, best_val = np.zeros(len(bs), dtype=complex), norm_a
    if direction is not None and np.any(direction != 0):
        d = np.einsum("j,jik->ik", direction, bs)
        t, val = _line_search(a, -d, norm_a, 2 * norm_a / max(op_norm(d), 1e-300))
        if val < best_val:
            best_c, best_val = t * direction, val
        if norm_a - best_val >= DECREASE_MARGIN:
            return best_c, op_norm(a - np.einsum("j,jik->ik", best_c, bs))
    rng = np.random.default_rng(seed)
    radius = norm_a / np.where(bnorm > 0, bnorm, 1)
    c = 0.1 * radius * (rng.standard_normal((restarts, len(bs))) + 1j * rng.standard_normal((restarts, len(bs))))
    c[0] = 0
    step = np.full(restarts, 0.5 * norm_a)
    cur = op_norms(a[None] - np.einsum("rj,jik->rik", c, bs))
    for _ in range(steps):
        m = a[None] - np.einsum("rj,jik->rik", c, bs)
        _, u, v = _top_pairs(m)
        g = np.conj(np.einsum("ri,jik,rk->rj", np.conj(u), bs, v))
        gn = np.linalg.norm(g, axis=1)
        gn = np.where(gn > 0, gn, 1)
        trial = c + (step / gn)[:, None] * g
        val = op_norms(a[None] - np.einsum("rj,jik->rik", trial, bs))
        better = val < cur
        c = np.where(better[:, None], trial, c)
        cur = np.where(better, val, cur)
        step = np.where(better, step * 1.2, step * 0.5)
        if norm_a - cur.min() >= 10 * DECREASE_MARGIN or step.max() < 1e-14 * norm_a:
            break
    i = int(np.argmin(cur))
    if cur[i] < best_val:
        best_c, best_val = c[i], float(cur[i])
    return best_c, op_norm(a - np.einsum("j,jik->ik", best_c, bs))


def bj_subspace(a, b_list: Sequence, seed: int = 0, max_iters: int = FW_MAX_ITERS) -> OrthogonalityDecision:
    """Decide ``||A|| <= ||A - w||`` for all ``w`` in the complex span of ``b_list``.

    Orthogonal exactly when a state supported on the maximal singular
    subspace annihilates every ``A* B_j``.  The feasibility problem is solved
    on compressed, normalised constraints ``X_K* A* B_j X_K / (||A|| ||B_j||)``
    and the lifted density ``rho = X_K sigma X_K*`` is re-verified.
    """
    a = as_matrix(a, "A", square=True)
    if len(b_list) == 0:
        raise InvalidInputError("B_list must be nonempty")
    bs = np.stack([as_matrix(b, f"B[{j}]", square=True) for j, b in enumerate(b_list)])
    if bs.shape[1:] != a.shape:
        raise InvalidInputError("every B_j must have the shape of A")
    d = a.shape[0]
    norm_a = op_norm(a)
    bnorm = op_norms(bs)
    if norm_a == 0:
        return OrthogonalityDecision(Verdict.ORTHOGONAL, certificate=DensityMatrix(np.eye(d) / d), norm=0.0,
                                     residuals={"attain": 0.0, "constraints": [0.0] * len(bs)})
    live = bnorm > 0
    x = max_singular_subspace(a).columns
    cs = dagger(x)[None] @ dagger(a)[None] @ bs[live] @ x[None] / (norm_a * bnorm[live])[:, None, None]
    if cs.shape[0] == 0:
        cs = np.zeros((1,) + (x.shape[1],) * 2, dtype=complex)
    res = density_face_feasibility(cs, max_iters=max_iters)
    if res.feasible:
        rho = hermitian_part(x @ res.density.matrix @ dagger(x))
        rho = DensityMatrix(rho / np.trace(rho).real)
        attain = abs(rho.expect(dagger(a) @ a).real - norm_a**2)
        cons = [abs(rho.expect(dagger(a) @ b)) for b in bs]
        if attain > 1e-6 * norm_a**2 or any(cv > 1e-6 * norm_a * nb for cv, nb in zip(cons, bnorm)):
            raise VerificationError("lifted density certificate failed re-verification")
        return OrthogonalityDecision(Verdict.ORTHOGONAL, certificate=rho, norm=norm_a,
                                     residuals={"attain": float(attain), "constraints": [float(cv) for cv in cons],
                                                "objective": res.objective})
    direction = None
    if res.certified or res.status == "infeasible":
        direction = np.zeros(len(bs), dtype=complex)
        direction[live] = np.conj(res.values) / bnorm[live]
    c, achieved = subspace_witness(a, bs, direction=direction, seed=seed)
    decrease = norm_a - achieved
    if decrease >= DECREASE_MARGIN:
        w = np.einsum("j,jik->ik", c, bs)
        return OrthogonalityDecision(Verdict.NOT_ORTHOGONAL, witness=w, coefficients=c, achieved_norm=float(achieved),
                                     norm=norm_a, residuals={"decrease": float(decrease), "objective": res.objective})
    return OrthogonalityDecision(Verdict.INDETERMINATE, norm=norm_a,
                                 residuals={"objective": res.objective, "gradient_min": res.gradient_min,
                                            "decrease": float(decrease)})


def state_certificate(x, b_list: Sequence, seed: int = 0) -> DensityMatrix:
    """Density ``rho`` with ``tr(rho x* x) = 1`` and ``tr(rho x* y) = 0`` for ``y`` in ``b_list``.

    Requires ``||x|| = 1`` and that ``x`` is orthogonal to ``span(b_list)``.
    """
    x = as_matrix(x, "x", square=True)
    if abs(op_norm(x) - 1) > 1e-10:
        raise InvalidInputError("x must have norm 1")
    decision = bj_subspace(x, b_list, seed=seed)
    if decision.verdict is not Verdict.ORTHOGONAL:
        raise InvalidInputError(f"x is not orthogonal to span(B_list): verdict {decision.verdict.value}")
    return decision.certificate
