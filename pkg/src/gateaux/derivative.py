"""Gateaux derivatives of the operator norm.

For a base point ``A != 0`` and direction ``B`` the one-sided derivative is

    lim_{t -> 0+} (||A + tB|| - ||A||)/t = lambda_max(K* Re(A* B) K) / ||A||

where ``K`` spans the maximal right-singular subspace of ``A``.  The
maximiser over unit ``eta`` in that subspace is returned as a certificate:
``value = Re<B eta, A eta>/||A||``.  An independent finite-difference oracle
evaluates the difference quotient directly, in extended precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import CertificateRejected, InvalidInputError
from .linalg import (
    as_matrix,
    dagger,
    hermitian_part,
    lambda_max,
    max_singular_subspace,
    op_norm,
    op_norms,
    phase_fix,
    svd,
)
from .numrange import support_values
from .opspace import BlockOperator, FullMatrix, Functions, LinearMapMixin, matrix_norm

ACTIVE_REL_TOL = 1e-8
FD_EXPONENTS = range(10, 41)


@dataclass(frozen=True)
class DerivativeResult:
    """Derivative value with its maximising unit vector.

    For block functions ``active_label`` is the norm-attaining point and
    ``measure`` a point-mass POVM concentrated there.
    """

    value: float
    certificate: np.ndarray
    active_label: Any = None
    measure: Any = None


@dataclass(frozen=True)
class QuotientTrace:
    """Difference quotients ``(t, q(t))`` in order of decreasing ``t``."""

    steps: tuple = field(default_factory=tuple)

    def violations(self, slack: float = 1e-12) -> int:
        """Number of consecutive pairs with ``q(t/2) > q(t) + slack``."""
        qs = [q for _, q in self.steps]
        return sum(1 for q0, q1 in zip(qs, qs[1:]) if q1 > q0 + slack)

    @property
    def ts(self) -> np.ndarray:
        return np.array([t for t, _ in self.steps])

    @property
    def quotients(self) -> np.ndarray:
        return np.array([q for _, q in self.steps])


def _pair(a, b):
    a = as_matrix(a, "A", square=True)
    b = as_matrix(b, "B", square=True)
    if a.shape != b.shape:
        raise InvalidInputError(f"A and B must have the same shape, got {a.shape} and {b.shape}")
    return a, b


def gd_opnorm(a, b) -> DerivativeResult:
    """Gateaux derivative of ``||.||`` at ``A`` in direction ``B``.

    >>> round(gd_opnorm(np.eye(2), np.diag([1.0, -1.0])).value, 12)
    1.0
    """
    a, b = _pair(a, b)
    norm_a = op_norm(a)
    if norm_a == 0:
        t = svd(b)
        return DerivativeResult(value=float(t.singular[0]), certificate=t.right[:, 0])
    k = max_singular_subspace(a).columns
    c = dagger(k) @ hermitian_part(dagger(a) @ b) @ k
    lam, y = lambda_max(c, with_vector=True)
    eta = phase_fix(k @ y)
    return DerivativeResult(value=lam / norm_a, certificate=eta / np.linalg.norm(eta))


def gd_phase(a, b, phi: float) -> float:
    """``D_phi = lim (||A + t e^{i phi} B|| - ||A||)/t``."""
    a, b = _pair(a, b)
    return gd_opnorm(a, np.exp(1j * phi) * b).value


def gd_phase_profile(a, b, phis) -> np.ndarray:
    """Vectorised :func:`gd_phase` over an array of angles.

    The derivative in direction ``e^{i phi} B`` is the support function of
    ``K* A* B K`` at ``phi`` divided by ``||A||``.
    """
    a, b = _pair(a, b)
    phis = np.asarray(phis, dtype=float)
    norm_a = op_norm(a)
    if norm_a == 0:
        return np.full(phis.shape, op_norm(b))
    k = max_singular_subspace(a).columns
    c = dagger(k) @ dagger(a) @ b @ k
    return support_values(c, phis) / norm_a


def _fd_norms(a, b, ts):
    """``max_x ||A_x + t B_x||`` for every ``t`` (and ``t = 0`` first), in extended precision."""
    ld = np.clongdouble
    a = np.asarray(a).astype(ld)
    b = np.asarray(b).astype(ld)
    tt = np.concatenate([[0.0], ts]).astype(np.longdouble)
    shape = (-1,) + (1,) * a.ndim
    stack = a[None] + tt.reshape(shape) * b[None]
    norms = op_norms(stack, dtype=ld)
    if a.ndim == 3:
        norms = norms.max(axis=1)
    return norms


def gd_fd_oracle(a, b, tol: float = 1e-7):
    """Finite-difference derivative on ``t_j = 2^-j``, ``j = 10..40``, with monotone stop.

    ``a`` and ``b`` may be single matrices or stacks ``(|X|, n, n)``, in which
    case the norm is the maximum over the stack (functions on a finite set).
    Norms are evaluated in extended precision so the quotients keep about
    seven more digits than double arithmetic would.  Returns
    ``(value, QuotientTrace)``; the value is the last quotient evaluated.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.ndim not in (2, 3) or a.shape[-1] != a.shape[-2]:
        raise InvalidInputError("A and B must be square matrices (or stacks) of the same shape")
    ts = np.array([2.0**-j for j in FD_EXPONENTS])
    norms = _fd_norms(a, b, ts)
    base = norms[0]
    steps = []
    prev = None
    for i, t in enumerate(ts):
        q = float((norms[i + 1] - base) / np.longdouble(t))
        steps.append((float(t), q))
        if prev is not None and abs(q - prev) <= tol:
            break
        prev = q
    return steps[-1][1], QuotientTrace(steps=tuple(steps))


# ---------------------------------------------------------------------------
# functions on a finite set
# ---------------------------------------------------------------------------


def function_stack(f):
    """``(labels, values)`` for a :class:`~gateaux.povm.MatrixFunction` or a function-valued block operator."""
    if isinstance(f, BlockOperator):
        if not isinstance(f.base, Functions):
            raise InvalidInputError("expected a block operator over functions on a finite set")
        return tuple(f.base.labels), f.evaluations()
    labels = getattr(f, "labels", None)
    values = getattr(f, "values", None)
    if labels is None or values is None:
        raise InvalidInputError("expected a MatrixFunction or a function-valued BlockOperator")
    return tuple(labels), np.asarray(values, dtype=complex)


def gd_blockfun(f, g) -> DerivativeResult:
    """Derivative of ``F -> max_x ||F(x)||`` at ``F`` in direction ``G``.

    The norm is a maximum of convex functions, so its derivative is the
    largest pointwise derivative over the active points
    ``||F(x)|| >= (1 - 1e-8)||F||``.  The result carries a point-mass
    measure at the winning label.
    """
    from .povm import point_mass

    labels, fv = function_stack(f)
    glabels, gv = function_stack(g)
    if len(labels) == 0:
        raise InvalidInputError("the label set is empty")
    if labels != glabels or fv.shape != gv.shape:
        raise InvalidInputError("F and G must share labels and block size")
    norms = op_norms(fv)
    norm_f = float(norms.max())
    if norm_f == 0:
        gn = op_norms(gv)
        active = [int(np.argmax(gn))]
    else:
        active = [int(i) for i in np.flatnonzero(norms >= (1 - ACTIVE_REL_TOL) * norm_f)]
    best, best_i = None, None
    for i in active:
        r = gd_opnorm(fv[i], gv[i])
        if best is None or r.value > best.value:
            best, best_i = r, i
    x = labels[best_i]
    return DerivativeResult(value=best.value, certificate=best.certificate, active_label=x,
                            measure=point_mass(labels, x, fv.shape[1]))


# ---------------------------------------------------------------------------
# operator-system certificates
# ---------------------------------------------------------------------------


def gd_opsys_verify(s1: BlockOperator, s2: BlockOperator, phi: LinearMapMixin, eta, tol: float = 1e-8) -> float:
    """Check a matrix-state certificate ``(phi, eta)`` at ``s1`` and evaluate it on ``s2``.

    Requires ``||phi_n(s1)|| = ||s1||_n`` and ``<Re(phi_n(s1)) eta, eta> = ||s1||_n``
    within ``tol`` (relative to ``max(1, ||s1||)``).  Returns
    ``Re<phi_n(s2) eta, phi_n(s1) eta>/||s1||_n``; raises
    :class:`CertificateRejected` naming the failed condition otherwise.
    """
    if not isinstance(s1.base, FullMatrix) or s1.base != s2.base or s1.n != s2.n:
        raise InvalidInputError("s1 and s2 must be block operators over the same M_k with equal n")
    x = np.asarray(eta, dtype=complex).reshape(-1)
    p1 = phi.amplify(s1)
    if x.shape[0] != p1.shape[0]:
        raise InvalidInputError(f"eta has length {x.shape[0]}, expected {p1.shape[0]}")
    unit = abs(np.linalg.norm(x) - 1)
    if unit > 1e-10:
        raise CertificateRejected("eta is a unit vector", unit)
    norm1 = matrix_norm(s1)
    if norm1 == 0:
        raise CertificateRejected("s1 has positive norm", 0.0)
    scale = max(1.0, norm1)
    attain = abs(op_norm(p1) - norm1)
    if attain > tol * scale:
        raise CertificateRejected("||phi_n(s1)|| = ||s1||_n", attain)
    support = abs(np.vdot(x, hermitian_part(p1) @ x).real - norm1)
    if support > tol * scale:
        raise CertificateRejected("<Re(phi_n(s1)) eta, eta> = ||s1||_n", support)
    p2 = phi.amplify(s2)
    return float(np.vdot(p1 @ x, p2 @ x).real / norm1)
