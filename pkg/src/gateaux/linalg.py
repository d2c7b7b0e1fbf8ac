"""Dense complex linear algebra kernel.

Everything downstream (numerical ranges, derivative formulas, certificates)
is built on the routines here:

* :func:`herm_eig` -- cyclic complex Jacobi eigensolver for Hermitian matrices,
  vectorised over a leading batch axis and generic in the floating dtype, so
  the finite-difference oracle can run it in extended precision.
* :func:`svd` -- one-sided (Hestenes) Jacobi SVD, i.e. Jacobi on ``A*A``
  applied implicitly to the columns of ``A``.
* :func:`op_norm`, :func:`max_singular_subspace`, :func:`polar`,
  :func:`polar_partial_isometry` and a few small helpers.

Matrices are plain :class:`numpy.ndarray` objects; no wrapper type is used.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateInputError, InvalidInputError

MAX_SWEEPS = 60
JACOBI_TOL = 1e-14
DEFAULT_REL_TOL = 1e-8


@dataclass(frozen=True)
class HermitianEigen:
    """Eigenvalues in ascending order and the matching orthonormal eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class Svd:
    """Thin SVD ``A = left @ diag(singular) @ right.conj().T``, singular values descending."""

    left: np.ndarray
    singular: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular) @ self.right.conj().T


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal columns spanning a subspace of ``C^ambient_dim``."""

    ambient_dim: int
    columns: np.ndarray

    @property
    def dim(self) -> int:
        return self.columns.shape[1]

    def projector(self) -> np.ndarray:
        return self.columns @ self.columns.conj().T


# ---------------------------------------------------------------------------
# input handling and small helpers
# ---------------------------------------------------------------------------


def as_matrix(a, name: str = "matrix", square: bool = False) -> np.ndarray:
    """Validate and convert ``a`` to a 2-D complex128 array.

    Raises :class:`InvalidInputError` for empty, non-2-D or non-finite input,
    and for non-square input when ``square`` is set.
    """
    try:
        m = np.asarray(a, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name}: not a numeric matrix ({exc})") from None
    if m.ndim != 2:
        raise InvalidInputError(f"{name}: expected a 2-D array, got shape {m.shape}")
    if m.size == 0:
        raise InvalidInputError(f"{name}: empty matrix")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError(f"{name}: entries must be finite")
    if square and m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"{name}: expected a square matrix, got shape {m.shape}")
    return m


def as_vector(x, name: str = "vector") -> np.ndarray:
    v = np.asarray(x, dtype=complex).reshape(-1)
    if v.size == 0 or not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name}: expected a nonempty finite vector")
    return v


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """``Re(A) = (A + A*)/2`` in the operator sense."""
    return (a + dagger(a)) / 2


def skew_part(a: np.ndarray) -> np.ndarray:
    """``Im(A) = (A - A*)/(2i)``, so that ``A = Re(A) + i Im(A)``."""
    return (a - dagger(a)) / 2j


def phase_fix(columns: np.ndarray) -> np.ndarray:
    """Rotate each column so its first non-negligible entry is real positive."""
    cols = np.array(columns, dtype=complex, copy=True)
    if cols.ndim == 1:
        return phase_fix(cols[:, None])[:, 0]
    for j in range(cols.shape[1]):
        c = cols[:, j]
        mags = np.abs(c)
        peak = mags.max()
        if peak == 0:
            continue
        i = int(np.argmax(mags > 1e-8 * peak))
        cols[:, j] = c * (np.conj(c[i]) / mags[i])
    return cols


def complete_orthonormal(q: np.ndarray, count: int) -> np.ndarray:
    """Return ``count`` orthonormal columns orthogonal to the columns of ``q``.

    Candidates are the standard basis vectors in order, Gram--Schmidt'ed twice
    against everything accepted so far; the result is deterministic.
    """
    dim = q.shape[0]
    basis = [q[:, j] for j in range(q.shape[1])]
    out = []
    for i in range(dim):
        if len(out) == count:
            break
        v = np.zeros(dim, dtype=complex)
        v[i] = 1.0
        for _ in range(2):
            for b in basis:
                v = v - b * np.vdot(b, v)
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            v = v / nv
            basis.append(v)
            out.append(v)
    if len(out) < count:
        raise InvalidInputError(f"cannot complete: need {count} columns, ambient room {dim - q.shape[1]}")
    return np.stack(out, axis=1) if out else np.zeros((dim, 0), dtype=complex)


def is_hermitian(h: np.ndarray, rel_tol: float = 1e-12) -> bool:
    scale = max(float(np.max(np.abs(h))), 1.0)
    return float(np.max(np.abs(h - dagger(h)))) <= rel_tol * scale


# ---------------------------------------------------------------------------
# Hermitian eigensolver
# ---------------------------------------------------------------------------


def _rotation(a, b, h, active):
    """Complex Jacobi rotation zeroing ``h`` in ``[[a, h], [conj h, b]]``.

    Returns ``(c, s, phase)`` arrays; rows where ``active`` is false get the
    identity rotation so their data is left bit-for-bit untouched.
    """
    r = np.abs(h)
    # an off-diagonal below eps^2 of the diagonal scale is already zero at
    # working precision; rotating it only risks overflow in tau
    eps = np.finfo(r.dtype).eps
    do = active & (r > 0) & (r > eps * eps * (np.abs(a) + np.abs(b)))
    one = np.ones_like(r)
    rs = np.where(do, r, one)
    tau = (b - a) / (2 * rs)
    sgn = np.where(tau >= 0, one, -one)
    t = sgn / (np.abs(tau) + np.hypot(one, tau))
    c = 1 / np.sqrt(1 + t * t)
    s = t * c
    ph = np.where(do, h / rs, one.astype(h.dtype))
    c = np.where(do, c, one)
    s = np.where(do, s, 0 * one)
    return c, s, ph, do


@lru_cache(maxsize=None)
def _round_robin(n: int):
    """Round-robin schedule: ``n - 1`` rounds of disjoint index pairs covering every pair once."""
    players = list(range(n + (n % 2)))
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return tuple(rounds)


def _jacobi_eigh(h: np.ndarray, tol: float, max_sweeps: int):
    """Batched Jacobi on a stack ``(B, n, n)`` of Hermitian matrices.

    Each sweep visits every off-diagonal pair once, in round-robin order so the
    ``n // 2`` rotations of a round are disjoint and applied together.
    """
    a = np.array(h, copy=True)
    nb, n, _ = a.shape
    real = a.real.dtype.type
    eye = np.eye(n, dtype=a.dtype)
    v = np.broadcast_to(eye, a.shape).copy()
    idx = np.arange(n)
    a[:, idx, idx] = a[:, idx, idx].real
    scale = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    thresh = real(tol) * scale
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps if n > 1 else 0):
        off = np.sqrt(np.sum(np.abs(a * offmask) ** 2, axis=(1, 2)))
        active = off > thresh
        if not active.any():
            break
        act = active[:, None]
        for p, q in _round_robin(n):
            c, s, ph, do = _rotation(a[:, p, p].real, a[:, q, q].real, a[:, p, q], act)
            if not do.any():
                continue
            # identity outside the rotated 2x2 blocks: inactive rows stay bit-exact
            g = np.broadcast_to(eye, a.shape).copy()
            phc = np.conj(ph)
            g[:, p, p] = c
            g[:, p, q] = s
            g[:, q, p] = -s * phc
            g[:, q, q] = c * phc
            a = dagger(g) @ a @ g
            v = v @ g
            zero = np.zeros((), dtype=a.dtype)
            a[:, p, q] = np.where(do, zero, a[:, p, q])
            a[:, q, p] = np.where(do, zero, a[:, q, p])
            a[:, idx, idx] = a[:, idx, idx].real
    w = a[:, idx, idx].real
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, v


def eigh_stack(h: np.ndarray, tol: float | None = None, max_sweeps: int = MAX_SWEEPS):
    """Eigen-decompose a stack ``(..., n, n)`` of Hermitian matrices.

    Works in whatever complex dtype ``h`` carries (complex128 or clongdouble).
    Returns ``(values, vectors)`` with values ascending along the last axis.
    """
    h = np.asarray(h)
    if not np.iscomplexobj(h):
        h = h.astype(np.result_type(h.dtype, np.complex128))
    if tol is None:
        eps = np.finfo(h.real.dtype).eps
        tol = min(JACOBI_TOL, 64 * float(eps))
    shape = h.shape
    n = shape[-1]
    flat = h.reshape((-1, n, n))
    w, v = _jacobi_eigh(flat, tol, max_sweeps)
    return w.reshape(shape[:-1]), v.reshape(shape)


def herm_eig(h) -> HermitianEigen:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi.

    >>> herm_eig([[0, 1], [1, 0]]).values
    array([-1.,  1.])
    """
    m = as_matrix(h, "H", square=True)
    if not is_hermitian(m):
        raise InvalidInputError("H: matrix is not Hermitian")
    m = hermitian_part(m)
    w, v = eigh_stack(m[None])
    return HermitianEigen(values=w[0], vectors=phase_fix(v[0]))


def lambda_max(h: np.ndarray, with_vector: bool = False):
    """Largest eigenvalue (and optionally a unit eigenvector) of a Hermitian matrix."""
    w, v = eigh_stack(hermitian_part(np.asarray(h, dtype=complex))[None])
    if with_vector:
        return float(w[0, -1]), phase_fix(v[0][:, -1])
    return float(w[0, -1])


# ---------------------------------------------------------------------------
# norms and SVD
# ---------------------------------------------------------------------------


def op_norms(stack: np.ndarray, dtype=None) -> np.ndarray:
    """Operator norms of a stack ``(..., m, n)`` of matrices.

    Computed as ``sqrt(lambda_max(M*M))`` using the smaller Gram matrix.  Pass
    ``dtype=np.clongdouble`` to run the whole computation in extended
    precision.
    """
    a = np.asarray(stack)
    if dtype is not None:
        a = a.astype(dtype)
    elif not np.iscomplexobj(a):
        a = a.astype(complex)
    m, n = a.shape[-2:]
    gram = dagger(a) @ a if n <= m else a @ dagger(a)
    w, _ = eigh_stack(gram)
    return np.sqrt(np.maximum(w[..., -1], 0))


def op_norm(a) -> float:
    """Operator (spectral) norm ``sigma_max(A)``.

    >>> op_norm([[0, 2], [0, 0]])
    2.0
    """
    m = as_matrix(a, "A")
    return float(op_norms(m[None])[0])


def _hestenes(a: np.ndarray, tol: float, max_sweeps: int):
    """One-sided Jacobi: rotate column pairs of ``a`` until they are mutually orthogonal."""
    g = np.array(a, dtype=complex, copy=True)
    n = g.shape[1]
    eye = np.eye(n, dtype=complex)
    v = eye.copy()
    for _ in range(max_sweeps if n > 1 else 0):
        rotated = False
        for p, q in _round_robin(n):
            gp, gq = g[:, p], g[:, q]
            alpha = np.sum(np.abs(gp) ** 2, axis=0)
            beta = np.sum(np.abs(gq) ** 2, axis=0)
            gamma = np.sum(np.conj(gp) * gq, axis=0)
            need = (np.abs(gamma) > tol * np.sqrt(alpha * beta)) & (alpha > 0) & (beta > 0)
            if not need.any():
                continue
            rotated = True
            c, s, ph, _ = _rotation(alpha, beta, gamma, need)
            rot = eye.copy()
            phc = np.conj(ph)
            rot[p, p] = c
            rot[p, q] = s
            rot[q, p] = -s * phc
            rot[q, q] = c * phc
            g = g @ rot
            v = v @ rot
        if not rotated:
            break
    return g, v


def svd(a) -> Svd:
    """Thin SVD by one-sided Jacobi, phase-fixed for determinism.

    Right singular vectors have their first non-negligible component real
    positive; left vectors follow from ``A v = sigma u`` and are completed
    deterministically where ``sigma`` vanishes.
    """
    m = as_matrix(a, "A")
    rows, cols = m.shape
    if rows < cols:
        v = phase_fix(svd(m.conj().T).left)
        g = m @ v
        return _finish(m, g, np.linalg.norm(g, axis=0), v)
    g, v = _hestenes(m, tol=cols * np.finfo(float).eps, max_sweeps=MAX_SWEEPS)
    s = np.linalg.norm(g, axis=0)
    order = np.argsort(-s, kind="stable")
    s, g, v = s[order], g[:, order], v[:, order]
    v = phase_fix(v)
    g = m @ v
    s = np.linalg.norm(g, axis=0)
    return _finish(m, g, s, v)


def _finish(m, g, s, v):
    rows, cols = m.shape
    order = np.argsort(-s, kind="stable")
    g, s, v = g[:, order], s[order], v[:, order]
    smax = s.max() if s.size else 0.0
    rank_tol = max(rows, cols) * np.finfo(float).eps * smax
    keep = s > rank_tol
    u = np.zeros_like(g)
    u[:, keep] = g[:, keep] / s[keep]
    s = np.where(keep, s, 0.0)
    missing = np.flatnonzero(~keep)
    if missing.size:
        u[:, missing] = complete_orthonormal(u[:, keep], missing.size)
    return Svd(left=u, singular=s, right=v)


def max_singular_subspace(a, rel_tol: float = DEFAULT_REL_TOL) -> SubspaceBasis:
    """Right-singular subspace for singular values ``>= (1 - rel_tol) * ||A||``.

    For ``A`` with ``A*A - ||A||^2 I`` singular this is the kernel of that
    matrix; vectors in it are exactly the unit vectors with ``||A eta|| = ||A||``.
    """
    m = as_matrix(a, "A")
    t = svd(m)
    smax = t.singular[0]
    if smax == 0:
        raise DegenerateInputError("A = 0 has no maximal singular subspace")
    keep = t.singular >= (1 - rel_tol) * smax
    return SubspaceBasis(ambient_dim=m.shape[1], columns=t.right[:, keep])


def polar(a):
    """Polar decomposition ``A = W P`` with ``P = (A*A)^{1/2}`` and ``W`` a partial isometry."""
    m = as_matrix(a, "A")
    t = svd(m)
    keep = t.singular > 0
    w = t.left[:, keep] @ t.right[:, keep].conj().T
    p = (t.right * t.singular) @ t.right.conj().T
    return w, hermitian_part(p)


def polar_partial_isometry(a) -> np.ndarray:
    """``W = U_r V_r*`` over the nonzero singular triples of ``A``.

    >>> polar_partial_isometry(np.diag([2.0, 0.0])).real
    array([[1., 0.],
           [0., 0.]])
    """
    return polar(a)[0]


def psd_sqrt(h: np.ndarray) -> np.ndarray:
    """Square root of a positive semidefinite matrix (negative rounding clipped)."""
    e = herm_eig(hermitian_part(np.asarray(h, dtype=complex)))
    return (e.vectors * np.sqrt(np.clip(e.values, 0, None))) @ e.vectors.conj().T
