"""Numerical-range computations.

``W(M) = {<M eta, eta> : ||eta|| = 1}`` is compact and convex
(Toeplitz--Hausdorff).  Its support function in direction ``e^{-i theta}`` is
``g(theta) = lambda_max(Re(e^{i theta} M))``, and the top eigenvector of that
Hermitian matrix produces a boundary point.  Everything here is built from
those two facts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NotFoundError
from .linalg import as_matrix, eigh_stack, hermitian_part, lambda_max, phase_fix, skew_part

GRID_POINTS = 720
REFINE_WIDTH = 1e-10
_GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class RangeCertificate:
    """Unit ``vector`` with ``<M vector, vector> = value`` up to ``residual`` from the target."""

    vector: np.ndarray
    value: complex
    residual: float


@dataclass(frozen=True)
class ZeroMembership:
    """Outcome of :func:`contains_zero`.

    ``theta`` is the minimiser of the support function and ``support_value``
    its value there.  When ``contains`` is false, the half-plane
    ``Re(e^{i theta} w) <= support_value < 0`` contains ``W(M)`` and
    separates it from the origin.
    """

    contains: bool
    theta: float
    support_value: float

    def __bool__(self) -> bool:
        return self.contains


def rho_star(a, with_vector: bool = False):
    """``sup{<Re(A) eta, eta> : ||eta|| = 1} = lambda_max(Re A)``.

    This is the sup form, so the result is negative when ``Re A`` is negative
    definite (e.g. ``rho_star(-I) == -1``).  With ``with_vector`` a unit vector
    attaining the supremum is returned as well.
    """
    m = as_matrix(a, "A", square=True)
    return lambda_max(hermitian_part(m), with_vector=with_vector)


def support_values(m: np.ndarray, thetas: np.ndarray, with_vectors: bool = False):
    """``g(theta) = lambda_max(Re(e^{i theta} M))`` for every angle in ``thetas``."""
    thetas = np.asarray(thetas, dtype=float)
    h, k = hermitian_part(m), skew_part(m)
    stack = np.cos(thetas)[:, None, None] * h - np.sin(thetas)[:, None, None] * k
    w, v = eigh_stack(stack)
    if with_vectors:
        return w[:, -1], v[:, :, -1]
    return w[:, -1]


def _golden_min(f, lo: float, hi: float, width: float):
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > width:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def min_support(m, grid: int = GRID_POINTS, width: float = REFINE_WIDTH):
    """Minimise the support function over ``[0, 2 pi)``.

    A uniform grid locates candidate minima; each one that could still beat
    the incumbent (``g`` is ``||M||``-Lipschitz) is refined by golden-section
    search to ``width``.  Returns ``(theta, value)``.
    """
    m = as_matrix(m, "M", square=True)
    step = 2 * math.pi / grid
    thetas = np.arange(grid) * step
    g = support_values(m, thetas)
    lip = float(np.max(np.abs(m))) * m.shape[0]
    best = int(np.argmin(g))
    best_theta, best_val = float(thetas[best]), float(g[best])
    left, right = np.roll(g, 1), np.roll(g, -1)
    candidates = np.flatnonzero((g <= left) & (g <= right))
    candidates = candidates[np.argsort(g[candidates])]

    def f(t):
        return float(support_values(m, np.array([t]))[0])

    for i in candidates:
        if g[i] - lip * step > best_val:
            break
        t, val = _golden_min(f, thetas[i] - step, thetas[i] + step, width)
        if val < best_val:
            best_theta, best_val = t % (2 * math.pi), val
    return best_theta, best_val


def contains_zero(m, tol: float = 1e-10) -> ZeroMembership:
    """Decide ``0 in W(M)`` via ``min_theta g(theta) >= -tol``.

    >>> bool(contains_zero(np.eye(2)))
    False
    """
    theta, val = min_support(m)
    return ZeroMembership(contains=val >= -tol, theta=theta, support_value=val)


# ---------------------------------------------------------------------------
# constructive Toeplitz--Hausdorff
# ---------------------------------------------------------------------------


def _value(n: np.ndarray, x: np.ndarray) -> complex:
    return complex(np.vdot(x, n @ x) / np.vdot(x, x).real)


def _segment_vector(n, x1, x2, w1, w2, target, iters):
    """Unit vector realising ``target`` on the segment ``[w1, w2]`` of values of ``n``.

    The phase of ``x2`` is chosen so that ``t -> value((1-t) x1 + t x2)`` stays
    on the line through ``w1`` and ``w2``; bisection then locates the crossing.
    """
    d = w2 - w1
    if abs(d) == 0:
        return x1
    rot = np.conj(d) / abs(d)
    nr = (n - target * np.eye(n.shape[0])) * rot
    k = skew_part(nr)
    c = np.vdot(x1, k @ x2)
    ph = 1.0 if abs(c) == 0 else 1j * np.conj(c) / abs(c)
    y2 = ph * x2
    if np.vdot(x1, y2).real < 0:
        y2 = -y2

    def f(t):
        x = (1 - t) * x1 + t * y2
        return _value(nr, x).real

    lo, hi = 0.0, 1.0
    flo, fhi = f(lo), f(hi)
    if flo > 0 and fhi > 0 or flo < 0 and fhi < 0:
        # target not bracketed (rounding at an endpoint): return the closer end
        return x1 if abs(flo) <= abs(fhi) else y2
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fm = f(mid)
        if (fm <= 0) == (flo <= 0):
            lo, flo = mid, fm
        else:
            hi = mid
    x = (1 - lo) * x1 + lo * y2
    return x / np.linalg.norm(x)


def _cross(x, y):
    return (np.conj(x) * y).imag


def _crossing(points, anchor, tol):
    """Farthest point beyond the origin where the ray from ``anchor`` through 0 meets the polygon.

    Returns ``(u, kind, j, v)``: ``kind`` is ``"vertex"`` (point ``j``) or
    ``"edge"`` (between ``j`` and ``j+1`` at parameter ``v``), or ``None``
    when the ray misses the polygon beyond the origin.
    """
    pa = points[anchor]
    d = -pa
    dd = abs(d) ** 2
    nxt = np.roll(points, -1)
    e = nxt - points
    rel = points - pa
    best = None
    den = _cross(d, e)
    ok = np.abs(den) > 1e-14 * dd
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(ok, _cross(rel, e) / np.where(ok, den, 1), -np.inf)
        v = np.where(ok, _cross(rel, d) / np.where(ok, den, 1), -1)
    hit = ok & (v >= -1e-12) & (v <= 1 + 1e-12) & (u >= 1 - 1e-12)
    for j in np.flatnonzero(hit):
        if best is None or u[j] > best[0]:
            best = (float(u[j]), "edge", int(j), float(np.clip(v[j], 0, 1)))
    # vertices lying on the ray's line (degenerate or collinear polygons)
    on_line = np.abs(_cross(d, rel)) <= tol * np.sqrt(dd)
    uv = (np.conj(d) * rel).real / dd
    for j in np.flatnonzero(on_line & (uv >= 1 - 1e-12)):
        if best is None or uv[j] > best[0]:
            best = (float(uv[j]), "vertex", int(j), 0.0)
    return best


def range_point_certificate(m, z: complex, tol: float = 1e-8, max_iter: int = 200) -> RangeCertificate:
    """Construct a unit ``eta`` with ``|<M eta, eta> - z| <= tol``.

    Boundary points of ``W(M - z)`` are sampled from support eigenvectors.  The
    ray from the farthest sample through the origin exits the sampled
    polygon at a point ``q`` on an edge; one segment construction realises
    ``q`` from the edge's two vectors and a second realises 0 on the segment
    from the anchor to ``q``.  The angle grid is refined when the origin is
    not yet enclosed.

    Raises :class:`NotFoundError` when no certificate is reached, which means
    ``z`` most likely lies outside ``W(M)``.
    """
    mat = as_matrix(m, "M", square=True)
    z = complex(z)
    dim = mat.shape[0]
    n = mat - z * np.eye(dim)
    scale = max(float(np.max(np.abs(mat))), 1.0)
    if dim == 1:
        res = abs(n[0, 0])
        if res > tol:
            raise NotFoundError(f"z={z} is not in W(M) (distance {res:.3e})")
        return RangeCertificate(vector=np.ones(1, dtype=complex), value=complex(mat[0, 0]), residual=float(res))

    grid = GRID_POINTS
    best_res, best_vec = math.inf, None
    for _ in range(5):
        thetas = np.arange(grid) * (2 * math.pi / grid)
        _, vecs = support_values(n, thetas, with_vectors=True)
        vals = np.einsum("ti,ij,tj->t", np.conj(vecs), n, vecs)
        close = int(np.argmin(np.abs(vals)))
        if abs(vals[close]) <= tol * 1e-3:
            x = vecs[close]
        else:
            anchor = int(np.argmax(np.abs(vals)))
            hit = _crossing(vals, anchor, tol * 1e-3 * scale)
            if hit is None:
                grid *= 2
                continue
            _, kind, j, v = hit
            if kind == "vertex":
                xq = vecs[j]
            else:
                k = (j + 1) % grid
                q = vals[j] + v * (vals[k] - vals[j])
                xq = _segment_vector(n, vecs[j], vecs[k], vals[j], vals[k], q, max_iter)
            x = _segment_vector(n, vecs[anchor], xq, vals[anchor], _value(n, xq), 0.0, max_iter)
        eta = phase_fix(x / np.linalg.norm(x))
        value = complex(np.vdot(eta, mat @ eta))
        res = abs(value - z)
        if res <= tol:
            return RangeCertificate(vector=eta, value=value, residual=float(res))
        if res < best_res:
            best_res, best_vec = res, eta
        grid *= 2
    raise NotFoundError(f"no vector realises z={z} within tol={tol:g} (best residual {best_res:.3e})")


def numerical_range_value(m, eta) -> complex:
    """``<M eta, eta>`` for a (not necessarily normalised) vector ``eta``."""
    mat = as_matrix(m, "M", square=True)
    x = np.asarray(eta, dtype=complex).reshape(-1)
    if x.shape[0] != mat.shape[0]:
        raise InvalidInputError("eta has the wrong dimension")
    return _value(mat, x)
