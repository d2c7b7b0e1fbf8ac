"""Concrete operator spaces and operator systems.

Three base spaces ``V`` are realised concretely: the scalars, the full matrix
algebra ``M_k`` and scalar functions on a finite label set.  An element of
``M_n(V)`` is a :class:`BlockOperator`; its matrix norm comes from the natural
C*-realisation of each base.

Block convention used throughout: an ``n x n`` block matrix over ``M_k`` is
realised as an ``nk x nk`` matrix with the block index outermost, i.e.
``R[p*k + i, q*k + j] = s[p, q][i, j]``.  A vector ``xi`` of ``C^{nk}`` is read
as ``n`` columns of length ``k``: column ``q`` is ``xi[q*k:(q+1)*k]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import DegenerateInputError, InvalidInputError, VerificationError
from .linalg import (
    as_matrix,
    complete_orthonormal,
    dagger,
    eigh_stack,
    hermitian_part,
    op_norm,
    op_norms,
    phase_fix,
    polar,
    psd_sqrt,
    svd,
)

# ---------------------------------------------------------------------------
# base spaces and block operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scalars:
    """``V = C``; a V-element is a complex number."""


@dataclass(frozen=True)
class FullMatrix:
    """``V = M_k``; a V-element is a ``k x k`` complex matrix."""

    k: int


@dataclass(frozen=True)
class Functions:
    """``V = C(X)`` for a finite ordered label set ``X``; a V-element is a vector indexed by ``X``."""

    labels: tuple

    def __post_init__(self):
        if len(self.labels) == 0:
            raise InvalidInputError("Functions: the label set must be nonempty")
        if len(set(self.labels)) != len(self.labels):
            raise InvalidInputError("Functions: labels must be distinct")


Base = Union[Scalars, FullMatrix, Functions]


def _element_shape(base: Base) -> tuple:
    if isinstance(base, Scalars):
        return ()
    if isinstance(base, FullMatrix):
        return (base.k, base.k)
    if isinstance(base, Functions):
        return (len(base.labels),)
    raise InvalidInputError(f"unknown base space {base!r}")


@dataclass(frozen=True)
class BlockOperator:
    """An element of ``M_n(V)``.

    ``blocks`` has shape ``(n, n) + element_shape``: ``(n, n)`` for scalars,
    ``(n, n, k, k)`` for ``M_k`` and ``(n, n, |X|)`` for functions on ``X``.
    """

    base: Base
    blocks: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.blocks, dtype=complex)
        tail = _element_shape(self.base)
        if b.ndim != 2 + len(tail) or b.shape[0] != b.shape[1] or b.shape[2:] != tail or b.shape[0] == 0:
            raise InvalidInputError(f"blocks of shape {b.shape} do not fit base {self.base}")
        if not np.all(np.isfinite(b)):
            raise InvalidInputError("blocks must be finite")
        object.__setattr__(self, "blocks", b)

    @property
    def n(self) -> int:
        return self.blocks.shape[0]

    # constructors -----------------------------------------------------------
    @classmethod
    def scalars(cls, matrix) -> "BlockOperator":
        return cls(Scalars(), as_matrix(matrix, "v", square=True))

    @classmethod
    def from_realization(cls, matrix, n: int, k: int) -> "BlockOperator":
        """Split an ``nk x nk`` matrix into an ``n x n`` array of ``k x k`` blocks."""
        m = as_matrix(matrix, "v", square=True)
        if m.shape[0] != n * k:
            raise InvalidInputError(f"expected a {n * k}x{n * k} matrix, got {m.shape}")
        return cls(FullMatrix(k), m.reshape(n, k, n, k).transpose(0, 2, 1, 3))

    @classmethod
    def from_evaluations(cls, labels: Sequence, values) -> "BlockOperator":
        """Build an element of ``M_n(C(X))`` from its pointwise values ``(|X|, n, n)``."""
        v = np.asarray(values, dtype=complex)
        if v.ndim != 3 or v.shape[0] != len(labels):
            raise InvalidInputError("values must have shape (|X|, n, n)")
        return cls(Functions(tuple(labels)), v.transpose(1, 2, 0))

    # realisations -----------------------------------------------------------
    def realization(self) -> np.ndarray:
        """The concrete matrix whose operator norm is ``||v||_n``.

        Scalars and ``M_k`` realise as one square matrix; functions on ``X``
        realise as the stack of pointwise evaluations ``(|X|, n, n)``.
        """
        if isinstance(self.base, Scalars):
            return self.blocks
        if isinstance(self.base, FullMatrix):
            n, k = self.n, self.base.k
            return self.blocks.transpose(0, 2, 1, 3).reshape(n * k, n * k)
        return self.evaluations()

    def evaluations(self) -> np.ndarray:
        if not isinstance(self.base, Functions):
            raise InvalidInputError("evaluations are defined for function spaces only")
        return self.blocks.transpose(2, 0, 1)

    def __add__(self, other: "BlockOperator") -> "BlockOperator":
        if other.base != self.base or other.blocks.shape != self.blocks.shape:
            raise InvalidInputError("cannot add block operators of different shapes")
        return BlockOperator(self.base, self.blocks + other.blocks)

    def scale(self, c: complex) -> "BlockOperator":
        return BlockOperator(self.base, c * self.blocks)


def matrix_norm(v: BlockOperator) -> float:
    """``||v||_n`` in the concrete realisation.

    >>> matrix_norm(BlockOperator.scalars(np.eye(2)))
    1.0
    """
    if isinstance(v.base, Functions):
        return float(np.max(op_norms(v.evaluations())))
    return op_norm(v.realization())


def direct_sum(v: BlockOperator, w: BlockOperator) -> BlockOperator:
    """``diag(v, w)`` in ``M_{n+m}(V)``."""
    if v.base != w.base:
        raise InvalidInputError("direct sum needs a common base space")
    n, m = v.n, w.n
    out = np.zeros((n + m, n + m) + v.blocks.shape[2:], dtype=complex)
    out[:n, :n] = v.blocks
    out[n:, n:] = w.blocks
    return BlockOperator(v.base, out)


def random_block(base: Base, n: int, rng: np.random.Generator) -> BlockOperator:
    shape = (n, n) + _element_shape(base)
    return BlockOperator(base, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


# ---------------------------------------------------------------------------
# linear maps V -> M_m
# ---------------------------------------------------------------------------


class LinearMapMixin:
    """Amplification ``phi_n(s) = [phi(s_pq)]`` for maps out of ``M_k``.

    Subclasses provide ``apply`` and ``codomain_dim``; the amplified matrix
    uses the block-outermost convention of the module.
    """

    codomain_dim: int

    def apply(self, a) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError

    def amplify(self, s) -> np.ndarray:
        if isinstance(s, BlockOperator):
            blocks = s.blocks
        else:
            blocks = np.asarray(s, dtype=complex)
            if blocks.ndim == 2:
                return self.apply(blocks)
        n = blocks.shape[0]
        m = self.codomain_dim
        flat = blocks.reshape((n * n,) + blocks.shape[2:])
        images = self.apply_stack(flat).reshape(n, n, m, m)
        return images.transpose(0, 2, 1, 3).reshape(n * m, n * m)

    def apply_stack(self, stack: np.ndarray) -> np.ndarray:
        return np.stack([self.apply(a) for a in stack])


@dataclass(frozen=True)
class ScalarMap(LinearMapMixin):
    """``phi(lambda) = lambda * T`` on ``V = C``."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", as_matrix(self.matrix, "T", square=True))

    @property
    def codomain_dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, a) -> np.ndarray:
        return complex(a) * self.matrix

    def apply_stack(self, stack):
        return np.asarray(stack, dtype=complex).reshape(-1, 1, 1) * self.matrix


@dataclass(frozen=True)
class CallableMap(LinearMapMixin):
    """Wrap an arbitrary linear ``fn: V-element -> m x m matrix``."""

    fn: Callable
    codomain_dim: int

    def apply(self, a) -> np.ndarray:
        return np.asarray(self.fn(a), dtype=complex)


@dataclass(frozen=True)
class UcpMap(LinearMapMixin):
    """``phi(a) = V* (a (x) I_m) V`` from ``M_k`` to ``M_n`` with ``V*V = I_n``."""

    stinespring_isometry: np.ndarray
    domain_dim: int
    codomain_dim: int

    def __post_init__(self):
        v = np.asarray(self.stinespring_isometry, dtype=complex)
        if v.shape[1] != self.codomain_dim or v.shape[0] % self.domain_dim:
            raise InvalidInputError(f"isometry shape {v.shape} incompatible with M_{self.domain_dim} -> M_{self.codomain_dim}")
        object.__setattr__(self, "stinespring_isometry", v)

    @property
    def multiplicity(self) -> int:
        return self.stinespring_isometry.shape[0] // self.domain_dim

    def apply(self, a) -> np.ndarray:
        return self.apply_stack(np.asarray(a, dtype=complex)[None])[0]

    def apply_stack(self, stack):
        v = self.stinespring_isometry
        amp = np.kron(np.asarray(stack, dtype=complex), np.eye(self.multiplicity))
        return dagger(v) @ amp @ v

    def choi(self) -> np.ndarray:
        return choi_matrix(self, self.domain_dim)

    def isometry_residual(self) -> float:
        v = self.stinespring_isometry
        return float(np.max(np.abs(dagger(v) @ v - np.eye(self.codomain_dim))))

    def unital_residual(self) -> float:
        return float(np.max(np.abs(self.apply(np.eye(self.domain_dim)) - np.eye(self.codomain_dim))))


def choi_matrix(phi: LinearMapMixin, k: int) -> np.ndarray:
    """``[phi(E_ij)]_{ij}``, PSD exactly when ``phi`` is completely positive."""
    units = np.zeros((k, k, k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            units[i, j, i, j] = 1.0
    return phi.amplify(units)


# ---------------------------------------------------------------------------
# Hahn--Banach functionals and their factorisation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DualFunctional:
    """``F(u) = <u xi, zeta> = zeta* U xi`` on ``M_n(M_k)`` realised as ``nk x nk`` matrices."""

    xi: np.ndarray
    zeta: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=complex).reshape(-1)
        zeta = np.asarray(self.zeta, dtype=complex).reshape(-1)
        if xi.shape != zeta.shape:
            raise InvalidInputError("xi and zeta must have the same length")
        for name, x in (("xi", xi), ("zeta", zeta)):
            if abs(np.linalg.norm(x) - 1) > 1e-12:
                raise InvalidInputError(f"{name} must be a unit vector")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "zeta", zeta)

    def __call__(self, u) -> complex:
        m = u.realization() if isinstance(u, BlockOperator) else np.asarray(u, dtype=complex)
        return complex(np.vdot(self.zeta, m @ self.xi))


def hahn_banach_functional(v: BlockOperator) -> DualFunctional:
    """Norm-one functional with ``F(v) = ||v||_n`` from a top singular pair.

    >>> f = hahn_banach_functional(BlockOperator.from_realization(np.diag([2.0, 1.0]), 1, 2))
    >>> round(f(np.diag([2.0, 1.0])).real, 12)
    2.0
    """
    if not isinstance(v.base, FullMatrix):
        raise InvalidInputError("hahn_banach_functional needs a block operator over M_k")
    t = svd(v.realization())
    if t.singular[0] == 0:
        raise DegenerateInputError("v = 0 has no norming functional")
    return DualFunctional(xi=t.right[:, 0], zeta=t.left[:, 0])


def columns_of(x: np.ndarray, n: int, k: int) -> np.ndarray:
    """Reshape ``x in C^{nk}`` into the ``k x n`` matrix whose ``q``-th column is ``x[q*k:(q+1)*k]``."""
    x = np.asarray(x, dtype=complex).reshape(-1)
    if x.shape[0] != n * k:
        raise InvalidInputError(f"vector of length {x.shape[0]} is not in C^{n * k}")
    return x.reshape(n, k).T


def _polar_isometry(m: np.ndarray):
    """Polar ``M = W P`` with ``W`` extended to an isometry when ``M`` has room for it."""
    w, p = polar(m)
    rows, cols = m.shape
    if rows >= cols:
        t = svd(m)
        rank = int(np.sum(t.singular > 0))
        if rank < cols:
            left = t.left[:, :rank]
            extra = complete_orthonormal(left, cols - rank)
            w = w + extra @ dagger(t.right[:, rank:])
    return w, p


@dataclass(frozen=True)
class CbFactorization(LinearMapMixin):
    """``phi(a) = W_left* (a (x) I_r) W_right`` with vectors ``eta`` and ``xi_prime``.

    ``W_left`` and ``W_right`` are ``kr x n`` contractions, so ``phi`` is
    completely contractive; the represented functional is
    ``u -> <phi_n(u) eta, xi_prime>``.  ``multiplicity`` is 1 for a plain
    rank-one functional.
    """

    W_left: np.ndarray
    W_right: np.ndarray
    eta: np.ndarray
    xi_prime: np.ndarray
    k: int
    multiplicity: int = 1

    @property
    def codomain_dim(self) -> int:
        return self.W_right.shape[1]

    def apply(self, a) -> np.ndarray:
        return self.apply_stack(np.asarray(a, dtype=complex)[None])[0]

    def apply_stack(self, stack):
        amp = np.kron(np.asarray(stack, dtype=complex), np.eye(self.multiplicity))
        return dagger(self.W_left) @ amp @ self.W_right

    def functional(self, u) -> complex:
        return complex(np.vdot(self.xi_prime, self.amplify(u) @ self.eta))


def _factor(xi_cols: np.ndarray, zeta_cols: np.ndarray, k: int, r: int) -> CbFactorization:
    wx, px = _polar_isometry(xi_cols)
    wz, pz = _polar_isometry(zeta_cols)
    eta = px.T.reshape(-1)  # stacked columns P_X e_q
    xi_prime = pz.T.reshape(-1)
    return CbFactorization(W_left=wz, W_right=wx, eta=eta, xi_prime=xi_prime, k=k, multiplicity=r)


def cb_factorization(f: DualFunctional, n: int, k: int) -> CbFactorization:
    """Factor ``F(u) = <u xi, zeta>`` as ``<phi_n(u) eta, xi'>`` with ``phi`` completely contractive.

    With polar decompositions ``Xi = W_X P_X`` and ``Z = W_Z P_Z`` of the
    reshaped vectors, ``phi(a) = W_Z* a W_X``, ``eta_q = P_X e_q`` and
    ``xi'_p = P_Z e_p``.  Since ``W_X P_X e_q = xi_q`` the identity is exact.
    """
    return _factor(columns_of(f.xi, n, k), columns_of(f.zeta, n, k), k, 1)


def reproduction_residual(fac: CbFactorization, f: DualFunctional, samples: Sequence[np.ndarray]) -> float:
    """Largest ``|F(u) - <phi_n(u) eta, xi'>|`` over ``samples`` (``nk x nk`` realisations)."""
    n, k = fac.codomain_dim, fac.k
    worst = 0.0
    for u in samples:
        blocks = BlockOperator.from_realization(u, n, k)
        worst = max(worst, abs(f(u) - fac.functional(blocks)))
    return worst


# ---------------------------------------------------------------------------
# certificates for orthogonality to a subspace
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubspaceCertificate:
    """Completely contractive ``phi`` and unit ``eta`` certifying ``v`` orthogonal to ``W``.

    ``norm_residual = | ||phi_n(v) eta|| - ||v|| |`` and ``orth_residuals``
    lists ``|<phi_n(v) eta, phi_n(w) eta>|`` for each ``w``.  ``density`` is
    the state the certificate was built from and ``rank`` its rank, which
    becomes the multiplicity of the dilation.  ``single_vector`` is true when
    the vector certificate re-verified at the stated tolerance.
    """

    factorization: CbFactorization
    density: np.ndarray
    rank: int
    norm_residual: float
    orth_residuals: tuple
    single_vector: bool

    @property
    def eta(self) -> np.ndarray:
        return self.factorization.eta


def _rank_terms(rho: np.ndarray, rel_tol: float = 1e-12):
    w, v = eigh_stack(hermitian_part(rho)[None])
    w, v = w[0], v[0]
    keep = w > rel_tol * max(w[-1], 0)
    w, v = np.clip(w[keep], 0, None), phase_fix(v[:, keep])
    return w / w.sum(), v


def thm3_certificate(v: BlockOperator, W_list: Sequence[BlockOperator], tol: float = 1e-6, seed: int = 0) -> SubspaceCertificate:
    """Vector certificate for ``||v||_n <= ||v + w||_n`` on ``span(W_list)``.

    The density certificate ``rho`` of the subspace decision defines the
    norm-attaining functional ``F(u) = tr(rho A* U)/||A||`` that vanishes on
    ``W``.  Writing ``rho = sum_s l_s x_s x_s*``, ``F`` is a sum of rank-one
    terms ``<U x_s, A x_s/||A||>``; stacking ``sqrt(l_s)`` times the reshaped
    vectors gives one factorisation with multiplicity ``rank(rho)``.  Because
    ``F(v) = ||v||`` and ``phi`` is completely contractive,
    ``phi_n(v) eta = ||v|| xi'``, which yields both certificate equations.
    """
    from .orthogonality import Verdict, bj_subspace

    if not isinstance(v.base, FullMatrix):
        raise InvalidInputError("thm3_certificate needs block operators over M_k")
    n, k = v.n, v.base.k
    if any(w.base != v.base or w.n != n for w in W_list):
        raise InvalidInputError("every element of W must have the shape of v")
    a = v.realization()
    bs = [w.realization() for w in W_list]
    decision = bj_subspace(a, bs, seed=seed)
    if decision.verdict is not Verdict.ORTHOGONAL:
        raise InvalidInputError(f"v is not certified orthogonal to W (verdict {decision.verdict.value})")
    rho = decision.certificate.matrix
    norm_a = op_norm(a)
    lam, xs = _rank_terms(rho)
    r = lam.shape[0]
    ys = a @ xs / norm_a
    ys = ys / np.linalg.norm(ys, axis=0)
    sq = np.sqrt(lam)
    # rows indexed i*r + s to match a (x) I_r
    xi_big = np.einsum("s,iqs->isq", sq, np.stack([columns_of(xs[:, s], n, k) for s in range(r)], axis=2)).reshape(k * r, n)
    z_big = np.einsum("s,iqs->isq", sq, np.stack([columns_of(ys[:, s], n, k) for s in range(r)], axis=2)).reshape(k * r, n)
    fac = _factor(xi_big, z_big, k, r)
    fv = fac.amplify(v) @ fac.eta
    norm_res = abs(np.linalg.norm(fv) - norm_a)
    orth = tuple(float(abs(np.vdot(fac.amplify(w) @ fac.eta, fv))) for w in W_list)
    ok = norm_res <= tol * max(1.0, norm_a) and all(o <= tol * max(1.0, norm_a) * max(1.0, matrix_norm(w)) for o, w in zip(orth, W_list))
    return SubspaceCertificate(
        factorization=fac, density=rho, rank=r, norm_residual=float(norm_res), orth_residuals=orth, single_vector=bool(ok)
    )


# ---------------------------------------------------------------------------
# matrix states from vectors
# ---------------------------------------------------------------------------


def ucp_from_vector(xi, n: int, k: int):
    """Matrix state ``phi: M_k -> M_n`` and unit ``eta`` with ``<phi_n(s) eta, eta> = <s xi, xi>``.

    ``T e_q = xi_q (x) e_1`` in ``C^k (x) C^n`` has polar form ``T = V_0 P``
    with ``P = (Xi* Xi)^{1/2}``; ``V_0`` is extended to an isometry ``V`` by
    Gram--Schmidt over the standard basis, ``phi(a) = V* (a (x) I_n) V`` and
    ``eta_q = P e_q``.
    """
    x = np.asarray(xi, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(x) - 1) > 1e-10:
        raise InvalidInputError("xi must be a unit vector")
    cols = columns_of(x, n, k)
    e1 = np.zeros(n)
    e1[0] = 1.0
    t = np.stack([np.kron(cols[:, q], e1) for q in range(n)], axis=1)  # kn x n
    st = svd(t)
    rank = int(np.sum(st.singular > 0))
    v = st.left[:, :rank] @ dagger(st.right[:, :rank])
    if rank < n:
        extra = complete_orthonormal(st.left[:, :rank], n - rank)
        v = v + extra @ dagger(st.right[:, rank:])
    p = psd_sqrt(dagger(cols) @ cols)
    eta = p.T.reshape(-1)
    return UcpMap(stinespring_isometry=v, domain_dim=k, codomain_dim=n), eta


def pairing_residual(phi: UcpMap, eta: np.ndarray, xi: np.ndarray, s: BlockOperator) -> float:
    lhs = np.vdot(eta, phi.amplify(s) @ eta)
    rhs = np.vdot(xi, s.realization() @ xi)
    return float(abs(lhs - rhs))


# ---------------------------------------------------------------------------
# support-mapping verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SupportMappingReport:
    """``attained_gap = |rho*(phi_n(v)) - ||v||_n|`` and the worst ``||w|| - rho*(phi_m(w))`` per level."""

    attained_gap: float
    worst_margins: dict = field(default_factory=dict)
    valid: bool = False


def _rho_star_matrix(m: np.ndarray) -> float:
    w, _ = eigh_stack(hermitian_part(m)[None])
    return float(w[0, -1])


def support_mapping_check(phi: LinearMapMixin, v: BlockOperator, levels: int = 3, samples: int = 50, seed: int = 0,
                          attain_tol: float = 1e-8, contract_tol: float = 1e-9) -> SupportMappingReport:
    """Check ``rho*(phi_n(v)) = ||v||_n`` and sampled ``rho*(phi_m(w)) <= ||w||_m`` for ``m <= levels``.

    Each sampled ``w`` is also tried in four rotations ``i^j w``, so the
    check bounds the numerical radius rather than one half-plane only.
    """
    rng = np.random.default_rng(seed)
    gap = abs(_rho_star_matrix(phi.amplify(v)) - matrix_norm(v))
    margins = {}
    for m in range(1, levels + 1):
        worst = np.inf
        for _ in range(samples):
            w = random_block(v.base, m, rng)
            nw = matrix_norm(w)
            for j in range(4):
                worst = min(worst, nw - _rho_star_matrix(phi.amplify(w.scale(1j**j))))
        margins[m] = float(worst)
    valid = gap <= attain_tol * max(1.0, matrix_norm(v)) and all(mg >= -contract_tol for mg in margins.values())
    return SupportMappingReport(attained_gap=float(gap), worst_margins=margins, valid=bool(valid))


def assert_ucp(phi: UcpMap, tol: float = 1e-10) -> None:
    """Raise :class:`VerificationError` unless ``phi`` is unital with a PSD Choi matrix."""
    if phi.isometry_residual() > tol:
        raise VerificationError(f"V*V != I (residual {phi.isometry_residual():.3e})")
    lmin = float(eigh_stack(hermitian_part(phi.choi())[None])[0][0, 0])
    if lmin < -tol:
        raise VerificationError(f"Choi matrix is not PSD (lambda_min {lmin:.3e})")
