"""Finite positive operator-valued measures and operator-valued integration.

On a finite label set every subset's effect is the sum of its atoms, so a
measure is stored by its atoms ``nu({x})``.  Block conventions: a block
measure on ``M_n (x) M_n`` built from ``omega`` is ``omega(x) (x) J`` with the
``omega`` factor outermost (``np.kron(omega(x), J)``), and the block integral
of ``F`` is ``sum_x omega(x) (x) F(x)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidInputError
from .linalg import dagger, eigh_stack, hermitian_part, op_norm, op_norms

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
UNIT_TOL = 1e-10


def _labels(labels) -> tuple:
    labels = tuple(labels)
    if len(labels) == 0:
        raise InvalidInputError("label set must be nonempty")
    if len(set(labels)) != len(labels):
        raise InvalidInputError("labels must be distinct")
    return labels


def _stack(values, count: int, name: str) -> np.ndarray:
    v = np.asarray(values, dtype=complex)
    if v.ndim != 3 or v.shape[0] != count or v.shape[1] != v.shape[2]:
        raise InvalidInputError(f"{name}: expected shape ({count}, d, d), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name}: entries must be finite")
    return v


@dataclass(frozen=True)
class FinitePovm:
    """Atoms ``effects[i] = nu({labels[i]})`` of a measure on a finite set."""

    labels: tuple
    effects: np.ndarray

    def __post_init__(self):
        labels = _labels(self.labels)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "effects", _stack(self.effects, len(labels), "effects"))

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    def index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidInputError(f"unknown label {label!r}") from None

    def effect(self, label) -> np.ndarray:
        return self.effects[self.index(label)]

    def effect_of(self, subset: Iterable) -> np.ndarray:
        """``nu(S)`` as the sum of the atoms in ``S``."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for x in set(subset):
            out = out + self.effect(x)
        return out

    def total(self) -> np.ndarray:
        return self.effects.sum(axis=0)

    @property
    def quantum_probability(self) -> bool:
        return bool(np.max(np.abs(self.total() - np.eye(self.dim))) <= UNIT_TOL)


@dataclass(frozen=True)
class BlockMeasure(FinitePovm):
    """Measure with values in ``M_n (x) M_n``; ``n`` is the size of each tensor factor."""

    n: int = 0

    def __post_init__(self):
        super().__post_init__()
        if self.n * self.n != self.dim:
            raise InvalidInputError(f"block measure of dimension {self.dim} is not n^2 for n={self.n}")


@dataclass(frozen=True)
class MatrixFunction:
    """``F = (f_ij)`` in ``M_n(C(X))`` stored by pointwise values ``values[i] = F(labels[i])``."""

    labels: tuple
    values: np.ndarray

    def __post_init__(self):
        labels = _labels(self.labels)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", _stack(self.values, len(labels), "values"))

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def norm(self) -> float:
        """``||F|| = max_x ||F(x)||``."""
        return float(np.max(op_norms(self.values)))


@dataclass(frozen=True)
class PovmReport:
    valid: bool
    quantum_probability: bool
    violations: list = field(default_factory=list)
    total_spectrum: np.ndarray = field(default_factory=lambda: np.zeros(0))


def validate_povm(nu: FinitePovm) -> PovmReport:
    """Check every effect is Hermitian with spectrum in ``[0, 1]`` and report the total's spectrum.

    Violations are listed in the report rather than raised.
    """
    problems = []
    for x, e in zip(nu.labels, nu.effects):
        scale = max(1.0, float(np.max(np.abs(e))))
        herm = float(np.max(np.abs(e - dagger(e))))
        if herm > HERMITIAN_TOL * scale:
            problems.append(f"effect {x!r} is not Hermitian (defect {herm:.3e})")
            continue
        w = eigh_stack(hermitian_part(e)[None])[0][0]
        if w[0] < -PSD_TOL:
            problems.append(f"effect {x!r} is not PSD (lambda_min {w[0]:.3e})")
        if w[-1] > 1 + PSD_TOL:
            problems.append(f"effect {x!r} exceeds the identity (lambda_max {w[-1]:.6g})")
    total = hermitian_part(nu.total())
    spectrum = eigh_stack(total[None])[0][0]
    if spectrum[-1] > 1 + PSD_TOL:
        problems.append(f"total effect exceeds the identity (lambda_max {spectrum[-1]:.6g})")
    return PovmReport(valid=not problems, quantum_probability=nu.quantum_probability and not problems,
                      violations=problems, total_spectrum=spectrum)


def point_mass(labels: Sequence, x, n: int) -> FinitePovm:
    """Quantum probability measure on ``M_n`` with ``nu({x}) = I`` and every other atom 0."""
    labels = _labels(labels)
    if x not in labels:
        raise InvalidInputError(f"unknown label {x!r}")
    effects = np.zeros((len(labels), n, n), dtype=complex)
    effects[labels.index(x)] = np.eye(n)
    return FinitePovm(labels, effects)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


def _scalar_values(f, labels) -> np.ndarray:
    if isinstance(f, Mapping):
        missing = [x for x in labels if x not in f]
        if missing:
            raise InvalidInputError(f"f is undefined at labels {missing!r}")
        return np.array([complex(f[x]) for x in labels])
    if callable(f):
        return np.array([complex(f(x)) for x in labels])
    vals = np.asarray(f, dtype=complex).reshape(-1)
    if vals.shape[0] != len(labels):
        raise InvalidInputError(f"f has {vals.shape[0]} values for {len(labels)} labels")
    return vals


def integrate_scalar(f, nu: FinitePovm) -> np.ndarray:
    """``int f dnu = sum_x f(x) nu({x})``.

    ``f`` may be a mapping from labels, a callable, or a sequence aligned
    with ``nu.labels``.
    """
    vals = _scalar_values(f, nu.labels)
    return np.einsum("x,xij->ij", vals, nu.effects)


def integrate_block(f: MatrixFunction, omega: FinitePovm) -> np.ndarray:
    """``sum_ij (int f_ij domega) (x) E_ij = sum_x omega(x) (x) F(x)``."""
    if tuple(f.labels) != tuple(omega.labels):
        raise InvalidInputError("F and omega must share the label set")
    if f.n != omega.dim:
        raise InvalidInputError(f"F has block size {f.n} but omega acts on dimension {omega.dim}")
    return sum(np.kron(w, v) for w, v in zip(omega.effects, f.values))


def matrix_state(omega: FinitePovm):
    """The unital map ``phi(f) = int f domega`` on scalar functions."""

    def phi(values) -> np.ndarray:
        return integrate_scalar(values, omega)

    return phi


def amplified_state(f: MatrixFunction, omega: FinitePovm) -> np.ndarray:
    """``phi_n(F) = sum_ij phi(f_ij) (x) E_ij`` entry by entry (reference evaluation order)."""
    phi = matrix_state(omega)
    n = f.n
    out = np.zeros((omega.dim * n, omega.dim * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            unit = np.zeros((n, n))
            unit[i, j] = 1.0
            out += np.kron(phi(f.values[:, i, j]), unit)
    return out


def state_to_block_measure(omega: FinitePovm) -> BlockMeasure:
    """``nu(x) = sum_ij omega(x) (x) E_ij = omega(x) (x) J``.

    Each atom is PSD, but ``nu(X) = I (x) J`` has top eigenvalue ``n``, so the
    result is not normalised; its ``quantum_probability`` flag reads false
    for ``n > 1``.
    """
    n = omega.dim
    j = np.ones((n, n))
    return BlockMeasure(omega.labels, np.stack([np.kron(w, j) for w in omega.effects]), n=n)


def integrate_block_measure(f: MatrixFunction, nu: BlockMeasure) -> np.ndarray:
    """``int F dnu`` for a block measure: ``sum_x nu(x) o (J (x) F(x))`` (entrywise product).

    Component ``(i, j)`` of the second tensor factor integrates ``f_ij``.
    """
    if tuple(f.labels) != tuple(nu.labels) or f.n != nu.n:
        raise InvalidInputError("F and nu must share labels and block size")
    j = np.ones((nu.n, nu.n))
    return sum(e * np.kron(j, v) for e, v in zip(nu.effects, f.values))


@dataclass(frozen=True)
class CompressedMeasure:
    """``omega'(x) = W* nu(x) W`` with ``W e_i = eta_i (x) eps_i``.

    ``xi`` solves ``W xi = eta`` (1 on slots with ``eta_i != 0``); it is not a
    unit vector in general.  ``contraction`` is ``||W|| = max_i ||eta_i||``.
    """

    W: np.ndarray
    omega: FinitePovm
    xi: np.ndarray
    contraction: float
    measure_residual: float


def split_vector(eta, n: int) -> np.ndarray:
    """Components ``eta_i`` of ``eta = sum_i eta_i (x) eps_i`` as the columns of an ``n x n`` array."""
    x = np.asarray(eta, dtype=complex).reshape(-1)
    if x.shape[0] != n * n:
        raise InvalidInputError(f"eta must have length {n * n}")
    return x.reshape(n, n)


def embed_vector(xi) -> np.ndarray:
    """``eta = sum_i xi_i e_i (x) eps_i``; compressing along it turns ``<omega' 1, 1>`` into ``<omega xi, xi>``."""
    x = np.asarray(xi, dtype=complex).reshape(-1)
    return np.diag(x).reshape(-1)


def compress_measure(nu: BlockMeasure, eta) -> CompressedMeasure:
    """Compress a block measure along ``eta`` to a measure on ``M_n``.

    The diagonal measures agree: ``<omega'(x) xi, xi> = <nu(x) eta, eta>``
    for every atom, recorded as ``measure_residual``.
    """
    n = nu.n
    comps = split_vector(eta, n)
    w = np.zeros((n * n, n), dtype=complex)
    for i in range(n):
        unit = np.zeros(n)
        unit[i] = 1.0
        w[:, i] = np.kron(comps[:, i], unit)
    omega = FinitePovm(nu.labels, np.stack([dagger(w) @ e @ w for e in nu.effects]))
    xi = (np.linalg.norm(comps, axis=0) > 0).astype(complex)
    x = np.asarray(eta, dtype=complex).reshape(-1)
    lhs = np.einsum("i,xij,j->x", np.conj(xi), omega.effects, xi)
    rhs = np.einsum("i,xij,j->x", np.conj(x), nu.effects, x)
    residual = float(np.max(np.abs(lhs - rhs)))
    return CompressedMeasure(W=w, omega=omega, xi=xi, contraction=op_norm(w) if np.any(w) else 0.0,
                             measure_residual=residual)


# ---------------------------------------------------------------------------
# commutative derivative certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CommutativeCertificate:
    """Point-mass certificate for the derivative of ``max_x ||F(x)||``.

    ``measure`` is the block measure built from the point mass ``omega`` at
    ``active_label``; ``eta`` is the unit vector with
    ``Re<(int G dnu) eta, (int F dnu) eta>/||F|| = value``.  ``validated``
    reports whether both residuals are within ``1e-6``.
    """

    value: float
    measure: BlockMeasure
    eta: np.ndarray
    omega: FinitePovm
    active_label: object
    norm_residual: float
    value_residual: float
    validated: bool


def gd_commutative_certificate(f: MatrixFunction, g: MatrixFunction, tol: float = 1e-6) -> CommutativeCertificate:
    """Derivative of ``||F||`` in direction ``G`` with a measure-and-vector certificate.

    ``omega`` is the point mass at the active label ``x*``, so
    ``int F dnu = I (x) F(x*)`` and ``eta = e_1 (x) eta_0`` with ``eta_0`` the
    pointwise derivative certificate at ``x*``.
    """
    from .derivative import gd_blockfun

    if tuple(f.labels) != tuple(g.labels) or f.values.shape != g.values.shape:
        raise InvalidInputError("F and G must share labels and block size")
    norm_f = f.norm()
    if norm_f == 0:
        raise InvalidInputError("F must be nonzero")
    r = gd_blockfun(f, g)
    n = f.n
    omega = point_mass(f.labels, r.active_label, n)
    nu = state_to_block_measure(omega)
    e1 = np.zeros(n)
    e1[0] = 1.0
    eta = np.kron(e1, r.certificate)
    int_f = integrate_block_measure(f, nu)
    int_g = integrate_block_measure(g, nu)
    norm_res = abs(op_norm(int_f) - norm_f)
    achieved = float(np.vdot(int_f @ eta, int_g @ eta).real / norm_f)
    val_res = abs(achieved - r.value)
    ok = norm_res <= tol * max(1.0, norm_f) and val_res <= tol * max(1.0, abs(r.value))
    return CommutativeCertificate(value=r.value, measure=nu, eta=eta, omega=omega, active_label=r.active_label,
                                  norm_residual=float(norm_res), value_residual=float(val_res), validated=bool(ok))


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _matrix_from_json(obj, name: str) -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name}: malformed matrix ({exc})") from None
    if re.shape != im.shape or re.ndim != 2:
        raise InvalidInputError(f"{name}: re and im must be matching 2-D arrays")
    return re + 1j * im


def povm_from_json(doc) -> FinitePovm:
    """Parse ``{"labels": [...], "dim": d, "effects": {label: {"re": .., "im": ..}}}``."""
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    try:
        labels = list(doc["labels"])
        dim = int(doc["dim"])
        effects = doc["effects"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed POVM document ({exc})") from None
    mats = []
    for x in labels:
        key = str(x)
        if key not in effects:
            raise InvalidInputError(f"no effect given for label {x!r}")
        m = _matrix_from_json(effects[key], f"effect {x!r}")
        if m.shape != (dim, dim):
            raise InvalidInputError(f"effect {x!r} has shape {m.shape}, expected ({dim}, {dim})")
        mats.append(m)
    return FinitePovm(tuple(labels), np.stack(mats))


def povm_to_json(nu: FinitePovm) -> dict:
    return {
        "labels": list(nu.labels),
        "dim": nu.dim,
        "effects": {str(x): {"re": e.real.tolist(), "im": e.imag.tolist()} for x, e in zip(nu.labels, nu.effects)},
    }
