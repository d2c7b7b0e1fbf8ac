import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from gateaux.orthogonality import (
    DensityMatrix,
    Verdict,
    bj_pair,
    bj_subspace,
    density_face_feasibility,
    state_certificate,
)
from gateaux.errors import InvalidInputError
from gateaux.suites import feasible_subspace_instance, infeasible_subspace_instance, with_top_multiplicity

E11 = np.diag([1.0, 0.0])
E22 = np.diag([0.0, 1.0])
PAULI = [np.diag([1.0, -1.0]), np.array([[0, 1], [1, 0]]), np.array([[0, 1j], [-1j, 0]])]


def cgauss(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def best_decrease(a, b):
    """Oracle: ||A|| - min_lambda ||A + lambda B|| from a coarse grid and Nelder-Mead."""
    na = np.linalg.norm(a, 2)
    radius = 2 * na / np.linalg.norm(b, 2)
    grid = np.linspace(-radius, radius, 41)
    f = lambda p: np.linalg.norm(a + (p[0] + 1j * p[1]) * b, 2)
    starts = sorted(((f((x, y)), (x, y)) for x in grid for y in grid))[:4] + [(na, (0.0, 0.0))]
    return na - min(minimize(f, s, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14}).fun
                    for _, s in starts)


def test_pair_examples():
    d = bj_pair(np.eye(2), np.diag([1.0, -1.0]))
    assert d.verdict is Verdict.ORTHOGONAL and d.orthogonal
    assert np.allclose(np.abs(d.certificate), [2**-0.5, 2**-0.5], atol=1e-8)
    d = bj_pair(E11, np.eye(2))
    assert d.verdict is Verdict.NOT_ORTHOGONAL
    assert d.coefficients[0] == pytest.approx(-0.5, abs=1e-8)
    assert np.linalg.norm(E11 - d.witness, 2) == pytest.approx(0.5, abs=1e-8)


def test_pair_zero_direction_is_orthogonal():
    assert bj_pair(np.eye(3), np.zeros((3, 3))).verdict is Verdict.ORTHOGONAL


def test_pair_against_oracle():
    rng = np.random.default_rng(11)
    checked = {Verdict.ORTHOGONAL: 0, Verdict.NOT_ORTHOGONAL: 0}
    for case in range(16):
        a = with_top_multiplicity(rng, 4, 2, top=1.5) if case % 2 else cgauss(rng, 4, 4)
        b = cgauss(rng, 4, 4)
        d = bj_pair(a, b)
        gain = best_decrease(a, b)
        na = np.linalg.norm(a, 2)
        if d.verdict is Verdict.ORTHOGONAL:
            eta = d.certificate
            assert abs(np.vdot(a @ eta, b @ eta)) <= 1e-8
            assert abs(np.linalg.norm(a @ eta) - na) <= 1e-8
            assert gain <= 1e-9
        else:
            assert d.verdict is Verdict.NOT_ORTHOGONAL
            assert np.linalg.norm(a - d.witness, 2) <= na - 1e-9
            assert gain >= 1e-9
        checked[d.verdict] += 1
    assert all(checked.values())


def test_feasibility_examples():
    r = density_face_feasibility([np.diag([1.0, -1.0])])
    assert r.feasible and np.allclose(r.density.matrix, np.eye(2) / 2, atol=1e-6)
    r = density_face_feasibility([np.eye(2)])
    assert r.status == "infeasible" and r.certified


def test_feasibility_constructed():
    rng = np.random.default_rng(12)
    for _ in range(5):
        d = 4
        x = cgauss(rng, d, d)
        rho0 = x @ x.conj().T
        rho0 /= np.trace(rho0).real
        cs = []
        for _ in range(3):
            c = cgauss(rng, d, d)
            cs.append(c - np.trace(rho0 @ c) * np.eye(d))
        r = density_face_feasibility(cs)
        assert r.feasible
        sigma = r.density.matrix
        assert max(abs(np.trace(sigma @ c)) for c in cs) <= 1e-6


def test_density_matrix_validation():
    DensityMatrix(np.eye(2) / 2)
    with pytest.raises(InvalidInputError):
        DensityMatrix(np.eye(2))
    with pytest.raises(InvalidInputError):
        DensityMatrix(np.diag([1.5, -0.5]))


def test_subspace_examples():
    d = bj_subspace(np.eye(2), PAULI)
    assert d.verdict is Verdict.ORTHOGONAL
    rho = d.certificate.matrix
    assert all(abs(np.trace(rho @ b)) <= 1e-8 for b in PAULI)
    d = bj_subspace(E11, [E11])
    assert d.verdict is Verdict.NOT_ORTHOGONAL
    assert np.linalg.norm(E11 - d.witness, 2) <= 0.5 + 1e-9


def test_subspace_constructed_instances():
    rng = np.random.default_rng(13)
    for _ in range(4):
        a, bs = feasible_subspace_instance(rng)[:2]
        d = bj_subspace(a, bs)
        assert d.verdict is Verdict.ORTHOGONAL
        rho = d.certificate.matrix
        na = np.linalg.norm(a, 2)
        assert abs(np.trace(rho @ a.conj().T @ a).real - na**2) <= 1e-6 * na**2
        for b in bs:
            assert abs(np.trace(rho @ a.conj().T @ b)) <= 1e-6 * na * np.linalg.norm(b, 2)
    for _ in range(4):
        a, bs = infeasible_subspace_instance(rng)[:2]
        d = bj_subspace(a, bs)
        assert d.verdict is Verdict.NOT_ORTHOGONAL
        w = sum(c * b for c, b in zip(d.coefficients, bs))
        assert np.allclose(w, d.witness, atol=1e-12)
        assert np.linalg.norm(a - w, 2) <= np.linalg.norm(a, 2) - 1e-9


def test_state_certificate_examples():
    rho = state_certificate(np.eye(2), PAULI).matrix
    assert np.allclose(rho, np.eye(2) / 2, atol=1e-6)
    rho = state_certificate(E11, [E22]).matrix
    assert np.trace(rho @ E11).real == pytest.approx(1.0, abs=1e-8)
    assert abs(np.trace(rho @ E11 @ E22)) <= 1e-8


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_pair_verdict_is_self_consistent(seed):
    rng = np.random.default_rng(seed)
    a = with_top_multiplicity(rng, 3, 2, top=1.0)
    b = cgauss(rng, 3, 3)
    d = bj_pair(a, b)
    na = np.linalg.norm(a, 2)
    if d.verdict is Verdict.ORTHOGONAL:
        eta = d.certificate
        assert abs(np.vdot(a @ eta, b @ eta)) <= 1e-8
        # no sampled lambda beats the norm
        lams = cgauss(rng, 50) * (rng.uniform(1e-3, 2, 50))
        assert all(np.linalg.norm(a + lam * b, 2) >= na - 1e-9 for lam in lams)
    elif d.verdict is Verdict.NOT_ORTHOGONAL:
        assert np.linalg.norm(a - d.witness, 2) <= na - 1e-9
