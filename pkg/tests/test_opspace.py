import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gateaux.derivative import gd_opnorm
from gateaux.errors import InvalidInputError
from gateaux.opspace import (
    BlockOperator,
    DualFunctional,
    FullMatrix,
    Functions,
    ScalarMap,
    Scalars,
    assert_ucp,
    cb_factorization,
    choi_matrix,
    direct_sum,
    hahn_banach_functional,
    matrix_norm,
    pairing_residual,
    random_block,
    reproduction_residual,
    support_mapping_check,
    thm3_certificate,
    ucp_from_vector,
)

E22 = np.diag([0.0, 1.0])


def cgauss(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def unit(rng, d):
    x = cgauss(rng, d)
    return x / np.linalg.norm(x)


def blocks_of(m, n, k):
    return BlockOperator.from_realization(m, n, k)


def test_block_layout_is_block_outermost():
    m = np.arange(16).reshape(4, 4).astype(complex)
    v = blocks_of(m, 2, 2)
    assert np.array_equal(v.blocks[0, 1], m[:2, 2:])
    assert np.array_equal(v.realization(), m)


def test_matrix_norm_examples():
    assert matrix_norm(BlockOperator.scalars(np.eye(2))) == pytest.approx(1.0)
    assert matrix_norm(BlockOperator(FullMatrix(2), np.diag([2.0, 1.0])[None, None])) == pytest.approx(2.0)
    rng = np.random.default_rng(1)
    vals = cgauss(rng, 2, 2, 2)
    v = BlockOperator.from_evaluations(("a", "b"), vals)
    assert matrix_norm(v) == pytest.approx(max(np.linalg.norm(x, 2) for x in vals), rel=1e-12)


def test_block_operator_rejects_wrong_shape():
    with pytest.raises(InvalidInputError):
        BlockOperator(FullMatrix(3), np.zeros((2, 2, 2, 2)))
    with pytest.raises(InvalidInputError):
        Functions(("a", "a"))


def test_direct_sum_norm_is_max():
    rng = np.random.default_rng(2)
    v, w = random_block(FullMatrix(2), 2, rng), random_block(FullMatrix(2), 1, rng)
    s = direct_sum(v, w)
    assert s.n == 3
    assert matrix_norm(s) == pytest.approx(max(matrix_norm(v), matrix_norm(w)), rel=1e-12)


def test_hahn_banach_examples():
    f = hahn_banach_functional(blocks_of(np.diag([2.0, 1.0]), 1, 2))
    assert np.allclose(np.abs(f.xi), [1, 0]) and np.allclose(np.abs(f.zeta), [1, 0])
    u = np.array([[3.0, 5.0], [7.0, 11.0]])
    assert f(u) == pytest.approx(3.0)
    f = hahn_banach_functional(blocks_of(np.array([[0, 2.0], [0, 0]]), 1, 2))
    assert np.allclose(np.abs(f.xi), [0, 1]) and np.allclose(np.abs(f.zeta), [1, 0])


def test_hahn_banach_random():
    rng = np.random.default_rng(3)
    v = random_block(FullMatrix(3), 2, rng)
    f = hahn_banach_functional(v)
    assert abs(f(v.realization()) - matrix_norm(v)) <= 1e-10 * matrix_norm(v)
    for _ in range(50):
        u = cgauss(rng, 6, 6)
        assert abs(f(u)) <= np.linalg.norm(u, 2) + 1e-10


def test_cb_factorization_scalar_level():
    rng = np.random.default_rng(4)
    xi, zeta = unit(rng, 3), unit(rng, 3)
    f = DualFunctional(xi, zeta)
    fac = cb_factorization(f, 1, 3)
    assert np.allclose(np.abs(fac.eta), [1]) and np.allclose(np.abs(fac.xi_prime), [1])
    a = cgauss(rng, 3, 3)
    assert fac.functional(a[None, None]) == pytest.approx(np.vdot(zeta, a @ xi))


def test_cb_factorization_scaled_orthonormal_columns():
    n, k = 2, 3
    xi = np.concatenate([np.eye(k)[:, q] for q in range(n)]) / np.sqrt(n)
    fac = cb_factorization(DualFunctional(xi, xi), n, k)
    assert np.allclose(fac.eta, (np.eye(n) / np.sqrt(n)).reshape(-1), atol=1e-12)
    assert np.linalg.norm(fac.eta) == pytest.approx(1.0)


@pytest.mark.parametrize("n,k", [(1, 1), (2, 2), (3, 2), (2, 4), (4, 3)])
def test_cb_factorization_random(n, k):
    rng = np.random.default_rng(10 * n + k)
    f = DualFunctional(unit(rng, n * k), unit(rng, n * k))
    fac = cb_factorization(f, n, k)
    samples = [cgauss(rng, n * k, n * k) for _ in range(20)]
    assert reproduction_residual(fac, f, samples) <= 1e-9
    assert np.linalg.norm(fac.W_left, 2) <= 1 + 1e-12
    assert np.linalg.norm(fac.W_right, 2) <= 1 + 1e-12
    # complete contractivity at levels 1..3
    for m in range(1, 4):
        w = random_block(FullMatrix(k), m, rng)
        assert np.linalg.norm(fac.amplify(w), 2) <= matrix_norm(w) + 1e-9


def test_thm3_identity_against_traceless():
    n, k = 1, 2
    v = blocks_of(np.eye(2), n, k)
    ws = [blocks_of(b, n, k) for b in (np.diag([1.0, -1.0]), np.array([[0, 1.0], [1, 0]]), np.array([[0, 1j], [-1j, 0]]))]
    cert = thm3_certificate(v, ws)
    assert cert.norm_residual <= 1e-6
    assert max(cert.orth_residuals) <= 1e-6
    assert cert.single_vector


def test_thm3_rank_one_example():
    v = blocks_of(np.diag([1.0, 0.0]), 1, 2)
    cert = thm3_certificate(v, [blocks_of(E22, 1, 2)])
    assert cert.single_vector and cert.rank == 1
    phi = cert.factorization
    assert abs(abs(phi.functional(v)) - 1) <= 1e-12


def test_thm3_rejects_non_orthogonal():
    v = blocks_of(np.diag([1.0, 0.0]), 1, 2)
    with pytest.raises(InvalidInputError):
        thm3_certificate(v, [blocks_of(np.diag([1.0, 0.0]), 1, 2)])


def test_thm3_converse_direction():
    from gateaux.suites import feasible_subspace_instance

    rng = np.random.default_rng(5)
    for _ in range(3):
        a, bs = feasible_subspace_instance(rng)[:2]
        d = a.shape[0]
        k = 2 if d % 2 == 0 else 1
        n = d // k
        v = blocks_of(a, n, k)
        ws = [blocks_of(b, n, k) for b in bs]
        cert = thm3_certificate(v, ws)
        assert cert.single_vector
        fac = cert.factorization
        assert abs(fac.functional(v) - matrix_norm(v)) <= 1e-6 * matrix_norm(v)
        for _ in range(20):
            c = cgauss(rng, len(bs))
            w = sum(cj * b for cj, b in zip(c, bs))
            assert np.linalg.norm(a + w, 2) >= matrix_norm(v) - 1e-9


def test_ucp_scalar_level():
    rng = np.random.default_rng(6)
    xi = unit(rng, 3)
    phi, eta = ucp_from_vector(xi, 1, 3)
    a = cgauss(rng, 3, 3)
    assert np.allclose(phi.apply(a), [[np.vdot(xi, a @ xi)]])
    assert np.allclose(np.abs(eta), [1])


def test_ucp_rank_one_pattern():
    n, k = 2, 2
    xi = np.kron([1.0, 0.0], [1.0, 0.0])
    phi, eta = ucp_from_vector(xi, n, k)
    assert_ucp(phi)
    s = blocks_of(cgauss(np.random.default_rng(7), 4, 4), n, k)
    assert pairing_residual(phi, eta, xi, s) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 4), k=st.integers(1, 4), seed=st.integers(0, 2**32 - 1))
def test_ucp_random(n, k, seed):
    rng = np.random.default_rng(seed)
    xi = unit(rng, n * k)
    phi, eta = ucp_from_vector(xi, n, k)
    assert phi.isometry_residual() <= 1e-10
    assert phi.unital_residual() <= 1e-10
    assert np.linalg.eigvalsh(choi_matrix(phi, k)).min() >= -1e-10
    assert abs(np.linalg.norm(eta) - 1) <= 1e-10
    for _ in range(5):
        s = blocks_of(cgauss(rng, n * k, n * k), n, k)
        assert pairing_residual(phi, eta, xi, s) <= 1e-9


def test_ucp_rejects_non_unit():
    with pytest.raises(InvalidInputError):
        ucp_from_vector(np.array([1.0, 1.0]), 1, 2)


def test_support_mapping_scalars():
    # positive, so the top of the real part equals the norm
    v = BlockOperator.scalars(np.array([[2.0, 1.0], [1.0, 2.0]]))
    report = support_mapping_check(ScalarMap(np.eye(2)), v)
    assert report.valid
    bad = support_mapping_check(ScalarMap(2 * np.eye(2)), v)
    assert not bad.valid and bad.worst_margins[1] < 0
    # an indefinite v whose negative eigenvalue dominates is not attained by rho*
    w = BlockOperator.scalars(np.array([[1.0, 2.0], [2.0, -3.0]]))
    assert support_mapping_check(ScalarMap(np.eye(2)), w).attained_gap > 1


def test_support_mapping_from_maximiser():
    rng = np.random.default_rng(8)
    n, k = 2, 2
    c = cgauss(rng, n * k, n * k)
    a = c @ c.conj().T
    r = gd_opnorm(a, cgauss(rng, n * k, n * k))
    phi, _ = ucp_from_vector(r.certificate, n, k)
    report = support_mapping_check(phi, blocks_of(a, n, k), levels=2, samples=20)
    assert report.attained_gap <= 1e-8 * np.linalg.norm(a, 2)
    assert report.valid
