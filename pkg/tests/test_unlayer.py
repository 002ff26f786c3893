import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sostar import antisym, fock, group, unlayer
from sostar.antisym import SIGMA
from sostar.errors import RankNotTwo, SingularMatrix, ZeroMatrix

seeds = st.integers(0, 2**32 - 1)


def xi0(n):
    x = np.zeros((n, n), dtype=complex)
    x[:2, :2] = SIGMA
    return x


def random_rank_two(n, rng):
    u = group.random_unitary(n, rng)
    return rng.uniform(0.3, 3.0) * np.exp(1j * rng.uniform(0, 2 * np.pi)) * u @ xi0(n) @ u.T


def normalized_state(xi, j, basis):
    return fock.fixed_area_state(xi, j, basis).scaled(unlayer.un_normalization(xi, j))


def test_dimension_examples():
    assert unlayer.dim_fixed_area(4, 1) == 6
    assert unlayer.dim_fixed_area(3, 0) == 1
    assert all(unlayer.dim_fixed_area(2, j) == 1 for j in range(20))


def test_dimension_overflow():
    with pytest.raises(OverflowError):
        unlayer.dim_fixed_area(60, 60)
    assert unlayer.dim_fixed_area(60, 60, max_value=None) > 2**63


@pytest.mark.parametrize("n", [2, 3, 4])
def test_dimension_matches_oracle(n):
    basis = fock.build_basis(n, 4)
    for j in range(5):
        assert fock.intertwiner_dimension(basis, j) == unlayer.dim_fixed_area(n, j)


def test_normalization_examples():
    assert unlayer.un_normalization(xi0(3), 0) == 1
    assert unlayer.un_normalization(xi0(3), 1) == pytest.approx(1 / math.sqrt(2))
    assert unlayer.un_normalization(2 * xi0(3), 1) == pytest.approx(0.5 / math.sqrt(2))


def test_rank_and_zero_errors():
    with pytest.raises(ZeroMatrix):
        unlayer.un_normalization(np.zeros((3, 3)), 1)
    rank4 = np.zeros((4, 4), dtype=complex)
    rank4[:2, :2] = rank4[2:, 2:] = SIGMA
    with pytest.raises(RankNotTwo):
        unlayer.un_expectation_E(rank4, 1)


def test_orthogonal_labels():
    eta = np.zeros((4, 4), dtype=complex)
    eta[2:, 2:] = SIGMA
    assert unlayer.un_overlap(eta, xi0(4), 2) == 0
    assert unlayer.un_overlap(eta, xi0(4), 0) == 1


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 4), st.integers(0, 3), seeds)
def test_overlap_matches_oracle(n, j, seed):
    rng = np.random.default_rng(seed)
    eta, xi = random_rank_two(n, rng), random_rank_two(n, rng)
    basis = fock.build_basis(n, max(j, 1))
    oracle = normalized_state(eta, j, basis).vdot(normalized_state(xi, j, basis))
    assert unlayer.un_overlap(eta, xi, j) == pytest.approx(oracle, abs=1e-10)
    assert normalized_state(xi, j, basis).norm() == pytest.approx(1, abs=1e-12)


def test_projective_invariance():
    xi = random_rank_two(4, np.random.default_rng(3))
    c = 1.7 * np.exp(0.4j)
    assert abs(unlayer.un_overlap(c * xi, xi, 5)) == pytest.approx(1)


def test_expectation_examples():
    np.testing.assert_allclose(unlayer.un_expectation_E(xi0(3), 0), np.eye(3))
    np.testing.assert_allclose(unlayer.un_expectation_E(xi0(3), 5), np.diag([6, 6, 1]))


@settings(max_examples=8, deadline=None)
@given(st.integers(2, 3), seeds)
def test_expectation_matches_oracle(n, seed):
    xi = random_rank_two(n, np.random.default_rng(seed))
    j = 2
    basis = fock.build_basis(n, j)
    gens = fock.build_generators(basis)
    v = normalized_state(xi, j, basis).to_flat(basis)
    e = unlayer.un_expectation_E(xi, j)
    assert np.trace(e).real == pytest.approx(n + 2 * j)
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            assert np.vdot(v, gens.get("E", a, b) @ v) == pytest.approx(e[a - 1, b - 1], abs=1e-10)


@pytest.mark.parametrize("n, j", [(3, 4), (4, 6)])
def test_covariance_matches_oracle(n, j):
    xi = random_rank_two(n, np.random.default_rng(n + j))
    mom = fock.area_moments(normalized_state(xi, j, fock.build_basis(n, j)))
    cov, var = unlayer.un_covariance(xi, j)
    np.testing.assert_allclose(cov, mom.covariance, atol=1e-8)
    np.testing.assert_allclose(var, np.diag(cov))
    assert cov.sum() == pytest.approx(0, abs=1e-10)  # total area is sharp


def test_covariance_vanishes_at_zero_area():
    cov, var = unlayer.un_covariance(xi0(3), 0)
    assert not cov.any() and not var.any()


def test_spinor_examples():
    z = unlayer.un_spinors(xi0(3), 1)
    assert np.abs(z[2]).max() == 0
    assert np.sum(np.abs(z) ** 2) == pytest.approx(2)
    assert unlayer.closure_residual(z) < 1e-14


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(1, 20), seeds)
def test_spinors_close(n, j, seed):
    z = unlayer.un_spinors(random_rank_two(n, np.random.default_rng(seed)), j)
    assert unlayer.closure_residual(z) < 1e-12 * j
    assert np.sum(np.abs(z) ** 2) == pytest.approx(2 * j)


def test_relative_spread_shrinks_as_inverse_root_area():
    xi = random_rank_two(4, np.random.default_rng(9))
    ratios = []
    for j in (100, 400):
        _, var = unlayer.un_covariance(xi, j)
        mean = 0.5 * np.sum(np.abs(unlayer.un_spinors(xi, j)) ** 2, axis=1)
        ratios.append(np.sqrt(var) / mean)
    np.testing.assert_allclose(ratios[0] / ratios[1], 2, rtol=1e-10)


def test_gl_action_examples():
    xi = random_rank_two(3, np.random.default_rng(4))
    coef, new = unlayer.gl_action(np.eye(3), xi, 2)
    assert coef == 1
    np.testing.assert_allclose(new, xi, atol=1e-15)
    coef, new = unlayer.gl_action(2 * np.eye(3), xi, 2)
    assert coef == pytest.approx(8)
    np.testing.assert_allclose(new, 4 * xi, atol=1e-14)
    u = group.random_unitary(3, np.random.default_rng(5))
    _, new = unlayer.gl_action(u, xi, 2)
    assert antisym.canonical_decompose(new).half_rank == 1
    assert unlayer.un_normalization(new, 2) == pytest.approx(unlayer.un_normalization(xi, 2))
    with pytest.raises(SingularMatrix):
        unlayer.gl_action(np.diag([1.0, 1.0, 0.0]), xi, 2)
