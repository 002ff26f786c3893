import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sostar import antisym, group
from sostar.errors import DomainViolation, IndexOutOfRange, SingularA
from sostar.group import BlockGroupElement

ZETA_STAR = np.zeros((3, 3), dtype=complex)
ZETA_STAR[:2, :2] = np.sqrt(0.5) * np.array([[0, -1], [1, 0]])

seeds = st.integers(0, 2**32 - 1)
sizes = st.integers(2, 5)


def test_identity_and_unitaries_are_members():
    assert group.check_group_membership(BlockGroupElement.identity(3)) == 0
    u = group.random_unitary(4, np.random.default_rng(0))
    assert group.check_group_membership(BlockGroupElement.from_unitary(u)) < 1e-14


def test_g_of_zeta_star():
    g = group.g_of_zeta(ZETA_STAR)
    assert group.check_group_membership(g) < 1e-12
    np.testing.assert_allclose(group.moebius_act(g, np.zeros((3, 3))), ZETA_STAR, atol=1e-14)


def test_g_of_zeta_rejects_boundary():
    with pytest.raises(DomainViolation):
        group.g_of_zeta(np.array([[0, -1], [1, 0]], dtype=complex))


def test_generator_examples():
    e11 = group.generator_matrix("E", 1, 1, 2).matrix
    np.testing.assert_array_equal(e11, np.diag([1, 0, -1, 0]))
    assert not group.generator_matrix("F", 2, 2, 3).matrix.any()
    ft = group.generator_matrix("Ftilde", 1, 2, 2).matrix
    np.testing.assert_array_equal(ft[:2, 2:], [[0, 1], [-1, 0]])
    np.testing.assert_array_equal(ft[2:, :], 0)


def test_generator_antisymmetry_in_indices():
    for kind in ("F", "Ftilde"):
        np.testing.assert_array_equal(
            group.generator_matrix(kind, 1, 3, 3).matrix, -group.generator_matrix(kind, 3, 1, 3).matrix
        )


def test_generator_index_range():
    with pytest.raises(IndexOutOfRange):
        group.generator_matrix("E", 0, 1, 2)
    with pytest.raises(IndexOutOfRange):
        group.generator_matrix("F", 1, 4, 3)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_structure_constants_exact(n):
    assert group.structure_constant_check(n) == 0


def test_generators_lie_in_complexified_algebra():
    # generators satisfy X^t Omega + Omega X = 0, the complex so(2N) condition
    om = group.omega(3)
    for kind in ("E", "F", "Ftilde"):
        x = group.generator_matrix(kind, 1, 2, 3).matrix
        assert not (x.T @ om + om @ x).any()


@settings(max_examples=40, deadline=None)
@given(sizes, seeds)
def test_random_elements_are_members(n, seed):
    g = group.random_group_element(n, np.random.default_rng(seed))
    assert group.check_group_membership(g) < 1e-11
    assert group.check_group_membership(g @ g.inverse()) < 1e-11
    np.testing.assert_allclose((g @ g.inverse()).matrix(), np.eye(2 * n), atol=1e-11)


@settings(max_examples=40, deadline=None)
@given(sizes, seeds)
def test_moebius_action_composes(n, seed):
    rng = np.random.default_rng(seed)
    g1 = group.random_group_element(n, rng, 0.3)
    g2 = group.random_group_element(n, rng, 0.3)
    z = antisym.random_in_domain(n, rng, 0.3)
    lhs = group.moebius_act(g1 @ g2, z)
    rhs = group.moebius_act(g1, group.moebius_act(g2, z))
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)
    assert antisym.validate_domain(lhs).in_domain


@settings(max_examples=40, deadline=None)
@given(sizes, seeds)
def test_g_zeta_moves_origin_to_zeta(n, seed):
    z = antisym.random_in_domain(n, np.random.default_rng(seed), 0.9)
    g = group.g_of_zeta(z)
    assert group.check_group_membership(g) < 1e-10
    np.testing.assert_allclose(group.moebius_act(g, np.zeros((n, n))), z, atol=1e-12)
    np.testing.assert_allclose(group.moebius_act(g.inverse(), z), 0, atol=1e-11)


@settings(max_examples=40, deadline=None)
@given(sizes, seeds)
def test_udl_reconstructs(n, seed):
    g = group.random_group_element(n, np.random.default_rng(seed))
    assert group.udl_residual(g) < 1e-10
    upper, _, lower = group.udl_decompose(g)
    np.testing.assert_allclose(upper, -upper.T, atol=1e-14)
    np.testing.assert_allclose(lower, -lower.T, atol=1e-14)


def test_udl_of_g_zeta_has_hermitian_log():
    _, log_a, _ = group.udl_decompose(group.g_of_zeta(ZETA_STAR))
    np.testing.assert_allclose(log_a, log_a.conj().T, atol=1e-14)


def test_udl_singular_a():
    g = BlockGroupElement(np.zeros((2, 2)), np.eye(2))
    with pytest.raises(SingularA):
        group.udl_decompose(g)


@settings(max_examples=30, deadline=None)
@given(sizes, seeds)
def test_sp4n_embedding_is_symplectic_homomorphism(n, seed):
    rng = np.random.default_rng(seed)
    g1, g2 = group.random_group_element(n, rng), group.random_group_element(n, rng)
    assert group.symplectic_residual(group.sp4n_embed(g1)) < 1e-10
    np.testing.assert_allclose(
        group.sp4n_embed(g1 @ g2), group.sp4n_embed(g1) @ group.sp4n_embed(g2), atol=1e-10
    )


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), seeds)
def test_squeeze_matrix_matches_bogoliubov(n, seed):
    z = antisym.random_in_domain(n, np.random.default_rng(seed), 0.9)
    assert group.squeeze_residual(z) < 1e-11
