import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sostar import antisym
from sostar.antisym import SIGMA
from sostar.errors import NonFinite, NotAntisymmetric

ZETA_STAR = np.zeros((3, 3), dtype=complex)
ZETA_STAR[:2, :2] = np.sqrt(0.5) * np.array([[0, -1], [1, 0]])

seeds = st.integers(0, 2**32 - 1)
sizes = st.integers(1, 7)


def test_validate_domain_examples():
    rep = antisym.validate_domain(ZETA_STAR)
    assert rep.is_antisymmetric and rep.in_domain
    assert rep.spectral_norm_sq == pytest.approx(0.5, abs=1e-14)
    assert antisym.validate_domain(np.zeros((3, 3))).in_domain
    assert not antisym.validate_domain(SIGMA).in_domain
    assert not antisym.validate_domain(np.eye(2)).is_antisymmetric


def test_non_finite_rejected():
    z = ZETA_STAR.copy()
    z[0, 1] = np.nan
    with pytest.raises(NonFinite):
        antisym.validate_domain(z)


def test_canonical_decompose_rejects_symmetric():
    with pytest.raises(NotAntisymmetric):
        antisym.canonical_decompose(np.eye(3))


def test_canonical_form_of_zeta_star():
    cf = antisym.canonical_decompose(ZETA_STAR)
    assert cf.lambdas == pytest.approx((np.sqrt(0.5),))
    assert cf.half_rank == 1 and cf.padding == 1
    rec, uni = cf.residuals(ZETA_STAR)
    assert rec < 1e-14 and uni < 1e-14


def test_zero_matrix_has_zero_rank():
    cf = antisym.canonical_decompose(np.zeros((4, 4)))
    assert cf.half_rank == 0 and cf.padding == 4 and cf.groups == ()


def test_group_multiplicities_merges_close_values():
    assert antisym.group_multiplicities([0.5, 0.5 * (1 + 1e-12), 0.2]) == [
        (pytest.approx(0.5), 2),
        (pytest.approx(0.2), 1),
    ]


@settings(max_examples=60, deadline=None)
@given(sizes, seeds)
def test_decomposition_reconstructs(n, seed):
    rng = np.random.default_rng(seed)
    z = antisym.random_antisymmetric(n, rng)
    cf = antisym.canonical_decompose(z)
    rec, uni = cf.residuals(z)
    scale = max(1.0, np.linalg.norm(z))
    assert rec < 1e-12 * scale and uni < 1e-12
    assert 2 * cf.half_rank + cf.padding == n
    assert list(cf.lambdas) == sorted(cf.lambdas, reverse=True)
    assert all(lam > 0 for lam in cf.lambdas)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4), st.integers(1, 2), seeds)
def test_degenerate_spectrum_is_grouped(n_extra, k, seed):
    rng = np.random.default_rng(seed)
    n = 2 * k + n_extra - 2
    u = antisym.canonical_decompose(antisym.random_antisymmetric(n, rng)).u
    z = antisym.antisym_from_canonical(u, [0.6] * k)
    cf = antisym.canonical_decompose(z)
    assert cf.groups == ((pytest.approx(0.6), k),)
    assert cf.residuals(z)[0] < 1e-12


@settings(max_examples=40, deadline=None)
@given(sizes, seeds)
def test_singular_values_come_in_pairs(n, seed):
    # the even multiplicity of each lambda is what makes the block form possible
    z = antisym.random_antisymmetric(n, np.random.default_rng(seed))
    sv = np.linalg.svd(z, compute_uv=False)
    cf = antisym.canonical_decompose(z)
    paired = np.sort(np.repeat(cf.lambdas, 2))[::-1]
    np.testing.assert_allclose(sv[: paired.size], paired, atol=1e-12)
    assert np.all(sv[paired.size :] < 1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), seeds, st.floats(0.01, 0.99))
def test_random_in_domain_respects_bound(n, seed, cap):
    z = antisym.random_in_domain(n, np.random.default_rng(seed), max_norm_sq=cap)
    rep = antisym.validate_domain(z)
    assert rep.in_domain and rep.spectral_norm_sq <= cap * (1 + 1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), seeds)
def test_domain_is_scale_monotone(n, seed):
    z = antisym.random_in_domain(n, np.random.default_rng(seed))
    assert antisym.validate_domain(0.5 * z).in_domain
    scaled = z / np.sqrt(antisym.spectral_norm_sq(z))
    assert not antisym.validate_domain(scaled).in_domain


def test_decomposition_is_deterministic():
    z = antisym.random_antisymmetric(5, np.random.default_rng(0))
    a, b = antisym.canonical_decompose(z), antisym.canonical_decompose(z.copy())
    assert np.array_equal(a.u, b.u) and a.lambdas == b.lambdas
