"""End-to-end acceptance gate; each criterion prints one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also collected in the terminal summary.
"""

import time

import numpy as np
import pytest

from sostar import antisym, coherent, crosscheck, fock, group, semiclassical, unlayer
from sostar.antisym import SIGMA

SQ = np.sqrt(0.5)


def _rank_two(n, lam2, rng):
    m = np.zeros((n, n), dtype=complex)
    m[:2, :2] = np.sqrt(lam2) * SIGMA
    u = group.random_unitary(n, rng)
    return u @ m @ u.T


def _equal_blocks(n, k, lam2, rng):
    u = group.random_unitary(n, rng)
    return antisym.antisym_from_canonical(u, [np.sqrt(lam2)] * k)


def test_ac1_four_leg_example(verdict):
    t0 = time.perf_counter()
    rep = semiclassical.example_4leg()
    elapsed = time.perf_counter() - t0
    q = 0.25
    fam1 = semiclassical.face_normals(rep.family, 0)
    fam2 = semiclassical.face_normals(rep.family, 1)
    want1 = np.array([[q, 0, 0], [-q, 0, 0], [0, -q, 0], [0, q, 0]])
    errs = [
        np.abs(rep.face_areas - q).max(),
        np.abs(rep.family_areas - 1).max(),
        abs(rep.defect + 2),
        np.abs(fam1 - want1).max(),
        np.abs(fam2.sum(axis=0)).max(),
    ]
    has_down = np.abs(fam2 - [0, 0, -q]).max(axis=1).min() < 1e-10
    worst = max(errs)
    ok = worst < 1e-10 and has_down and elapsed < 1.0
    verdict("AC1 four-leg example", ok, f"max err {worst:.1e}, {elapsed:.3f}s")


def test_ac2_area_distribution(verdict):
    rng = np.random.default_rng(2)
    basis = fock.build_basis(3, 40)
    t0 = time.perf_counter()
    worst_p = worst_sum = 0.0
    for half_trace in (0.2, 0.5, 0.8):
        z = _rank_two(3, half_trace, rng)
        assert 0.5 * np.trace(z.conj().T @ z).real == pytest.approx(half_trace, abs=1e-12)
        closed = np.array([p for _, p in coherent.area_distribution(z, 200)])
        oracle = np.array([p for _, p in fock.oracle_distribution(z, basis)])
        worst_p = max(worst_p, np.abs(closed[:21] - oracle[:21]).max())
        worst_sum = max(worst_sum, abs(closed.sum() - 1))
    elapsed = time.perf_counter() - t0
    ok = worst_p < 1e-8 and worst_sum < 1e-10 and elapsed < 30
    verdict("AC2 area distribution", ok, f"P err {worst_p:.1e}, sum err {worst_sum:.1e}, {elapsed:.1f}s")


def test_ac3_oracle_cross_validation(verdict):
    # N=4 labels are capped where a feasible cutoff resolves the tail
    rng = np.random.default_rng(3)
    plan = [2] * 20 + [3] * 20 + [4] * 10
    cap = {2: 0.5, 3: 0.5, 4: 0.15}
    t0 = time.perf_counter()
    worst = 0.0
    for n in plan:
        zeta = crosscheck.random_label(n, rng, cap[n])
        omega = crosscheck.random_label(n, rng, cap[n])
        basis = fock.build_basis(n, fock.choose_j_max([zeta, omega]))
        worst = max(worst, crosscheck.compare_pair(omega, zeta, basis).worst)
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-8 and elapsed < 300
    verdict("AC3 oracle cross-validation", ok, f"50 pairs, max dev {worst:.1e}, {elapsed:.1f}s")


def test_ac4_algebra_exactness(verdict):
    matrix = max(group.structure_constant_check(n) for n in (2, 3, 4, 5))
    fockres = max(fock.commutator_check(fock.build_basis(n, 3)) for n in (2, 3))
    ok = matrix == 0 and fockres <= 1e-12
    verdict("AC4 algebra exactness", ok, f"matrix {matrix}, Fock {fockres:.1e}")


def test_ac5_highest_weight(verdict):
    rng = np.random.default_rng(5)
    basis = fock.build_basis(3, 3)
    worst = 0.0
    for _ in range(20):
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        for j in range(4):
            worst = max(worst, fock.highest_weight_check(g, j, basis))
    verdict("AC5 highest weight", worst <= 1e-9, f"max residual {worst:.1e}")


def test_ac6_stabilizer_and_defect(verdict):
    rep = semiclassical.example_4leg()
    zeta = rep.zeta
    fam = rep.family
    obs0 = semiclassical.classical_observables(fam)
    u = semiclassical.EXAMPLE_U
    m = rep.symmetry.normal_form()
    inv = changed = 0.0
    changed_min = np.inf
    for seed in range(100):
        w = semiclassical.sample_symmetry(rep.symmetry, seed)
        mixed = semiclassical.apply_symmetry(fam, w)
        obs = semiclassical.classical_observables(mixed)
        inv = max(
            inv,
            np.abs(u @ w @ m @ w.T @ u.T - zeta).max(),
            np.abs(obs.e_coarse - obs0.e_coarse).max(),
            np.abs(obs.f_coarse - obs0.f_coarse).max(),
            np.abs(obs.ftilde_coarse - obs0.ftilde_coarse).max(),
        )
        delta = max(np.abs(obs.e - obs0.e).max(), np.abs(obs.f - obs0.f).max())
        changed = max(changed, delta)
        changed_min = min(changed_min, delta)

    rng = np.random.default_rng(6)
    defect_err = 0.0
    for _ in range(50):
        n = int(rng.choice([4, 5, 6, 7]))
        f = semiclassical.extract_spinor_families(antisym.random_in_domain(n, rng))
        assert f.k in (2, 3)
        defect_err = max(defect_err, abs(semiclassical.coarse_closure_defect(f) - semiclassical.defect_prediction(f)))

    boosted = semiclassical.sl2c_boost(fam, np.diag([2.0, 0.5]))
    boosted_defect = semiclassical.coarse_closure_defect(boosted)
    ok = inv <= 1e-10 and changed_min > 1e-3 and defect_err <= 1e-10 and boosted_defect < 0
    verdict(
        "AC6 stabilizer and defect",
        ok,
        f"invariance {inv:.1e}, per-family change min {changed_min:.2e} max {changed:.2f}, "
        f"defect err {defect_err:.1e}, boosted defect {boosted_defect:.3f}",
    )


def test_ac7_coefficient_of_variation(verdict):
    rng = np.random.default_rng(7)
    limit_err = 0.0
    small_cv = np.inf
    for n, k in ((2, 1), (3, 1), (4, 2), (5, 2), (6, 3)):
        cv = coherent.area_report(_equal_blocks(n, k, 0.999, rng)).cv
        limit_err = max(limit_err, abs(cv * np.sqrt(2 * k) - 1))
        small_cv = min(small_cv, coherent.area_report(_equal_blocks(n, k, 1e-4, rng)).cv)
    bound_gap = -np.inf
    for _ in range(200):
        n = int(rng.integers(2, 7))
        rep = coherent.area_report(antisym.random_in_domain(n, rng, max_norm_sq=rng.uniform(1e-3, 0.99)))
        bound_gap = max(bound_gap, rep.cv - rep.cv_upper_bound)
    ok = limit_err < 0.02 and bound_gap <= 1e-12 and small_cv > 10
    verdict("AC7 coefficient of variation", ok, f"limit rel err {limit_err:.2e}, bound gap {bound_gap:.1e}, small-area cv {small_cv:.1f}")


def test_ac8_squeezed_vacuum(verdict):
    rng = np.random.default_rng(8)
    worst_ann = worst_s = 0.0
    for i in range(20):
        n = 2 + i % 2
        z = antisym.random_in_domain(n, rng)
        basis = fock.build_basis(n, 12)
        worst_ann = max(worst_ann, fock.annihilator_check(z, basis))
        worst_s = max(worst_s, group.squeeze_residual(z))
    ok = worst_ann <= 1e-8 and worst_s <= 1e-12
    verdict("AC8 squeezed vacuum", ok, f"annihilator {worst_ann:.1e}, S residual {worst_s:.1e}")


def test_ac9_dimension_formula(verdict):
    mismatches = []
    for n in (2, 3, 4):
        basis = fock.build_basis(n, 4)
        for j in range(5):
            got, want = fock.intertwiner_dimension(basis, j), unlayer.dim_fixed_area(n, j)
            if got != want:
                mismatches.append((n, j, got, want))
    ok = not mismatches and unlayer.dim_fixed_area(4, 1) == 6
    verdict("AC9 dimension formula", ok, f"mismatches {mismatches}")
