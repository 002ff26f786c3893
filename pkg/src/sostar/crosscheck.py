"""Closed forms against the Fock oracle on random labels."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import coherent, fock
from .antisym import random_antisymmetric, spectral_norm_sq


def safe_norm_sq(n: int, j_max: int, tol: float = fock.TAIL_TOL, weight_power: int = 2, cap: float = 0.5) -> float:
    """Largest ``lambda_1^2 <= cap`` whose worst-case weighted tail at ``j_max`` stays below ``tol``.

    The worst case takes every eigenvalue of ``zeta* zeta`` equal to ``lambda_1^2``.
    """

    def tail(x: float) -> float:
        return fock.spectral_tail(x, (1 - x) ** n, n, j_max, weight_power)

    if tail(cap) < tol:
        return cap
    lo, hi = 0.0, cap
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if tail(mid) < tol:
            lo = mid
        else:
            hi = mid
    return lo


def random_label(n: int, rng: np.random.Generator, max_norm_sq: float, min_fraction: float = 0.2) -> np.ndarray:
    """Random antisymmetric label with top ``zeta* zeta`` eigenvalue uniform in ``[min_fraction, 1] * max_norm_sq``."""
    z = random_antisymmetric(n, rng)
    target = rng.uniform(min_fraction, 1.0) * max_norm_sq
    return z * np.sqrt(target / spectral_norm_sq(z))


@dataclass
class PairDeviation:
    n: int
    j_max: int
    overlap: float
    e: float
    f: float
    ftilde: float
    mean: float
    var: float
    cov: float

    @property
    def worst(self) -> float:
        return max(self.overlap, self.e, self.f, self.ftilde, self.mean, self.var, self.cov)


def compare_pair(omega, zeta, basis: fock.FockBasis) -> PairDeviation:
    """Max absolute deviation per quantity between closed forms and the oracle."""
    el = fock.oracle_matrix_elements(omega, zeta, basis)
    e, f, ft = coherent.matrix_elements(omega, zeta)
    mom = fock.oracle_area_moments(zeta, basis)
    rep = coherent.area_report(zeta)
    cov = mom.covariance
    return PairDeviation(
        n=basis.n_legs,
        j_max=basis.j_max,
        overlap=abs(el.overlap - coherent.overlap(omega, zeta)),
        e=float(np.abs(el.e - e).max()),
        f=float(np.abs(el.f - f).max()),
        ftilde=float(np.abs(el.ft - ft).max()),
        mean=float(np.abs(mom.mean - rep.per_leg_mean).max()),
        var=float(max(np.abs(np.diag(cov) - rep.per_leg_var).max(), abs(mom.total_var - rep.total_var))),
        cov=float(np.abs(cov - rep.covariance).max()),
    )


@dataclass
class SuiteReport:
    trials: list = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        return max((t.worst for t in self.trials), default=0.0)

    def as_dict(self) -> dict:
        return {
            "max_deviation": self.max_deviation,
            "trials": [dict(vars(t), worst=t.worst) for t in self.trials],
        }


def oracle_suite(n: int, j_max: int, trials: int, seed: int, max_norm_sq: float | None = None) -> SuiteReport:
    """Compare closed forms and oracle on ``trials`` random pairs at a fixed cutoff.

    Labels are drawn below the largest ``lambda_1^2`` that the cutoff
    resolves to the tail tolerance, capped at ``max_norm_sq`` (default 1/2).
    """
    rng = np.random.default_rng(seed)
    cap = safe_norm_sq(n, j_max, cap=0.5 if max_norm_sq is None else max_norm_sq)
    basis = fock.build_basis(n, j_max)
    report = SuiteReport()
    for _ in range(trials):
        zeta = random_label(n, rng, cap)
        omega = random_label(n, rng, cap)
        report.trials.append(compare_pair(omega, zeta, basis))
    return report
