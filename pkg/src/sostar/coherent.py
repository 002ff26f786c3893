"""Closed forms for SO*(2N) coherent states ``|zeta> = N(zeta) exp(Ftilde_zeta / 2)|0>``.

Everything is expressed through the resolvent ``sigma = (1 - zeta* zeta)^-1``
and determinants of ``1 - omega* zeta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .antisym import RANK_CUTOFF, canonical_decompose
from .group import require_domain
from .errors import RankNotTwo

# condition number of 1 - zeta* zeta is attached to reports past this edge
STIFF_EDGE = 0.99


@dataclass(frozen=True)
class CoherentLabel:
    zeta: np.ndarray
    sigma: np.ndarray

    @classmethod
    def of(cls, zeta) -> "CoherentLabel":
        z = require_domain(zeta)
        return cls(z, resolvent(z))


@dataclass(frozen=True)
class AreaReport:
    per_leg_mean: np.ndarray
    total_mean: float
    per_leg_var: np.ndarray
    total_var: float
    covariance: np.ndarray
    cv: float
    cv_upper_bound: float
    condition_number: float | None = None

    def as_dict(self) -> dict:
        out = {
            "per_leg_mean": self.per_leg_mean.tolist(),
            "total_mean": self.total_mean,
            "per_leg_var": self.per_leg_var.tolist(),
            "total_var": self.total_var,
            "covariance": self.covariance.tolist(),
            "cv": self.cv,
            "cv_upper_bound": self.cv_upper_bound,
        }
        if self.condition_number is not None:
            out["condition_number"] = self.condition_number
        return out


def resolvent(zeta) -> np.ndarray:
    """``sigma = (1 - zeta* zeta)^-1`` by a linear solve, symmetrised to be Hermitian."""
    z = np.asarray(zeta, dtype=complex)
    n = z.shape[0]
    s = np.linalg.solve(np.eye(n) - z.conj().T @ z, np.eye(n))
    return 0.5 * (s + s.conj().T)


def _logdet(m: np.ndarray) -> complex:
    sign, logabs = np.linalg.slogdet(m)
    return logabs + np.log(sign)


def normalization(zeta) -> float:
    """``det(1 - zeta* zeta)^(1/2)``."""
    z = require_domain(zeta)
    n = z.shape[0]
    return float(np.exp(0.5 * _logdet(np.eye(n) - z.conj().T @ z).real))


def _log_overlap(w: np.ndarray, z: np.ndarray) -> complex:
    n = z.shape[0]
    one = np.eye(n)
    return (
        0.5 * _logdet(one - z.conj().T @ z).real
        + 0.5 * _logdet(one - w.conj().T @ w).real
        - _logdet(one - w.conj().T @ z)
    )


def overlap(omega, zeta) -> complex:
    """``<omega|zeta>`` for normalised coherent states."""
    w, z = require_domain(omega), require_domain(zeta)
    return complex(np.exp(_log_overlap(w, z)))


def matrix_elements(omega, zeta) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``<omega|X_ab|zeta>`` for ``X`` in ``E``, ``F`` and ``Ftilde``.

    Returns:
        Three ``N x N`` complex arrays indexed ``[a, b]``.
    """
    w, z = require_domain(omega), require_domain(zeta)
    n = z.shape[0]
    ov = overlap(w, z)
    inv = np.linalg.inv(np.eye(n) - w.conj().T @ z)
    e = ov * (np.eye(n) + 2 * w.conj().T @ z @ inv)
    f = ov * 2 * z @ inv
    ft = ov * 2 * inv @ w.conj()
    return e, f, ft


def area_report(zeta) -> AreaReport:
    z = require_domain(zeta)
    n = z.shape[0]
    s = resolvent(z)
    diag = np.real(np.diag(s))
    mean = diag - 1.0
    total = float(mean.sum())
    left = s @ z.conj().T
    right = z @ s
    cov = 0.5 * np.abs(s) ** 2 + 0.5 * np.real(left * right.T) - 0.5 * np.diag(diag)
    cov = 0.5 * (cov + cov.T)
    total_var = float(np.real(np.trace(s @ s) - np.trace(s)))
    cv = math.sqrt(max(total_var, 0.0)) / total if total > 0 else math.inf
    tr = float(diag.sum())
    bound = math.sqrt(tr / (tr - n)) if tr > n else math.inf
    cond = None
    if n and np.linalg.eigvalsh(z.conj().T @ z)[-1] > STIFF_EDGE:
        cond = float(np.linalg.cond(np.eye(n) - z.conj().T @ z))
    return AreaReport(mean, total, np.diag(cov).copy(), total_var, cov, cv, bound, cond)


def _rank_two_half_trace(zeta) -> float:
    z = np.asarray(zeta, dtype=complex)
    k = canonical_decompose(z).half_rank
    if k != 1:
        raise RankNotTwo(f"matrix has rank {2 * k}, closed form requires rank 2")
    return 0.5 * float(np.real(np.trace(z.conj().T @ z)))


def area_distribution(zeta, j_max: int) -> list[tuple[int, float]]:
    """Probability of total area ``J`` for a rank-2 label, ``J = 0..j_max``."""
    z = require_domain(zeta)
    t = _rank_two_half_trace(z)
    det = normalization(z) ** 2
    return [(j, det * t**j * (j + 1)) for j in range(j_max + 1)]


def fixed_area_norm(zeta, j: int) -> float:
    """Squared norm of ``(Ftilde_zeta / 2)^J |0>`` for rank 2: ``J! (J+1)! (tr zeta* zeta / 2)^J``."""
    t = _rank_two_half_trace(zeta)
    if j < 0:
        raise ValueError("J must be non-negative")
    return float(math.factorial(j) * math.factorial(j + 1) * t**j)


def area_generating_function(zeta, t: complex) -> complex:
    """``<zeta| t^A |zeta>``; expanding in ``t`` gives the total-area distribution at any rank."""
    z = require_domain(zeta)
    x = np.clip(np.linalg.eigvalsh(z.conj().T @ z), 0.0, None)
    return complex(np.prod((1 - x) / (1 - t * x)))


def distribution_any_rank(zeta, j_max: int) -> np.ndarray:
    """Total-area distribution for any rank by expanding the generating function.

    Each eigenvalue ``x`` of ``zeta* zeta`` (they come in equal pairs)
    contributes a geometric factor ``(1 - x) / (1 - t x)``; the series are
    multiplied term by term.
    """
    z = require_domain(zeta)
    x = np.sort(np.clip(np.linalg.eigvalsh(z.conj().T @ z), 0.0, None))[::-1]
    p = np.zeros(j_max + 1)
    p[0] = 1.0
    powers = np.arange(j_max + 1)
    for xi in x:
        if xi < RANK_CUTOFF**2:
            continue
        series = (1 - xi) * xi**powers
        p = np.convolve(p, series)[: j_max + 1]
    return p


def tail_bound(zeta, j: int) -> float:
    """Upper bound on ``P(total area = J)`` valid for every rank.

    Uses ``P(J) <= C(J + N - 1, N - 1) lambda_1^(2J)`` with ``lambda_1^2`` the
    largest eigenvalue of ``zeta* zeta``.
    """
    z = np.asarray(zeta, dtype=complex)
    n = z.shape[0]
    lam2 = float(np.linalg.eigvalsh(z.conj().T @ z)[-1]) if n else 0.0
    return math.comb(j + n - 1, n - 1) * lam2**j
