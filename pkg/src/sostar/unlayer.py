"""Fixed-total-area layer: the U(N) irreducible pieces of the intertwiner space.

States are ``|J, xi> = N_J(xi) (Ftilde_xi / 2)^J |0>`` for a rank-2
antisymmetric ``xi``; no domain bound applies and proportional ``xi`` give
the same ray.
"""

from __future__ import annotations

import math

import numpy as np

from .antisym import as_antisymmetric, canonical_decompose
from .errors import RankNotTwo, SingularMatrix, ZeroMatrix

INT64_MAX = 2**63 - 1
# exact factorials below this value of N + J, log-gamma above
EXACT_LIMIT = 64


def dim_fixed_area(n: int, j: int, max_value: int | None = INT64_MAX) -> int:
    """Number of N-leg intertwiners with total area ``J``.

    ``(N+J-1)! (N+J-2)! / (J! (J+1)! (N-1)! (N-2)!)`` in exact integers.

    Raises:
        OverflowError: if the count exceeds ``max_value`` (pass ``None`` for no bound).
    """
    if n < 2 or j < 0:
        raise ValueError("need n >= 2 and j >= 0")
    f = math.factorial
    num = f(n + j - 1) * f(n + j - 2)
    den = f(j) * f(j + 1) * f(n - 1) * f(n - 2)
    out, rem = divmod(num, den)
    assert rem == 0
    if max_value is not None and out > max_value:
        raise OverflowError(f"dimension {out} exceeds {max_value}")
    return out


def _rank_two(xi) -> tuple[np.ndarray, float]:
    x = as_antisymmetric(xi)
    half_tr = 0.5 * float(np.real(np.trace(x.conj().T @ x)))
    if half_tr == 0.0:
        raise ZeroMatrix("xi vanishes")
    k = canonical_decompose(x).half_rank
    if k != 1:
        raise RankNotTwo(f"xi has rank {2 * k}, expected 2")
    return x, half_tr


def _log_factorial_pair(j: int, n: int) -> float:
    """``log(J! (J+1)!)``: exact integers for small ``N + J``, log-gamma otherwise."""
    if n + j <= EXACT_LIMIT:
        return math.log(math.factorial(j) * math.factorial(j + 1))
    return math.lgamma(j + 1) + math.lgamma(j + 2)


def un_normalization(xi, j: int) -> float:
    """``(tr(xi* xi) / 2)^(-J/2) / sqrt(J! (J+1)!)``."""
    x, t = _rank_two(xi)
    return math.exp(-0.5 * j * math.log(t) - 0.5 * _log_factorial_pair(j, x.shape[0]))


def un_overlap(eta, xi, j: int) -> complex:
    """``<J, eta | J, xi>`` for normalised states."""
    e, te = _rank_two(eta)
    x, tx = _rank_two(xi)
    c = 0.5 * np.trace(e.conj().T @ x)
    return complex(c**j * (te * tx) ** (-0.5 * j))


def un_expectation_E(xi, j: int) -> np.ndarray:
    """``<E_ab> = delta_ab + 2J (xi* xi)_ab / tr(xi* xi)``."""
    x, t = _rank_two(xi)
    return np.eye(x.shape[0]) + j * (x.conj().T @ x) / t


def un_spinors(xi, j: int) -> np.ndarray:
    """Spinors ``|z_a> = sqrt(J) (U_a1, U_a2)`` from ``xi = lambda U (sigma + 0) U^t``.

    Returns:
        ``(N, 2)`` complex array; row ``a`` is ``(x_a, y_a)``.
    """
    x, _ = _rank_two(xi)
    u = canonical_decompose(x).u
    return math.sqrt(j) * u[:, :2].copy()


def un_covariance(xi, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Covariance of the leg areas in ``|J, xi>``.

    ``Cov_ab = delta_ab <z_a|z_a> / 4 + |[z_b|z_a>|^2 / 4J - <z_a|z_a><z_b|z_b> / 4J``.

    Returns:
        ``(cov, var)`` with ``var`` the diagonal.
    """
    x, _ = _rank_two(xi)
    n = x.shape[0]
    if j == 0:
        return np.zeros((n, n)), np.zeros(n)
    z = un_spinors(x, j)
    norms = np.sum(np.abs(z) ** 2, axis=1)
    # [z_b|z_a> = y_b x_a - x_b y_a
    dual = np.outer(z[:, 1], z[:, 0]) - np.outer(z[:, 0], z[:, 1])
    cov = 0.25 * np.diag(norms) + (np.abs(dual) ** 2 - np.outer(norms, norms)) / (4 * j)
    return cov, np.diag(cov).copy()


def closure_residual(spinors) -> float:
    """``|| sum_a |z_a><z_a| - (sum_a <z_a|z_a> / 2) 1 ||``."""
    z = np.asarray(spinors, dtype=complex)
    m = z.T @ z.conj()
    return float(np.linalg.norm(m - 0.5 * np.trace(m).real * np.eye(2)))


def gl_action(g, xi, j: int) -> tuple[complex, np.ndarray]:
    """Coefficient and new label of ``g |J, xi>`` up to normalisation: ``(det g, g xi g^t)``."""
    g = np.asarray(g, dtype=complex)
    _rank_two(xi)
    if np.linalg.cond(g) > 1e14:
        raise SingularMatrix("g is not invertible")
    x = as_antisymmetric(xi)
    new = g @ x @ g.T
    return complex(np.linalg.det(g)), 0.5 * (new - new.T)
