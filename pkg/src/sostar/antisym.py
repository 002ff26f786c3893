"""Complex antisymmetric matrices: validation, domain test and canonical form.

Every coherent state is labelled by an antisymmetric ``zeta`` with
``zeta* zeta < 1``.  The canonical form ``zeta = U M U^t`` with
``M = (+)_alpha lambda_alpha sigma (+) 0`` and ``sigma = [[0, -1], [1, 0]]``
drives everything semi-classical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from .errors import ConvergenceFailure, NonFinite, NotAntisymmetric

SIGMA = np.array([[0.0, -1.0], [1.0, 0.0]])

TOL_SYM = 1e-12
TOL_DOM = 1e-12
TOL_MULT = 1e-9
RANK_CUTOFF = 1e-10
# eigenvalues of zeta zeta* closer than this (relative) are treated as one
# degenerate eigenspace when pairing columns
_CLUSTER_TOL = 1e-12


@dataclass(frozen=True)
class DomainReport:
    is_antisymmetric: bool
    spectral_norm_sq: float
    in_domain: bool


@dataclass(frozen=True)
class CanonicalForm:
    u: np.ndarray
    lambdas: tuple[float, ...]
    half_rank: int
    padding: int
    groups: tuple[tuple[float, int], ...] = field(default=())

    @property
    def n(self) -> int:
        return self.u.shape[0]

    def block_matrix(self) -> np.ndarray:
        """The normal form ``M`` such that ``zeta = U M U^t``."""
        return block_form(self.lambdas, self.n)

    def reconstruct(self) -> np.ndarray:
        return self.u @ self.block_matrix() @ self.u.T

    def residuals(self, zeta) -> tuple[float, float]:
        """Frobenius residuals of reconstruction and of unitarity."""
        z = np.asarray(zeta, dtype=complex)
        rec = np.linalg.norm(self.reconstruct() - z)
        uni = np.linalg.norm(self.u.conj().T @ self.u - np.eye(self.n))
        return float(rec), float(uni)


def block_form(lambdas, n: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=complex)
    for alpha, lam in enumerate(lambdas):
        i = 2 * alpha
        m[i : i + 2, i : i + 2] = lam * SIGMA
    return m


def _finite(z: np.ndarray) -> None:
    if not np.all(np.isfinite(z)):
        raise NonFinite("matrix has NaN or infinite entries")


def antisymmetry_residual(zeta) -> float:
    z = np.asarray(zeta, dtype=complex)
    return float(np.linalg.norm(z + z.T))


def is_antisymmetric(zeta, tol: float = TOL_SYM) -> bool:
    z = np.asarray(zeta, dtype=complex)
    return antisymmetry_residual(z) <= tol * np.linalg.norm(z)


def as_antisymmetric(zeta, tol: float = TOL_SYM) -> np.ndarray:
    """Validate ``zeta`` and return its exactly antisymmetrised copy."""
    z = np.array(zeta, dtype=complex)
    if z.ndim != 2 or z.shape[0] != z.shape[1]:
        raise NotAntisymmetric(f"expected a square matrix, got shape {z.shape}")
    _finite(z)
    if not is_antisymmetric(z, tol):
        raise NotAntisymmetric(
            f"||zeta + zeta^t|| = {antisymmetry_residual(z):.3e} exceeds tolerance"
        )
    return 0.5 * (z - z.T)


def spectral_norm_sq(zeta) -> float:
    """Largest eigenvalue of ``zeta* zeta``."""
    z = np.asarray(zeta, dtype=complex)
    if z.size == 0:
        return 0.0
    return float(max(np.linalg.eigvalsh(z.conj().T @ z)[-1], 0.0))


def validate_domain(zeta, tol_sym: float = TOL_SYM, tol_dom: float = TOL_DOM) -> DomainReport:
    z = np.asarray(zeta, dtype=complex)
    _finite(z)
    anti = z.ndim == 2 and z.shape[0] == z.shape[1] and is_antisymmetric(z, tol_sym)
    rho = spectral_norm_sq(z)
    return DomainReport(anti, rho, bool(anti and rho < 1.0 - tol_dom))


def group_multiplicities(lambdas, tol_mult: float = TOL_MULT) -> list[tuple[float, int]]:
    """Merge consecutive (descending) values closer than ``tol_mult`` relatively.

    >>> group_multiplicities([0.9, 0.3])
    [(0.9, 1), (0.3, 1)]
    """
    groups: list[list[float]] = []
    for lam in lambdas:
        if groups and abs(groups[-1][-1] - lam) <= tol_mult * max(abs(groups[-1][-1]), abs(lam)):
            groups[-1].append(float(lam))
        else:
            groups.append([float(lam)])
    return [(float(np.mean(g)), len(g)) for g in groups]


def _fix_phase(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v) > np.abs(v).max() * (1 - 1e-8)))
    return v * (abs(v[i]) / v[i])


def canonical_decompose(
    zeta,
    tol_mult: float = TOL_MULT,
    rank_cutoff: float = RANK_CUTOFF,
    tol_sym: float = TOL_SYM,
) -> CanonicalForm:
    """Youla-type normal form ``zeta = U M U^t`` of an antisymmetric matrix.

    Eigenvectors ``u`` of ``zeta zeta*`` come in pairs ``(u, zeta conj(u) / lambda)``;
    inside a degenerate eigenspace the first member of each pair is taken
    from the part not yet spanned.  ``U`` is only defined up to the
    stabiliser of ``M``, so callers must compare reconstructions, never
    entries of ``U``.
    """
    z = as_antisymmetric(zeta, tol_sym)
    n = z.shape[0]
    try:
        theta, vecs = np.linalg.eigh(z @ z.conj().T)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceFailure(str(exc)) from exc
    order = np.argsort(-theta, kind="stable")
    theta, vecs = theta[order], vecs[:, order]
    scale = max(float(theta[0]) if n else 0.0, 1.0)

    cols: list[np.ndarray] = []
    lambdas: list[float] = []
    start = 0
    while start < n and np.sqrt(max(theta[start], 0.0)) >= rank_cutoff:
        stop = start
        while stop < n and theta[start] - theta[stop] <= _CLUSTER_TOL * scale:
            stop += 1
        block = vecs[:, start:stop]
        while True:
            if cols:
                q = np.column_stack(cols)
                rest = block - q @ (q.conj().T @ block)
            else:
                rest = block
            left, sv, _ = np.linalg.svd(rest, full_matrices=False)
            if sv.size == 0 or sv[0] < 0.5:
                break
            u1 = left[:, 0]
            if cols:
                u1 = u1 - q @ (q.conj().T @ u1)
            u1 = _fix_phase(u1 / np.linalg.norm(u1))
            w = z @ u1.conj()
            lam = np.linalg.norm(w)
            if lam < rank_cutoff:
                break
            u2 = w / lam
            if cols:
                u2 = u2 - q @ (q.conj().T @ u2)
                u2 /= np.linalg.norm(u2)
            cols.extend([u1, u2])
            lambdas.append(float(np.real(u2.conj() @ z @ u1.conj())))
        start = stop

    k = len(lambdas)
    if cols:
        q = np.column_stack(cols)
        rest = null_space(q.conj().T) if 2 * k < n else np.zeros((n, 0))
        u = np.column_stack([q, rest]) if rest.size else q
    else:
        u = np.eye(n, dtype=complex)
    order = np.argsort(-np.asarray(lambdas), kind="stable")
    if k:
        perm = np.concatenate([[2 * a, 2 * a + 1] for a in order] + [np.arange(2 * k, n)]).astype(int)
        u = u[:, perm]
        lambdas = [lambdas[a] for a in order]
    return CanonicalForm(
        u=u.astype(complex),
        lambdas=tuple(lambdas),
        half_rank=k,
        padding=n - 2 * k,
        groups=tuple(group_multiplicities(lambdas, tol_mult)),
    )


def antisym_from_canonical(u, lambdas) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    return u @ block_form(lambdas, u.shape[0]) @ u.T


def random_antisymmetric(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (x - x.T) / 2


def random_in_domain(n: int, rng: np.random.Generator, max_norm_sq: float = 0.5) -> np.ndarray:
    """Random antisymmetric matrix with largest ``zeta* zeta`` eigenvalue in (0, max_norm_sq]."""
    z = random_antisymmetric(n, rng)
    target = rng.uniform(0.05, 1.0) * max_norm_sq
    return z * np.sqrt(target / spectral_norm_sq(z))
