"""Semi-classical reading of a coherent state: families of closed spinor sets.

A label ``zeta = U M U^t`` with ``k`` nonzero blocks yields ``k`` families of
``N`` spinors built from consecutive column pairs of ``U``.  Each family
closes and describes a polyhedron through its normals
``V_a = <z_a|sigma|z_a> / 2``.  Summing the families does not close, and
for equal ``lambda`` the families mix under a compact symplectic stabiliser.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag, expm
from scipy.stats import unitary_group

from .antisym import SIGMA, TOL_MULT, canonical_decompose
from .errors import IncompatibleShape, NonUnitDeterminant, UnsupportedObservable, ZeroRank
from .group import require_domain

TOL_UNITARY = 1e-12


@dataclass(frozen=True)
class SpinorFamily:
    """``spinors[alpha, a] = (x, y)`` of ``|z^alpha_a>``; ``lambdas[alpha]`` the block values."""

    spinors: np.ndarray
    lambdas: tuple[float, ...]

    @property
    def k(self) -> int:
        return self.spinors.shape[0]

    @property
    def n(self) -> int:
        return self.spinors.shape[1]

    def duals(self) -> np.ndarray:
        """``|z] = (conj(y), -conj(x))``."""
        z = self.spinors
        return np.stack([z[..., 1].conj(), -z[..., 0].conj()], axis=-1)

    def column_matrix(self) -> np.ndarray:
        """``N x 2k`` matrix whose column pair ``(2 alpha, 2 alpha + 1)`` holds family ``alpha``."""
        return np.concatenate([self.spinors[a] for a in range(self.k)], axis=1)

    @classmethod
    def from_columns(cls, cols: np.ndarray, lambdas) -> "SpinorFamily":
        k = cols.shape[1] // 2
        return cls(np.stack([cols[:, 2 * a : 2 * a + 2] for a in range(k)]), tuple(lambdas))

    def areas(self) -> np.ndarray:
        """Per-family total areas ``Lambda_alpha = sum_a <z_a|z_a> / 2``."""
        return 0.5 * np.sum(np.abs(self.spinors) ** 2, axis=(1, 2))

    def as_dict(self) -> dict:
        out = []
        for alpha in range(self.k):
            out.append(
                {
                    "lambda": self.lambdas[alpha],
                    "spinors": [
                        {"x": [z[0].real, z[0].imag], "y": [z[1].real, z[1].imag]} for z in self.spinors[alpha].tolist()
                    ],
                    "normals": face_normals(self, alpha).tolist(),
                    "total_area": float(self.areas()[alpha]),
                }
            )
        return {"families": out}


def exact_scale(lam: float) -> float:
    """Spinor prefactor ``sqrt(2 lambda^2 / (1 - lambda^2))``."""
    return float(np.sqrt(2 * lam**2 / (1 - lam**2)))


def families_from_unitary(u, lambdas, scaling: str = "exact") -> SpinorFamily:
    """Spinor families read off the first ``2k`` columns of ``U``.

    ``scaling="exact"`` multiplies family ``alpha`` by
    ``sqrt(2 lambda^2 / (1 - lambda^2))`` so that the spinor observables
    reproduce the exact coherent-state expectations; ``scaling="unit"``
    keeps the raw unitary columns.
    """
    u = np.asarray(u, dtype=complex)
    k = len(lambdas)
    if scaling == "exact":
        scales = [exact_scale(l) for l in lambdas]
    elif scaling == "unit":
        scales = [1.0] * k
    else:
        raise ValueError(f"unknown scaling {scaling!r}")
    cols = u[:, : 2 * k] * np.repeat(scales, 2)[None, :]
    return SpinorFamily.from_columns(cols, lambdas)


def extract_spinor_families(zeta, scaling: str = "exact") -> SpinorFamily:
    z = require_domain(zeta)
    cf = canonical_decompose(z)
    if cf.half_rank == 0:
        raise ZeroRank("zeta has rank 0, no spinor family")
    return families_from_unitary(cf.u, cf.lambdas, scaling)


def spinor_expectations(family: SpinorFamily) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``delta + sum e^alpha``, ``sum f^alpha / lambda`` and ``sum conj(f^alpha) / lambda``."""
    obs = classical_observables(family)
    inv = np.array([1.0 / l for l in family.lambdas])
    e = np.eye(family.n) + obs.e_coarse
    f = np.tensordot(inv, obs.f, axes=1)
    return e, f, f.conj()


def closure_residual(family: SpinorFamily, alpha: int, beta: int) -> float:
    za, zb = family.spinors[alpha], family.spinors[beta]
    m = za.T @ zb.conj()
    target = 0.5 * float(np.sum(np.abs(za) ** 2)) * np.eye(2) if alpha == beta else 0
    return float(np.linalg.norm(m - target))


def normals_of(spinors) -> np.ndarray:
    z = np.asarray(spinors, dtype=complex)
    x, y = z[:, 0], z[:, 1]
    xy = x.conj() * y
    return np.stack([xy.real, xy.imag, 0.5 * (np.abs(x) ** 2 - np.abs(y) ** 2)], axis=1)


def face_normals(family: SpinorFamily, alpha: int) -> np.ndarray:
    """``V_a = <z_a|sigma|z_a> / 2`` for one family, shape ``(N, 3)``."""
    return normals_of(family.spinors[alpha])


@dataclass(frozen=True)
class ClassicalObservables:
    e: np.ndarray
    f: np.ndarray
    ftilde: np.ndarray

    @property
    def e_coarse(self) -> np.ndarray:
        return self.e.sum(axis=0)

    @property
    def f_coarse(self) -> np.ndarray:
        return self.f.sum(axis=0)

    @property
    def ftilde_coarse(self) -> np.ndarray:
        return self.ftilde.sum(axis=0)


def classical_observables(family: SpinorFamily) -> ClassicalObservables:
    """``e_ab = <z_a|z_b>``, ``f_ab = [z_a|z_b> = y_a x_b - x_a y_b`` and ``ftilde = conj(f)`` per family."""
    z = family.spinors
    x, y = z[..., 0], z[..., 1]
    e = np.einsum("kas,kbs->kab", z.conj(), z)
    f = y[:, :, None] * x[:, None, :] - x[:, :, None] * y[:, None, :]
    return ClassicalObservables(e, f, f.conj())


def dot_identity_residual(family: SpinorFamily) -> float:
    """Max deviation of ``V_a . V_b = e_ab e_ba / 2 - e_aa e_bb / 4`` over families."""
    obs = classical_observables(family)
    worst = 0.0
    for alpha in range(family.k):
        v = face_normals(family, alpha)
        e = obs.e[alpha]
        rhs = 0.5 * e * e.T - 0.25 * np.outer(np.diag(e), np.diag(e))
        worst = max(worst, float(np.abs(v @ v.T - rhs).max()))
    return worst


def coarse_closure_defect(family: SpinorFamily) -> float:
    """``sum_ab (e_ab e_ba / 2 - e_aa e_bb / 4)`` for the coarse-grained ``e``.

    For a single closed family this is ``|sum_a V_a|^2 = 0``; summing two or
    more families drives it negative, so no spinor set can reproduce ``e``.
    """
    e = classical_observables(family).e_coarse
    d = np.diag(e)
    return float(np.real(0.5 * np.sum(e * e.T) - 0.25 * np.sum(d) ** 2))


def defect_prediction(family: SpinorFamily) -> float:
    """``-sum_{alpha != beta} Lambda_alpha Lambda_beta``."""
    lam = family.areas()
    return float(-(lam.sum() ** 2 - np.sum(lam**2)))


# ---------------------------------------------------------------- Poisson structure


@dataclass(frozen=True)
class QuadraticObservable:
    """``O(u) = u^t K u / 2 + const`` on ``u = (w, conj(w))``, ``w`` the flattened spinor data.

    ``w`` has length ``m = 2 k N`` ordered ``(alpha, a, component)``.
    """

    k_matrix: np.ndarray
    const: complex = 0.0

    @property
    def m(self) -> int:
        return self.k_matrix.shape[0] // 2

    def __add__(self, other: "QuadraticObservable") -> "QuadraticObservable":
        return QuadraticObservable(self.k_matrix + other.k_matrix, self.const + other.const)

    def __sub__(self, other: "QuadraticObservable") -> "QuadraticObservable":
        return QuadraticObservable(self.k_matrix - other.k_matrix, self.const - other.const)

    def __rmul__(self, c: complex) -> "QuadraticObservable":
        return QuadraticObservable(c * self.k_matrix, c * self.const)

    def __call__(self, spinors) -> complex:
        w = np.asarray(spinors, dtype=complex).reshape(-1)
        u = np.concatenate([w, w.conj()])
        return complex(0.5 * u @ self.k_matrix @ u + self.const)

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.abs(self.k_matrix).max(initial=0.0) <= tol and abs(self.const) <= tol)


def _flat(k: int, n: int, alpha: int, a: int, s: int) -> int:
    return (alpha * n + a) * 2 + s


def _observable(k: int, n: int, terms) -> QuadraticObservable:
    m = 2 * k * n
    mat = np.zeros((2 * m, 2 * m), dtype=complex)
    for coef, p, q in terms:
        mat[p, q] += coef
        mat[q, p] += coef
    return QuadraticObservable(mat)


def observable(kind: str, a: int, b: int, k: int, n: int, alpha: int | None = None) -> QuadraticObservable:
    """Quadratic form of ``e_ab``, ``f_ab`` or ``ftilde_ab`` (0-based legs).

    ``alpha=None`` gives the coarse-grained sum over families.
    """
    m = 2 * k * n
    fams = range(k) if alpha is None else [alpha]
    terms = []
    for al in fams:
        if kind == "e":
            for s in range(2):
                terms.append((1.0, m + _flat(k, n, al, a, s), _flat(k, n, al, b, s)))
        elif kind in ("f", "ftilde"):
            off = 0 if kind == "f" else m
            # y_a x_b - x_a y_b (conjugated for ftilde)
            terms.append((1.0, off + _flat(k, n, al, a, 1), off + _flat(k, n, al, b, 0)))
            terms.append((-1.0, off + _flat(k, n, al, a, 0), off + _flat(k, n, al, b, 1)))
        else:
            raise UnsupportedObservable(f"unknown observable {kind!r}")
    return _observable(k, n, terms)


def poisson_bracket(obs1, obs2) -> QuadraticObservable:
    """Exact bracket under ``{x, conj(x)} = {y, conj(y)} = -i``.

    For ``O_i = u^t K_i u / 2`` the bracket is again quadratic with matrix
    ``K_1 P K_2 - K_2 P K_1`` where ``P = -i [[0, 1], [-1, 0]]``.
    """
    if not isinstance(obs1, QuadraticObservable) or not isinstance(obs2, QuadraticObservable):
        raise UnsupportedObservable("brackets are only defined between quadratic observables")
    m = obs1.m
    if obs2.m != m:
        raise UnsupportedObservable("observables live on different phase spaces")
    one, zero = np.eye(m), np.zeros((m, m))
    p = -1j * np.block([[zero, one], [-one, zero]])
    k1, k2 = obs1.k_matrix, obs2.k_matrix
    return QuadraticObservable(k1 @ p @ k2 - k2 @ p @ k1)


def classical_table_rhs(kind1: str, i: tuple, kind2: str, j: tuple, obs) -> QuadraticObservable | None:
    """Right-hand side of the classical so*(2N) brackets; ``obs(kind, a, b)`` builds observables."""
    a, b = i
    c, d = j
    terms = []
    if (kind1, kind2) == ("e", "e"):
        terms = [(c == b, "e", a, d, 1), (a == d, "e", c, b, -1)]
    elif (kind1, kind2) == ("e", "f"):
        terms = [(a == d, "f", b, c, 1), (a == c, "f", b, d, -1)]
    elif (kind1, kind2) == ("e", "ftilde"):
        terms = [(b == c, "ftilde", a, d, 1), (b == d, "ftilde", a, c, -1)]
    elif (kind1, kind2) == ("f", "ftilde"):
        terms = [(d == b, "e", c, a, 1), (c == a, "e", d, b, 1), (c == b, "e", d, a, -1), (d == a, "e", c, b, -1)]
    elif kind1 == kind2 and kind1 in ("f", "ftilde"):
        return None
    else:
        raise UnsupportedObservable(f"bracket {{{kind1}, {kind2}}} not tabulated")
    out = None
    for cond, kind, p, q, sign in terms:
        if cond:
            t = (-1j * sign) * obs(kind, p, q)
            out = t if out is None else out + t
    return out


CLASSICAL_PAIRS = [("e", "e"), ("e", "f"), ("e", "ftilde"), ("f", "ftilde"), ("f", "f"), ("ftilde", "ftilde")]


def classical_table_residual(k: int, n: int) -> float:
    """Largest matrix-entry deviation of every coarse bracket from the classical table."""
    cache: dict = {}

    def obs(kind, a, b):
        if (kind, a, b) not in cache:
            cache[(kind, a, b)] = observable(kind, a, b, k, n)
        return cache[(kind, a, b)]

    worst = 0.0
    idx = [(a, b) for a in range(n) for b in range(n)]
    for k1, k2 in CLASSICAL_PAIRS:
        for i in idx:
            for j in idx:
                lhs = poisson_bracket(obs(k1, *i), obs(k2, *j))
                rhs = classical_table_rhs(k1, i, k2, j, obs)
                diff = lhs if rhs is None else lhs - rhs
                worst = max(worst, float(np.abs(diff.k_matrix).max()))
    return worst


# ---------------------------------------------------------------- symmetries


@dataclass(frozen=True)
class SymmetryDescriptor:
    """Stabiliser ``x_i Sp(2 mu_i) x U(N - 2k)`` of the normal form."""

    groups: tuple[tuple[float, int], ...]
    n: int
    residual_unitary_dim: int

    def factors(self) -> list[str]:
        out = [f"Sp({2 * mu})" for _, mu in self.groups]
        out.append(f"U({self.residual_unitary_dim})")
        return out

    @property
    def label(self) -> str:
        return " x ".join(self.factors())

    @property
    def half_rank(self) -> int:
        return sum(mu for _, mu in self.groups)

    def normal_form(self) -> np.ndarray:
        m = np.zeros((self.n, self.n), dtype=complex)
        i = 0
        for lam, mu in self.groups:
            for _ in range(mu):
                m[i : i + 2, i : i + 2] = lam * SIGMA
                i += 2
        return m

    def as_dict(self) -> dict:
        return {
            "groups": [{"lambda": lam, "multiplicity": mu} for lam, mu in self.groups],
            "n": self.n,
            "residual_unitary_dim": self.residual_unitary_dim,
            "factors": self.factors(),
        }


def symmetry_group_of(zeta, tol_mult: float = TOL_MULT) -> SymmetryDescriptor:
    z = require_domain(zeta)
    cf = canonical_decompose(z, tol_mult=tol_mult)
    return SymmetryDescriptor(tuple(cf.groups), cf.n, cf.padding)


def symplectic_form(mu: int) -> np.ndarray:
    return np.kron(np.eye(mu), SIGMA).astype(complex)


def sample_compact_symplectic(mu: int, rng: np.random.Generator, spread: float = 3.0) -> np.ndarray:
    """Element of ``Sp(2 mu, C) ∩ U(2 mu)`` as ``expm`` of a random Lie-algebra element.

    A Gaussian anti-Hermitian matrix is projected onto the algebra with the
    involution ``X -> -Omega X^t Omega^-1``, whose fixed points are exactly
    the compact symplectic generators.
    """
    d = 2 * mu
    h = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = spread * (h - h.conj().T) / 2
    om = symplectic_form(mu)
    x = 0.5 * (h - om @ h.T @ np.linalg.inv(om))
    return expm(x)


def sample_symmetry(descriptor: SymmetryDescriptor, seed: int | np.random.Generator | None = None) -> np.ndarray:
    """Block-diagonal ``W`` with ``W M W^t = M`` for the descriptor's normal form ``M``."""
    rng = np.random.default_rng(seed)
    blocks = [sample_compact_symplectic(mu, rng) for _, mu in descriptor.groups]
    r = descriptor.residual_unitary_dim
    if r == 1:
        blocks.append(np.exp(2j * np.pi * rng.random()) * np.ones((1, 1)))
    elif r > 1:
        blocks.append(unitary_group.rvs(r, random_state=rng))
    return block_diag(*blocks).astype(complex) if blocks else np.zeros((0, 0), dtype=complex)


def stabilizer_residual(descriptor: SymmetryDescriptor, w) -> float:
    m = descriptor.normal_form()
    w = np.asarray(w, dtype=complex)
    return float(np.linalg.norm(w @ m @ w.T - m))


def apply_symmetry(family: SpinorFamily, w) -> SpinorFamily:
    """Spinors after ``U -> U W``; only the top-left ``2k x 2k`` part of ``W`` acts on spinors."""
    w = np.asarray(w, dtype=complex)
    k2 = 2 * family.k
    if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < k2:
        raise IncompatibleShape(f"W of shape {w.shape} cannot act on {family.k} families")
    if np.abs(w[:k2, k2:]).max(initial=0.0) > TOL_UNITARY or np.abs(w[k2:, :k2]).max(initial=0.0) > TOL_UNITARY:
        raise IncompatibleShape("W mixes spinor columns with the kernel of zeta")
    cols = family.column_matrix() @ w[:k2, :k2]
    return SpinorFamily.from_columns(cols, family.lambdas)


def sl2c_boost(family: SpinorFamily, x, tol: float = 1e-12) -> SpinorFamily:
    """Apply ``|z> -> X^t |z>`` to every spinor; ``X`` must have unit determinant."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (2, 2):
        raise IncompatibleShape("boost must be 2 x 2")
    if abs(np.linalg.det(x) - 1) > tol:
        raise NonUnitDeterminant(f"det X = {np.linalg.det(x)}")
    return SpinorFamily(np.einsum("ts,kat->kas", x, family.spinors), family.lambdas)


# ---------------------------------------------------------------- worked 4-leg example

EXAMPLE_U = 0.5 * np.array(
    [
        [1, 1, np.sqrt(0.5) * (-1 - 1j), np.sqrt(0.5) * (-1 + 1j)],
        [1, -1, np.sqrt(0.5) * (1 - 1j), np.sqrt(0.5) * (1 + 1j)],
        [1j, 1, 0, np.sqrt(2)],
        [-1j, 1, np.sqrt(2), 0],
    ],
    dtype=complex,
)
EXAMPLE_LAMBDAS = (np.sqrt(0.5), np.sqrt(0.5))
EXAMPLE_W = np.sqrt(0.5) * np.block([[np.eye(2), np.eye(2)], [np.eye(2), -np.eye(2)]]).astype(complex)


def example_zeta() -> np.ndarray:
    """The rank-4, four-leg label ``U (lambda sigma + lambda sigma) U^t`` with ``lambda = sqrt(1/2)``."""
    m = np.zeros((4, 4), dtype=complex)
    for alpha, lam in enumerate(EXAMPLE_LAMBDAS):
        m[2 * alpha : 2 * alpha + 2, 2 * alpha : 2 * alpha + 2] = lam * SIGMA
    return EXAMPLE_U @ m @ EXAMPLE_U.T


@dataclass(frozen=True)
class ExampleReport:
    zeta: np.ndarray
    family: SpinorFamily
    mixed: SpinorFamily
    face_areas: np.ndarray
    family_areas: np.ndarray
    defect: float
    symmetry: SymmetryDescriptor
    w_residual: float


def example_4leg() -> ExampleReport:
    """Spinors, normals, areas and defect of the four-leg example.

    Spinors are the raw column pairs of the given unitary, the normalisation
    under which every face has area ``1/4`` and each family total area 1.
    """
    zeta = example_zeta()
    family = families_from_unitary(EXAMPLE_U, EXAMPLE_LAMBDAS, scaling="unit")
    mixed = apply_symmetry(family, EXAMPLE_W)
    sym = symmetry_group_of(zeta)
    face = np.stack([np.linalg.norm(face_normals(family, a), axis=1) for a in range(family.k)])
    return ExampleReport(
        zeta=zeta,
        family=family,
        mixed=mixed,
        face_areas=face,
        family_areas=family.areas(),
        defect=coarse_closure_defect(family),
        symmetry=sym,
        w_residual=stabilizer_residual(sym, EXAMPLE_W),
    )
