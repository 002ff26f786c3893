"""Matrix realisation of SO*(2N) and its Lie algebra.

Group elements are stored as the block pair ``(A, B)`` of

    g = [[A, B], [-conj(B), conj(A)]]

which makes the defining relations structural.  The full ``2N x 2N`` matrix
is materialised only on demand.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, logm
from scipy.stats import unitary_group

from .antisym import TOL_DOM, as_antisymmetric, random_in_domain, spectral_norm_sq
from .errors import DomainViolation, IndexOutOfRange, SingularA, SingularDenominator

TOL_GRP = 1e-10
_COND_LIMIT = 1e14


@dataclass(frozen=True)
class BlockGroupElement:
    a: np.ndarray
    b: np.ndarray

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @classmethod
    def identity(cls, n: int) -> "BlockGroupElement":
        return cls(np.eye(n, dtype=complex), np.zeros((n, n), dtype=complex))

    @classmethod
    def from_unitary(cls, u) -> "BlockGroupElement":
        u = np.asarray(u, dtype=complex)
        return cls(u, np.zeros_like(u))

    @classmethod
    def from_matrix(cls, g) -> "BlockGroupElement":
        g = np.asarray(g, dtype=complex)
        n = g.shape[0] // 2
        return cls(g[:n, :n].copy(), g[:n, n:].copy())

    def matrix(self) -> np.ndarray:
        return np.block([[self.a, self.b], [-self.b.conj(), self.a.conj()]])

    def inverse(self) -> "BlockGroupElement":
        a, b = self.a, self.b
        return BlockGroupElement(a.conj().T, b.T.copy())

    def __matmul__(self, other: "BlockGroupElement") -> "BlockGroupElement":
        return BlockGroupElement.from_matrix(self.matrix() @ other.matrix())


@dataclass(frozen=True)
class AlgebraElement:
    x: np.ndarray
    y: np.ndarray

    def matrix(self) -> np.ndarray:
        return np.block([[self.x, self.y], [self.y.conj(), self.x.conj()]])

    def residual(self) -> float:
        return float(max(np.linalg.norm(self.x + self.x.conj().T), np.linalg.norm(self.y + self.y.T)))


@dataclass(frozen=True)
class GeneratorMatrix:
    kind: str
    a: int
    b: int
    matrix: np.ndarray


def eta(n: int) -> np.ndarray:
    return np.diag(np.r_[np.ones(n), -np.ones(n)]).astype(complex)


def omega(n: int) -> np.ndarray:
    z, one = np.zeros((n, n)), np.eye(n)
    return np.block([[z, one], [one, z]]).astype(complex)


def check_group_membership(g: BlockGroupElement) -> float:
    """Largest Frobenius residual over all defining relations of SO*(2N).

    Covers the four block relations, the U(N, N) form, the invariant
    bilinear form and ``det g = 1``.
    """
    a, b = g.a, g.b
    n = g.n
    one = np.eye(n)
    full = g.matrix()
    res = [
        a @ a.conj().T - b @ b.conj().T - one,
        a.conj().T @ a - b.T @ b.conj() - one,
        a.conj().T @ b + b.T @ a.conj(),
        b @ a.T + a @ b.T,
        full.conj().T @ eta(n) @ full - eta(n),
        full.T @ omega(n) @ full - omega(n),
    ]
    out = max(float(np.linalg.norm(r)) for r in res)
    return max(out, float(abs(np.linalg.det(full) - 1.0)))


def _delta(n: int, a: int, b: int) -> np.ndarray:
    d = np.zeros((n, n))
    d[a, b] = 1.0
    return d


def _check_index(n: int, *idx: int) -> None:
    for i in idx:
        if not 1 <= i <= n:
            raise IndexOutOfRange(f"index {i} outside 1..{n}")


def generator_matrix(kind: str, a: int, b: int, n: int) -> GeneratorMatrix:
    """Basis element ``E_ab``, ``F_ab`` or ``Ftilde_ab`` (1-based indices)."""
    _check_index(n, a, b)
    d = _delta(n, a - 1, b - 1)
    z = np.zeros((n, n))
    if kind == "E":
        m = np.block([[d, z], [z, -d.T]])
    elif kind == "F":
        m = np.block([[z, z], [d - d.T, z]])
    elif kind == "Ftilde":
        m = np.block([[z, d - d.T], [z, z]])
    else:
        raise ValueError(f"unknown generator kind {kind!r}")
    return GeneratorMatrix(kind, a, b, m)


def commutator_rhs(kind1: str, i: tuple, kind2: str, j: tuple, gen) -> object:
    """Right-hand side of ``[X_i, Y_j]`` in the so*(2N) basis.

    ``gen(kind, a, b)`` must return the representation of a basis element;
    the return value is a linear combination of such objects or ``None``
    when the bracket vanishes.
    """
    a, b = i
    c, d = j
    terms = []
    if (kind1, kind2) == ("E", "E"):
        terms = [(c == b, "E", a, d, 1), (a == d, "E", c, b, -1)]
    elif (kind1, kind2) == ("E", "Ftilde"):
        terms = [(b == c, "Ftilde", a, d, 1), (b == d, "Ftilde", a, c, -1)]
    elif (kind1, kind2) == ("E", "F"):
        terms = [(a == d, "F", b, c, 1), (a == c, "F", b, d, -1)]
    elif (kind1, kind2) == ("F", "Ftilde"):
        terms = [
            (d == b, "E", c, a, 1),
            (c == a, "E", d, b, 1),
            (c == b, "E", d, a, -1),
            (d == a, "E", c, b, -1),
        ]
    elif kind1 == kind2:
        return None
    else:
        raise ValueError(f"bracket [{kind1}, {kind2}] not tabulated; swap the arguments")
    out = None
    for cond, kind, p, q, sign in terms:
        if cond:
            term = sign * gen(kind, p, q)
            out = term if out is None else out + term
    return out


ORDERED_PAIRS = [("E", "E"), ("E", "Ftilde"), ("E", "F"), ("F", "Ftilde"), ("F", "F"), ("Ftilde", "Ftilde")]


def structure_constant_check(n: int) -> float:
    """Max entrywise deviation of every basis commutator from the table."""
    cache = {}

    def gen(kind, a, b):
        key = (kind, a, b)
        if key not in cache:
            cache[key] = generator_matrix(kind, a, b, n).matrix
        return cache[key]

    worst = 0.0
    idx = list(itertools.product(range(1, n + 1), repeat=2))
    for k1, k2 in ORDERED_PAIRS:
        for i in idx:
            x = gen(k1, *i)
            for j in idx:
                y = gen(k2, *j)
                lhs = x @ y - y @ x
                rhs = commutator_rhs(k1, i, k2, j, gen)
                diff = lhs if rhs is None else lhs - rhs
                worst = max(worst, float(np.abs(diff).max()))
    return worst


def _psd_sqrt(h: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def require_domain(zeta, tol_dom: float = TOL_DOM) -> np.ndarray:
    z = as_antisymmetric(zeta)
    rho = spectral_norm_sq(z)
    if not rho < 1.0 - tol_dom:
        raise DomainViolation(f"largest eigenvalue of zeta* zeta is {rho:.6g}, must be < 1")
    return z


def g_of_zeta(zeta) -> BlockGroupElement:
    """The boost ``g_zeta`` with ``g_zeta . 0 = zeta``."""
    z = require_domain(zeta)
    n = z.shape[0]
    x = _psd_sqrt(np.linalg.inv(np.eye(n) - z @ z.conj().T))
    x = 0.5 * (x + x.conj().T)
    return BlockGroupElement(x, z @ x.conj())


def moebius_act(g: BlockGroupElement, zeta) -> np.ndarray:
    """Fractional linear action ``(A zeta + B)(C zeta + D)^-1``."""
    z = np.asarray(zeta, dtype=complex)
    num = g.a @ z + g.b
    den = -g.b.conj() @ z + g.a.conj()
    if np.linalg.cond(den) > _COND_LIMIT:
        raise SingularDenominator("C zeta + D is singular")
    out = np.linalg.solve(den.T, num.T).T
    return 0.5 * (out - out.T)


def matrix_log(m: np.ndarray) -> np.ndarray:
    """Principal logarithm; Hermitian when ``m`` is Hermitian positive definite."""
    m = np.asarray(m, dtype=complex)
    if np.allclose(m, m.conj().T, atol=1e-13 * max(1.0, np.abs(m).max())):
        w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
        if w.min() > 0:
            return (v * np.log(w)) @ v.conj().T
    return logm(m)


def udl_decompose(g: BlockGroupElement) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split ``g = exp(Ftilde_u / 2) exp(E_L) exp(-F_l / 2)``.

    Returns:
        ``(u, L, l)`` with ``u = B conj(A)^-1``, ``exp(L) = (A*)^-1`` and
        ``l = A^-1 B``.
    """
    a, b = g.a, g.b
    if np.linalg.cond(a) > _COND_LIMIT:
        raise SingularA("block A is not invertible")
    upper = np.linalg.solve(a.conj().T, b.T).T
    lower = np.linalg.solve(a, b)
    l_matrix = matrix_log(np.linalg.inv(a.conj().T))
    return 0.5 * (upper - upper.T), l_matrix, 0.5 * (lower - lower.T)


def udl_factors(upper, l_matrix, lower) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three ``2N x 2N`` factors of :func:`udl_decompose` as explicit matrices."""
    n = upper.shape[0]
    one, z = np.eye(n), np.zeros((n, n))
    el = expm(l_matrix)
    up = np.block([[one, upper], [z, one]])
    mid = np.block([[el, z], [z, expm(-l_matrix.T)]])
    low = np.block([[one, z], [-lower.conj(), one]])
    return up, mid, low


def udl_residual(g: BlockGroupElement) -> float:
    up, mid, low = udl_factors(*udl_decompose(g))
    return float(np.linalg.norm(up @ mid @ low - g.matrix()))


def sp4n_embed(g: BlockGroupElement) -> np.ndarray:
    """Real-form embedding of SO*(2N) into Sp(4N) acting on ``(A, B, A^dag, B^dag)``."""
    x, y = g.a, g.b
    z = np.zeros_like(x)
    return np.block(
        [
            [x, z, z, -y],
            [z, x, y, z],
            [z, -y.conj(), x.conj(), z],
            [y.conj(), z, z, x.conj()],
        ]
    )


def bogoliubov_blocks(phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = phi.shape[0] // 2
    return phi[:m, :m], phi[:m, m:]


def symplectic_residual(phi: np.ndarray) -> float:
    u, v = bogoliubov_blocks(phi)
    one = np.eye(u.shape[0])
    return float(max(np.linalg.norm(u @ u.conj().T - v @ v.conj().T - one), np.linalg.norm(u @ v.T - v @ u.T)))


def squeeze_matrix(zeta) -> np.ndarray:
    z = require_domain(zeta)
    zero = np.zeros_like(z)
    return np.block([[zero, -z], [z, zero]])


def squeeze_residual(zeta) -> float:
    """Distance between ``[[0, -zeta], [zeta, 0]]`` and ``-U^-1 V`` from the embedded inverse boost."""
    s = squeeze_matrix(zeta)
    u, v = bogoliubov_blocks(sp4n_embed(g_of_zeta(zeta).inverse()))
    return float(np.linalg.norm(s + np.linalg.solve(u, v)))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(n, random_state=rng) if n > 1 else np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))


def random_group_element(n: int, rng: np.random.Generator, max_norm_sq: float = 0.5) -> BlockGroupElement:
    return g_of_zeta(random_in_domain(n, rng, max_norm_sq)) @ BlockGroupElement.from_unitary(random_unitary(n, rng))
