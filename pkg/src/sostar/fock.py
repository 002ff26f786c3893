"""Truncated Fock-space realisation of so*(2N) on 2N oscillators ``(A_a, B_a)``.

This module is the brute-force oracle: it never uses the closed forms it is
meant to check.  States are stored as blocks ``C[(p, q)]`` of shape
``D_p x D_q`` where rows run over A-monomials of degree ``p``, columns over
B-monomials of degree ``q`` and ``D_p = C(p + N - 1, N - 1)``.  In that layout

    A_b^dag :  C -> R_b C          B_a^dag :  C -> C R_a^T
    A_b     :  C -> R_b^T C        B_a     :  C -> C R_a

with ``R_a`` the sparse raising matrix carrying ``sqrt(n_a + 1)``.  The
total area is ``(p + q) / 2``; intertwiners live on balanced shells ``p = q``.

A flat, graded-lexicographic basis with explicit sparse operators is also
provided for algebraic checks on small cutoffs.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from .antisym import SIGMA, as_antisymmetric
from .errors import CapacityExceeded, CutoffExceeded, SingularMatrix
from .group import BlockGroupElement, commutator_rhs, matrix_log, require_domain, udl_decompose

DEFAULT_MAX_DIM = 5_000_000
TAIL_TOL = 1e-10


def max_dim_from_env() -> int:
    return int(os.environ.get("COHERENT_MAX_DIM", DEFAULT_MAX_DIM))


# ---------------------------------------------------------------- monomials


@lru_cache(maxsize=None)
def monomials(n: int, p: int) -> np.ndarray:
    """Exponent vectors of degree ``p`` in ``n`` variables, descending lex order."""
    if n == 0:
        return np.zeros((1 if p == 0 else 0, 0), dtype=np.int64)
    rows = []
    for combo in itertools.combinations_with_replacement(range(n), p):
        rows.append(np.bincount(np.asarray(combo, dtype=np.int64), minlength=n))
    out = np.array(rows, dtype=np.int64).reshape(-1, n)
    order = np.lexsort(out.T[::-1])[::-1]
    return out[order]


@lru_cache(maxsize=None)
def _monomial_index(n: int, p: int) -> dict:
    return {tuple(m): i for i, m in enumerate(monomials(n, p))}


def shell_dim(n: int, p: int) -> int:
    return math.comb(p + n - 1, n - 1) if p >= 0 else 0


@lru_cache(maxsize=None)
def raising_table(n: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Targets and weights of ``a^dag_a`` from degree ``p`` to ``p + 1``.

    Returns:
        ``(idx, val)`` of shape ``(n, D_p)``: monomial ``m`` goes to row
        ``idx[a, m]`` of degree ``p + 1`` with amplitude ``val[a, m]``.
    """
    src = monomials(n, p)
    index = _monomial_index(n, p + 1)
    idx = np.empty((n, len(src)), dtype=np.int64)
    val = np.empty((n, len(src)))
    for a in range(n):
        shifted = src.copy()
        shifted[:, a] += 1
        idx[a] = [index[tuple(m)] for m in shifted]
        val[a] = np.sqrt(shifted[:, a])
    return idx, val


@lru_cache(maxsize=None)
def raising(n: int, p: int, a: int) -> sp.csr_matrix:
    """``D_{p+1} x D_p`` matrix of ``a^dag_a`` on degree-``p`` monomials."""
    idx, val = raising_table(n, p)
    d = shell_dim(n, p)
    return sp.csr_matrix((val[a], (idx[a], np.arange(d))), shape=(shell_dim(n, p + 1), d))


@lru_cache(maxsize=None)
def occupations(n: int, p: int) -> np.ndarray:
    return monomials(n, p).astype(float)


# ---------------------------------------------------------------- basis


@dataclass(frozen=True)
class FockBasis:
    """All occupation vectors ``(n_A, n_B)`` with total quanta at most ``2 j_max``.

    The flat list is enumerated lazily: the block engine only needs shell
    dimensions, while explicit sparse operators need ``states``.
    """

    n_legs: int
    j_max: int
    max_dim: int = DEFAULT_MAX_DIM

    @property
    def size(self) -> int:
        return math.comb(2 * self.j_max + 2 * self.n_legs, 2 * self.n_legs)

    @property
    def max_shell_block(self) -> int:
        return shell_dim(self.n_legs, self.j_max) ** 2

    @property
    def states(self) -> np.ndarray:
        if self.size > self.max_dim:
            raise CapacityExceeded(f"flat basis has {self.size} states, bound is {self.max_dim}")
        return _flat_states(self.n_legs, self.j_max)

    @property
    def index(self) -> dict:
        return {tuple(s): i for i, s in enumerate(self.states)}


@lru_cache(maxsize=None)
def _flat_states(n: int, j_max: int) -> np.ndarray:
    blocks = [monomials(2 * n, m) for m in range(2 * j_max + 1)]
    out = np.concatenate(blocks, axis=0)
    out.setflags(write=False)
    return out


def build_basis(n: int, j_max: int, max_dim: int | None = None) -> FockBasis:
    """Truncated basis handle.

    Raises:
        CapacityExceeded: if the largest balanced shell block exceeds ``max_dim``.
    """
    if n < 1 or j_max < 0:
        raise ValueError("need n >= 1 and j_max >= 0")
    bound = max_dim_from_env() if max_dim is None else max_dim
    basis = FockBasis(n, j_max, bound)
    if basis.max_shell_block > bound:
        raise CapacityExceeded(
            f"shell block of {basis.max_shell_block} amplitudes at j_max={j_max} exceeds bound {bound}"
        )
    return basis


# ---------------------------------------------------------------- flat operators


def _flat_ladders(basis: FockBasis) -> list[sp.csr_matrix]:
    """Creation operators for the 2N modes ``(A_1..A_N, B_1..B_N)``; leaving the cutoff drops the state."""
    states = basis.states
    index = basis.index
    dim = len(states)
    top = 2 * basis.j_max
    out = []
    totals = states.sum(axis=1)
    for k in range(2 * basis.n_legs):
        rows, cols, vals = [], [], []
        for col in np.nonzero(totals < top)[0]:
            s = states[col].copy()
            s[k] += 1
            rows.append(index[tuple(s)])
            cols.append(col)
            vals.append(math.sqrt(s[k]))
        out.append(sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim)))
    return out


@dataclass(frozen=True)
class FlatGenerators:
    basis: FockBasis
    e: dict
    f: dict
    ft: dict
    area: list
    total_area: sp.csr_matrix
    jz: sp.csr_matrix
    jp: sp.csr_matrix
    jm: sp.csr_matrix

    def get(self, kind: str, a: int, b: int):
        return {"E": self.e, "F": self.f, "Ftilde": self.ft}[kind][(a, b)]


def build_generators(basis: FockBasis) -> FlatGenerators:
    """Sparse ``E_ab``, ``F_ab``, ``Ftilde_ab`` (1-based keys), areas and total SU(2) generators."""
    n = basis.n_legs
    up = _flat_ladders(basis)
    ad = up[:n]
    bd = up[n:]
    a = [x.T.tocsr() for x in ad]
    b = [x.T.tocsr() for x in bd]
    one = sp.identity(len(basis.states), format="csr")
    e, f, ft = {}, {}, {}
    for i in range(n):
        for j in range(n):
            e[(i + 1, j + 1)] = (ad[i] @ a[j] + bd[i] @ b[j] + (one if i == j else 0 * one)).tocsr()
            f[(i + 1, j + 1)] = (b[i] @ a[j] - a[i] @ b[j]).tocsr()
            ft[(i + 1, j + 1)] = (bd[i] @ ad[j] - ad[i] @ bd[j]).tocsr()
    area = [0.5 * (e[(i + 1, i + 1)] - one) for i in range(n)]
    total = sum(area[1:], area[0]).tocsr()
    jz = 0.5 * sum((ad[i] @ a[i] - bd[i] @ b[i] for i in range(n)), 0 * one)
    jp = sum((ad[i] @ b[i] for i in range(n)), 0 * one)
    jm = sum((bd[i] @ a[i] for i in range(n)), 0 * one)
    return FlatGenerators(basis, e, f, ft, area, total, jz.tocsr(), jp.tocsr(), jm.tocsr())


def commutator_check(basis: FockBasis, gens: FlatGenerators | None = None) -> float:
    """Largest deviation from the so*(2N) table on interior states.

    Interior means total quanta at most ``2 j_max - 2``, where no product of
    two generators can reach past the cutoff.  The total SU(2) generators
    are also checked to commute with every so*(2N) generator.
    """
    from .group import ORDERED_PAIRS

    gens = gens or build_generators(basis)
    n = basis.n_legs
    interior = np.nonzero(basis.states.sum(axis=1) <= 2 * basis.j_max - 2)[0]
    if interior.size == 0:
        return 0.0

    def gen(kind, i, j):
        return gens.get(kind, i, j)[:, interior]

    def worst(m) -> float:
        m = sp.csr_matrix(m)
        return float(np.abs(m.data).max()) if m.nnz else 0.0

    idx = list(itertools.product(range(1, n + 1), repeat=2))
    out = 0.0
    for k1, k2 in ORDERED_PAIRS:
        for i in idx:
            x = gens.get(k1, *i)
            for j in idx:
                y = gens.get(k2, *j)
                lhs = (x @ y[:, interior]) - (y @ x[:, interior])
                rhs = commutator_rhs(k1, i, k2, j, gen)
                out = max(out, worst(lhs if rhs is None else lhs - rhs))
    for s in (gens.jz, gens.jp, gens.jm):
        for kind in ("E", "F", "Ftilde"):
            for i in idx:
                x = gens.get(kind, *i)
                out = max(out, worst(s @ x[:, interior] - x @ s[:, interior]))
    return out


# ---------------------------------------------------------------- states


@dataclass
class StateVector:
    """Block-sparse state; ``blocks[(p, q)]`` holds amplitudes on that shell."""

    n: int
    j_max: int
    blocks: dict = field(default_factory=dict)
    truncated: bool = False
    tail_bound: float = 0.0

    def block(self, p: int, q: int) -> np.ndarray:
        b = self.blocks.get((p, q))
        if b is None:
            return np.zeros((shell_dim(self.n, p), shell_dim(self.n, q)), dtype=complex)
        return b

    def vdot(self, other: "StateVector") -> complex:
        return complex(sum(np.vdot(b, other.blocks[k]) for k, b in self.blocks.items() if k in other.blocks))

    def norm(self) -> float:
        return math.sqrt(sum(float(np.vdot(b, b).real) for b in self.blocks.values()))

    def shell_weights(self) -> dict:
        """Squared norm per total area (half the total number of quanta)."""
        out: dict = {}
        for (p, q), b in self.blocks.items():
            out[(p + q) / 2] = out.get((p + q) / 2, 0.0) + float(np.vdot(b, b).real)
        return out

    def to_flat(self, basis: FockBasis) -> np.ndarray:
        """Amplitudes on the flat basis of ``basis``."""
        index = basis.index
        out = np.zeros(len(basis.states), dtype=complex)
        for (p, q), b in self.blocks.items():
            ma, mb = monomials(self.n, p), monomials(self.n, q)
            for i, mu in enumerate(ma):
                for j, nu in enumerate(mb):
                    out[index[tuple(mu) + tuple(nu)]] = b[i, j]
        return out

    def scaled(self, c: complex) -> "StateVector":
        return StateVector(self.n, self.j_max, {k: c * b for k, b in self.blocks.items()}, self.truncated, self.tail_bound)


def vacuum(n: int, j_max: int) -> StateVector:
    return StateVector(n, j_max, {(0, 0): np.ones((1, 1), dtype=complex)})


def _raise_pair(zeta: np.ndarray, c: np.ndarray, p: int, q: int) -> np.ndarray:
    """``(Ftilde_zeta / 2) C = sum_ab zeta_ab B_a^dag A_b^dag C`` from ``(p, q)`` to ``(p+1, q+1)``."""
    n = zeta.shape[0]
    out = np.zeros((shell_dim(n, p + 1), shell_dim(n, q + 1)), dtype=complex)
    zb_all = [sum(zeta[a, b] * raising(n, q, a) for a in range(n)) for b in range(n)]
    for b in range(n):
        if not zb_all[b].nnz:
            continue
        left = raising(n, p, b) @ c
        out += (zb_all[b] @ left.T).T
    return out


def _lower_pair(coef: np.ndarray, c: np.ndarray, p: int, q: int) -> np.ndarray:
    """``sum_ab coef_ab B_a A_b C`` from ``(p, q)`` to ``(p-1, q-1)``."""
    n = coef.shape[0]
    out = np.zeros((shell_dim(n, p - 1), shell_dim(n, q - 1)), dtype=complex)
    for b in range(n):
        yb = sum(coef[a, b] * raising(n, q - 1, a) for a in range(n))
        if not sp.issparse(yb) or not yb.nnz:
            continue
        low = raising(n, p - 1, b).T @ c
        out += (yb.T @ low.T).T
    return out


def spectral_tail(lam2: float, det: float, n: int, j_max: int, weight_power: int = 0) -> float:
    """``sum_{J > j_max} (J + 1)^w det C(J+N-1, N-1) lam2^J``.

    Every total-area probability of a label whose ``zeta* zeta`` has top
    eigenvalue ``lam2`` and ``det(1 - zeta* zeta) = det`` is bounded by the
    summand without the weight.
    """
    if lam2 <= 0.0:
        return 0.0
    total = 0.0
    j = j_max + 1
    while True:
        term = det * (j + 1) ** weight_power * math.comb(j + n - 1, n - 1) * lam2**j
        total += term
        if j > j_max + 5 and term < 1e-22:
            return total
        j += 1


def tail_estimate(zeta, j_max: int, weight_power: int = 0) -> float:
    """Weighted bound on the probability mass beyond area ``j_max`` for label ``zeta``."""
    z = np.asarray(zeta, dtype=complex)
    n = z.shape[0]
    x = np.clip(np.linalg.eigvalsh(z.conj().T @ z), 0.0, None)
    lam2 = float(x[-1]) if n else 0.0
    return spectral_tail(lam2, float(np.prod(1 - x)), n, j_max, weight_power)


def choose_j_max(zetas, tol: float = TAIL_TOL, weight_power: int = 2, j_cap: int = 400) -> int:
    """Smallest cutoff whose weighted tail bound is below ``tol`` for every label."""
    zetas = [np.asarray(z, dtype=complex) for z in zetas]
    for j in range(j_cap + 1):
        if all(tail_estimate(z, j, weight_power) < tol for z in zetas):
            return j
    raise CutoffExceeded(f"no cutoff up to {j_cap} meets tail tolerance {tol}")


def _normalization(z: np.ndarray) -> float:
    # spectral determinant, independent of the closed-form module
    x = np.clip(np.linalg.eigvalsh(z.conj().T @ z), 0.0, 1.0)
    return float(np.sqrt(np.prod(1 - x)))


def coherent_shells(zeta, j_max: int, normalized: bool = True):
    """Yield ``(J, block)`` for ``N exp(Ftilde_zeta / 2)|0>`` on balanced shells ``J <= j_max``."""
    z = np.asarray(zeta, dtype=complex)
    n = z.shape[0]
    c = np.full((1, 1), _normalization(z) if normalized else 1.0, dtype=complex)
    yield 0, c
    for j in range(1, j_max + 1):
        c = _raise_pair(z, c, j - 1, j - 1) / j
        yield j, c


def fixed_area_state(zeta, j: int, basis: FockBasis) -> StateVector:
    """``(Ftilde_zeta / 2)^J |0>``, unnormalised."""
    if j > basis.j_max:
        raise CutoffExceeded(f"J={j} exceeds cutoff {basis.j_max}")
    z = as_antisymmetric(zeta)
    c = np.ones((1, 1), dtype=complex)
    for p in range(j):
        c = _raise_pair(z, c, p, p)
    return StateVector(basis.n_legs, basis.j_max, {(j, j): c})


def coherent_vector(zeta, basis: FockBasis) -> StateVector:
    """Truncated ``N(zeta) exp(Ftilde_zeta / 2)|0>``; ``tail_bound`` bounds the missing norm squared."""
    z = require_domain(zeta)
    blocks = {(j, j): c for j, c in coherent_shells(z, basis.j_max)}
    tail = tail_estimate(z, basis.j_max)
    return StateVector(basis.n_legs, basis.j_max, blocks, truncated=tail > 0, tail_bound=tail)


# ---------------------------------------------------------------- expectations


def _gather(n: int, p: int, c: np.ndarray, a: int, axis: int) -> np.ndarray:
    """Lower mode ``a`` along ``axis`` of a degree-``p`` block: rows ``m`` read ``c[m + e_a] sqrt(m_a + 1)``."""
    idx, val = raising_table(n, p - 1)
    if axis == 0:
        return val[a][:, None] * c[idx[a], :]
    return c[:, idx[a]] * val[a][None, :]


def _lowered_gram(n: int, p: int, w: np.ndarray, z: np.ndarray, axis: int) -> np.ndarray:
    """``[<a_a w | a_b z>]_ab`` for lowering along one side of same-shape blocks."""
    out = np.zeros((n, n), dtype=complex)
    if p == 0:
        return out
    lowered = [_gather(n, p, z, b, axis) for b in range(n)]
    for a in range(n):
        lw = _gather(n, p, w, a, axis)
        for b in range(n):
            out[a, b] = np.vdot(lw, lowered[b])
    return out


def _ba_elements(n: int, j: int, w_prev: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``K[a, b] = <w_{J-1}| B_a A_b |z_J>``."""
    out = np.empty((n, n), dtype=complex)
    for b in range(n):
        zb = _gather(n, j, z, b, axis=0)
        for a in range(n):
            out[a, b] = np.vdot(w_prev, _gather(n, j, zb, a, axis=1))
    return out


@dataclass(frozen=True)
class OracleElements:
    overlap: complex
    e: np.ndarray
    f: np.ndarray
    ft: np.ndarray
    j_max: int


def oracle_matrix_elements(omega, zeta, basis: FockBasis) -> OracleElements:
    """``<omega|X|zeta>`` for all ``E_ab``, ``F_ab``, ``Ftilde_ab`` by streaming over shells."""
    w, z = require_domain(omega), require_domain(zeta)
    n = basis.n_legs
    ov = 0.0j
    e = np.zeros((n, n), dtype=complex)
    k = np.zeros((n, n), dtype=complex)
    kt = np.zeros((n, n), dtype=complex)
    prev_w = prev_z = None
    for (j, cw), (_, cz) in zip(coherent_shells(w, basis.j_max), coherent_shells(z, basis.j_max)):
        ov += np.vdot(cw, cz)
        e += _lowered_gram(n, j, cw, cz, 0) + _lowered_gram(n, j, cw, cz, 1)
        if j:
            k += _ba_elements(n, j, prev_w, cz)
            kt += _ba_elements(n, j, prev_z, cw)
        prev_w, prev_z = cw, cz
    e += ov * np.eye(n)
    f = k - k.T
    ft = (kt - kt.T).conj()
    return OracleElements(complex(ov), e, f, ft, basis.j_max)


def oracle_overlap(omega, zeta, basis: FockBasis) -> complex:
    w, z = require_domain(omega), require_domain(zeta)
    return complex(sum(np.vdot(cw, cz) for (_, cw), (_, cz) in zip(coherent_shells(w, basis.j_max), coherent_shells(z, basis.j_max))))


@dataclass(frozen=True)
class OracleAreaMoments:
    mean: np.ndarray
    second: np.ndarray

    @property
    def covariance(self) -> np.ndarray:
        return self.second - np.outer(self.mean, self.mean)

    @property
    def total_mean(self) -> float:
        return float(self.mean.sum())

    @property
    def total_var(self) -> float:
        return float(self.covariance.sum())


def area_moments(state: StateVector) -> OracleAreaMoments:
    """First and second moments of the leg areas ``(n_A + n_B) / 2`` in ``state``."""
    n = state.n
    mean = np.zeros(n)
    second = np.zeros((n, n))
    for (p, q), c in state.blocks.items():
        wgt = np.abs(c) ** 2
        na, nb = occupations(n, p), occupations(n, q)
        ra, rb = wgt.sum(axis=1), wgt.sum(axis=0)
        mean += 0.5 * (na.T @ ra + nb.T @ rb)
        cross = na.T @ wgt @ nb
        second += 0.25 * (na.T @ (ra[:, None] * na) + nb.T @ (rb[:, None] * nb) + cross + cross.T)
    return OracleAreaMoments(mean, second)


def oracle_area_moments(zeta, basis: FockBasis) -> OracleAreaMoments:
    return area_moments(coherent_vector(zeta, basis))


def oracle_expectation(op, zeta, basis: FockBasis) -> complex:
    """Expectation of a named observable in the truncated coherent state.

    ``op`` is ``"area"``, ``("area", a)``, ``("area2", a, b)`` or
    ``(kind, a, b)`` with ``kind`` in ``E``, ``F``, ``Ftilde`` and 1-based indices.
    """
    if op == "area":
        return complex(oracle_area_moments(zeta, basis).total_mean)
    kind, *idx = op
    if kind == "area":
        return complex(oracle_area_moments(zeta, basis).mean[idx[0] - 1])
    if kind == "area2":
        return complex(oracle_area_moments(zeta, basis).second[idx[0] - 1, idx[1] - 1])
    el = oracle_matrix_elements(zeta, zeta, basis)
    table = {"E": el.e, "F": el.f, "Ftilde": el.ft}[kind]
    return complex(table[idx[0] - 1, idx[1] - 1])


def oracle_distribution(zeta, basis: FockBasis) -> list[tuple[int, float]]:
    """Probability of each total area from projecting the truncated coherent state on area shells."""
    z = require_domain(zeta)
    return [(j, float(np.vdot(c, c).real)) for j, c in coherent_shells(z, basis.j_max)]


# ---------------------------------------------------------------- SU(2) and group action


def su2_residual(state: StateVector) -> float:
    """Norm of ``(J_z, J_+, J_-)`` applied to ``state``."""
    n = state.n
    total = 0.0
    for (p, q), c in state.blocks.items():
        total += (0.5 * (p - q)) ** 2 * float(np.vdot(c, c).real)
        if q > 0:
            jp = sum(raising(n, p, a) @ (c @ raising(n, q - 1, a)) for a in range(n))
            total += float(np.vdot(jp, jp).real)
        if p > 0:
            jm = sum((raising(n, q, a) @ (raising(n, p - 1, a).T @ c).T).T for a in range(n))
            total += float(np.vdot(jm, jm).real)
    return math.sqrt(total)


def area_eigen_residual(state: StateVector, j: float) -> float:
    """``|| (A - J) state ||`` using the integer quanta bookkeeping of each block."""
    return math.sqrt(sum(((p + q) / 2 - j) ** 2 * float(np.vdot(c, c).real) for (p, q), c in state.blocks.items()))


def _sector_generator(n: int, p: int, alpha: np.ndarray) -> np.ndarray:
    """Dense ``sum_ab alpha_ab a^dag_a a_b`` on degree-``p`` monomials."""
    d = shell_dim(n, p)
    g = np.zeros((d, d), dtype=complex)
    if p == 0:
        return g
    for a in range(n):
        ra = raising(n, p - 1, a)
        for b in range(n):
            if alpha[a, b] != 0:
                g += alpha[a, b] * (ra @ raising(n, p - 1, b).T).toarray()
    return g


def apply_diagonal(alpha, state: StateVector) -> StateVector:
    """``exp(E_alpha)`` with ``E_alpha = sum alpha_ab E_ab``, exact on every shell."""
    alpha = np.asarray(alpha, dtype=complex)
    n = state.n
    shift = np.exp(np.trace(alpha))
    cache: dict = {}

    def sector(p):
        if p not in cache:
            cache[p] = expm(_sector_generator(n, p, alpha))
        return cache[p]

    blocks = {(p, q): shift * sector(p) @ c @ sector(q).T for (p, q), c in state.blocks.items()}
    return StateVector(n, state.j_max, blocks, state.truncated, state.tail_bound)


def _apply_lowering_series(coef: np.ndarray, state: StateVector) -> StateVector:
    """``exp(sum coef_ab B_a A_b)``; the series terminates, so this is exact."""
    out: dict = {}
    for (p, q), c in state.blocks.items():
        term = c
        m = 0
        while True:
            key = (p - m, q - m)
            out[key] = out.get(key, 0) + term
            if p - m == 0 or q - m == 0:
                break
            m += 1
            term = _lower_pair(coef, term, p - m + 1, q - m + 1) / m
    return StateVector(state.n, state.j_max, out, state.truncated, state.tail_bound)


def _apply_raising_series(upper: np.ndarray, state: StateVector, j_max: int) -> tuple[StateVector, bool]:
    """``exp(Ftilde_upper / 2)`` truncated at total area ``j_max``; returns whether terms were dropped."""
    out: dict = {}
    dropped = False
    for (p, q), c in state.blocks.items():
        term = c
        m = 0
        while True:
            key = (p + m, q + m)
            out[key] = out.get(key, 0) + term
            if (p + q) / 2 + m >= j_max:
                dropped = dropped or bool(np.any(term)) and bool(np.any(upper))
                break
            m += 1
            term = _raise_pair(upper, term, p + m - 1, q + m - 1) / m
    return StateVector(state.n, state.j_max, out, state.truncated or dropped, state.tail_bound), dropped


def apply_group_element(g: BlockGroupElement, state: StateVector, basis: FockBasis, budget: float | None = None) -> StateVector:
    """Act with ``g`` through its raising-diagonal-lowering factorisation.

    The lowering factor is a terminating series, the diagonal factor is
    exponentiated per shell, and the raising series is cut at the basis
    cutoff (flagged in ``truncated``).

    Raises:
        CutoffExceeded: if ``budget`` is given and the input's tail bound exceeds it.
    """
    if budget is not None and state.tail_bound > budget:
        raise CutoffExceeded(f"state tail {state.tail_bound:.3e} exceeds budget {budget:.3e}")
    upper, l_matrix, lower = udl_decompose(g)
    # exp(-F_l / 2) has lower-left block -conj(l): coefficient of B_a A_b
    out = _apply_lowering_series(-lower.conj(), state)
    out = apply_diagonal(l_matrix, out)
    out, _ = _apply_raising_series(upper, out, basis.j_max)
    return out


def highest_weight_check(g, j: int, basis: FockBasis) -> float:
    """Compare ``exp(E_log g) |psi_J>`` with ``det g (Ftilde_{g xi0 g^t} / 2)^J |0> / sqrt(J! (J+1)!)``."""
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    if j > basis.j_max:
        raise CutoffExceeded(f"J={j} exceeds cutoff {basis.j_max}")
    if np.linalg.cond(g) > 1e14:
        raise SingularMatrix("g is not invertible")
    xi0 = np.zeros((n, n), dtype=complex)
    xi0[:2, :2] = SIGMA
    scale = 1.0 / math.sqrt(math.factorial(j) * math.factorial(j + 1))
    psi = fixed_area_state(xi0, j, basis).scaled(scale)
    lhs = apply_diagonal(matrix_log(g), psi)
    rhs = fixed_area_state(g @ xi0 @ g.T, j, basis).scaled(np.linalg.det(g) * scale)
    diff = lhs.block(j, j) - rhs.block(j, j)
    return float(np.linalg.norm(diff))


def annihilator_check(zeta, basis: FockBasis) -> float:
    """Largest shell-summed norm of ``(C_d - S^{dc} C_c^dag)|zeta>``, ``C = (A, B)``.

    Only shells whose image is fully present below the cutoff enter.
    """
    z = require_domain(zeta)
    n = basis.n_legs
    s = np.block([[np.zeros((n, n)), -z], [z, np.zeros((n, n))]])
    shells = dict(coherent_shells(z, basis.j_max))
    acc = np.zeros(2 * n)
    for j in range(basis.j_max):
        c0, c1 = shells[j], shells[j + 1]
        for d in range(n):
            # A_d: (J+1, J+1) -> (J, J+1); S row d couples to B^dag
            lhs = _gather(n, j + 1, c1, d, axis=0)
            rhs = sum(s[d, n + c] * (raising(n, j, c) @ c0.T).T for c in range(n) if s[d, n + c] != 0)
            acc[d] += np.linalg.norm(lhs - rhs) ** 2
            lhs = _gather(n, j + 1, c1, d, axis=1)
            rhs = sum(s[n + d, c] * (raising(n, j, c) @ c0) for c in range(n) if s[n + d, c] != 0)
            acc[n + d] += np.linalg.norm(lhs - rhs) ** 2
    return float(np.sqrt(acc.max()))


def intertwiner_dimension(basis: FockBasis, j: int) -> int:
    """Dimension of SU(2)-invariant vectors of total area ``J``.

    ``J_z`` is diagonal with eigenvalue ``(p - q) / 2`` on block ``(p, q)``,
    so its kernel inside the area-``J`` eigenspace is the balanced block
    ``(J, J)``.  The kernel of ``J_+`` and ``J_-`` stacked on that block is
    found by a numerical rank computation.
    """
    if j > basis.j_max:
        raise CutoffExceeded(f"J={j} exceeds cutoff {basis.j_max}")
    n = basis.n_legs
    d = shell_dim(n, j)
    if j == 0:
        return 1
    # row-major vec(L C R) = kron(L, R^T) vec(C)
    jp = sum(sp.kron(raising(n, j, a), raising(n, j - 1, a).T) for a in range(n))
    jm = sum(sp.kron(raising(n, j - 1, a).T, raising(n, j, a)) for a in range(n))
    stacked = sp.vstack([jp, jm]).toarray()
    return int(d * d - np.linalg.matrix_rank(stacked))
