"""Explicit Fock-space operators: the desk-scale ground truth.

Mode ordering for the spinful case is ``mode = 2 * orbital + spin`` with spin 0
for up and 1 for down.  Basis state ``s`` is the integer whose bit ``p`` is the
occupation of mode ``p``; the Jordan-Wigner sign of ``c_p`` is
``(-1) ** popcount(s & ((1 << p) - 1))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .errors import (
    DegenerateGroundState,
    DimensionTooLarge,
    IndexOutOfRange,
    NonHermitian,
    ShapeMismatch,
)
from .operators import SpinfulHamiltonian, SpinlessTerm, TauTensor

MAX_MODES = 14


@dataclass(frozen=True)
class FockOperator:
    n_modes: int
    matrix: sparse.csr_matrix

    @property
    def dim(self) -> int:
        return 1 << self.n_modes

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def __add__(self, other):
        return FockOperator(self.n_modes, (self.matrix + other.matrix).tocsr())

    def __sub__(self, other):
        return FockOperator(self.n_modes, (self.matrix - other.matrix).tocsr())

    def __matmul__(self, other):
        return FockOperator(self.n_modes, (self.matrix @ other.matrix).tocsr())

    def __mul__(self, c: float):
        return FockOperator(self.n_modes, (c * self.matrix).tocsr())

    __rmul__ = __mul__

    @property
    def T(self):
        return FockOperator(self.n_modes, self.matrix.T.tocsr())


@dataclass(frozen=True)
class PtEnergies:
    e0: float
    e1: float
    e2: float
    e3: float

    def total(self, epsilon: float, order: int = 3) -> float:
        coeffs = (self.e0, self.e1, self.e2, self.e3)
        return sum(c * epsilon**k for k, c in enumerate(coeffs[: order + 1]))


def _check_modes(n_modes: int):
    if n_modes > MAX_MODES:
        raise DimensionTooLarge(f"{n_modes} modes exceeds the cap of {MAX_MODES}")


@lru_cache(maxsize=None)
def annihilators(n_modes: int) -> tuple:
    """Sparse matrices of ``c_p`` for every mode."""
    _check_modes(n_modes)
    dim = 1 << n_modes
    states = np.arange(dim)
    ops = []
    for p in range(n_modes):
        bit = 1 << p
        src = states[(states & bit) != 0]
        below = src & (bit - 1)
        parity = np.array([bin(int(x)).count("1") & 1 for x in below], dtype=int)
        data = np.where(parity == 1, -1.0, 1.0)
        ops.append(sparse.csr_matrix((data, (src ^ bit, src)), shape=(dim, dim)))
    return tuple(ops)


def identity(n_modes: int) -> FockOperator:
    return FockOperator(n_modes, sparse.identity(1 << n_modes, format="csr"))


def mode_operator(n_modes: int, p: int, dagger: bool = False) -> FockOperator:
    if not 0 <= p < n_modes:
        raise IndexOutOfRange(f"mode {p} outside [0, {n_modes})")
    c = annihilators(n_modes)[p]
    return FockOperator(n_modes, (c.T if dagger else c).tocsr())


def spinful_mode(orbital: int, spin: int) -> int:
    return 2 * orbital + spin


@lru_cache(maxsize=None)
def _pair_ops(n_o: int):
    """``N[i][j] = sum_s c+_{is} c_{js}``."""
    c = annihilators(2 * n_o)
    return [
        [
            (c[2 * i].T @ c[2 * j] + c[2 * i + 1].T @ c[2 * j + 1]).tocsr()
            for j in range(n_o)
        ]
        for i in range(n_o)
    ]


def build_spinful(H: SpinfulHamiltonian) -> FockOperator:
    n = H.n_o
    n_modes = 2 * n
    _check_modes(n_modes)
    N = _pair_ops(n)
    dim = 1 << n_modes
    M = H.scalar * sparse.identity(dim, format="csr")
    for i in range(n):
        for j in range(n):
            if H.h0[i, j] != 0.0:
                M = M + H.h0[i, j] * N[i][j]
            inner = None
            for k in range(n):
                for l in range(n):
                    g = H.G[i, j, k, l]
                    if g != 0.0:
                        inner = g * N[k][l] if inner is None else inner + g * N[k][l]
            if inner is not None:
                M = M + N[i][j] @ inner
    return FockOperator(n_modes, M.tocsr())


def number_operator(n_modes: int) -> FockOperator:
    dim = 1 << n_modes
    occ = np.array([bin(s).count("1") for s in range(dim)], dtype=float)
    return FockOperator(n_modes, sparse.diags(occ, format="csr"))


def sz_operator(n_o: int) -> FockOperator:
    """Twice the total S_z, i.e. N_up - N_down."""
    dim = 1 << (2 * n_o)
    up = sum(1 << (2 * i) for i in range(n_o))
    dn = sum(1 << (2 * i + 1) for i in range(n_o))
    vals = np.array(
        [bin(s & up).count("1") - bin(s & dn).count("1") for s in range(dim)], dtype=float
    )
    return FockOperator(2 * n_o, sparse.diags(vals, format="csr"))


def build_spinless(n: int, terms) -> FockOperator:
    """Sum over terms of ``coeff * c+_{a1} c+_{a2} ... c_{b1} c_{b2} ...`` in the listed order."""
    _check_modes(n)
    c = annihilators(n)
    dim = 1 << n
    M = sparse.csr_matrix((dim, dim))
    for term in terms:
        if not isinstance(term, SpinlessTerm):
            term = SpinlessTerm.from_dict(term)
        op = sparse.identity(dim, format="csr")
        for p in term.creations:
            if not 0 <= p < n:
                raise IndexOutOfRange(f"mode {p} outside [0, {n})")
            op = op @ c[p].T
        for p in term.annihilations:
            if not 0 <= p < n:
                raise IndexOutOfRange(f"mode {p} outside [0, {n})")
            op = op @ c[p]
        M = M + term.coeff * op
    return FockOperator(n, M.tocsr())


def tau_operator(tau: TauTensor, i: int, spin: int, U: np.ndarray | None = None) -> FockOperator:
    """``tau_{i,spin}`` on the spinful Fock space.

    If U is given, the orbital operators entering tau are ``c'_a = sum_p U[p, a] c_p``.
    """
    n = tau.n_o
    c = annihilators(2 * n)
    if U is None:
        U = np.eye(n)
    dim = 1 << (2 * n)

    def orb(a, s):
        m = sparse.csr_matrix((dim, dim))
        for p in range(n):
            if U[p, a] != 0.0:
                m = m + U[p, a] * c[2 * p + s]
        return m

    lower = [[orb(a, s) for s in range(2)] for a in range(n)]
    M = sparse.csr_matrix((dim, dim))
    for j in range(n):
        if tau.T1[i, j] != 0.0:
            M = M + tau.T1[i, j] * lower[j][spin]
    for k in range(n):
        for l in range(n):
            pair = lower[k][0].T @ lower[l][0] + lower[k][1].T @ lower[l][1]
            for j in range(n):
                t = tau.T[i, j, k, l]
                if t != 0.0:
                    M = M + t * (lower[j][spin] @ pair)
    return FockOperator(2 * n, M.tocsr())


def brute_anticommutator(a: FockOperator, b: FockOperator) -> FockOperator:
    if a.matrix.shape != b.matrix.shape:
        raise ShapeMismatch(f"{a.matrix.shape} vs {b.matrix.shape}")
    return FockOperator(a.n_modes, (a.matrix @ b.matrix + b.matrix @ a.matrix).tocsr())


def _hermitian_check(op: FockOperator, atol: float = 1e-10):
    diff = op.matrix - op.matrix.T
    err = abs(diff).max() if diff.nnz else 0.0
    if err > atol:
        raise NonHermitian(f"operator deviates from symmetric by {err:.3e}")


def blocks(matrix) -> list[np.ndarray]:
    """Index sets of the connected components of the sparsity pattern (invariant sectors)."""
    m = sparse.csr_matrix(matrix)
    pattern = (abs(m) + abs(m.T)).tocsr()
    ncomp, labels = connected_components(pattern, directed=False)
    order = np.argsort(labels, kind="stable")
    splits = np.cumsum(np.bincount(labels, minlength=ncomp))[:-1]
    return np.split(order, splits)


def spectrum(op: FockOperator, use_sectors: bool = True) -> np.ndarray:
    """All eigenvalues, sorted ascending."""
    _hermitian_check(op)
    if not use_sectors:
        return scipy.linalg.eigvalsh(op.toarray())
    m = op.matrix.tocsr()
    vals = [
        scipy.linalg.eigvalsh(m[idx][:, idx].toarray()) for idx in blocks(m)
    ]
    return np.sort(np.concatenate(vals))


def ground_energy(op: FockOperator, use_sectors: bool = True) -> float:
    _hermitian_check(op)
    if not use_sectors:
        return float(scipy.linalg.eigvalsh(op.toarray(), subset_by_index=[0, 0])[0])
    m = op.matrix.tocsr()
    best = np.inf
    for idx in blocks(m):
        block = m[idx][:, idx].toarray()
        e = scipy.linalg.eigvalsh(block, subset_by_index=[0, 0])[0]
        best = min(best, e)
    return float(best)


def ground_state(op: FockOperator, gap_tol: float = 1e-8) -> tuple[float, np.ndarray]:
    """Ground energy and normalized ground vector; raises if degenerate."""
    _hermitian_check(op)
    m = op.matrix.tocsr()
    lows = []
    for idx in blocks(m):
        block = m[idx][:, idx].toarray()
        k = min(2, len(idx))
        w, v = scipy.linalg.eigh(block, subset_by_index=[0, k - 1])
        lows.append((w, v, idx))
    energies = np.sort(np.concatenate([w for w, _, _ in lows]))
    if len(energies) > 1 and energies[1] - energies[0] < gap_tol:
        raise DegenerateGroundState(f"gap {energies[1] - energies[0]:.3e} below {gap_tol}")
    w, v, idx = min(lows, key=lambda t: t[0][0])
    psi = np.zeros(op.dim)
    psi[idx] = v[:, 0]
    return float(w[0]), psi


def expectation(op: FockOperator, psi: np.ndarray) -> float:
    return float(psi @ (op.matrix @ psi))


def slater_state(n_o: int, occupied_orbitals, U: np.ndarray | None = None) -> np.ndarray:
    """Closed-shell Slater determinant occupying ``c'_a`` (both spins) for the listed a."""
    n_modes = 2 * n_o
    c = annihilators(n_modes)
    if U is None:
        U = np.eye(n_o)
    psi = np.zeros(1 << n_modes)
    psi[0] = 1.0
    for a in occupied_orbitals:
        for s in range(2):
            create = sum(U[p, a] * c[2 * p + s].T for p in range(n_o))
            psi = create @ psi
    return psi / np.linalg.norm(psi)


def rs_pt(H0: SpinfulHamiltonian, V: SpinfulHamiltonian, order: int = 3, gap_tol: float = 1e-8) -> PtEnergies:
    """Rayleigh-Schroedinger energies to third order by explicit spectral sums."""
    if order > 3:
        raise ValueError("order must be at most 3")
    return _rs_pt_ops(build_spinful(H0), build_spinful(V), order, gap_tol)


def rs_pt_spinless(n: int, h0_terms, v_terms, order: int = 3, gap_tol: float = 1e-8) -> PtEnergies:
    return _rs_pt_ops(build_spinless(n, h0_terms), build_spinless(n, v_terms), order, gap_tol)


def _rs_pt_ops(h0: FockOperator, v: FockOperator, order: int, gap_tol: float) -> PtEnergies:
    _hermitian_check(h0)
    _hermitian_check(v)
    pattern = abs(h0.matrix) + abs(v.matrix)
    best = None
    all_low = []
    for idx in blocks(pattern):
        w, U = scipy.linalg.eigh(h0.matrix[idx][:, idx].toarray())
        # a degenerate ground level may be split across sectors
        all_low.extend(w[:2])
        if best is None or w[0] < best[0][0]:
            best = (w, U, idx)
    all_low = np.sort(all_low)
    if len(all_low) > 1 and all_low[1] - all_low[0] < gap_tol:
        raise DegenerateGroundState(f"unperturbed gap {all_low[1] - all_low[0]:.3e}")
    w, U, idx = best
    Vb = U.T @ (v.matrix[idx][:, idx].toarray() @ U)
    e0 = float(w[0])
    e1 = float(Vb[0, 0])
    if order < 2 or len(w) == 1:
        return PtEnergies(e0, e1 if order >= 1 else 0.0, 0.0, 0.0)
    denom = e0 - w[1:]
    vj0 = Vb[1:, 0]
    e2 = float(np.sum(vj0**2 / denom))
    e3 = 0.0
    if order >= 3:
        x = vj0 / denom
        e3 = float(x @ Vb[1:, 1:] @ x - e1 * np.sum(vj0**2 / denom**2))
    return PtEnergies(e0, e1, e2, e3)
