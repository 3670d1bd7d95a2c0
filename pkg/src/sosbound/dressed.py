"""Perturbatively dressed annihilation operators for spinless quartic models.

Convention: ``H = sum_j e_j n_j + eps V`` with every ``e_j > 0``, so the
unperturbed ground state is the vacuum.  ``V`` holds

* ``V4``: ``sum_{i<j<k<l} V4[i,j,k,l] c_i c_j c_k c_l + h.c.``
* ``V31``: ``sum_i sum_{j<k<l} V31[i,j,k,l] c+_i c_j c_k c_l + h.c.``
* ``V22``: ``sum_{i>j} sum_{k<l} V22[i,j,k,l] c+_i c+_j c_k c_l``

The all-creation coefficient of ``c+_i c+_j c+_k c+_l`` is ``V4[i,j,k,l]`` and
that of ``c+_i c+_j c+_k c_m`` is ``-V31[m,i,j,k]``.

``o1`` and the six ``o2`` groups follow the perturbative formulas term by
term, except that the first (degree 5, ``i`` in the first factor of ``V``)
group carries the opposite overall sign; only then do they equal ``c_i``
applied to the first and second order wavefunction.  The operator that
annihilates the perturbed ground state is therefore
``c_i - eps O1 - eps^2 O2`` (``DRESSING_SIGN``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import fock
from .models import rng_for
from .operators import SpinlessTerm

DRESSING_SIGN = -1.0


def _antisymmetrize(A: np.ndarray, axes) -> np.ndarray:
    """Antisymmetric completion from the entries with strictly increasing ``axes`` indices.

    Every other entry is a signed copy, so the antisymmetry holds bit for bit.
    """
    axes = tuple(axes)
    n = A.shape[axes[0]]
    moved = np.moveaxis(A, axes, range(len(axes)))
    out = np.zeros_like(moved)
    for idx in _ordered(n, len(axes)):
        for perm in itertools.permutations(range(len(axes))):
            out[tuple(idx[p] for p in perm)] = _perm_sign(perm) * moved[idx]
    return np.moveaxis(out, range(len(axes)), axes)


def _perm_sign(perm) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def _ordered(n: int, r: int):
    return itertools.combinations(range(n), r)


@dataclass(frozen=True)
class SpinlessPerturbation:
    n: int
    e: np.ndarray
    V4: np.ndarray
    V31: np.ndarray
    V22: np.ndarray

    def __post_init__(self):
        n = self.n
        for name, shape in (("e", (n,)), ("V4", (n,) * 4), ("V31", (n,) * 4), ("V22", (n,) * 4)):
            if np.shape(getattr(self, name)) != shape:
                raise ValueError(f"{name} must have shape {shape}")
        if np.any(np.asarray(self.e) <= 0):
            raise ValueError("all e_j must be positive")
        checks = {
            "V4": np.abs(self.V4 - _antisymmetrize(self.V4, (0, 1, 2, 3))).max(),
            "V31": np.abs(self.V31 - _antisymmetrize(self.V31, (1, 2, 3))).max(),
            "V22 (pairs)": np.abs(self.V22 + self.V22.transpose(1, 0, 2, 3)).max()
            + np.abs(self.V22 + self.V22.transpose(0, 1, 3, 2)).max(),
            "V22 (hermiticity)": np.abs(self.V22 - self.V22.transpose(3, 2, 1, 0)).max(),
        }
        for name, err in checks.items():
            if err > 0:
                raise ValueError(f"{name} violates its symmetry by {err:.3e}")

    @classmethod
    def zeros(cls, n: int, e=None) -> "SpinlessPerturbation":
        z = np.zeros((n,) * 4)
        return cls(n, np.ones(n) if e is None else np.asarray(e, float), z, z.copy(), z.copy())

    @classmethod
    def random(cls, n: int, seed: int, e=None, families=("V4", "V31", "V22")) -> "SpinlessPerturbation":
        rng = rng_for(seed)
        e = rng.uniform(0.5, 1.5, n) if e is None else np.asarray(e, float)
        draws = {name: rng.standard_normal((n,) * 4) for name in ("V4", "V31", "V22")}
        V4 = _antisymmetrize(draws["V4"], (0, 1, 2, 3))
        V31 = _antisymmetrize(draws["V31"], (1, 2, 3))
        # V22[i,j,k,l] = M[(i,j),(k,l)] on ordered pairs with M symmetric gives hermiticity
        M = draws["V22"]
        M = M + M.transpose(2, 3, 0, 1)
        V22 = _antisymmetrize(_antisymmetrize(M, (0, 1)), (2, 3))
        keep = {"V4": V4, "V31": V31, "V22": V22}
        for name in keep:
            if name not in families:
                keep[name] = np.zeros_like(keep[name])
        return cls(n, e, keep["V4"], keep["V31"], keep["V22"])

    def h0_terms(self) -> list[SpinlessTerm]:
        return [SpinlessTerm((j,), (j,), float(self.e[j])) for j in range(self.n)]

    def v_terms(self) -> list[SpinlessTerm]:
        n = self.n
        terms = []
        for idx in _ordered(n, 4):
            v = self.V4[idx]
            if v:
                terms.append(SpinlessTerm((), idx, v))
                terms.append(SpinlessTerm(idx[::-1], (), v))
        for i in range(n):
            for idx in _ordered(n, 3):
                v = self.V31[(i,) + idx]
                if v:
                    terms.append(SpinlessTerm((i,), idx, v))
                    terms.append(SpinlessTerm(idx[::-1], (i,), v))
        for j, i in _ordered(n, 2):
            for kl in _ordered(n, 2):
                v = self.V22[(i, j) + kl]
                if v:
                    terms.append(SpinlessTerm((i, j), kl, v))
        return terms

    def barred_31(self) -> np.ndarray:
        """``W[i,j,k,m]``: coefficient of ``c+_i c+_j c+_k c_m`` in ``V``."""
        return -self.V31.transpose(1, 2, 3, 0)


@dataclass(frozen=True)
class O2Group:
    """One sum of the second-order correction: ``sum coeff[idx] c+_{idx}`` over ordered ``idx``."""

    coeff: np.ndarray
    # groups of creation slots that are summed in increasing order
    ordered_slots: tuple

    @property
    def degree(self) -> int:
        return self.coeff.ndim

    def index_tuples(self):
        n = self.coeff.shape[0] if self.coeff.ndim else 0
        pieces = [list(_ordered(n, size)) for size in self.ordered_slots]
        for combo in itertools.product(*pieces):
            yield tuple(x for part in combo for x in part)


@dataclass(frozen=True)
class DressedOperator:
    i: int
    o1: np.ndarray
    o2: tuple

    def terms(self, epsilon: float, order: int = 2, sign: float = DRESSING_SIGN) -> list[SpinlessTerm]:
        """``c_i + sign (eps O1 + eps^2 O2)`` truncated at ``order``."""
        n = self.o1.shape[0]
        out = [SpinlessTerm((), (self.i,), 1.0)]
        if order >= 1:
            for idx in _ordered(n, 3):
                c = self.o1[idx]
                if c:
                    out.append(SpinlessTerm(idx, (), sign * epsilon * c))
        if order >= 2:
            for g in self.o2:
                for idx in g.index_tuples():
                    c = g.coeff[idx]
                    if c:
                        out.append(SpinlessTerm(idx, (), sign * epsilon**2 * c))
        return out

    def operator(self, epsilon: float, order: int = 2, sign: float = DRESSING_SIGN) -> fock.FockOperator:
        return fock.build_spinless(self.o1.shape[0], self.terms(epsilon, order, sign))


def _mask(n: int, r: int) -> np.ndarray:
    """1 where the ``r`` indices are strictly increasing."""
    grids = np.indices((n,) * r)
    m = np.ones((n,) * r, bool)
    for a in range(r - 1):
        m &= grids[a] < grids[a + 1]
    return m.astype(float)


def build_dressed(pert: SpinlessPerturbation, i: int) -> DressedOperator:
    n = pert.n
    e = np.asarray(pert.e, float)
    ei = e[i]
    V4, V31, V22 = pert.V4, pert.V31, pert.V22
    W = pert.barred_31()
    lt2, lt3 = _mask(n, 2), _mask(n, 3)
    E = e

    o1 = _antisymmetrize(-V4[i] / (ei + E[:, None, None] + E[None, :, None] + E[None, None, :]), (0, 1, 2))

    # e_m + e_n + e_o + e_p over a 4-index grid
    s4 = E[:, None, None, None] + E[None, :, None, None] + E[None, None, :, None] + E[None, None, None, :]
    A = V4 / s4  # V_{mnop} / (e_m + e_n + e_o + e_p)

    # 1: j<k, m, n<o<p
    d1 = (
        ei
        + E[:, None, None, None, None]
        + E[None, :, None, None, None]
        + E[None, None, :, None, None]
        + E[None, None, None, :, None]
        + E[None, None, None, None, :]
    )
    g1 = np.einsum("jkm,mnop->jknop", W[i], A) / d1
    # 2: j, m<n, o<p
    d2 = ei + E[:, None, None] + E[None, :, None] + E[None, None, :]
    g2 = np.einsum("jmn,mn,mnop->jop", V22[i], lt2, A) / d2
    # 3: m<n<o, p
    g3 = np.einsum("mno,mno,mnop->p", V31[i], lt3, A) / (ei + E)
    # 4: j<k<l, m, o<p
    d4 = (
        ei
        + E[:, None, None, None, None]
        + E[None, :, None, None, None]
        + E[None, None, :, None, None]
        + E[None, None, None, :, None]
        + E[None, None, None, None, :]
    )
    B = V4[i] / (ei + E[:, None, None] + E[None, :, None] + E[None, None, :])  # V_{i m o p}/(e_i+e_m+e_o+e_p)
    g4 = -np.einsum("jklm,mop->jklop", W, B) / d4
    # 5: j<k, m<n, p
    d5 = ei + E[:, None, None] + E[None, :, None] + E[None, None, :]
    g5 = np.einsum("jkmn,mn,mnp->jkp", V22, lt2, V4[:, :, i, :] / (s4[:, :, i, :])) / d5
    # 6: j, m<n<o
    g6 = -np.einsum("jmno,mno,mno->j", V31, lt3, V4[:, :, :, i] / s4[:, :, :, i]) / (ei + E)

    groups = (
        # sign flipped relative to the printed formula, checked against c_i Psi^(2)
        O2Group(g1, (2, 3)),
        O2Group(-g2, (1, 2)),
        O2Group(-g3, (1,)),
        O2Group(-g4, (3, 2)),
        O2Group(-g5, (2, 1)),
        O2Group(-g6, (1,)),
    )
    return DressedOperator(i, o1, groups)


def perturbed_ground_state(pert: SpinlessPerturbation, epsilon: float) -> np.ndarray:
    H = fock.build_spinless(pert.n, pert.h0_terms() + [
        SpinlessTerm(t.creations, t.annihilations, epsilon * t.coeff) for t in pert.v_terms()
    ])
    _, psi = fock.ground_state(H)
    return psi


def particle_number(n: int) -> np.ndarray:
    return np.array([bin(s).count("1") for s in range(1 << n)])


def residual_vector(
    pert: SpinlessPerturbation,
    i: int,
    epsilon: float,
    order: int = 2,
    sign: float = DRESSING_SIGN,
    psi: np.ndarray | None = None,
) -> np.ndarray:
    if pert.n > 10:
        raise ValueError("residual checks need n <= 10")
    if psi is None:
        psi = perturbed_ground_state(pert, epsilon)
    op = build_dressed(pert, i).operator(epsilon, order, sign)
    return op.matrix @ psi


def residual_norm(
    pert: SpinlessPerturbation, i: int, epsilon: float, order: int = 2, sign: float = DRESSING_SIGN
) -> float:
    """``|| dressed c_i Psi0(eps) ||`` with the exact ground state."""
    return float(np.linalg.norm(residual_vector(pert, i, epsilon, order, sign)))


def sector_residual(
    pert: SpinlessPerturbation, i: int, epsilon: float, excitations: int = 7, order: int = 1,
    sign: float = DRESSING_SIGN,
) -> float:
    """Norm of the residual restricted to states with ``excitations`` particles."""
    r = residual_vector(pert, i, epsilon, order, sign)
    return float(np.linalg.norm(r[particle_number(pert.n) == excitations]))


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
