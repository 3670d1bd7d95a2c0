"""Tensor representations of the quadratic and quartic operators used by the method.

Conventions (real coefficients throughout):

* ``SpinfulHamiltonian``:  ``scalar + sum_{ij,s} h0[i,j] c+_{is} c_{js}
  + sum_{ijkl,s,t} G[i,j,k,l] c+_{is} c_{js} c+_{kt} c_{lt}``.
* ``TauTensor``: ``tau_{i,s} = sum_{jkl,t} T[i,j,k,l] c_{js} c+_{kt} c_{lt}
  + sum_j T1[i,j] c_{js}``.
* ``AnticommutatorParts`` for a pair of labels ``(a, b)`` describe half of the
  spin-summed anticommutator ``sum_s {X+_{a,s}, Y_{b,s}}``; the scalar part is
  a plain number, the quadratic part multiplies ``N_{cd} = sum_s c+_{cs} c_{ds}``
  and the quartic part multiplies ``sum_{st} c+_{cs} c_{ds} c+_{et} c_{ft}``.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import IndexOutOfRange, NonOrthogonalBasis, ShapeMismatch

einsum = functools.partial(np.einsum, optimize="optimal")

SPINFUL_CONVENTION = "spinful-v1"
SPINLESS_CONVENTION = "spinless-v1"


@dataclass(frozen=True)
class SpinfulHamiltonian:
    n_o: int
    scalar: float
    h0: np.ndarray
    G: np.ndarray

    def __post_init__(self):
        h0 = np.asarray(self.h0, dtype=float)
        G = np.asarray(self.G, dtype=float)
        n = int(self.n_o)
        if n < 1:
            raise ShapeMismatch(f"n_o must be positive, got {n}")
        if h0.shape != (n, n):
            raise ShapeMismatch(f"h0 has shape {h0.shape}, expected {(n, n)}")
        if G.shape != (n,) * 4:
            raise ShapeMismatch(f"G has shape {G.shape}, expected {(n,) * 4}")
        object.__setattr__(self, "n_o", n)
        object.__setattr__(self, "scalar", float(self.scalar))
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "G", G)

    @classmethod
    def quadratic(cls, h0, scalar=0.0):
        h0 = np.asarray(h0, dtype=float)
        n = h0.shape[0]
        return cls(n, scalar, h0, np.zeros((n,) * 4))

    def hermiticity_error(self) -> float:
        """Largest violation of the two symmetry invariants."""
        return max(
            float(np.max(np.abs(self.h0 - self.h0.T))),
            float(np.max(np.abs(self.G - self.G.transpose(3, 2, 1, 0)))),
        )

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return self.hermiticity_error() <= atol

    def to_dict(self) -> dict:
        return {
            "n_o": self.n_o,
            "scalar": self.scalar,
            "h0": self.h0.ravel().tolist(),
            "G": self.G.ravel().tolist(),
            "convention": SPINFUL_CONVENTION,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpinfulHamiltonian":
        conv = d.get("convention", SPINFUL_CONVENTION)
        if conv != SPINFUL_CONVENTION:
            raise ValueError(f"unsupported convention {conv!r}")
        n = int(d["n_o"])
        h0 = np.asarray(d["h0"], dtype=float)
        G = np.asarray(d["G"], dtype=float)
        if h0.size != n * n or G.size != n**4:
            raise ShapeMismatch("flat arrays do not match n_o")
        return cls(n, d.get("scalar", 0.0), h0.reshape(n, n), G.reshape((n,) * 4))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SpinfulHamiltonian":
        return cls.from_dict(json.loads(text))

    def __add__(self, other: "SpinfulHamiltonian") -> "SpinfulHamiltonian":
        if other.n_o != self.n_o:
            raise ShapeMismatch("orbital counts differ")
        return SpinfulHamiltonian(
            self.n_o, self.scalar + other.scalar, self.h0 + other.h0, self.G + other.G
        )

    def scaled(self, factor: float) -> "SpinfulHamiltonian":
        return SpinfulHamiltonian(
            self.n_o, factor * self.scalar, factor * self.h0, factor * self.G
        )


def direct_sum(h1: SpinfulHamiltonian, h2: SpinfulHamiltonian) -> SpinfulHamiltonian:
    """Block-diagonal combination of two independent systems (no cross terms)."""
    n1, n2 = h1.n_o, h2.n_o
    n = n1 + n2
    h0 = np.zeros((n, n))
    h0[:n1, :n1] = h1.h0
    h0[n1:, n1:] = h2.h0
    G = np.zeros((n,) * 4)
    G[:n1, :n1, :n1, :n1] = h1.G
    G[n1:, n1:, n1:, n1:] = h2.G
    return SpinfulHamiltonian(n, h1.scalar + h2.scalar, h0, G)


@dataclass(frozen=True)
class TauTensor:
    T: np.ndarray
    T1: np.ndarray

    def __post_init__(self):
        T = np.asarray(self.T, dtype=float)
        T1 = np.asarray(self.T1, dtype=float)
        n = T1.shape[0]
        if T1.shape != (n, n) or T.shape != (n,) * 4:
            raise ShapeMismatch(f"incompatible shapes T{T.shape} T1{T1.shape}")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "T1", T1)

    @property
    def n_o(self) -> int:
        return self.T1.shape[0]

    @classmethod
    def zeros(cls, n: int) -> "TauTensor":
        return cls(np.zeros((n,) * 4), np.zeros((n, n)))

    def __add__(self, other: "TauTensor") -> "TauTensor":
        return TauTensor(self.T + other.T, self.T1 + other.T1)

    def relabel(self, U: np.ndarray) -> "TauTensor":
        """New tau labels ``tau'_m = sum_a U[a, m] tau_a``."""
        return TauTensor(einsum("abcd,ae->ebcd", self.T, U), einsum("ab,ae->eb", self.T1, U))


@dataclass(frozen=True)
class AnticommutatorParts:
    scalar: np.ndarray
    quadratic: np.ndarray
    quartic: np.ndarray | None = None

    def contract(self, u: np.ndarray, v: np.ndarray):
        """Parts of ``sum_ab u[a] v[b] parts[a, b]``."""
        scalar = float(u @ self.scalar @ v)
        quad = einsum("abcd,a,b->cd", self.quadratic, u, v)
        quart = None
        if self.quartic is not None:
            quart = einsum("abcdef,a,b->cdef", self.quartic, u, v)
        return scalar, quad, quart


def hermitize(H: SpinfulHamiltonian) -> SpinfulHamiltonian:
    """Symmetrize h0 and G so both satisfy the Hermiticity invariants."""
    h0 = 0.5 * (H.h0 + H.h0.T)
    G = 0.5 * (H.G + H.G.transpose(3, 2, 1, 0))
    return SpinfulHamiltonian(H.n_o, H.scalar, h0, G)


def rotate(H: SpinfulHamiltonian, U: np.ndarray, atol: float = 1e-12) -> SpinfulHamiltonian:
    """Express H in the orbital basis given by the columns of the orthogonal matrix U."""
    U = np.asarray(U, dtype=float)
    if U.shape != (H.n_o, H.n_o):
        raise ShapeMismatch(f"U has shape {U.shape}")
    dev = np.max(np.abs(U.T @ U - np.eye(H.n_o)))
    if dev > atol:
        raise NonOrthogonalBasis(f"U^T U deviates from identity by {dev:.3e}")
    h0 = U.T @ H.h0 @ U
    G = einsum("abcd,ae,bf,cg,dh->efgh", H.G, U, U, U, U)
    return SpinfulHamiltonian(H.n_o, H.scalar, h0, G)


def _check_pair(A: TauTensor, B: TauTensor):
    if A.n_o != B.n_o:
        raise ShapeMismatch(f"orbital counts differ: {A.n_o} vs {B.n_o}")


@dataclass(frozen=True)
class SpinlessTerm:
    """``coeff * c+_{creations[0]} c+_{creations[1]} ... c_{annihilations[0]} ...``."""

    creations: tuple
    annihilations: tuple
    coeff: float

    def __post_init__(self):
        object.__setattr__(self, "creations", tuple(int(p) for p in self.creations))
        object.__setattr__(self, "annihilations", tuple(int(p) for p in self.annihilations))
        object.__setattr__(self, "coeff", float(self.coeff))

    def to_dict(self) -> dict:
        return {
            "creations": list(self.creations),
            "annihilations": list(self.annihilations),
            "coeff": self.coeff,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpinlessTerm":
        return cls(d["creations"], d["annihilations"], d["coeff"])

    def adjoint(self) -> "SpinlessTerm":
        return SpinlessTerm(self.annihilations[::-1], self.creations[::-1], self.coeff)


def spinless_to_json(n: int, terms: Sequence[SpinlessTerm]) -> str:
    return json.dumps(
        {"n": n, "terms": [t.to_dict() for t in terms], "convention": SPINLESS_CONVENTION}
    )


def spinless_from_json(text: str) -> tuple[int, list[SpinlessTerm]]:
    d = json.loads(text)
    if d.get("convention", SPINLESS_CONVENTION) != SPINLESS_CONVENTION:
        raise ValueError(f"unsupported convention {d['convention']!r}")
    n = int(d["n"])
    terms = [SpinlessTerm.from_dict(t) for t in d["terms"]]
    for t in terms:
        for p in t.creations + t.annihilations:
            if not 0 <= p < n:
                raise IndexOutOfRange(f"mode {p} outside [0, {n})")
    return n, terms


def _tau_tau_raw(T, T1, S, S1):
    """Parts indexed ``[j, a]`` for ``{tau_{X,a}+, tau_{Y,j}}`` with X=(T, T1), Y=(S, S1)."""
    quart = (
        einsum("abcd,jblm->jadclm", T, S)
        - 0.5 * einsum("abcd,jklb->jadclk", T, S)
        + 0.5 * einsum("abcd,jkcm->jadmbk", T, S)
        - 0.5 * einsum("abck,jklm->jalmbc", T, S)
        - 0.5 * einsum("abcm,jklm->jabklc", T, S)
    )
    quad = (
        einsum("abcd,jkkb->jadc", T, S)
        - einsum("abcd,jbcm->jadm", T, S)
        + einsum("abbk,jklm->jalm", T, S)
        - 0.5 * einsum("abbm,jklm->jalk", T, S)
        + einsum("abcm,jblm->jalc", T, S)
        + einsum("ab,jblm->jalm", T1, S)
        - 0.5 * einsum("ab,jklb->jalk", T1, S)
        + einsum("abcd,jb->jadc", T, S1)
        - 0.5 * einsum("abcd,jd->jabc", T, S1)
    )
    scalar = (
        einsum("abbm,jkkm->ja", T, S)
        + einsum("ab,jb->ja", T1, S1)
        + einsum("ab,jkkb->ja", T1, S)
        + einsum("abbd,jd->ja", T, S1)
    )
    return scalar, quad, quart


def tau_tau_anticommutator(A: TauTensor, B: TauTensor) -> AnticommutatorParts:
    """Parts ``[a, b]`` of ``(1/2) sum_s {tau_{A,a,s}+, tau_{B,b,s}}``."""
    _check_pair(A, B)
    scalar, quad, quart = _tau_tau_raw(A.T, A.T1, B.T, B.T1)
    return AnticommutatorParts(
        np.ascontiguousarray(scalar.T),
        np.ascontiguousarray(quad.transpose(1, 0, 2, 3)),
        np.ascontiguousarray(quart.transpose(1, 0, 2, 3, 4, 5)),
    )


def psi_tau_anticommutators(A: TauTensor) -> tuple[AnticommutatorParts, AnticommutatorParts]:
    """Parts of ``{c+_p, tau_t}`` (indexed ``[p, t]``) and ``{tau_t+, c_p}`` (indexed ``[t, p]``).

    Both are at most quadratic, so the quartic parts are zero.
    """
    T, T1 = A.T, A.T1
    n = A.n_o
    zero = np.zeros((n,) * 6)
    psidag_tau = AnticommutatorParts(
        einsum("abbd->da", T) + T1.T,
        einsum("abcd->bacd", T) - 0.5 * einsum("abcd->dacb", T),
        zero,
    )
    taudag_psi = AnticommutatorParts(
        einsum("abbd->ad", T) + T1,
        einsum("abcd->abdc", T) - 0.5 * einsum("abcd->adbc", T),
        zero,
    )
    return psidag_tau, taudag_psi
