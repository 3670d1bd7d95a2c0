"""Seeded Hamiltonian generators for the benchmark families.

Random draws use numpy's PCG64 bit generator and its standard-normal
(ziggurat) transform; tensors are filled in C (lexicographic ``i, j, k, l``)
order, so a given seed reproduces bit-identical tensors on any platform
running the same numpy release.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import OddOrbitalCount
from .operators import SpinfulHamiltonian, SpinlessTerm, hermitize

FAMILIES = ("gaussian-quartic", "singlet-hopping", "two-orbital-singlet", "toy-spinless-quartic")


@dataclass(frozen=True)
class ModelSpec:
    family: str
    n_o: int
    epsilon: float
    seed: int = 0
    u: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.family in ("gaussian-quartic", "singlet-hopping") and self.n_o % 2:
            raise OddOrbitalCount(f"{self.family} needs an even orbital count, got {self.n_o}")
        if self.family == "two-orbital-singlet" and self.n_o != 2:
            raise ValueError("two-orbital-singlet has exactly 2 orbitals")
        if self.family == "toy-spinless-quartic" and self.n_o != 4:
            raise ValueError("toy-spinless-quartic has exactly 4 modes")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(d["family"], int(d["n_o"]), float(d["epsilon"]), int(d.get("seed", 0)), d.get("u"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def build(self) -> SpinfulHamiltonian:
        if self.family == "gaussian-quartic":
            return gaussian_model(self.n_o, self.epsilon, self.seed)
        if self.family == "singlet-hopping":
            return singlet_hopping_model(self.n_o, self.epsilon, self.seed)
        if self.family == "two-orbital-singlet":
            return two_orbital_singlet(self.epsilon, self.u or 0.0)
        raise ValueError(f"{self.family} is spinless; use toy_spinless_terms")


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def gapped_h0(n_o: int) -> np.ndarray:
    """``+1`` on the first half of the orbitals, ``-1`` on the second half."""
    if n_o % 2:
        raise OddOrbitalCount(f"need an even orbital count, got {n_o}")
    half = n_o // 2
    return np.diag(np.concatenate([np.ones(half), -np.ones(half)]))


def gaussian_model(n_o: int, epsilon: float, seed: int) -> SpinfulHamiltonian:
    h0 = gapped_h0(n_o)
    A = rng_for(seed).standard_normal((n_o,) * 4)
    G = epsilon * (A + A.transpose(3, 2, 1, 0)) / np.sqrt(2.0)
    return SpinfulHamiltonian(n_o, 0.0, h0, G)


def singlet_hopping_model(n_o: int, scale: float, seed: int) -> SpinfulHamiltonian:
    """Gapped h0 plus every pair hop ``sum_st c+_{is} c_{js} c+_{it} c_{jt}`` with Gaussian weights."""
    h0 = gapped_h0(n_o)
    x = rng_for(seed).standard_normal((n_o, n_o))
    G = np.zeros((n_o,) * 4)
    for i in range(n_o):
        for j in range(n_o):
            if i != j:
                G[i, j, i, j] = scale * x[i, j]
    return hermitize(SpinfulHamiltonian(n_o, 0.0, h0, G))


def two_orbital_singlet(epsilon: float, u: float = 0.0) -> SpinfulHamiltonian:
    """``n_0 - n_1 + eps sum_st (c+_0s c_1s c+_0t c_1t + h.c.) + u n_0 n_1``."""
    h0 = np.diag([1.0, -1.0])
    G = np.zeros((2,) * 4)
    G[0, 1, 0, 1] = epsilon
    G[1, 0, 1, 0] = epsilon
    # n_0 n_1 = n_1 n_0; split evenly to keep the reversal symmetry
    G[0, 0, 1, 1] = 0.5 * u
    G[1, 1, 0, 0] = 0.5 * u
    return SpinfulHamiltonian(2, 0.0, h0, G)


def toy_spinless_terms(epsilon: float, mu: float = 1.0) -> list[SpinlessTerm]:
    """Four modes: ``mu sum_i n_i + eps (c+_0 c+_1 c+_2 c+_3 + h.c.)``."""
    terms = [SpinlessTerm((i,), (i,), mu) for i in range(4)]
    if epsilon:
        terms.append(SpinlessTerm((0, 1, 2, 3), (), epsilon))
        terms.append(SpinlessTerm((), (3, 2, 1, 0), epsilon))
    return terms
