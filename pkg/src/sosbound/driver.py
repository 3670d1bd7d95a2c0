"""Damped fixed-point iteration of the effective-step map."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DEFAULT_MIN_GAP,
    DEFAULT_OVERLAP_FLOOR,
    EffectiveShift,
    GuideHamiltonian,
    effective_step,
)
from .errors import GapTooSmall, OverlapNotPositive
from .operators import SpinfulHamiltonian


@dataclass(frozen=True)
class SolverConfig:
    damping_f: float = 0.5
    tol: float = 1e-5
    max_iter: int = 40
    min_gap: float = DEFAULT_MIN_GAP
    overlap_floor: float = DEFAULT_OVERLAP_FLOOR
    # optional linear schedule: damping moves from damping_f to damping_final over max_iter
    damping_final: float | None = None

    def __post_init__(self):
        if not 0 < self.damping_f <= 1:
            raise ValueError(f"damping_f must lie in (0, 1], got {self.damping_f}")
        if self.damping_final is not None and not 0 < self.damping_final <= 1:
            raise ValueError(f"damping_final must lie in (0, 1], got {self.damping_final}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")

    def damping(self, iteration: int) -> float:
        if self.damping_final is None or self.max_iter == 1:
            return self.damping_f
        t = iteration / (self.max_iter - 1)
        return (1 - t) * self.damping_f + t * self.damping_final


@dataclass
class SolveResult:
    bound: float
    err: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)
    wall_time: float = 0.0
    final_trial: SpinfulHamiltonian | None = field(default=None, repr=False, compare=False)
    final_step: EffectiveShift | None = field(default=None, repr=False, compare=False)

    @property
    def certified_bound(self) -> float:
        return self.bound - self.err

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "err": self.err,
            "certified_bound": self.certified_bound,
            "iterations": self.iterations,
            "converged": self.converged,
            "history": [[b, e] for b, e in self.history],
            "wall_time_s": self.wall_time,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SolveResult":
        return cls(
            bound=d["bound"],
            err=d["err"],
            iterations=d["iterations"],
            converged=d["converged"],
            history=[tuple(x) for x in d["history"]],
            wall_time=d.get("wall_time_s", 0.0),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def min_err(self) -> float:
        return min(e for _, e in self.history) if self.history else float("inf")


def coefficient_distance(
    scalar_a: float, h0_a, G_a, scalar_b: float, h0_b, G_b
) -> float:
    """Sum of absolute coefficient differences with spin multiplicities 2 and 4.

    Every ``N_ij`` has operator norm at most 2 and every quartic ``N_ij N_kl``
    term at most 4, so this bounds the operator norm of the difference.
    """
    return (
        abs(scalar_a - scalar_b)
        + 2.0 * float(np.sum(np.abs(np.asarray(h0_a) - h0_b)))
        + 4.0 * float(np.sum(np.abs(np.asarray(G_a) - G_b)))
    )


def solve(target: SpinfulHamiltonian, config: SolverConfig | None = None, keep_last: bool = False) -> SolveResult:
    """Iterate trial Hamiltonians until the squares reproduce the target up to a scalar.

    At every iteration the squares equal ``trial + shift`` exactly, so the target
    equals ``SoS - scalar_shift + (candidate - trial)`` and
    ``target >= -scalar_shift - err``.
    """
    config = config or SolverConfig()
    if not target.is_hermitian(1e-10):
        raise ValueError(
            f"target violates Hermiticity invariants by {target.hermiticity_error():.3e}; hermitize it first"
        )
    start = time.perf_counter()
    h0_target, G_target = target.h0, target.G
    guide = h0_target.copy()
    h0_try, G_try = h0_target.copy(), G_target.copy()
    scalar_try = 0.0
    history = []
    bound = err = float("nan")
    converged = False
    step = None
    trial = target
    for it in range(config.max_iter):
        f = config.damping(it)
        trial = SpinfulHamiltonian(target.n_o, 0.0, h0_try, G_try)
        try:
            step = effective_step(
                trial,
                GuideHamiltonian(guide),
                min_gap=config.min_gap,
                overlap_floor=config.overlap_floor,
                keep_decomposition=keep_last,
            )
        except (GapTooSmall, OverlapNotPositive) as exc:
            exc.iteration = it
            raise
        guide = f * step.guide_new + (1 - f) * guide
        energy0, energy2, energy4 = step.guide_energy()
        scalar_new = energy2 + energy4
        h0_new = h0_target - step.h0_shift
        G_new = G_target - step.g_shift
        err = coefficient_distance(scalar_try, h0_try, G_try, scalar_new, h0_new, G_new)
        scalar_try = scalar_new
        # energy bookkeeping of the shift; its negative is the bound certified by the squares
        bound = -(energy0 + energy2 + energy4 - scalar_try)
        history.append((bound, err))
        h0_try = f * h0_new + (1 - f) * h0_try
        G_try = f * G_new + (1 - f) * G_try
        if err < config.tol:
            converged = True
            break
    bound += target.scalar
    history = [(b + target.scalar, e) for b, e in history]
    return SolveResult(
        bound=float(bound),
        err=float(err),
        iterations=len(history),
        converged=converged,
        history=history,
        wall_time=time.perf_counter() - start,
        final_trial=trial,
        final_step=step,
    )
