"""Benchmark sweeps: solver bound vs exact diagonalization vs Rayleigh-Schroedinger."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import fock
from .driver import SolveResult, SolverConfig, solve
from .errors import SosError
from .models import ModelSpec
from .operators import SpinfulHamiltonian

WORKERS_ENV = "SOSBOUND_WORKERS"
# exact diagonalization and PT only up to this many orbitals (2 n_o modes)
ORACLE_MAX_ORBITALS = fock.MAX_MODES // 2

CSV_COLUMNS = [
    "family", "n_o", "epsilon", "seed", "bound", "certified_bound", "err", "converged",
    "iterations", "exact", "pt1", "pt2", "pt3", "err_bound", "err_pt3", "wall_time_s",
]


@dataclass
class RunRecord:
    spec: ModelSpec
    result: SolveResult | None = None
    exact: float | None = None
    pt: fock.PtEnergies | None = None
    error: str | None = None
    timings: dict = field(default_factory=dict)

    def pt_total(self, order: int) -> float | None:
        return None if self.pt is None else self.pt.total(1.0, order)

    @property
    def err_bound(self) -> float | None:
        if self.exact is None or self.result is None:
            return None
        return self.exact - self.result.bound

    @property
    def err_pt3(self) -> float | None:
        if self.exact is None or self.pt is None:
            return None
        return abs(self.pt_total(3) - self.exact)

    def min_err(self) -> float:
        return self.result.min_err() if self.result else math.inf

    def bound_is_valid(self, slack: float = 1e-9) -> bool:
        if self.result is None or self.exact is None or not self.result.converged:
            return True
        return self.result.certified_bound <= self.exact + slack

    def row(self) -> dict:
        r = self.result
        return {
            "family": self.spec.family,
            "n_o": self.spec.n_o,
            "epsilon": self.spec.epsilon,
            "seed": self.spec.seed,
            "bound": r.bound if r else None,
            "certified_bound": r.certified_bound if r else None,
            "err": r.err if r else None,
            "converged": r.converged if r else False,
            "iterations": r.iterations if r else 0,
            "exact": self.exact,
            "pt1": self.pt_total(1),
            "pt2": self.pt_total(2),
            "pt3": self.pt_total(3),
            "err_bound": self.err_bound,
            "err_pt3": self.err_pt3,
            "wall_time_s": sum(self.timings.values()),
        }

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "result": self.result.to_dict() if self.result else None,
            "exact": self.exact,
            "pt": None if self.pt is None else [self.pt.e0, self.pt.e1, self.pt.e2, self.pt.e3],
            "error": self.error,
            "timings": dict(self.timings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(
            spec=ModelSpec.from_dict(d["spec"]),
            result=SolveResult.from_dict(d["result"]) if d["result"] else None,
            exact=d["exact"],
            pt=None if d["pt"] is None else fock.PtEnergies(*d["pt"]),
            error=d["error"],
            timings=dict(d["timings"]),
        )


def split_h0(H: SpinfulHamiltonian) -> tuple[SpinfulHamiltonian, SpinfulHamiltonian]:
    """Quadratic part and quartic perturbation."""
    zero = np.zeros_like(H.G)
    return (
        SpinfulHamiltonian(H.n_o, H.scalar, H.h0, zero),
        SpinfulHamiltonian(H.n_o, 0.0, np.zeros_like(H.h0), H.G),
    )


def run_one(spec: ModelSpec, config: SolverConfig, with_oracle: bool = True) -> RunRecord:
    rec = RunRecord(spec)
    try:
        H = spec.build()
        t = time.perf_counter()
        rec.result = solve(H, config)
        rec.timings["solve"] = time.perf_counter() - t
        if with_oracle and spec.n_o <= ORACLE_MAX_ORBITALS:
            t = time.perf_counter()
            rec.exact = fock.ground_energy(fock.build_spinful(H))
            rec.timings["exact"] = time.perf_counter() - t
            t = time.perf_counter()
            H0, V = split_h0(H)
            rec.pt = fock.rs_pt(H0, V, order=3)
            rec.timings["pt"] = time.perf_counter() - t
    except (SosError, ValueError, np.linalg.LinAlgError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def _run_packed(args):
    return run_one(*args)


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}")
    return max(1, n)


def run_sweep(
    family: str,
    n_o: int,
    epsilons,
    seeds,
    config: SolverConfig | None = None,
    with_oracle: bool = True,
    workers: int | None = None,
) -> list[RunRecord]:
    """One record per (epsilon, seed), in input order regardless of worker count."""
    config = config or SolverConfig()
    specs = [ModelSpec(family, n_o, float(eps), int(seed)) for eps in epsilons for seed in seeds]
    jobs = [(s, config, with_oracle) for s in specs]
    workers = worker_count() if workers is None else workers
    if workers <= 1:
        return [_run_packed(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_packed, jobs))


def convergence_fraction(records, threshold: float) -> float:
    """Fraction of records whose error dropped below ``threshold`` at some iteration."""
    if not records:
        return float("nan")
    return sum(r.min_err() < threshold for r in records) / len(records)


def log_error_stats(records) -> dict:
    """Self-consistent vs third-order PT errors.

    ``mean_log_ratio`` is ``mean ln(err_sc) - mean ln(err_pt3)``;
    ``mean_ratio_of_logs`` is ``mean(ln err_sc / ln err_pt3)``.
    """
    pairs = [
        (r.err_bound, r.err_pt3)
        for r in records
        if r.err_bound is not None and r.err_pt3 is not None and r.err_bound > 0 and r.err_pt3 > 0
    ]
    if not pairs:
        return {"n": 0, "mean_log_ratio": float("nan"), "mean_ratio_of_logs": float("nan")}
    sc = np.log([p[0] for p in pairs])
    pt = np.log([p[1] for p in pairs])
    return {
        "n": len(pairs),
        "mean_log_ratio": float(sc.mean() - pt.mean()),
        "mean_ratio_of_logs": float(np.mean(sc / pt)),
    }


def summary(records) -> dict:
    return {
        "records": len(records),
        "failures": sum(r.error is not None for r in records),
        "converged_1e-5": convergence_fraction(records, 1e-5),
        "converged_1e-4": convergence_fraction(records, 1e-4),
        "bound_violations": sum(not r.bound_is_valid() for r in records),
        **log_error_stats(records),
    }


def _fmt(v):
    return "" if v is None else v


def emit(records, fmt: str = "csv", out=None) -> str:
    """Serialize records as CSV rows or a JSON array; write to ``out`` if given."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow({k: _fmt(v) for k, v in r.row().items()})
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps([r.to_dict() for r in records], indent=1)
    else:
        raise ValueError(f"unknown format {fmt!r}; use csv or json")
    if out is not None:
        with open(out, "w") as fh:
            fh.write(text)
    return text


def load_json(text: str) -> list[RunRecord]:
    return [RunRecord.from_dict(d) for d in json.loads(text)]
