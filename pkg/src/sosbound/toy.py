"""Closed-form sum-of-squares decompositions of the four-mode spinless model.

The model is ``mu sum_i n_i + J (c+_0 c+_1 c+_2 c+_3 + h.c.)``.  Its ground
state lives in the span of the empty and the fully occupied state, so the
exact ground energy is ``2 mu - sqrt(4 mu^2 + J^2)``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import fock
from .errors import Infeasible, RootFindFailure
from .models import toy_spinless_terms

N_MODES = 4
RESIDUAL_TOL = 1e-10
MATCH_TOL = 1e-8


@dataclass(frozen=True)
class ToySolveResult:
    a: float
    b: float
    e: float
    lam: float
    s: float | None = None
    residual: float = 0.0


def exact_energy(mu: float, J: float) -> float:
    return 2.0 * mu - np.sqrt(4.0 * mu**2 + J**2)


def _ops():
    c = [m.toarray() for m in fock.annihilators(N_MODES)]
    return c, [x.T for x in c]


def _product(mats):
    out = np.eye(1 << N_MODES)
    for m in mats:
        out = out @ m
    return out


def tau_ops(a: float, b: float):
    """``tau_i = a s_i prod_{j != i} c+_j + b c_i sum_{j != i} n_j``.

    The sign ``s_i`` makes ``c+_i s_i prod_{j != i} c+_j = c+_0 c+_1 c+_2 c+_3``.
    """
    c, cd = _ops()
    n = [cd[i] @ c[i] for i in range(N_MODES)]
    taus = []
    for i in range(N_MODES):
        others = [j for j in range(N_MODES) if j != i]
        sign = (-1) ** i
        taus.append(a * sign * _product([cd[j] for j in others]) + b * c[i] @ sum(n[j] for j in others))
    return taus


def fragment_residuals(x, epsilon: float) -> np.ndarray:
    a, b, e = x
    return np.array(
        [
            2 * e * b + e * a**2 + 2 * e * b**2,
            4 * e * a + 12 * e * a * b - epsilon,
            3 * e * b**2 - 3 * e * a**2 + e - 1.0,
        ]
    )


def solve_fragment(epsilon: float) -> ToySolveResult:
    """Solve the three coefficient-matching equations for ``(a, b, e)``.

    Eliminating ``e = (1 + 3b)^-2`` and ``a = eps (1 + 3b) / 4`` leaves a quadratic
    in ``b`` whose discriminant is ``eps^2 + 4``; its root with ``b -> 0`` as
    ``eps -> 0`` seeds a Newton polish.
    """
    eps = float(epsilon)
    A = 9 * eps**2 / 16 + 2
    B = 3 * eps**2 / 8 + 2
    C = eps**2 / 16
    b0 = -2 * C / (B + np.sqrt(eps**2 + 4))
    e0 = 1.0 / (1 + 3 * b0) ** 2
    a0 = eps * (1 + 3 * b0) / 4
    sol = optimize.root(fragment_residuals, [a0, b0, e0], args=(eps,), method="hybr", tol=1e-14)
    x = sol.x if sol.success else np.array([a0, b0, e0])
    res = float(np.max(np.abs(fragment_residuals(x, eps))))
    if res > RESIDUAL_TOL:
        raise RootFindFailure(f"residual {res:.3e} at epsilon={eps}")
    a, b, e = (float(v) for v in x)
    return ToySolveResult(a, b, e, -4 * e * a**2, None, res)


def fragment_sos(result: ToySolveResult) -> np.ndarray:
    """``sum_i e (c_i + tau_i)+ (c_i + tau_i) + e tau_i tau_i+`` as a 16x16 matrix."""
    c, _ = _ops()
    total = np.zeros((16, 16))
    for i, t in enumerate(tau_ops(result.a, result.b)):
        x = c[i] + t
        total += result.e * (x.T @ x + t @ t.T)
    return total


def general_sos(a: float, b: float, s: float) -> np.ndarray:
    """The two-family decomposition: ``sum_i A_i+ A_i + s sum_i B_i+ B_i``.

    ``A_i = c_i + tau_i`` and ``B_i = b c+_i sum_{j!=i} n_j + a s_i prod_{j!=i} c_j
    + a^2/(1+3b) c+_i`` with the annihilators in ascending order, so that both
    families vanish on the same combination of the empty and full states.
    """
    c, cd = _ops()
    n = [cd[i] @ c[i] for i in range(N_MODES)]
    coeff = a * a / (1 + 3 * b)
    total = np.zeros((16, 16))
    for i, t in enumerate(tau_ops(a, b)):
        others = [j for j in range(N_MODES) if j != i]
        A = c[i] + t
        B = (
            b * cd[i] @ sum(n[j] for j in others)
            + a * (-1) ** i * _product([c[j] for j in others])
            + coeff * cd[i]
        )
        total += A.T @ A + s * B.T @ B
    return total


def match_target(M: np.ndarray, ratio: float):
    """Least-squares ``M = k (N + ratio (P + P+)) + C``; returns ``(k, C, residual)``."""
    H = fock.build_spinless(N_MODES, toy_spinless_terms(ratio, 1.0)).toarray()
    basis = np.stack([H.ravel(), np.eye(16).ravel()], axis=1)
    (k, C), *_ = np.linalg.lstsq(basis, M.ravel(), rcond=None)
    residual = float(np.max(np.abs(M - k * H - C * np.eye(16))))
    return float(k), float(C), residual


def _ratio_on_curve(b: float) -> float:
    # with s = 1 the three linearity conditions reduce to a^2 = -2 b (1 + 3 b)
    return 4 * np.sqrt(2.0) * np.sqrt(max(-b * (1 + 3 * b), 0.0)) / (1 + 5 * b)


WEAK_BRANCH = (-1.0 / 6.0, 0.0)
STRONG_BRANCH = (-1.0 / 5.0, -1.0 / 6.0)


def weak_branch_limit() -> float:
    """Largest ``|J/mu|`` reachable on the branch connected to ``J = 0``."""
    return _ratio_on_curve(WEAK_BRANCH[0])


def solve_general(mu: float, J: float, branch: str = "weak") -> ToySolveResult:
    """Find ``(a, b, s)`` reproducing ``mu sum n + J (P + P+)`` up to a scalar.

    ``lam`` in the result is the certified lower bound (the scalar offset),
    which equals the exact ground energy whenever the match succeeds.
    ``branch="weak"`` follows the solution family continuously connected to
    ``J = 0``; ``branch="strong"`` takes the other root of ``a^2 = -2b(1+3b)``.
    """
    if mu == 0:
        raise ValueError("mu must be nonzero")
    if branch not in ("weak", "strong"):
        raise ValueError(f"unknown branch {branch!r}")
    ratio = abs(J / mu)
    lo, hi = WEAK_BRANCH if branch == "weak" else STRONG_BRANCH
    if ratio == 0.0:
        b = 0.0
    else:
        top = _ratio_on_curve(lo) if branch == "weak" else np.inf
        bottom = 0.0 if branch == "weak" else _ratio_on_curve(hi)
        if not bottom <= ratio <= top:
            raise Infeasible(f"|J/mu| = {ratio:.6g} outside [{bottom:.6g}, {top:.6g}] on the {branch} branch")
        if branch == "weak":
            b = optimize.brentq(lambda x: _ratio_on_curve(x) - ratio, lo, hi, xtol=1e-15, rtol=1e-15)
        else:
            b = optimize.brentq(
                lambda x: _ratio_on_curve(x) - ratio, lo + 1e-15, hi, xtol=1e-15, rtol=1e-15
            )
    a = np.sign(J) * np.sqrt(max(-2 * b * (1 + 3 * b), 0.0))
    s = 1.0
    M = general_sos(a, b, s)
    k, C, residual = match_target(M, np.sign(J) * ratio)
    if residual > MATCH_TOL or k <= 0:
        raise Infeasible(f"coefficient residual {residual:.3e}, scale {k:.3e}")
    # M = (k/|mu|) H' + C with H' the target for |mu|; a negative mu maps to |mu| under particle-hole
    lam = -abs(mu) * C / k
    if mu < 0:
        lam += 4 * mu
    return ToySolveResult(float(a), float(b), float(k), float(lam), s, residual)


def feasibility_boundary(lo: float = 1.0, hi: float = 50.0, tol: float = 1e-6) -> float:
    """Bisection on ``|J/mu|`` for the edge of the weak branch."""

    def ok(r):
        try:
            solve_general(1.0, r)
            return True
        except Infeasible:
            return False

    if not ok(lo) or ok(hi):
        raise ValueError("bracket does not straddle the boundary")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def fragment_table(epsilons) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["epsilon", "a", "b", "e", "lambda", "exact_e0"])
    for eps in epsilons:
        r = solve_fragment(eps)
        w.writerow([eps, r.a, r.b, r.e, r.lam, exact_energy(1.0, eps)])
    return buf.getvalue()


def general_table(ratios, branch: str = "weak") -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["j_over_mu", "a", "b", "s", "lambda", "exact_e0", "feasible"])
    for r in ratios:
        try:
            res = solve_general(1.0, r, branch)
            w.writerow([r, res.a, res.b, res.s, res.lam, exact_energy(1.0, r), True])
        except Infeasible:
            w.writerow([r, "", "", "", "", exact_energy(1.0, r), False])
    return buf.getvalue()
