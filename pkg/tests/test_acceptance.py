"""End-to-end acceptance checks; each test prints one PASS/FAIL line."""

import time

import numpy as np

from helpers import assemble, loglog_slope, random_tau, report, spin_summed_anticommutator
from sosbound import bench, dressed, fock, toy
from sosbound.driver import SolverConfig, solve
from sosbound.models import gaussian_model, rng_for, toy_spinless_terms
from sosbound.operators import (
    SpinfulHamiltonian,
    direct_sum,
    hermitize,
    psi_tau_anticommutators,
    tau_tau_anticommutator,
)


def exact(H):
    return fock.ground_energy(fock.build_spinful(H))


def test_criterion_01_toy_exactness():
    start = time.perf_counter()
    errs = [abs(toy.solve_fragment(e).lam + e**2 / 4) for e in (0.1, 1.0, 5.0, 20.0)]
    elapsed = time.perf_counter() - start
    ok = max(errs) < 1e-8 and elapsed < 1.0
    assert report(1, "toy fragment lambda = -eps^2/4", ok, f"max |dlambda| {max(errs):.1e}, {elapsed:.2f}s")


def test_criterion_02_strong_coupling_boundary():
    start = time.perf_counter()
    boundary = toy.feasibility_boundary()
    worst = 0.0
    for r in np.linspace(0.25, boundary, 25):
        lam = toy.solve_general(1.0, r).lam
        worst = max(worst, abs(lam - fock.ground_energy(fock.build_spinless(4, toy_spinless_terms(r)))))
    elapsed = time.perf_counter() - start
    ok = 9.0 <= boundary <= 10.5 and worst < 1e-7 and elapsed < 30
    assert report(
        2, "feasibility boundary of |J/mu|", ok, f"boundary {boundary:.4f}, max offset error {worst:.1e}, {elapsed:.1f}s"
    )


def test_criterion_03_oracle_equivalence():
    start = time.perf_counter()
    worst = 0.0
    n = 2
    for k in range(25):
        A, B = random_tau(n, 2 * k), random_tau(n, 2 * k + 1)
        tt = tau_tau_anticommutator(A, B)
        pd, tp = psi_tau_anticommutators(A)
        tauA = [[fock.tau_operator(A, a, s) for s in range(2)] for a in range(n)]
        tauB = [[fock.tau_operator(B, a, s) for s in range(2)] for a in range(n)]
        for a in range(n):
            c = [fock.mode_operator(2 * n, 2 * a + s) for s in range(2)]
            for b in range(n):
                got = spin_summed_anticommutator([x.T for x in tauA[a]], tauB[b])
                want = 2 * assemble(n, tt.scalar[a, b], tt.quadratic[a, b], tt.quartic[a, b])
                worst = max(worst, np.abs(got - want).max())
                got = spin_summed_anticommutator([x.T for x in c], tauA[b])
                worst = max(worst, np.abs(got - 2 * assemble(n, pd.scalar[a, b], pd.quadratic[a, b])).max())
                got = spin_summed_anticommutator([x.T for x in tauA[b]], c)
                worst = max(worst, np.abs(got - 2 * assemble(n, tp.scalar[b, a], tp.quadratic[b, a])).max())
    elapsed = time.perf_counter() - start
    ok = worst < 1e-10 and elapsed < 10
    assert report(3, "anticommutators vs Fock oracle", ok, f"max deviation {worst:.1e}, {elapsed:.1f}s")


def test_criterion_04_unperturbed_fixed_point():
    r = solve(gaussian_model(6, 0.0, 0))
    ok = r.converged and r.iterations == 1 and r.bound == -6.0
    assert report(4, "eps=0 fixed point", ok, f"bound {r.bound}, iterations {r.iterations}")


def test_criterion_05_lower_bound_validity():
    start = time.perf_counter()
    checked = violations = 0
    worst = -np.inf
    for eps in (0.01, 0.02):
        seed = 0
        done = 0
        while done < 50:
            H = gaussian_model(6, eps, seed)
            seed += 1
            r = solve(H)
            if not r.converged:
                continue
            gap = r.certified_bound - exact(H)
            worst = max(worst, gap)
            violations += gap > 1e-9
            done += 1
            checked += 1
    elapsed = time.perf_counter() - start
    ok = checked == 100 and violations == 0 and elapsed < 600
    assert report(
        5, "certified bound below exact energy", ok,
        f"{checked} runs, {violations} violations, max(certified - exact) {worst:.1e}, {elapsed:.0f}s",
    )


def test_criterion_06_fourth_order_error():
    eps = [0.005, 0.01, 0.02]
    gaps = np.zeros((10, 3))
    for seed in range(10):
        for k, e in enumerate(eps):
            H = gaussian_model(6, e, seed)
            gaps[seed, k] = exact(H) - solve(H).bound
    slope = loglog_slope(eps, gaps.mean(axis=0))
    per_seed = [loglog_slope(eps, np.abs(g)) for g in gaps]
    ok = abs(slope - 4) <= 0.5
    assert report(
        6, "log-log slope of E0 - bound", ok,
        f"slope {slope:.2f} of the mean gap; per-seed range [{min(per_seed):.2f}, {max(per_seed):.2f}]",
    )


def test_criterion_07_beats_third_order():
    records = bench.run_sweep("gaussian-quartic", 6, [0.01], range(50))
    stats = bench.log_error_stats(records)
    ok = stats["n"] == 50 and stats["mean_log_ratio"] < 0
    assert report(
        7, "self-consistent vs third-order PT", ok,
        f"mean ln err_sc - mean ln err_pt3 = {stats['mean_log_ratio']:.2f} over {stats['n']} seeds",
    )


def test_criterion_08_convergence_fraction():
    results = [solve(gaussian_model(6, 0.04, seed)) for seed in range(100)]
    frac4 = np.mean([r.min_err() < 1e-4 for r in results])
    frac5 = np.mean([r.converged for r in results])
    ok = 0.25 <= frac4 <= 0.75
    assert report(8, "convergence at eps=0.04", ok, f"err<1e-4: {frac4:.2f}, err<1e-5: {frac5:.2f}")


def test_criterion_09_size_consistency():
    config = SolverConfig()
    worst = 0.0
    for k in range(10):
        H1, H2 = gaussian_model(4, 0.01, 2 * k), gaussian_model(4, 0.01, 2 * k + 1)
        both = solve(direct_sum(H1, H2), config).bound
        worst = max(worst, abs(both - solve(H1, config).bound - solve(H2, config).bound))
    ok = worst <= 10 * config.tol
    assert report(9, "size consistency", ok, f"max |b12 - b1 - b2| {worst:.1e} vs {10 * config.tol:.0e}")


def test_criterion_10_dressed_operators():
    start = time.perf_counter()
    eps = [0.01, 0.02, 0.04]
    pert = dressed.SpinlessPerturbation.random(6, 11)
    s1 = loglog_slope(eps, [dressed.residual_norm(pert, 0, e, order=1) for e in eps])
    s2 = loglog_slope(eps, [dressed.residual_norm(pert, 0, e, order=2) for e in eps])
    # a seven-particle sector needs at least eight modes
    quartic = dressed.SpinlessPerturbation.random(8, 5, families=("V4",))
    s7 = loglog_slope(eps, [dressed.sector_residual(quartic, 0, e) for e in eps])
    elapsed = time.perf_counter() - start
    ok = abs(s1 - 2) <= 0.3 and abs(s2 - 3) <= 0.3 and s7 >= 2.7 and elapsed < 60
    assert report(
        10, "dressed operator residual slopes", ok,
        f"O1 {s1:.2f}, O2 {s2:.2f}, seven-excitation sector {s7:.2f}, {elapsed:.1f}s",
    )


def test_criterion_11_perturbation_scale():
    mins = []
    for seed in range(50):
        G = gaussian_model(6, 1.0, seed).G
        mins.append(abs(exact(SpinfulHamiltonian(6, 0.0, np.zeros((6, 6)), G))))
    mean = float(np.mean(mins))
    ok = abs(mean - 70) <= 15
    assert report(11, "mean |min eigenvalue of V|", ok, f"{mean:.1f} (std {np.std(mins):.1f})")


def test_criterion_12_certificate_reconstruction():
    A = rng_for(12).standard_normal((3,) * 4)
    H = hermitize(SpinfulHamiltonian(3, 0.0, np.diag([1.0, 1.0, -1.0]), 0.02 * A))
    r = solve(H)
    M = fock.build_spinful(H).toarray() - (r.bound - r.err) * np.eye(64)
    lowest = float(np.linalg.eigvalsh(M)[0])
    ok = r.converged and lowest >= -1e-8
    assert report(12, "H - bound + err >= 0 on Fock space (n_o=3)", ok, f"min eigenvalue {lowest:.2e}")
