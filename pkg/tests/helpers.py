"""Shared brute-force oracles for the test suite."""

import numpy as np

from sosbound import fock
from sosbound.operators import SpinfulHamiltonian, TauTensor, hermitize


def random_hamiltonian(n, seed, scale=0.1, diag=None):
    rng = np.random.default_rng(seed)
    h0 = rng.standard_normal((n, n))
    h0 = 0.5 * (h0 + h0.T) if diag is None else np.diag(diag)
    G = scale * rng.standard_normal((n,) * 4)
    return hermitize(SpinfulHamiltonian(n, 0.0, h0, G))


def random_tau(n, seed):
    rng = np.random.default_rng(seed)
    return TauTensor(rng.standard_normal((n,) * 4), rng.standard_normal((n, n)))


def assemble(n, scalar, quad, quart=None):
    """Fock matrix of ``scalar + quad . N + quart . NN``."""
    quart = np.zeros((n,) * 4) if quart is None else quart
    return fock.build_spinful(SpinfulHamiltonian(n, scalar, quad, quart)).toarray()


def spin_summed_anticommutator(ops_a, ops_b):
    """``sum_s {a_s, b_s}`` for per-spin operator lists."""
    return sum(fock.brute_anticommutator(a, b).toarray() for a, b in zip(ops_a, ops_b))


def random_orthogonal(n, seed):
    q, r = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def loglog_slope(xs, ys):
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


# (criterion number, description, passed, detail) collected by the acceptance suite
ACCEPTANCE = []


def report(number, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {name} ({detail})"
    ACCEPTANCE.append((number, line))
    print(line)
    return ok
