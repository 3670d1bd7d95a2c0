import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from helpers import assemble, random_hamiltonian, random_orthogonal, random_tau, spin_summed_anticommutator
from sosbound import fock
from sosbound.errors import NonOrthogonalBasis, ShapeMismatch
from sosbound.operators import (
    SpinfulHamiltonian,
    SpinlessTerm,
    TauTensor,
    direct_sum,
    hermitize,
    psi_tau_anticommutators,
    rotate,
    spinless_from_json,
    spinless_to_json,
    tau_tau_anticommutator,
)

floats = st.floats(-5, 5, allow_nan=False)


def test_hermitize_symmetrizes_hopping():
    H = SpinfulHamiltonian(2, 0.0, [[0, 1], [0, 0]], np.zeros((2,) * 4))
    assert np.array_equal(hermitize(H).h0, [[0, 0.5], [0.5, 0]])


@settings(max_examples=25, deadline=None)
@given(arrays(float, (2, 2), elements=floats), arrays(float, (2,) * 4, elements=floats))
def test_hermitize_is_idempotent(h0, G):
    H = hermitize(SpinfulHamiltonian(2, 0.0, h0, G))
    assert H.is_hermitian()
    H2 = hermitize(H)
    assert np.array_equal(H2.h0, H.h0) and np.array_equal(H2.G, H.G)


def test_hermitize_matches_symmetrized_fock_matrix():
    rng = np.random.default_rng(7)
    H = SpinfulHamiltonian(3, 0.3, rng.standard_normal((3, 3)), rng.standard_normal((3,) * 4))
    M = fock.build_spinful(H).toarray()
    want = np.linalg.eigvalsh(0.5 * (M + M.T))
    got = np.linalg.eigvalsh(fock.build_spinful(hermitize(H)).toarray())
    assert np.allclose(got, want, atol=1e-10)


def test_rotate_identity_and_inverse():
    H = random_hamiltonian(3, 1)
    same = rotate(H, np.eye(3))
    assert np.allclose(same.h0, H.h0) and np.allclose(same.G, H.G)
    U = random_orthogonal(3, 2)
    back = rotate(rotate(H, U), U.T)
    assert np.max(np.abs(back.G - H.G)) < 1e-12
    assert np.max(np.abs(back.h0 - H.h0)) < 1e-12


def test_rotate_preserves_spectrum():
    H = random_hamiltonian(3, 4, scale=0.5)
    U = random_orthogonal(3, 5)
    before = fock.spectrum(fock.build_spinful(H))
    after = fock.spectrum(fock.build_spinful(rotate(H, U)))
    assert np.allclose(before, after, atol=1e-10)


def test_rotate_rejects_non_orthogonal():
    with pytest.raises(NonOrthogonalBasis):
        rotate(random_hamiltonian(2, 0), np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_shape_validation():
    with pytest.raises(ShapeMismatch):
        SpinfulHamiltonian(2, 0.0, np.zeros((3, 3)), np.zeros((2,) * 4))
    with pytest.raises(ShapeMismatch):
        TauTensor(np.zeros((2,) * 4), np.zeros((3, 3)))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**31 - 1), floats)
def test_json_round_trip(n, seed, scalar):
    rng = np.random.default_rng(seed)
    H = SpinfulHamiltonian(n, scalar, rng.standard_normal((n, n)), rng.standard_normal((n,) * 4))
    back = SpinfulHamiltonian.from_json(H.to_json())
    assert back.scalar == H.scalar
    assert np.array_equal(back.h0, H.h0) and np.array_equal(back.G, H.G)
    assert json.loads(H.to_json())["convention"] == "spinful-v1"


def test_spinless_json_round_trip():
    terms = [SpinlessTerm((0, 1), (3,), 0.5), SpinlessTerm((), (2,), -1.25)]
    n, back = spinless_from_json(spinless_to_json(4, terms))
    assert n == 4 and back == terms


def test_direct_sum_spectrum_is_sum_of_ground_energies():
    a, b = random_hamiltonian(2, 1, diag=[1, -1]), random_hamiltonian(2, 2, diag=[1, -1])
    ab = direct_sum(a, b)
    e = lambda H: fock.ground_energy(fock.build_spinful(H))
    assert abs(e(ab) - e(a) - e(b)) < 1e-10


def test_tau_tau_canonical_part():
    A = TauTensor(np.zeros((3,) * 4), np.eye(3))
    parts = tau_tau_anticommutator(A, A)
    assert np.array_equal(parts.scalar, np.eye(3))
    assert not parts.quadratic.any() and not parts.quartic.any()


@pytest.mark.parametrize("seed", range(5))
def test_tau_tau_matches_fock_anticommutator(seed):
    n = 2
    A, B = random_tau(n, seed), random_tau(n, seed + 100)
    parts = tau_tau_anticommutator(A, B)
    for a in range(n):
        for b in range(n):
            brute = spin_summed_anticommutator(
                [fock.tau_operator(A, a, s).T for s in range(2)],
                [fock.tau_operator(B, b, s) for s in range(2)],
            )
            want = 2 * assemble(n, parts.scalar[a, b], parts.quadratic[a, b], parts.quartic[a, b])
            assert np.max(np.abs(brute - want)) < 1e-10


def test_tau_tau_is_bilinear():
    A, A2, B = random_tau(3, 1), random_tau(3, 2), random_tau(3, 3)
    lhs = tau_tau_anticommutator(A + A2, B)
    p, q = tau_tau_anticommutator(A, B), tau_tau_anticommutator(A2, B)
    for name in ("scalar", "quadratic", "quartic"):
        assert np.allclose(getattr(lhs, name), getattr(p, name) + getattr(q, name), atol=1e-12)


def test_psi_tau_zero_tau():
    pd, tp = psi_tau_anticommutators(TauTensor.zeros(2))
    for parts in (pd, tp):
        assert not parts.scalar.any() and not parts.quadratic.any()


def _check_psi_tau(A):
    n = A.n_o
    pd, tp = psi_tau_anticommutators(A)
    worst = 0.0
    for p in range(n):
        for t in range(n):
            cdag = [fock.mode_operator(2 * n, 2 * p + s, dagger=True) for s in range(2)]
            c = [fock.mode_operator(2 * n, 2 * p + s) for s in range(2)]
            taus = [fock.tau_operator(A, t, s) for s in range(2)]
            got = spin_summed_anticommutator(cdag, taus)
            worst = max(worst, np.abs(got - 2 * assemble(n, pd.scalar[p, t], pd.quadratic[p, t])).max())
            got = spin_summed_anticommutator([x.T for x in taus], c)
            worst = max(worst, np.abs(got - 2 * assemble(n, tp.scalar[t, p], tp.quadratic[t, p])).max())
    return worst


def test_psi_tau_single_entry():
    T = np.zeros((2,) * 4)
    T[0, 1, 0, 0] = 1.0
    assert _check_psi_tau(TauTensor(T, np.zeros((2, 2)))) < 1e-12


def test_psi_tau_random():
    assert _check_psi_tau(random_tau(2, 9)) < 1e-10


def test_psi_tau_conjugate_symmetry():
    pd, tp = psi_tau_anticommutators(random_tau(3, 4))
    # {c+_p, tau_t}+ = {tau_t+, c_p}: scalars agree, quadratic parts are transposes
    assert np.allclose(pd.scalar, tp.scalar.T)
    assert np.allclose(pd.quadratic, tp.quadratic.transpose(1, 0, 3, 2))
