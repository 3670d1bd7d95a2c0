import numpy as np
import pytest

from helpers import loglog_slope
from sosbound import dressed as D
from sosbound import fock

EPS = [0.01, 0.02, 0.04]


def first_and_second_order_states(pert):
    """``R V |0>`` and ``R V R V |0>`` with ``R`` the reduced resolvent of the vacuum."""
    n = pert.n
    V = fock.build_spinless(n, pert.v_terms()).toarray()
    E = np.array([sum(pert.e[b] for b in range(n) if s >> b & 1) for s in range(1 << n)])
    R = np.zeros_like(E)
    R[1:] = -1.0 / E[1:]
    vac = np.zeros(1 << n)
    vac[0] = 1.0
    psi1 = R * (V @ vac)
    return psi1, R * (V @ psi1)


def applied_to_vacuum(op, n):
    vac = np.zeros(1 << n)
    vac[0] = 1.0
    return op.matrix @ vac


def test_zero_perturbation():
    d = D.build_dressed(D.SpinlessPerturbation.zeros(6), 2)
    assert not d.o1.any()
    assert all(not g.coeff.any() for g in d.o2)
    assert [g.degree for g in d.o2] == [5, 3, 1, 5, 3, 1]


def test_single_term_first_order():
    pert = D.SpinlessPerturbation.zeros(6)
    V4 = np.zeros((6,) * 4)
    V4[0, 1, 2, 3] = 0.6
    V4 = D._antisymmetrize(V4, (0, 1, 2, 3))
    pert = D.SpinlessPerturbation(6, np.ones(6), V4, pert.V31, pert.V22)
    o1 = D.build_dressed(pert, 0).o1
    assert o1[1, 2, 3] == pytest.approx(-0.6 / 4)
    assert np.count_nonzero(o1) == 6  # the antisymmetric images of (1, 2, 3)


def test_o1_antisymmetry():
    o1 = D.build_dressed(D.SpinlessPerturbation.random(6, 1), 0).o1
    for perm, sign in [((1, 0, 2), -1), ((0, 2, 1), -1), ((1, 2, 0), 1)]:
        assert np.array_equal(o1, sign * o1.transpose(perm))


def test_perturbation_validation():
    z = np.zeros((4,) * 4)
    with pytest.raises(ValueError):
        D.SpinlessPerturbation(4, -np.ones(4), z, z, z)
    bad = z.copy()
    bad[0, 1, 2, 3] = 1.0
    with pytest.raises(ValueError):
        D.SpinlessPerturbation(4, np.ones(4), bad, z, z)


@pytest.mark.parametrize("n,i", [(6, 0), (6, 3), (8, 5)])
def test_corrections_equal_annihilator_on_perturbative_states(n, i):
    pert = D.SpinlessPerturbation.random(n, 3)
    psi1, psi2 = first_and_second_order_states(pert)
    psi2[D.particle_number(n) >= 8] = 0.0
    c = fock.annihilators(n)[i]
    d = D.build_dressed(pert, i)
    ci = applied_to_vacuum(fock.FockOperator(n, c), n)
    o1 = applied_to_vacuum(d.operator(1.0, order=1, sign=1.0), n) - ci
    o2 = applied_to_vacuum(d.operator(1.0, order=2, sign=1.0), n) - ci - o1
    assert np.max(np.abs(o1 - c @ psi1)) < 1e-14
    assert np.max(np.abs(o2 - c @ psi2)) < 1e-13


def test_residual_zero_at_zero_coupling():
    assert D.residual_norm(D.SpinlessPerturbation.random(6, 2), 1, 0.0) == 0.0


def test_residual_slopes():
    pert = D.SpinlessPerturbation.random(6, 11)
    r1 = [D.residual_norm(pert, 0, e, order=1) for e in EPS]
    r2 = [D.residual_norm(pert, 0, e, order=2) for e in EPS]
    assert abs(loglog_slope(EPS, r1) - 2) < 0.3
    assert abs(loglog_slope(EPS, r2) - 3) < 0.3


def test_opposite_dressing_sign_does_not_cancel():
    pert = D.SpinlessPerturbation.random(6, 11)
    r = [D.residual_norm(pert, 0, e, order=1, sign=1.0) for e in EPS]
    assert abs(loglog_slope(EPS, r) - 1) < 0.3


def test_residual_is_phase_invariant():
    pert = D.SpinlessPerturbation.random(6, 4)
    psi = D.perturbed_ground_state(pert, 0.03)
    a = np.linalg.norm(D.residual_vector(pert, 2, 0.03, psi=psi))
    b = np.linalg.norm(D.residual_vector(pert, 2, 0.03, psi=-psi))
    assert a == b == pytest.approx(D.residual_norm(pert, 2, 0.03))


def test_seven_excitation_cancellation():
    pert = D.SpinlessPerturbation.random(8, 5, families=("V4",))
    r = [D.sector_residual(pert, 0, e, excitations=7, order=1) for e in EPS]
    assert loglog_slope(EPS, r) >= 3 - 0.3
