"""One step of the self-consistent sum-of-squares construction.

Given a trial Hamiltonian and a quadratic guide Hamiltonian, build the cubic
tau operators, write the trial exactly as a bilinear ``H_psitau`` in
``(psi, tau)``, diagonalize it against the overlap matrix and collect the
anticommutator remainders of the negative-eigenvalue squares.  Those
remainders are the shift between the effective and the trial Hamiltonian.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GapTooSmall, OverlapNotPositive, ShapeMismatch
from .operators import (
    SpinfulHamiltonian,
    TauTensor,
    einsum,
    hermitize,
    psi_tau_anticommutators,
    rotate,
    tau_tau_anticommutator,
)

DEFAULT_MIN_GAP = 1e-8
DEFAULT_OVERLAP_FLOOR = 1e-10


def fix_signs(vecs: np.ndarray) -> np.ndarray:
    """Flip eigenvector columns so the largest-magnitude entry is positive."""
    vecs = np.array(vecs, dtype=float)
    if vecs.size == 0:
        return vecs
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def eigh_sorted(matrix: np.ndarray):
    vals, vecs = np.linalg.eigh(matrix)
    return vals, fix_signs(vecs)


@dataclass(frozen=True)
class GuideHamiltonian:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeMismatch(f"guide must be square, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    def eig(self):
        return eigh_sorted(0.5 * (self.matrix + self.matrix.T))

    def check(self, min_gap: float = DEFAULT_MIN_GAP, sym_tol: float = 1e-12):
        asym = float(np.max(np.abs(self.matrix - self.matrix.T)))
        if asym > sym_tol:
            raise ShapeMismatch(f"guide is not symmetric (deviation {asym:.3e})")
        vals, _ = self.eig()
        _check_gap(vals, min_gap)


@dataclass(frozen=True)
class PsiTauSystem:
    hpsitau: np.ndarray
    S: np.ndarray

    @property
    def n_o(self) -> int:
        return self.hpsitau.shape[0] // 2


@dataclass(frozen=True)
class SosDecomposition:
    """The squares found by one step, kept for explicit reconstruction.

    Operators are ``X = (c'_0 .. c'_{n-1}, tau_0 .. tau_{n-1})`` where
    ``c'_a = sum_p basis[p, a] c_p`` and tau is built from ``tau`` in that
    same primed basis.  ``H_psitau = sum_s X+ hpsitau X`` and
    ``hpsitau = sum_m eigvals[m] outer(w_m, w_m)`` with ``w_m = eigvecs[:, m]``
    in the unscaled X basis.
    """

    basis: np.ndarray
    tau: TauTensor
    hpsitau: np.ndarray
    eigvals: np.ndarray
    eigvecs: np.ndarray
    overlap_eigs: np.ndarray


@dataclass(frozen=True)
class EffectiveShift:
    scalar_shift: float
    h0_shift: np.ndarray
    g_shift: np.ndarray
    occupied: np.ndarray
    empty: np.ndarray
    guide_new: np.ndarray
    decomposition: SosDecomposition | None = field(default=None, repr=False, compare=False)

    def guide_energy(self) -> tuple[float, float, float]:
        """Scalar, quadratic and quartic pieces of the shift evaluated in the guide state."""
        occ, emp = self.occupied, self.empty
        energy2 = 2.0 * float(einsum("bc,bc", self.h0_shift, occ))
        energy4 = 4.0 * float(einsum("ab,cd,abcd", occ, occ, self.g_shift)) + 2.0 * float(
            einsum("ac,bd,abdc", occ, emp, self.g_shift)
        )
        return self.scalar_shift, energy2, energy4


def _check_gap(vals, min_gap):
    small = np.abs(vals) <= min_gap
    if np.any(small):
        raise GapTooSmall(
            f"guide eigenvalues {vals[small]} within {min_gap:g} of zero"
        )


def build_tau(guide_vals, G_new, min_gap: float = DEFAULT_MIN_GAP):
    """Tau tensors for a quartic tensor written in the guide eigenbasis.

    Returns the TauTensor and the correction to add to the psi-psi block of
    ``hpsitau``.  The correction compensates the quadratic terms generated by
    reordering the quartic pieces assigned to the third operator and by the
    linear tau part ``T1``, so that the bilinear reproduces the trial exactly.
    """
    e = np.asarray(guide_vals, dtype=float)
    G_new = np.asarray(G_new, dtype=float)
    n = e.shape[0]
    if G_new.shape != (n,) * 4:
        raise ShapeMismatch(f"G has shape {G_new.shape}, expected {(n,) * 4}")
    _check_gap(e, min_gap)
    a = np.abs(e)
    ex_i = (e > 0)[:, None, None, None]
    ex_j = (e < 0)[None, :, None, None]
    ex_k = (e > 0)[None, None, :, None]
    ex_l = (e < 0)[None, None, None, :]
    shape = (n,) * 4
    excite = [np.broadcast_to(x, shape) for x in (ex_i, ex_j, ex_k, ex_l)]
    mags = [
        np.broadcast_to(a[:, None, None, None], shape),
        np.broadcast_to(a[None, :, None, None], shape),
        np.broadcast_to(a[None, None, :, None], shape),
        np.broadcast_to(a[None, None, None, :], shape),
    ]
    nexcite = sum(x.astype(int) for x in excite)
    plus = sum(np.where(x, m, 0.0) for x, m in zip(excite, mags))
    minus = sum(np.where(x, 0.0, m) for x, m in zip(excite, mags))
    factor = np.where(nexcite == 2, 0.5, 1.0)
    up = np.divide(factor * G_new, plus, out=np.zeros(shape), where=plus > 0)
    down = np.divide(factor * G_new, minus, out=np.zeros(shape), where=minus > 0)

    first = np.where(excite[0] & (nexcite >= 2), up, 0.0) - np.where(
        ~excite[0] & (nexcite <= 2), down, 0.0
    )
    val = np.where(excite[2] & (nexcite >= 2), up, 0.0) - np.where(
        ~excite[2] & (nexcite <= 2), down, 0.0
    )
    # the third-operator piece is stored as T[k, l, i, j]
    T = first + val.transpose(2, 3, 0, 1)

    # quadratic terms from reordering c+_k c_l c+_i c_j back to c+_i c_j c+_k c_l
    d1 = einsum("j,ijjl->il", e, val)
    d2 = e[:, None] * einsum("ijki->kj", val)
    corr = d1 + d1.T - d2 - d2.T

    T1 = -2.0 * einsum("ijkk,k->ij", T, (e < 0).astype(float)) - einsum(
        "ijjl,j->il", T, (e > 0).astype(float)
    )
    eT1 = e[:, None] * T1
    corr = corr - eT1 - eT1.T
    return TauTensor(T, T1), corr


def overlap_matrix(tau: TauTensor, occupied: np.ndarray, empty: np.ndarray) -> np.ndarray:
    """Guide-state expectation of ``(1/2) sum_s {tau_a+, tau_b}`` (the ``Stemp`` matrix)."""
    parts = tau_tau_anticommutator(tau, tau)
    return _overlap_from_parts(parts, occupied, empty)


def _overlap_from_parts(parts, occupied, empty):
    return (
        parts.scalar
        + 2.0 * einsum("jkbc,bc->jk", parts.quadratic, occupied)
        + 4.0 * einsum("ab,cd,jkabcd->jk", occupied, occupied, parts.quartic)
        + 2.0 * einsum("ac,bd,jkabdc->jk", occupied, empty, parts.quartic)
    )


def _rotate_parts_pair(arr, U):
    return einsum("ab...,ag,bh->gh...", arr, U, U)


def _setup(trial: SpinfulHamiltonian, guide: GuideHamiltonian, min_gap: float):
    """Guide eigenbasis, bilinear matrix, tau and the occupation projectors."""
    n = trial.n_o
    guide.check(min_gap)
    evals, U = guide.eig()
    rotated = rotate(trial, U, atol=1e-9)
    hpsitau = np.zeros((2 * n, 2 * n))
    hpsitau[:n, :n] = rotated.h0
    hpsitau[np.arange(n), np.arange(n) + n] = evals
    hpsitau[np.arange(n) + n, np.arange(n)] = evals
    tau, corr = build_tau(evals, rotated.G, min_gap)
    hpsitau[:n, :n] += corr
    occupied = np.diag((evals < 0).astype(float))
    empty = np.diag((evals > 0).astype(float))
    return evals, U, hpsitau, tau, occupied, empty


def effective_step(
    trial: SpinfulHamiltonian,
    guide: GuideHamiltonian,
    min_gap: float = DEFAULT_MIN_GAP,
    overlap_floor: float = DEFAULT_OVERLAP_FLOOR,
    keep_decomposition: bool = False,
) -> EffectiveShift:
    """Shift between the effective Hamiltonian of the squares and the trial Hamiltonian.

    The squares satisfy ``SoS = trial_nonscalar + shift`` as an operator identity,
    where ``shift = scalar_shift + h0_shift . N + g_shift . NN``.
    """
    n = trial.n_o
    evals, U, hpsitau, tau, occupied, empty = _setup(trial, guide, min_gap)

    tt = tau_tau_anticommutator(tau, tau)
    stemp = _overlap_from_parts(tt, occupied, empty)
    stemp = 0.5 * (stemp + stemp.T)
    svals, svecs = eigh_sorted(stemp)
    if np.any(svals < -overlap_floor):
        raise OverlapNotPositive(f"overlap eigenvalues {svals[svals < -overlap_floor]} are negative")

    # rotate the tau labels so the overlap block is diagonal
    tt_scalar = _rotate_parts_pair(tt.scalar, svecs)
    tt_quad = _rotate_parts_pair(tt.quadratic, svecs)
    tt_quart = _rotate_parts_pair(tt.quartic, svecs)
    tau = tau.relabel(svecs)
    hpsitau[n:, :n] = svecs.T @ hpsitau[n:, :n]
    hpsitau[:n, n:] = hpsitau[:n, n:] @ svecs

    # a tau direction with vanishing overlap is only harmless if it is the zero operator
    null = svals <= overlap_floor
    if np.any(null):
        norms = np.sqrt(
            np.sum(tau.T**2, axis=(1, 2, 3)) + np.sum(tau.T1**2, axis=1)
        )
        if np.any(norms[null] > overlap_floor):
            raise OverlapNotPositive(
                f"overlap eigenvalues {svals[null]} at or below floor {overlap_floor:g} "
                "for nonzero tau operators"
            )

    psidag_tau, taudag_psi = psi_tau_anticommutators(tau)

    scale = np.where(null, 0.0, np.sqrt(np.where(null, 1.0, svals)))
    scaled = hpsitau.copy()
    scaled[:n, n:] *= scale[None, :]
    scaled[n:, :n] *= scale[:, None]
    vals, vecs = eigh_sorted(scaled)
    inv = np.where(null, 0.0, 1.0 / np.where(null, 1.0, scale))
    vecs[n:, :] *= inv[:, None]

    scalar_shift = 0.0
    h0_shift = np.zeros((n, n))
    g_shift = np.zeros((n,) * 4)
    for m in np.flatnonzero(vals < 0):
        lam = vals[m]
        vp, vt = vecs[:n, m], vecs[n:, m]
        s = vp @ vp + vt @ tt_scalar @ vt + vp @ psidag_tau.scalar @ vt + vt @ taudag_psi.scalar @ vp
        q = (
            einsum("abcd,a,b->cd", tt_quad, vt, vt)
            + einsum("abcd,a,b->cd", psidag_tau.quadratic, vp, vt)
            + einsum("abcd,a,b->cd", taudag_psi.quadratic, vt, vp)
        )
        g = einsum("abcdef,a,b->cdef", tt_quart, vt, vt)
        scalar_shift -= 2.0 * lam * s
        h0_shift -= 2.0 * lam * q
        g_shift -= 2.0 * lam * g

    back = SpinfulHamiltonian(n, 0.0, h0_shift, g_shift)
    back = hermitize(rotate(back, U.T, atol=1e-9))
    occupied_old = U @ occupied @ U.T
    empty_old = U @ empty @ U.T
    guide_new = U @ hpsitau[:n, :n] @ U.T

    decomposition = None
    if keep_decomposition:
        decomposition = SosDecomposition(U, tau, hpsitau, vals, vecs, svals)
    return EffectiveShift(
        float(scalar_shift),
        back.h0,
        back.G,
        occupied_old,
        empty_old,
        0.5 * (guide_new + guide_new.T),
        decomposition,
    )


def psitau_system(trial: SpinfulHamiltonian, guide: GuideHamiltonian, min_gap: float = DEFAULT_MIN_GAP):
    """The bilinear and overlap matrix before any tau relabeling (guide eigenbasis)."""
    n = trial.n_o
    evals, U, hpsitau, tau, occupied, empty = _setup(trial, guide, min_gap)
    S = np.zeros((2 * n, 2 * n))
    S[:n, :n] = np.eye(n)
    S[n:, n:] = overlap_matrix(tau, occupied, empty)
    return PsiTauSystem(hpsitau, S), tau, U
