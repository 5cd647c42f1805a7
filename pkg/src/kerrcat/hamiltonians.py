"""Model Hamiltonians: driven Kerr oscillator, conditional-rotation CX,
and the three-mode conditional-displacement entangler.

Time-dependent generators are stored as sums of static sparse operators with
scalar coefficient functions, H(t) = sum_k c_k(t) A_k.  Constant c-number
offsets (global phases) are dropped.  Tensor factors are ordered as given in
each builder's signature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import sparse

from .catbasis import CatQubitBasis
from .errors import ParityMixing
from .fock import ComplexOperator, TruncatedFockSpace, destroy_sparse, number_sparse


# ---------------------------------------------------------------------------
# schedule container


@dataclass
class HamiltonianSchedule:
    """H(t) = sum_k c_k(t) A_k on a tensor product of modes.

    ``terms`` is a list of (coefficient, operator) pairs where coefficient is
    a callable t -> complex or None for a constant unit coefficient.  Each
    operator is CSR on the full product space.  The generator is Hermitian at
    every time (coefficient pairs come in conjugate pairs by construction).
    """

    dims: tuple
    terms: list
    duration: float

    @property
    def dim(self) -> int:
        out = 1
        for d in self.dims:
            out *= d
        return out

    def coefficient(self, k: int, t: float) -> complex:
        fn = self.terms[k][0]
        return 1.0 + 0.0j if fn is None else complex(fn(t))

    def matrix(self, t: float) -> sparse.csr_matrix:
        acc = None
        for k, (_, op) in enumerate(self.terms):
            piece = self.coefficient(k, t) * op
            acc = piece if acc is None else acc + piece
        return acc.tocsr()

    def generator(self, t: float) -> ComplexOperator:
        return ComplexOperator(self.matrix(t).toarray())

    def max_hermiticity_defect(self, n_samples: int = 20) -> float:
        """max over sampled times of ||H - H^dag||_max."""
        worst = 0.0
        for t in np.linspace(0.0, self.duration, n_samples):
            h = self.matrix(t)
            worst = max(worst, float(abs(h - h.conj().T).max()))
        return worst


def constant_schedule(op: sparse.spmatrix, duration: float, dims=None) -> HamiltonianSchedule:
    op = sparse.csr_matrix(op)
    if dims is None:
        dims = (op.shape[0],)
    return HamiltonianSchedule(dims=tuple(dims), terms=[(None, op)], duration=duration)


# ---------------------------------------------------------------------------
# ramps


@dataclass(frozen=True)
class LinearRamp:
    """value(t) = final * t / duration, continued linearly past ``duration``."""

    final: float
    duration: float

    def value(self, t: float) -> float:
        return self.final * t / self.duration

    def derivative(self, t: float) -> float:
        return self.final / self.duration


# coefficient callables are plain objects (not lambdas) so schedules pickle
# cleanly for worker pools


@dataclass(frozen=True)
class ExpPhaseCoeff:
    """exp(i * factor * ramp(t))"""

    ramp: LinearRamp
    factor: float

    def __call__(self, t: float) -> complex:
        return complex(np.exp(1j * self.factor * self.ramp.value(t)))


@dataclass(frozen=True)
class RampPowerCoeff:
    """ramp(t) ** power"""

    ramp: LinearRamp
    power: int = 1

    def __call__(self, t: float) -> complex:
        return complex(self.ramp.value(t) ** self.power)


@dataclass(frozen=True)
class RampRateCoeff:
    """d ramp / dt, optionally scaled."""

    ramp: LinearRamp
    scale: float = 1.0

    def __call__(self, t: float) -> complex:
        return complex(self.scale * self.ramp.derivative(t))


# ---------------------------------------------------------------------------
# single-mode builders


def kerr_cat_sparse(K: float, P: float, phi: float, space: TruncatedFockSpace) -> sparse.csr_matrix:
    a = destroy_sparse(space.dim)
    ad = a.conj().T
    drive = P * (np.exp(2j * phi) * (ad @ ad) + np.exp(-2j * phi) * (a @ a))
    return (-K * (ad @ ad @ a @ a) + drive).tocsr()


def h_kerr_cat(K: float, P: float, phi: float, space: TruncatedFockSpace) -> ComplexOperator:
    """Two-photon driven Kerr oscillator -K a^t2 a^2 + P(a^t2 e^{2i phi} + h.c.)."""
    if K <= 0:
        raise ValueError("K must be positive")
    if P < 0:
        raise ValueError("P must be nonnegative")
    return ComplexOperator(kerr_cat_sparse(K, P, phi, space).toarray(), hermitian_hint=True)


@dataclass(frozen=True)
class StabilizationParams:
    P: float
    phi0: float


def stabilization_params(K: float, kappa2: float, alpha_target: float) -> StabilizationParams:
    """Drive amplitude and phase that pin the dissipatively stabilized cat
    at a real coherent amplitude ``alpha_target``:
    P = alpha^2 sqrt(K^2 + kappa2^2/4),  2 phi0 = atan(kappa2 / 2K).
    """
    if K <= 0:
        raise ValueError("K must be positive")
    if kappa2 < 0:
        raise ValueError("kappa2 must be nonnegative")
    P = alpha_target**2 * math.sqrt(K**2 + kappa2**2 / 4)
    phi0 = 0.5 * math.atan2(kappa2, 2 * K)
    return StabilizationParams(P=P, phi0=phi0)


def parity_diagonal(dim: int) -> np.ndarray:
    return (-1.0) ** np.arange(dim)


@dataclass(frozen=True)
class SpectralPair:
    """Matched even/odd eigenstate pair, ordered by distance below the cat manifold."""

    index: int
    energy_even: float
    energy_odd: float
    photon_even: float
    photon_odd: float

    @property
    def splitting(self) -> float:
        return self.energy_even - self.energy_odd


@dataclass(frozen=True)
class ParitySpectrum:
    levels: list  # (energy, parity) for all states, descending energy
    cat_energies: tuple  # (E_even, E_odd) of the cat manifold
    pairs: list  # SpectralPair for excited pairs

    @property
    def cat_splitting(self) -> float:
        return self.cat_energies[0] - self.cat_energies[1]

    def pair_splitting(self, n: int) -> float:
        return self.pairs[n - 1].splitting


def parity_resolved_spectrum(H, space: TruncatedFockSpace, comm_tol: float = 1e-8) -> ParitySpectrum:
    """Eigensystem of H labeled by photon-number parity.

    Requires [H, (-1)^n] = 0; the spectrum is then solved per parity block.
    Excited pairs are matched k-th even with k-th odd below the cat manifold
    (the two topmost states), with mean photon numbers recorded so callers
    can validate the pairing.
    """
    h = H.entries if isinstance(H, ComplexOperator) else np.asarray(H, dtype=complex)
    dim = h.shape[0]
    par = parity_diagonal(dim)
    comm = h * par[None, :] - par[:, None] * h  # H P - P H with diagonal P
    if np.max(np.abs(comm)) > comm_tol:
        raise ParityMixing(f"[H, parity] max element {np.max(np.abs(comm)):.3e}")

    n_diag = np.arange(dim, dtype=float)
    branches = {}
    for sign, sel in ((+1, par > 0), (-1, par < 0)):
        block = h[np.ix_(sel, sel)]
        evals, evecs = np.linalg.eigh(block)
        order = np.argsort(evals)[::-1]
        evals = evals[order]
        evecs = evecs[:, order]
        photons = np.real(np.einsum("ij,i,ij->j", evecs.conj(), n_diag[sel], evecs))
        branches[sign] = (evals, photons)

    ev_e, ph_e = branches[+1]
    ev_o, ph_o = branches[-1]
    levels = sorted(
        [(float(e), +1) for e in ev_e] + [(float(e), -1) for e in ev_o],
        key=lambda x: -x[0],
    )
    pairs = [
        SpectralPair(k, float(ev_e[k]), float(ev_o[k]), float(ph_e[k]), float(ph_o[k]))
        for k in range(1, min(len(ev_e), len(ev_o)))
    ]
    return ParitySpectrum(levels=levels, cat_energies=(float(ev_e[0]), float(ev_o[0])), pairs=pairs)


def h_rotating_cat(
    K: float,
    alpha: float,
    phi_ramp: LinearRamp,
    space: TruncatedFockSpace,
    duration: Optional[float] = None,
    compensate: bool = True,
) -> HamiltonianSchedule:
    """Single stabilized cat whose drive phase follows phi(t), with the
    optional -phidot a^t a term canceling the accumulated geometric phase."""
    a = destroy_sparse(space.dim)
    ad = a.conj().T
    const = -K * (ad @ ad @ a @ a)
    tp = K * alpha**2 * (ad @ ad)
    tm = K * alpha**2 * (a @ a)
    terms = [
        (None, const.tocsr()),
        (ExpPhaseCoeff(phi_ramp, 2.0), tp.tocsr()),
        (ExpPhaseCoeff(phi_ramp, -2.0), tm.tocsr()),
    ]
    if compensate:
        terms.append((RampRateCoeff(phi_ramp, -1.0), number_sparse(space.dim)))
    return HamiltonianSchedule(
        dims=(space.dim,),
        terms=terms,
        duration=duration if duration is not None else phi_ramp.duration,
    )


# ---------------------------------------------------------------------------
# multimode helpers


def mode_op(op: sparse.spmatrix, mode: int, dims: Sequence[int]) -> sparse.csr_matrix:
    """Embed a single-mode operator at position ``mode`` in a product space."""
    factors = [sparse.identity(d, dtype=complex, format="csr") for d in dims]
    factors[mode] = sparse.csr_matrix(op)
    out = factors[0]
    for f in factors[1:]:
        out = sparse.kron(out, f, format="csr")
    return out


def joint_parity_diagonal(dims: Sequence[int]) -> np.ndarray:
    out = np.array([1.0])
    for d in dims:
        out = np.kron(out, parity_diagonal(d))
    return out


# ---------------------------------------------------------------------------
# conditional-rotation CX


def h_cx(
    K: float,
    alpha: float,
    beta: float,
    phi_ramp: LinearRamp,
    space_c: TruncatedFockSpace,
    space_t: TruncatedFockSpace,
    duration: Optional[float] = None,
    compensate_geometric: bool = True,
) -> HamiltonianSchedule:
    """Two-oscillator CX generator (control ⊗ target).

    The target's two-photon drive phase is steered by the control quadrature,
    rotating the target cat by phi(t) only on the |1> control branch; the
    phidot term compensates the geometric phase accumulated during rotation.
    """
    dims = (space_c.dim, space_t.dim)
    a_c = mode_op(destroy_sparse(space_c.dim), 0, dims)
    a_t = mode_op(destroy_sparse(space_t.dim), 1, dims)
    ad_c = a_c.conj().T
    ad_t = a_t.conj().T
    eye = sparse.identity(dims[0] * dims[1], dtype=complex, format="csr")

    b_minus = (beta * eye - ad_c) / (2 * beta)  # (beta - a_c^dag)/2beta
    b_plus = (beta * eye + ad_c) / (2 * beta)
    b_minus_l = (beta * eye - a_c) / (2 * beta)
    b_plus_l = (beta * eye + a_c) / (2 * beta)

    at2 = a_t @ a_t
    adt2 = ad_t @ ad_t

    # control stabilization, c-number beta^4 dropped
    h_ctrl = -K * (ad_c @ ad_c @ a_c @ a_c) + K * beta**2 * (ad_c @ ad_c + a_c @ a_c)
    # phi-independent part of the conditional target stabilization
    a2 = alpha**2
    h_const = (
        h_ctrl
        - K * (adt2 @ at2)
        + K * a2 * (adt2 @ b_plus_l + b_plus @ at2)
        - K * a2**2 * (b_minus @ b_minus_l + b_plus @ b_plus_l)
    )
    # e^{+2i phi} block and its adjoint
    t_plus = K * a2 * ((adt2 - a2 * b_plus) @ b_minus_l)
    t_minus = t_plus.conj().T
    # geometric-phase compensation
    n_t = ad_t @ a_t
    h_geo = -(1.0 / (4 * beta)) * (n_t @ (2 * beta * eye - ad_c - a_c))

    terms = [
        (None, h_const.tocsr()),
        (ExpPhaseCoeff(phi_ramp, 2.0), t_plus.tocsr()),
        (ExpPhaseCoeff(phi_ramp, -2.0), t_minus.tocsr()),
    ]
    if compensate_geometric:
        terms.append((RampRateCoeff(phi_ramp), h_geo.tocsr()))
    return HamiltonianSchedule(
        dims=dims,
        terms=terms,
        duration=duration if duration is not None else phi_ramp.duration,
    )


def uncoupled_stabilization(
    K: float, alphas: Sequence[float], dims: Sequence[int], kappa2: float = 0.0
) -> sparse.csr_matrix:
    """Independent cat stabilization on every mode with the c-numbers
    dropped.

    With ``kappa2`` nonzero the drive amplitude and phase follow the
    dissipative stationarity condition, which pins the two-photon-loss
    attractor exactly at the real amplitudes; the kappa2 = 0 drive would
    leave the attractor rotated by atan(kappa2/2K)/2."""
    out = None
    for mode, (alpha, dim) in enumerate(zip(alphas, dims)):
        a = mode_op(destroy_sparse(dim), mode, dims)
        ad = a.conj().T
        if kappa2 > 0:
            sp = stabilization_params(K, kappa2, alpha)
            drive = sp.P * (
                np.exp(2j * sp.phi0) * (ad @ ad) + np.exp(-2j * sp.phi0) * (a @ a)
            )
        else:
            drive = K * alpha**2 * (ad @ ad + a @ a)
        piece = -K * (ad @ ad @ a @ a) + drive
        out = piece if out is None else out + piece
    return out.tocsr()


# ---------------------------------------------------------------------------
# conditional-displacement entangler (two controls, one target)


def _control_factor(ops_c1: dict, ops_c2: dict, beta: float, gamma: float, eye) -> sparse.csr_matrix:
    """(1/2)(1 + a_c1/beta + a_c2/gamma - a_c1 a_c2 / (beta gamma)); maps the
    four control computational states to +1, +1, +1, -1."""
    return 0.5 * (
        eye
        + ops_c1["a"] / beta
        + ops_c2["a"] / gamma
        - (ops_c1["a"] @ ops_c2["a"]) / (beta * gamma)
    )


def h_ccd(
    K: float,
    alpha_ramp: LinearRamp,
    beta: float,
    gamma: float,
    delta: float,
    spaces: Sequence[TruncatedFockSpace],
    duration: Optional[float] = None,
    control_ops: Optional[Sequence[dict]] = None,
) -> HamiltonianSchedule:
    """Conditional-displacement generator on (control1 ⊗ control2 ⊗ target).

    The target is displaced from vacuum to |alpha(T)> unless both controls
    are in |1>, in which case it is displaced to |-alpha(T)>.  ``delta`` sets
    the strength of the conditional drive and ``alpha_ramp`` the amplitude
    schedule (alpha(0) = 0).  When ``control_ops`` is given, the two control
    modes use those operator dictionaries (each with keys "a", "dim") instead
    of full oscillators, e.g. cat-subspace 2x2 projections.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if abs(alpha_ramp.value(0.0)) > 1e-12:
        raise ValueError("amplitude ramp must start at zero")

    dim_t = spaces[-1].dim
    if control_ops is None:
        dims = (spaces[0].dim, spaces[1].dim, dim_t)
        raw_c1 = destroy_sparse(dims[0])
        raw_c2 = destroy_sparse(dims[1])
    else:
        dims = (control_ops[0]["dim"], control_ops[1]["dim"], dim_t)
        raw_c1 = sparse.csr_matrix(control_ops[0]["a"])
        raw_c2 = sparse.csr_matrix(control_ops[1]["a"])

    eye = sparse.identity(dims[0] * dims[1] * dims[2], dtype=complex, format="csr")
    a_c1 = mode_op(raw_c1, 0, dims)
    a_c2 = mode_op(raw_c2, 1, dims)
    a_t = mode_op(destroy_sparse(dim_t), 2, dims)
    ad_t = a_t.conj().T

    ops1 = {"a": a_c1}
    ops2 = {"a": a_c2}
    f_op = _control_factor(ops1, ops2, beta, gamma, eye)
    f_dag = f_op.conj().T

    # stabilization of the controls (c-numbers dropped); skipped for projected
    # controls where it reduces to a constant on the cat manifold
    h_stab = None
    if control_ops is None:
        for a, amp in ((a_c1, beta), (a_c2, gamma)):
            ad = a.conj().T
            piece = -K * (ad @ ad @ a @ a) + K * amp**2 * (ad @ ad + a @ a)
            h_stab = piece if h_stab is None else h_stab + piece

    # target stabilization split by powers of alpha(t)
    kerr_t = -K * (ad_t @ ad_t @ a_t @ a_t)
    drive_t = K * (ad_t @ ad_t + a_t @ a_t)  # coefficient alpha(t)^2

    # conditional displacement -delta (a_t^dag - aF^dag)(a_t - aF)
    h_d0 = -delta * (ad_t @ a_t)
    h_d1 = delta * (ad_t @ f_op + f_dag @ a_t)  # coefficient alpha(t)
    h_d2 = -delta * (f_dag @ f_op)  # coefficient alpha(t)^2

    # quadrature form of the control factor for the adiabatic compensation;
    # (a+a^dag)/2amp evaluates to +-1 on the computational states, so the
    # product term carries 1/(4 beta gamma)
    q1 = (a_c1 + a_c1.conj().T) / (2 * beta)
    q2 = (a_c2 + a_c2.conj().T) / (2 * gamma)
    q_factor = 0.5 * (eye + q1 + q2 - (q1 @ q2))
    h_comp = 1j * ((ad_t - a_t) @ q_factor)  # coefficient alphadot(t)

    const = h_d0 if h_stab is None else h_stab + h_d0
    const = const + kerr_t
    terms = [
        (None, const.tocsr()),
        (RampPowerCoeff(alpha_ramp, 2), (drive_t + h_d2).tocsr()),
        (RampPowerCoeff(alpha_ramp, 1), h_d1.tocsr()),
        (RampRateCoeff(alpha_ramp), h_comp.tocsr()),
    ]
    return HamiltonianSchedule(
        dims=dims,
        terms=terms,
        duration=duration if duration is not None else alpha_ramp.duration,
    )
