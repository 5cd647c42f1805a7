"""Semiclassical phase-space analysis and adiabatic-phase computations.

Quadratures follow <a> = x + i y.  The metapotential governs the rotation
error threshold of the stabilized cat; the adiabatic connection and curvature
quantify the parity-dependent phase picked up during drive-phase rotation.

Conventions: the connection/curvature formulas integrate to -Phi/2 along
circles of radius alpha, where Phi = phi alpha^2 r^(+-2) is the closed-form
rotation phase (equal to phi <n> of the rotated cat).  The factor -2 between
the printed line integral and the phase is a fixed quadrature-normalization
constant, validated against the mean-photon identity and the parity
difference 4 phi alpha^2 e^{-2 alpha^2} / (1 - e^{-4 alpha^2}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .catbasis import build_cat_basis, normalization_ratio
from .errors import OriginSingularity
from .evolve import CollapseChannel, IntegratorConfig, propagate_operators
from .fock import TruncatedFockSpace, destroy_sparse, suggest_cutoff
from .hamiltonians import constant_schedule, kerr_cat_sparse, stabilization_params


def metapotential(K: float, alpha: float, x: float, y: float) -> float:
    """f(x, y) = -K (x^2+y^2)^2 + 2 K alpha^2 (x^2 - y^2)."""
    rho2 = x * x + y * y
    return -K * rho2 * rho2 + 2 * K * alpha**2 * (x * x - y * y)


def semiclassical_flow(K: float, kappa2: float, alpha: float, x: float, y: float) -> tuple:
    """Mean-field flow of the driven oscillator with two-photon loss."""
    rho2 = x * x + y * y
    a2 = alpha**2
    dx = 2 * K * y * (a2 + rho2) - kappa2 * x * (a2 - rho2)
    dy = 2 * K * x * (a2 - rho2) + kappa2 * y * (a2 + rho2)
    return dx, dy


def rotation_threshold(alpha: float) -> float:
    """Rotation angle at which the displaced cat leaves the closed
    equipotential basin: f(alpha cos D, alpha sin D) = 0, i.e. cos 2D = 1/2.

    Independent of alpha; equals pi/6 in the Kerr-dominated regime."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")

    def g(delta):
        return metapotential(1.0, alpha, alpha * math.cos(delta), alpha * math.sin(delta))

    return float(brentq(g, 1e-9, math.pi / 2 - 1e-9, xtol=1e-14, rtol=1e-15))


def z_recovery_sweep(
    alpha: float,
    deltas: Sequence[float],
    kappa2: float = 0.01,
    K: float = 1.0,
    t_final: Optional[float] = None,
    space: Optional[TruncatedFockSpace] = None,
    config: Optional[IntegratorConfig] = None,
) -> np.ndarray:
    """<Z> retained after a rotation error Delta followed by two-photon
    refocusing for t_final (default 2/kappa2).

    The rotated operator exp(i D n) Z exp(-i D n) evolves under the
    stabilization Hamiltonian plus kappa2 two-photon loss; the report is
    Tr[Z rho_out]/2 normalized so Delta = 0 gives exactly 1.  All requested
    rotation angles propagate as one batch.
    """
    if t_final is None:
        t_final = 2.0 / kappa2
    if space is None:
        space = TruncatedFockSpace(suggest_cutoff(alpha))
    if config is None:
        config = IntegratorConfig(rel_tol=1e-7, abs_tol=1e-9, method="adams")
    basis = build_cat_basis(alpha, space)
    z_emb = basis.pauli["Z"].entries
    n_diag = np.arange(space.dim)
    params = stabilization_params(K, kappa2, alpha)
    h = kerr_cat_sparse(K, params.P, params.phi0, space)
    a = destroy_sparse(space.dim)
    chans = [CollapseChannel(a @ a, kappa2)]

    inputs = []
    for delta in list(deltas) + [0.0]:
        ph = np.exp(1j * delta * n_diag)
        inputs.append((ph[:, None] * z_emb) * ph.conj()[None, :])
    batch = np.stack(inputs)
    sched = constant_schedule(h, t_final, dims=(space.dim,))
    out = propagate_operators(sched, chans, batch, (0.0, t_final), config)
    values = np.array([np.vdot(z_emb, o).real / 2.0 for o in out])
    return values[:-1] / values[-1]


def z_recovery_experiment(
    alpha: float,
    delta: float,
    kappa2: float = 0.01,
    t_final: Optional[float] = None,
    K: float = 1.0,
    config: Optional[IntegratorConfig] = None,
) -> float:
    return float(z_recovery_sweep(alpha, [delta], kappa2, K, t_final, config=config)[0])


# ---------------------------------------------------------------------------
# adiabatic connection and curvature


@dataclass(frozen=True)
class BerryField:
    parity: int
    A_x: float
    A_y: float
    Omega: float


def _parity_factor(parity: int, rho2: float) -> float:
    e = math.exp(-2 * rho2)
    if parity > 0:
        return (1 - e) / (1 + e)
    if rho2 == 0.0:
        raise OriginSingularity("odd-parity connection diverges at the origin")
    return (1 + e) / (1 - e)


def berry_field(parity: int, x: float, y: float) -> BerryField:
    """Connection A and curvature Omega of the cat of given parity at (x, y)."""
    rho2 = x * x + y * y
    h = _parity_factor(parity, rho2)
    a_x = 0.5 * h * y
    a_y = -0.5 * h * x
    e = math.exp(-2 * rho2)
    if parity > 0:
        omega = -(1 - e) / (1 + e) - 4 * rho2 * e / (1 + e) ** 2
    else:
        if rho2 == 0.0:
            raise OriginSingularity("odd-parity curvature diverges at the origin")
        omega = -(1 + e) / (1 - e) + 4 * rho2 * e / (1 - e) ** 2
    return BerryField(parity=parity, A_x=a_x, A_y=a_y, Omega=omega)


def berry_line_integral(parity: int, radius: float, phi_total: float, tol: float = 1e-11) -> float:
    """Line integral of the connection along an arc of the given radius."""

    def integrand(theta):
        x = radius * math.cos(theta)
        y = radius * math.sin(theta)
        f = berry_field(parity, x, y)
        return (-f.A_x * math.sin(theta) + f.A_y * math.cos(theta)) * radius

    val, _ = quad(integrand, 0.0, phi_total, epsabs=tol, epsrel=tol, limit=500)
    return val


PHASE_FROM_CONNECTION = -2.0  # line integral -> rotation phase (see module docstring)


def geometric_phase(alpha: float, phi_total: float, parity: int) -> float:
    """Adiabatic phase of a cat rotated by phi: phi alpha^2 r^(+-2), the
    rotation angle times the parity-resolved mean photon number."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    r = normalization_ratio(alpha)
    return phi_total * alpha**2 * r ** (2 * (1 if parity > 0 else -1))


def geometric_phase_difference(alpha: float, phi_total: float) -> float:
    """Phi_odd - Phi_even = 4 phi alpha^2 e^{-2 alpha^2} / (1 - e^{-4 alpha^2})."""
    e2 = math.exp(-2 * alpha**2)
    return 4 * phi_total * alpha**2 * e2 / (1 - e2**2)


def geometric_phase_from_connection(alpha: float, phi_total: float, parity: int) -> float:
    return PHASE_FROM_CONNECTION * berry_line_integral(parity, alpha, phi_total)


def berry_curl_check(parity: int, x: float, y: float, h: float = 1e-4) -> tuple:
    """Finite-difference curl of A against the closed-form curvature."""
    da_y = (berry_field(parity, x + h, y).A_y - berry_field(parity, x - h, y).A_y) / (2 * h)
    da_x = (berry_field(parity, x, y + h).A_x - berry_field(parity, x, y - h).A_x) / (2 * h)
    return da_y - da_x, berry_field(parity, x, y).Omega


def stokes_check(parity: int, radius: float, tol: float = 1e-11) -> tuple:
    """(surface integral of Omega over the disk, loop integral of A)."""

    def radial(rr):
        return berry_field(parity, rr, 0.0).Omega * rr

    lo = 0.0 if parity > 0 else 1e-9
    surface, _ = quad(radial, lo, radius, epsabs=tol, epsrel=tol, limit=500)
    surface *= 2 * math.pi
    loop = berry_line_integral(parity, radius, 2 * math.pi, tol)
    return surface, loop
