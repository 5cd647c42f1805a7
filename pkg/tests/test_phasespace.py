import math

import numpy as np
import pytest

from kerrcat.errors import OriginSingularity
from kerrcat.evolve import IntegratorConfig
from kerrcat.phasespace import (
    PHASE_FROM_CONNECTION,
    berry_curl_check,
    berry_field,
    berry_line_integral,
    geometric_phase,
    geometric_phase_difference,
    geometric_phase_from_connection,
    metapotential,
    rotation_threshold,
    semiclassical_flow,
    stokes_check,
    z_recovery_sweep,
)


def test_metapotential_peaks_and_origin():
    for alpha in (1.0, 2.0):
        assert metapotential(1.0, alpha, alpha, 0.0) == pytest.approx(alpha**4)
        assert metapotential(1.0, alpha, -alpha, 0.0) == pytest.approx(alpha**4)
    assert metapotential(1.0, 2.0, 0.0, 0.0) == 0.0


def test_metapotential_zero_on_separatrix_angle():
    alpha = 1.7
    d = math.pi / 6
    val = metapotential(1.0, alpha, alpha * math.cos(d), alpha * math.sin(d))
    assert abs(val) < 1e-12


def test_metapotential_polar_identity():
    # f(a cos D, a sin D) = -K a^4 + 2 K a^4 cos(2D)
    alpha, K = 1.3, 0.8
    for d in np.linspace(0, math.pi / 2, 7):
        lhs = metapotential(K, alpha, alpha * math.cos(d), alpha * math.sin(d))
        rhs = -K * alpha**4 + 2 * K * alpha**4 * math.cos(2 * d)
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_flow_fixed_points():
    for alpha in (1.0, 2.5):
        for sign in (+1, -1):
            dx, dy = semiclassical_flow(1.0, 0.3, alpha, sign * alpha, 0.0)
            assert abs(dx) < 1e-12 and abs(dy) < 1e-12


def test_flow_conserves_metapotential_without_dissipation():
    # integrate a short trajectory at kappa2 = 0 and track f
    from scipy.integrate import solve_ivp

    K, alpha = 1.0, 1.4
    x0, y0 = 1.1, 0.4

    def rhs(t, u):
        return semiclassical_flow(K, 0.0, alpha, u[0], u[1])

    sol = solve_ivp(rhs, (0.0, 1.0), [x0, y0], rtol=1e-11, atol=1e-12, dense_output=True)
    f0 = metapotential(K, alpha, x0, y0)
    for t in np.linspace(0, 1.0, 9):
        x, y = sol.sol(t)
        assert metapotential(K, alpha, x, y) == pytest.approx(f0, rel=1e-6)


def test_flow_is_clockwise_near_positive_well():
    # just above the stable point the flow moves toward +x, just right of it
    # toward -y
    dx, _ = semiclassical_flow(1.0, 0.0, 2.0, 2.0, 0.05)
    _, dy = semiclassical_flow(1.0, 0.0, 2.0, 2.05, 0.0)
    assert dx > 0 and dy < 0


def test_rotation_threshold_value_and_alpha_independence():
    values = [rotation_threshold(a) for a in (1.0, 2.0, 4.0)]
    for v in values:
        assert v == pytest.approx(math.pi / 6, abs=1e-12)
    assert max(values) - min(values) < 1e-12


def test_threshold_boundary_sign():
    # the protected basin around the wells carries f > 0 (f = +K a^4 at the
    # wells, 0 on the separatrix through the origin); crossing pi/6 leaves it
    alpha = 2.0
    inside = metapotential(1.0, alpha, alpha * math.cos(0.5), alpha * math.sin(0.5))
    outside = metapotential(1.0, alpha, alpha * math.cos(0.55), alpha * math.sin(0.55))
    assert inside > 0
    assert outside < 0


# ---------------------------------------------------------------------------
# adiabatic connection


def test_berry_field_even_regular_at_origin():
    f = berry_field(+1, 0.0, 0.0)
    assert f.A_x == 0.0 and f.A_y == 0.0
    assert f.Omega == pytest.approx(0.0, abs=1e-12)


def test_berry_field_odd_singular_at_origin():
    with pytest.raises(OriginSingularity):
        berry_field(-1, 0.0, 0.0)


def test_curvature_difference_decays_exponentially():
    diffs = []
    for rho in (1.5, 2.0, 2.5):
        d = berry_field(+1, rho, 0.0).Omega - berry_field(-1, rho, 0.0).Omega
        diffs.append(abs(d))
    assert diffs[0] > diffs[1] > diffs[2]
    # consistent with e^{-2 rho^2} suppression between successive radii
    assert diffs[1] / diffs[0] < 2 * math.exp(-2 * (2.0**2 - 1.5**2))
    assert diffs[2] / diffs[1] < 2 * math.exp(-2 * (2.5**2 - 2.0**2))


@pytest.mark.parametrize("parity", [+1, -1])
def test_curl_matches_curvature(parity):
    for x, y in ((0.4, 0.3), (1.0, 0.9), (1.7, 0.2)):
        numeric, exact = berry_curl_check(parity, x, y)
        assert numeric == pytest.approx(exact, abs=1e-6)


def test_line_integral_matches_closed_form():
    alpha, phi = 2.0, math.pi
    for parity in (+1, -1):
        closed = geometric_phase(alpha, phi, parity)
        numeric = geometric_phase_from_connection(alpha, phi, parity)
        assert abs(numeric / closed - 1) < 1e-6


def test_phase_values_at_reference_point():
    # even-parity phase ~ rotation angle times mean photon number
    val = geometric_phase(2.0, math.pi, +1)
    assert val == pytest.approx(12.558, abs=2e-3)
    diff = geometric_phase_difference(2.0, math.pi)
    assert diff == pytest.approx(1.686e-2, rel=5e-4)
    assert geometric_phase(2.0, math.pi, -1) - geometric_phase(2.0, math.pi, +1) == (
        pytest.approx(diff, rel=1e-12)
    )


def test_stokes_even_parity():
    for radius in (0.5, 1.5, 3.0):
        surface, loop = stokes_check(+1, radius)
        assert surface == pytest.approx(loop, abs=1e-5)


def test_stokes_odd_parity_carries_point_flux():
    # the odd connection has a vortex at the origin: the loop integral picks
    # up an extra -pi not seen by the (regular part of the) surface integral
    surface, loop = stokes_check(-1, 1.5)
    assert loop - surface == pytest.approx(-math.pi, abs=1e-5)


def test_winding_number_topological_phase():
    # phase-space rotation by u half-turns acts as X^u on the cat pair
    from kerrcat.catbasis import build_cat_basis
    from kerrcat.evolve import propagate_states
    from kerrcat.fock import TruncatedFockSpace
    from kerrcat.gates import CosineRamp
    from kerrcat.hamiltonians import h_rotating_cat

    space = TruncatedFockSpace(25)
    alpha = 2.0
    basis = build_cat_basis(alpha, space)
    cfg = IntegratorConfig(rel_tol=1e-9, abs_tol=1e-11, method="adams")
    for u in (1, 2):
        ramp = CosineRamp(u * math.pi, 10.0 * u)
        sched = h_rotating_cat(1.0, alpha, ramp, space, duration=10.0 * u)
        frame = np.stack([basis.cat_plus.data, basis.cat_minus.data], axis=1)
        out = propagate_states(sched, frame, (0.0, 10.0 * u), cfg)
        plus_overlap = np.vdot(basis.cat_plus.data, out[:, 0])
        minus_overlap = np.vdot(basis.cat_minus.data, out[:, 1])
        assert abs(plus_overlap) == pytest.approx(1.0, abs=1e-3)
        assert abs(minus_overlap) == pytest.approx(1.0, abs=1e-3)
        relative = minus_overlap / plus_overlap
        assert relative == pytest.approx((-1.0) ** u, abs=1e-3)


@pytest.mark.slow
def test_z_recovery_orderings():
    cfg = IntegratorConfig(rel_tol=1e-6, abs_tol=1e-8, method="adams")
    deltas = [0.3, 0.8]
    retained = {}
    for alpha in (1.2, 1.6, 2.0):
        vals = z_recovery_sweep(alpha, deltas, kappa2=0.01, config=cfg)
        retained[alpha] = vals
    # suppression improves with cat size below threshold
    assert retained[1.2][0] < retained[1.6][0] < retained[2.0][0]
    # protection has collapsed well above threshold
    for alpha in (1.2, 1.6, 2.0):
        assert retained[alpha][1] < 0.6


def test_z_recovery_no_error_is_unity():
    cfg = IntegratorConfig(rel_tol=1e-7, abs_tol=1e-9, method="adams")
    vals = z_recovery_sweep(1.4, [0.0], kappa2=0.02, t_final=20.0, config=cfg)
    assert vals[0] == pytest.approx(1.0, abs=1e-3)
