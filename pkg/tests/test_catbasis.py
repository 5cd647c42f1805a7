import numpy as np
import pytest

from kerrcat.catbasis import (
    build_cat_basis,
    normalization_ratio,
    projected_ladder,
    projected_ladder_numeric,
    two_level_cat_basis,
)
from kerrcat.fock import TruncatedFockSpace, destroy_sparse


@pytest.fixture(scope="module")
def basis_alpha2():
    return build_cat_basis(2.0, TruncatedFockSpace(40))


def test_normalization_ratio_value():
    # r = sqrt((1 - e^-8) / (1 + e^-8)) at alpha = 2
    assert normalization_ratio(2.0) == pytest.approx(0.9996645, abs=2e-7)


def test_cats_orthogonal(basis_alpha2):
    b = basis_alpha2
    assert abs(np.vdot(b.cat_minus.data, b.cat_plus.data)) < 1e-10


def test_cats_are_x_eigenstates(basis_alpha2):
    b = basis_alpha2
    x = b.pauli["X"].entries
    assert np.linalg.norm(x @ b.cat_plus.data - b.cat_plus.data) < 1e-12
    assert np.linalg.norm(x @ b.cat_minus.data + b.cat_minus.data) < 1e-12


def test_projector_idempotent(basis_alpha2):
    p = basis_alpha2.projector.entries
    assert np.max(np.abs(p @ p - p)) < 1e-10


def test_computational_states(basis_alpha2):
    b = basis_alpha2
    zero = (b.cat_plus.data + b.cat_minus.data) / np.sqrt(2)
    one = (b.cat_plus.data - b.cat_minus.data) / np.sqrt(2)
    assert np.allclose(b.comp_zero.data, zero)
    assert np.allclose(b.comp_one.data, one)


def test_annihilation_flips_parity(basis_alpha2):
    b = basis_alpha2
    a = destroy_sparse(b.dim)
    lhs = a @ b.cat_plus.data
    assert np.linalg.norm(lhs - b.alpha * b.ratio_r * b.cat_minus.data) < 1e-10
    lhs = a @ b.cat_minus.data
    assert np.linalg.norm(lhs - b.alpha / b.ratio_r * b.cat_plus.data) < 1e-10


def test_degenerate_limit():
    space = TruncatedFockSpace(6)
    b = build_cat_basis(0.0, space, allow_degenerate=True)
    assert b.cat_plus.data[0] == 1.0
    assert b.cat_minus.data[1] == 1.0
    assert b.ratio_r == 0.0
    with pytest.raises(ValueError):
        build_cat_basis(0.0, space)
    with pytest.raises(ValueError):
        projected_ladder(b)


def test_small_alpha_continuity():
    # cats approach the lowest Fock states as the amplitude shrinks
    space = TruncatedFockSpace(12)
    b = build_cat_basis(0.05, space)
    assert abs(b.cat_plus.data[0]) ** 2 > 0.999
    assert abs(b.cat_minus.data[1]) ** 2 > 0.999


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_projected_ladder_matches_numeric(alpha):
    b = build_cat_basis(alpha, TruncatedFockSpace(40))
    analytic = projected_ladder(b)["a_C"]
    numeric = projected_ladder_numeric(b)
    assert np.max(np.abs(analytic - numeric)) < 1e-10


def test_projected_ladder_coefficients():
    b = build_cat_basis(2.0, TruncatedFockSpace(40))
    a_c = projected_ladder(b)["a_C"]
    r = b.ratio_r
    z_coeff = 2.0 * (r + 1 / r) / 2
    y_coeff = 2.0 * (r - 1 / r) / 2
    assert a_c[0, 1] == pytest.approx(z_coeff - y_coeff, rel=1e-12)
    assert a_c[1, 0] == pytest.approx(z_coeff + y_coeff, rel=1e-12)
    # large-alpha suppression of the parity-asymmetric part
    assert abs(y_coeff / z_coeff) == pytest.approx(np.exp(-8.0), rel=1e-3)


def test_mean_photon_numbers(basis_alpha2):
    b = basis_alpha2
    n_op = np.diag(np.arange(b.dim, dtype=float))
    for parity, state in ((1, b.cat_plus), (-1, b.cat_minus)):
        numeric = np.real(np.vdot(state.data, n_op @ state.data))
        assert numeric == pytest.approx(b.mean_photon(parity), abs=1e-9)


def test_two_level_stand_in():
    b = two_level_cat_basis(2.0)
    assert b.dim == 2
    assert b.ratio_r == pytest.approx(normalization_ratio(2.0))
    x, y, z = (b.pauli[k].entries for k in "XYZ")
    assert np.allclose(x @ y, 1j * z)
    ladder = projected_ladder(b)
    assert ladder["a_C"][1, 0] == pytest.approx(2.0 * b.ratio_r)
