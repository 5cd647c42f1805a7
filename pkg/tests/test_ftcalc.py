import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kerrcat.errors import Infeasible, NoThreshold
from kerrcat.ftcalc import (
    GadgetParams,
    MagicPrepParams,
    best_gadget_error,
    competitor_volume,
    cx_gadget_error,
    gadget_overhead,
    gadget_threshold,
    gadget_volume,
    magic_error_rates,
    magic_success_enumeration,
    magic_success_probability,
)

ODD = st.integers(min_value=1, max_value=7).map(lambda k: 2 * k + 1)


def test_zero_epsilon_gives_zero():
    b = cx_gadget_error(GadgetParams(5, 3, 0.0, 1e3))
    assert b.eps_cat == 0.0


def test_termwise_values():
    # n=3, r=3, eps=1e-3, eta=1e4 evaluated term by term
    b = cx_gadget_error(GadgetParams(3, 3, 1e-3, 1e4))
    assert b.eps_target == pytest.approx(1.47e-4, rel=1e-3)
    assert b.eps_control == pytest.approx(5.07e-4, rel=1e-3)
    assert b.eps_ec == pytest.approx(1.92e-4, rel=1e-3)
    assert b.eps_nondephasing == pytest.approx(5.1e-6, rel=1e-3)
    assert b.eps_cat == pytest.approx(8.51e-4, rel=2e-3)
    assert b.eps_cat == b.eps_target + b.eps_control + b.eps_ec + b.eps_nondephasing


def test_infinite_bias_limit():
    finite = cx_gadget_error(GadgetParams(5, 3, 1e-3, 1e4))
    huge = cx_gadget_error(GadgetParams(5, 3, 1e-3, 1e30))
    assert huge.eps_nondephasing == pytest.approx(0.0, abs=1e-30)
    assert huge.eps_cat == pytest.approx(
        finite.eps_target + finite.eps_control + finite.eps_ec, rel=1e-12
    )


def test_parameter_validation():
    with pytest.raises(ValueError):
        GadgetParams(4, 3, 1e-3, 1e4)
    with pytest.raises(ValueError):
        GadgetParams(3, 2, 1e-3, 1e4)
    with pytest.raises(ValueError):
        GadgetParams(3, 3, 1.5, 1e4)
    with pytest.raises(ValueError):
        GadgetParams(3, 3, 1e-3, 0.0)


@given(
    n=ODD,
    r=st.integers(min_value=0, max_value=5).map(lambda k: 2 * k + 1),
    eps=st.floats(min_value=1e-6, max_value=5e-3),
    eta=st.floats(min_value=10.0, max_value=1e6),
)
@settings(max_examples=60, deadline=None)
def test_monotonicity(n, r, eps, eta):
    base = cx_gadget_error(GadgetParams(n, r, eps, eta)).eps_cat
    more_eps = cx_gadget_error(GadgetParams(n, r, min(1.0, eps * 1.3), eta)).eps_cat
    more_eta = cx_gadget_error(GadgetParams(n, r, eps, eta * 3)).eps_cat
    assert more_eps >= base
    assert more_eta <= base


def test_threshold_window_and_bias_ordering():
    t4 = gadget_threshold(1e4)
    assert 5.6e-3 <= t4 <= 9.4e-3
    t3 = gadget_threshold(1e3)
    assert t3 < t4


def test_threshold_consistency():
    eta = 1e4
    star = gadget_threshold(eta)
    below, _, _ = best_gadget_error(0.9 * star, eta)
    above, _, _ = best_gadget_error(1.1 * star, eta)
    assert below < 0.9 * star
    assert above > 1.1 * star


def test_no_threshold_at_tiny_bias():
    with pytest.raises(NoThreshold):
        gadget_threshold(1.0, n_max=11, r_max=5)


def test_overhead_small_noise():
    # the r = 1 syndrome term is linear in eps, so (3, 1) misses the target
    # and the optimum lands on (3, 3) with volume 54
    res = gadget_overhead(1e-4, 1e4)
    assert (res.n, res.r_rounds) == (3, 3)
    assert res.volume == gadget_volume(3, 3) == 8 * 2 * 3 + 6


def test_overhead_returns_minimal_point_when_admissible():
    eps, eta = 1e-4, 1e4
    target = cx_gadget_error(GadgetParams(3, 1, eps, eta)).eps_cat * 1.01
    res = gadget_overhead(eps, eta, target)
    assert (res.n, res.r_rounds) == (3, 1)


def test_overhead_matches_exhaustive_oracle():
    eps, eta, target = 1e-3, 1e4, 0.67e-3
    res = gadget_overhead(eps, eta, target)
    best = None
    for n in range(3, 62, 2):
        for r in range(1, 16, 2):
            e = cx_gadget_error(GadgetParams(n, r, eps, eta)).eps_cat
            if e <= target:
                v = gadget_volume(n, r)
                if best is None or v < best:
                    best = v
    assert res.volume == best
    assert res.eps_cat <= target


def test_overhead_infeasible():
    with pytest.raises(Infeasible):
        gadget_overhead(0.2, 1e4)


def test_overhead_feasible_at_quoted_operating_point():
    res = gadget_overhead(2.5e-3, 1e4)
    assert res.volume > 0
    assert competitor_volume(res.n, res.r_rounds) == 7 * res.n * res.r_rounds


def test_magic_success_values():
    assert magic_success_probability(9) == pytest.approx(0.49, abs=5e-3)
    assert magic_success_probability(21) == pytest.approx(0.34, abs=5e-3)
    assert magic_success_probability(3) == pytest.approx(0.75, abs=1e-12)


@pytest.mark.parametrize("n", [3, 5, 7, 9, 11, 13, 15])
def test_magic_success_enumeration_matches(n):
    assert magic_success_enumeration(n) == pytest.approx(
        magic_success_probability(n), abs=1e-15
    )


def test_magic_success_strictly_decreasing():
    values = [magic_success_probability(n) for n in range(3, 41, 2)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_magic_error_rates_point():
    p = MagicPrepParams(n=3, r_rounds=3, r_zl=3, epsilon=1e-3, eta=1e3, eps_zz=0.0)
    rates = magic_error_rates(p)
    assert rates.eps_xl == pytest.approx(33e-3 / 1e3 + 3 * (5e-3) ** 2, rel=1e-12)
    # eps_zL summands at eps_zz = 0
    eps = 1e-3
    ec_fail = 3 * (4 * eps) ** 2
    expect = (
        9 * eps / 1e3
        + (2 * 3 * eps + 3 * eps + 5 * eps) ** 3
        + 3 * (3 * eps + 3 * eps) * (2 * 3 * eps + 2 * eps)
        + 3 * (2 * 3 * eps + 3 * eps + 5 * eps) * ec_fail**2
    )
    assert rates.eps_zl == pytest.approx(expect, rel=1e-12)


def test_magic_error_rates_zero():
    p = MagicPrepParams(n=3, r_rounds=3, r_zl=3, epsilon=0.0, eta=1e3, eps_zz=0.0)
    rates = magic_error_rates(p)
    assert rates.eps_xl == 0.0 and rates.eps_zl == 0.0


def test_correlated_zz_default_is_second_order():
    p = MagicPrepParams(n=3, r_rounds=3, r_zl=3, epsilon=1e-3, eta=1e3)
    assert p.correlated_zz == pytest.approx(1e-6)


def test_float64_matches_high_precision():
    # formula evaluation in float64 agrees with 50-digit arithmetic
    import mpmath

    mpmath.mp.dps = 50
    for eps in (1e-6, 1e-4, 3e-3):
        for n, r in ((3, 3), (9, 5), (21, 15)):
            b = cx_gadget_error(GadgetParams(n, r, eps, 1e4))
            e = mpmath.mpf(eps)
            maj_n = mpmath.binomial(n, (n + 1) // 2)
            maj_r = mpmath.binomial(r, (r + 1) // 2)
            exact = (
                maj_n * (2 * r * e + e) ** ((n + 1) // 2)
                + maj_n * (4 * r * e + e) ** ((n + 1) // 2)
                + 2 * (n - 1) * maj_r * (4 * e) ** ((r + 1) // 2)
                + (8 * (n - 1) * r + n) * e / mpmath.mpf(1e4)
            )
            assert abs(b.eps_cat / float(exact) - 1) < 1e-12
