import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaplab.checks import lifetime_ladder, temperature_ladder
from gaplab.critical_times import (
    PHYSICAL_EARLY,
    PHYSICAL_LATE,
    UNPHYSICAL_NEGATIVE,
    approx_t_cr1,
    approx_t_cr2,
    critical_pair,
    cubic_residual,
    cubic_roots,
    find_root,
    pair_exists,
    pair_threshold,
    solve_critical_times,
)
from gaplab.errors import NumericalFailure, ValidationError
from gaplab.gap_model import bracket_rate
from gaplab.quantities import DimensionlessParams, fiducial_params, make_params, to_dimensionless

P = fiducial_params()
D = to_dimensionless(P)
mp.mp.dps = 60


def mp_roots(d):
    """Reference roots of 2u^3 - (2/3) alpha u + beta, largest first."""
    roots = mp.polyroots([2, 0, -mp.mpf(2) / 3 * mp.mpf(d.alpha), mp.mpf(d.beta)], maxsteps=200, extraprec=200)
    return sorted((float(mp.re(r)) for r in roots), reverse=True)


def trig_roots(d):
    """Closed-form trigonometric roots of u^3 - (alpha/3) u + beta/2 (three real roots)."""
    p, q = -d.alpha / 3.0, d.beta / 2.0
    m = 2.0 * math.sqrt(-p / 3.0)
    theta = math.acos(3.0 * q / (p * m)) / 3.0
    return sorted((m * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)), reverse=True)


def test_residual_at_zero():
    assert cubic_residual(D, 0.0) == 1.5e4


def test_residual_at_local_minimum():
    u_star = math.sqrt(D.alpha) / 3.0
    assert u_star == pytest.approx(192.45, abs=5e-3)
    expected = mp.mpf(D.beta) - mp.mpf(4) / 27 * mp.mpf(D.alpha) ** 1.5
    assert float(expected) == pytest.approx(-2.8496e7, rel=1e-4)
    assert cubic_residual(D, u_star) == pytest.approx(float(expected), rel=1e-12)


def test_residual_simple():
    assert cubic_residual(DimensionlessParams(3.0, 4.0, 1.0), 1.0) == 4.0


def test_pair_exists_fiducial():
    assert pair_threshold(D) == pytest.approx(2.85e7, rel=1e-3)
    assert pair_exists(D)


def test_pair_exists_large_beta():
    assert not pair_exists(DimensionlessParams(3.0, 1e6, 1.0))


def test_tangency_is_no_pair():
    d = DimensionlessParams(300.0, 4.0 / 27.0 * 300.0**1.5, 1.0)
    assert not pair_exists(d)
    assert cubic_roots(d) == ()


@pytest.mark.parametrize("alpha", [3.0, 300.0, 1e6 / 3, 3e7])
def test_boundary_flip(alpha):
    thr = pair_threshold(DimensionlessParams(alpha, 1.0, 1.0))
    assert pair_exists(DimensionlessParams(alpha, thr * (1 - 1e-6), 1.0))
    assert not pair_exists(DimensionlessParams(alpha, thr * (1 + 1e-6), 1.0))


def test_roots_match_polyroots_fiducial():
    roots = cubic_roots(D)
    assert [r.label for r in roots] == [PHYSICAL_EARLY, PHYSICAL_LATE, UNPHYSICAL_NEGATIVE]
    for got, ref in zip(roots, mp_roots(D)):
        assert got.u == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("alpha,beta", [(3.0, 0.5), (30.0, 10.0), (300.0, 200.0), (1e4, 1e3)])
def test_roots_match_trig_closed_form(alpha, beta):
    d = DimensionlessParams(alpha, beta, 1.0)
    got = [r.u for r in cubic_roots(d)]
    for g, ref in zip(got, trig_roots(d)):
        assert g == pytest.approx(ref, rel=1e-10)


def test_vieta_relations():
    u1, u2, u3 = (r.u for r in cubic_roots(D))
    scale = max(abs(u1), abs(u2), abs(u3))
    assert abs(u1 + u2 + u3) <= 1e-9 * scale
    assert u1 * u2 * u3 == pytest.approx(-D.beta / 2.0, rel=1e-9)


def test_fiducial_report():
    rep = solve_critical_times(P)
    assert rep.exists_pair
    assert rep.t_cr1 == pytest.approx(405.12, rel=1e-4)
    assert 3e3 <= rep.t_cr2 / P.t_0 <= 3.5e3
    assert rep.t_cr2 <= 1e4 * P.t_0
    assert rep.t_cr1 < P.t_0 < rep.t_cr2
    assert rep.valid_after_decoupling == (False, True)
    assert rep.valid_after_t_nr == (False, True)
    # within a factor of ten of the order-of-magnitude literature estimate
    assert 0.1 < rep.t_cr1 / 1.5e3 < 10.0


def test_fiducial_approximations():
    rep = solve_critical_times(P)
    assert rep.approx_t_cr1 == pytest.approx(405.0, rel=1e-12)
    assert rep.approx_t_cr2 / P.t_0 == pytest.approx((2 / 3 * (1e6 / 3) * (1e6 / 1.5e10)) ** 3, rel=1e-13)
    assert rep.approx_t_cr2 / P.t_0 == pytest.approx(3251.5, rel=1e-4)
    assert rep.rel_err_1 < 0.05 and rep.rel_err_2 < 0.05


def test_approx_t_cr1_unit_case():
    p = make_params(temp_nr=9.0, t_nr=1.0, t_0=7.0, temp_0=3.0)
    assert approx_t_cr1(p) == pytest.approx(7.0, rel=1e-15)


def test_approx_t_cr1_linear_in_t0():
    q = make_params(P.temp_nr, P.t_nr, 2 * P.t_0, P.temp_0)
    assert approx_t_cr1(q) == pytest.approx(2 * approx_t_cr1(P), rel=1e-15)


def test_approx_t_cr2_unit_case():
    # (2/3) * alpha * t_nr / t_0 = 1 with alpha = 3, t_nr = t_0 / 2
    p = make_params(temp_nr=9.0, t_nr=5.0, t_0=10.0, temp_0=3.0)
    assert approx_t_cr2(p) == pytest.approx(10.0, rel=1e-15)


def test_approx_t_cr2_cubic_in_t_nr():
    q = make_params(P.temp_nr, 3 * P.t_nr, P.t_0, P.temp_0)
    assert approx_t_cr2(q) == pytest.approx(27 * approx_t_cr2(P), rel=1e-13)


def test_roots_zero_the_bracket():
    rep = solve_critical_times(P)
    for root, t in zip(rep.u_roots, (rep.t_cr1, rep.t_cr2)):
        assert abs(bracket_rate(P, t) * P.t_0) < 1e-8 * (2 / 3) * D.alpha * root.u


def _strictly_decreasing(xs):
    return all(a > b for a, b in zip(xs, xs[1:]))


def test_lifetime_ladder_shrinks_early_error():
    errs = [solve_critical_times(p).rel_err_1 for p in lifetime_ladder()]
    assert len(errs) == 5 and _strictly_decreasing(errs)


def test_temperature_ladder_shrinks_late_error():
    errs = [solve_critical_times(p).rel_err_2 for p in temperature_ladder()]
    assert len(errs) == 5 and _strictly_decreasing(errs)


def test_no_pair_report():
    p = make_params(temp_nr=30.0, t_nr=1.0, t_0=1e6, temp_0=3.0)
    rep = solve_critical_times(p)
    assert not rep.exists_pair
    assert rep.t_cr1 is None and rep.t_cr2 is None and rep.u_roots == ()
    assert rep.valid_after_decoupling is None
    assert critical_pair(p) == (None, None)


def test_non_convergence_carries_bracket():
    with pytest.raises(NumericalFailure) as info:
        find_root(D, 0.0, math.sqrt(D.alpha) / 3.0, max_iter=2)
    lo, hi = info.value.bracket
    assert 0.0 <= lo < hi <= math.sqrt(D.alpha) / 3.0


def test_no_sign_change_is_rejected():
    with pytest.raises(NumericalFailure):
        find_root(D, 1e4, 2e4)


@pytest.mark.parametrize("t_dec", [0.0, -1.0, math.inf])
def test_bad_decoupling_time(t_dec):
    with pytest.raises(ValidationError):
        solve_critical_times(P, t_dec)


@settings(max_examples=200)
@given(
    st.floats(min_value=-1.0, max_value=12.0),
    st.floats(min_value=1e-6, max_value=1.0 - 1e-6),
)
def test_random_cubics_have_valid_roots(log_alpha, frac):
    alpha = 10.0**log_alpha
    d = DimensionlessParams(alpha, frac * 4.0 / 27.0 * alpha**1.5, 1.0)
    roots = cubic_roots(d)
    assert len(roots) == 3
    early, late, neg = (r.u for r in roots)
    assert early > math.sqrt(alpha) / 3.0 > late > 0.0 > neg
    for u in (early, late, neg):
        assert abs(cubic_residual(d, u)) <= 1e-12 * max(d.beta, (2 / 3) * alpha * abs(u)) * 1.0001
