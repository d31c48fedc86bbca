"""Invariant suite run by ``gaplab check``.

Every check returns ``(passed, detail)``. Parameters are the fiducial set
plus a fixed-seed random sample over the nuclear ranges, so two runs print
identical output. ``faults`` swaps in deliberately broken kernels to prove
the suite can fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import critical_times as ct
from . import gap_model as gm
from . import spectral_oracle as so
from .quantities import ModelParams, fiducial_params, make_params, to_dimensionless

SEED = 19960120
N_RANDOM_PARAMS = 12
FD_STEP = 1e-5
FD_RTOL = 1e-6

FAULTS = ("misprinted-exponent", "drop-half")


def _ln_gap_misprinted(p, t):
    # exponent with (t_0/t) instead of (t/t_0)
    d = to_dimensionless(p)
    ln_mag = -d.beta * t / p.t_0 - 2.0 * math.log(t) + d.alpha * (p.t_0 / t) ** (2.0 / 3.0)
    return gm.LogGapValue(-1, ln_mag)


def _quadratic_without_half(base, pert, amplitude, gamma, t):
    return 2.0 * so.quadratic_gap(base, pert, amplitude, gamma, t)


@dataclass(frozen=True)
class Kernels:
    ln_gap: Callable = gm.ln_gap
    quadratic_gap: Callable = so.quadratic_gap


def kernels_for(faults=()) -> Kernels:
    unknown = set(faults) - set(FAULTS)
    if unknown:
        raise ValueError(f"unknown fault(s): {sorted(unknown)}")
    k = {}
    if "misprinted-exponent" in faults:
        k["ln_gap"] = _ln_gap_misprinted
    if "drop-half" in faults:
        k["quadratic_gap"] = _quadratic_without_half
    return Kernels(**k)


def random_params(n=N_RANDOM_PARAMS, seed=SEED) -> list[ModelParams]:
    """Log-uniform draws over the nuclear temperature and lifetime ranges."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        out.append(
            make_params(
                temp_nr=10 ** rng.uniform(6, 8),
                t_nr=10 ** rng.uniform(6, 9),
                t_0=rng.uniform(1.0e10, 2.0e10),
                temp_0=rng.uniform(2.0, 4.0),
            )
        )
    return out


def finite_difference_rate(kern, p, t, step=FD_STEP):
    h = t * step
    return (kern.ln_gap(p, t + h).ln_magnitude - kern.ln_gap(p, t - h).ln_magnitude) / (2.0 * h)


def derivative_mismatch(kern, p, t_grid, scaled=False):
    """Largest relative mismatch between the centred difference and the analytic rate.

    ``scaled`` measures the error against the largest summand of the rate
    instead of the rate itself, which stays meaningful next to a root.
    """
    worst = 0.0
    for t in t_grid:
        fd = finite_difference_rate(kern, p, t)
        rate = gm.bracket_rate(p, t)
        ref = max(abs(x) for x in gm.bracket_terms(p, t)) if scaled else abs(rate)
        worst = max(worst, abs(fd - rate) / ref)
    return worst


# ---------------------------------------------------------------- quantities


def check_scale_consistency(kern):
    worst = 0.0
    for p in random_params():
        d = to_dimensionless(p)
        for k in (2.0, 10.0, 1e3):
            q = make_params(p.temp_nr * k, p.t_nr * k, p.t_0 * k, p.temp_0 * k)
            e = to_dimensionless(q)
            worst = max(worst, abs(e.alpha / d.alpha - 1), abs(e.beta / d.beta - 1))
    return worst <= 4 * np.finfo(float).eps, f"max relative change {worst:.3g}"


def check_round_trip(kern):
    bad = 0
    for p in [fiducial_params(), *random_params()]:
        d = to_dimensionless(p)
        if abs(d.alpha * p.temp_0 - p.temp_nr) > math.ulp(p.temp_nr):
            bad += 1
        if abs(d.beta * p.t_nr - p.t_0) > math.ulp(p.t_0):
            bad += 1
    return bad == 0, f"{bad} round trips off by more than 1 ulp"


# ---------------------------------------------------------------- gap model


def check_temperature_decreasing(kern):
    p = fiducial_params()
    temps = [gm.temperature_at(p, t) for t in np.geomspace(1.0, 1e20, 400)]
    ok = all(x > 0 for x in temps) and all(a > b for a, b in zip(temps, temps[1:]))
    return ok, f"{len(temps)} samples over [1, 1e20] yr"


def check_derivative_fiducial(kern):
    worst = derivative_mismatch(kern, fiducial_params(), np.geomspace(1e3, 1e15, 50))
    return worst < FD_RTOL, f"max relative mismatch {worst:.3g} (tol {FD_RTOL:g})"


def check_derivative_random(kern):
    grid = np.geomspace(1e3, 1e15, 50)
    worst = max(derivative_mismatch(kern, p, grid, scaled=True) for p in random_params())
    return worst < FD_RTOL, f"max term-scaled mismatch {worst:.3g} (tol {FD_RTOL:g})"


def check_sign_structure(kern):
    p = fiducial_params()
    t1, t2 = ct.critical_pair(p)
    samples = {
        -1: [t1 * 1e-3, t1 * 0.5, t1 * 0.99, t2 * 1.01, t2 * 10, t2 * 1e3],
        +1: [t1 * 1.01, t1 * 10, p.t_0, t2 * 0.5, t2 * 0.99],
    }
    bad = [(s, t) for s, ts in samples.items() for t in ts if np.sign(gm.bracket_rate(p, t)) != s]
    return not bad, "rate - | + | - around (t_cr1, t_cr2)" if not bad else f"wrong sign at {bad}"


def check_vanishing_gap(kern):
    p = fiducial_params()
    t2 = ct.critical_pair(p)[1]
    drop = kern.ln_gap(p, t2).ln_magnitude - kern.ln_gap(p, 100 * t2).ln_magnitude
    return drop > 1e6, f"ln-gap drops by {drop:.4g} from t_cr2 to 100 t_cr2"


def check_entropy_constancy(kern):
    s0 = gm.equilibrium_entropy(2.7, 1.0)
    worst = max(abs(gm.equilibrium_entropy(2.7 / k, k**3) / s0 - 1) for k in (2.0, 10.0, 100.0))
    return worst < 1e-12, f"max relative change {worst:.3g}"


# ---------------------------------------------------------------- critical times


def _all_params():
    return [fiducial_params(), *random_params()]


def check_root_correctness(kern):
    worst = 0.0
    for p in _all_params():
        d = to_dimensionless(p)
        for root in ct.cubic_roots(d)[:2]:
            t = ct.u_to_years(d, root.u)
            r = abs(gm.bracket_rate(p, t) * p.t_0) / ((2.0 / 3.0) * d.alpha * root.u)
            worst = max(worst, r)
    return worst < 1e-8, f"max scaled rate at roots {worst:.3g}"


def check_vieta(kern):
    worst = 0.0
    for p in _all_params():
        d = to_dimensionless(p)
        u = [r.u for r in ct.cubic_roots(d)]
        scale = max(abs(x) for x in u)
        worst = max(worst, abs(sum(u)) / scale, abs(u[0] * u[1] * u[2] / (-d.beta / 2) - 1))
    return worst < 1e-9, f"max relative Vieta defect {worst:.3g}"


def ladder_errors(params):
    reports = [ct.solve_critical_times(p) for p in params]
    return [r.rel_err_1 for r in reports], [r.rel_err_2 for r in reports]


def lifetime_ladder():
    """Fixed alpha = 300, beta = 500 ... 20 (lifetime scaled up)."""
    return [make_params(900.0, 1.5e10 / b, 1.5e10, 3.0) for b in (500, 200, 100, 50, 20)]


def temperature_ladder():
    """Fixed beta = 200, alpha = 300 ... 3e4."""
    return [make_params(3.0 * a, 1.5e10 / 200, 1.5e10, 3.0) for a in (300, 1e3, 3e3, 1e4, 3e4)]


def _strictly_decreasing(xs):
    return all(a > b for a, b in zip(xs, xs[1:]))


def check_asymptotic_ladders(kern):
    e1, e2 = ladder_errors(lifetime_ladder())
    f1, f2 = ladder_errors(temperature_ladder())
    ok = _strictly_decreasing(e1) and _strictly_decreasing(e2) and _strictly_decreasing(f2)
    return ok, f"rel_err_1 {e1[0]:.2g}->{e1[-1]:.2g}, rel_err_2 {f2[0]:.2g}->{f2[-1]:.2g}"


def check_fiducial_approximations(kern):
    r = ct.solve_critical_times(fiducial_params())
    ok = r.rel_err_1 < 0.05 and r.rel_err_2 < 0.05
    return ok, f"rel_err_1 {r.rel_err_1:.3g}, rel_err_2 {r.rel_err_2:.3g}"


def check_pair_boundary(kern):
    d = to_dimensionless(fiducial_params())
    thr = ct.pair_threshold(d)
    below = ct.DimensionlessParams(d.alpha, thr * (1 - 1e-6), d.t_0)
    above = ct.DimensionlessParams(d.alpha, thr * (1 + 1e-6), d.t_0)
    at = ct.DimensionlessParams(d.alpha, thr, d.t_0)
    ok = ct.pair_exists(below) and not ct.pair_exists(above) and not ct.pair_exists(at)
    return ok, f"threshold beta {thr:.6g}"


# ---------------------------------------------------------------- spectral oracle


def random_state_pairs(n=1000, seed=SEED):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        m = int(rng.integers(2, 40))
        grid = so.EnergyGrid(np.sort(rng.uniform(0.1, 100.0, m)) + np.arange(m) * 1e-9)
        a = rng.dirichlet(np.full(m, rng.uniform(0.2, 5.0)))
        b = rng.dirichlet(np.full(m, rng.uniform(0.2, 5.0)))
        yield so.SpectralState(grid, a / a.sum()), so.SpectralState(grid, b / b.sum())


def check_nonpositivity(kern):
    worst = -math.inf
    for s, r in random_state_pairs():
        worst = max(worst, so.conditional_entropy(s, r))
        if so.conditional_entropy(r, r) != 0.0:
            return False, "gap of a state against itself is not zero"
    return worst < 0.0, f"largest gap over 1000 distinct pairs {worst:.3g}"


def _standard():
    return so.oracle_setup(fiducial_params())


def check_quadratic_scaling(kern):
    _, base, pert = _standard()
    eps = 1e-4
    exact = so.conditional_entropy(so.state_at(base, pert, eps, 0.0, 0.0), base)
    quad = kern.quadratic_gap(base, pert, eps, 0.0, 0.0)
    err = abs(exact / quad - 1)
    return err < 1e-3, f"|exact/quadratic - 1| = {err:.3g} at eps=1e-4"


def check_exact_vs_quadratic(kern):
    _, base, pert = _standard()
    eps = 1e-3
    exact = so.conditional_entropy(so.state_at(base, pert, eps, 0.0, 0.0), base)
    quad = kern.quadratic_gap(base, pert, eps, 0.0, 0.0)
    err = abs(quad - exact) / abs(exact)
    return err < 1e-2, f"relative deviation {err:.3g} at eps=1e-3"


def check_scaling_exponent(kern):
    _, base, pert = _standard()
    k = so.scaling_exponent(base, pert, so.OracleConfig().sweep)
    return abs(k - 2.0) <= 0.01, f"measured exponent {k:.5f}"


def check_trace_conservation(kern):
    _, base, pert = _standard()
    worst = 0.0
    for amp in (0.0, 0.3, 1.0):
        for t in (0.0, 1e5, 1e7):
            s = so.state_at(base, pert, amp, 1e-6, t)
            worst = max(worst, abs(s.probs.sum() - 1.0))
    return worst <= 1e-12, f"max |sum - 1| = {worst:.3g}"


def check_grid_refinement(kern):
    p = fiducial_params()
    vals = []
    for n in (2048, 4096):
        _, base, pert = so.oracle_setup(p, so.OracleConfig(points=n))
        vals.append(math.log(-so.conditional_entropy(so.state_at(base, pert, 1e-3, 0, 0), base)))
    change = abs(vals[1] / vals[0] - 1)
    return change < 1e-3, f"relative change of ln|gap| {change:.3g}"


CHECKS = [
    ("quantities.scale_consistency", check_scale_consistency),
    ("quantities.round_trip", check_round_trip),
    ("gap_model.temperature_decreasing", check_temperature_decreasing),
    ("gap_model.derivative_consistency", check_derivative_fiducial),
    ("gap_model.derivative_consistency_random", check_derivative_random),
    ("gap_model.sign_structure", check_sign_structure),
    ("gap_model.vanishing_gap", check_vanishing_gap),
    ("gap_model.entropy_constancy", check_entropy_constancy),
    ("critical_times.root_correctness", check_root_correctness),
    ("critical_times.vieta", check_vieta),
    ("critical_times.asymptotic_ladders", check_asymptotic_ladders),
    ("critical_times.fiducial_approximations", check_fiducial_approximations),
    ("critical_times.pair_boundary", check_pair_boundary),
    ("spectral_oracle.nonpositivity", check_nonpositivity),
    ("spectral_oracle.quadratic_scaling", check_quadratic_scaling),
    ("spectral_oracle.exact_vs_quadratic", check_exact_vs_quadratic),
    ("spectral_oracle.scaling_exponent", check_scaling_exponent),
    ("spectral_oracle.trace_conservation", check_trace_conservation),
    ("spectral_oracle.grid_refinement", check_grid_refinement),
]


def run_checks(faults=()):
    """Run every check; returns a list of ``(name, passed, detail)``."""
    kern = kernels_for(faults)
    results = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn(kern)
        except Exception as exc:  # a crash is a failed invariant, not a crashed suite
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))
    return results
