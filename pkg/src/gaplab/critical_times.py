"""Critical times where nuclear burning balances expansion.

With ``u = (t_0 / t)**(1/3)`` the balance condition

    gamma t_0 + 2 t_0 / t = (2/3) alpha (t_0 / t)**(1/3)

becomes the depressed cubic ``f(u) = 2u^3 - (2/3) alpha u + beta``. Its
local minimum sits at ``u* = sqrt(alpha) / 3`` with value
``beta - (4/27) alpha**1.5``; two positive roots exist exactly when that
value is negative. The small-u root is the late critical time, the large-u
root the early one, and the third root is always negative.

Roots are found by bracketed bisection with Newton acceleration. The
closed-form cubic loses most of its digits when ``beta << alpha**1.5``,
which is the physically relevant regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NumericalFailure, ValidationError
from .quantities import DimensionlessParams, ModelParams, to_dimensionless

# standard recombination epoch; the model has no intrinsic value for it
DEFAULT_T_DEC = 3.8e5
MAX_ITER = 200
RESIDUAL_RTOL = 1e-12

PHYSICAL_EARLY = "physical_early"
PHYSICAL_LATE = "physical_late"
UNPHYSICAL_NEGATIVE = "unphysical_negative"


@dataclass(frozen=True)
class CubicRoot:
    u: float
    label: str

    @property
    def is_physical(self) -> bool:
        return self.label != UNPHYSICAL_NEGATIVE


@dataclass(frozen=True)
class CriticalTimesReport:
    """Exact and asymptotic critical times for one parameter set.

    Times are in years. Validity flags are ``(early, late)`` pairs and are
    ``None`` when no pair exists.
    """

    params: ModelParams
    t_dec: float
    exists_pair: bool
    t_cr1: float | None = None
    t_cr2: float | None = None
    u_roots: tuple[CubicRoot, ...] = ()
    approx_t_cr1: float = math.nan
    approx_t_cr2: float = math.nan
    rel_err_1: float | None = None
    rel_err_2: float | None = None
    valid_after_decoupling: tuple[bool, bool] | None = None
    valid_after_t_nr: tuple[bool, bool] | None = None


def cubic_residual(d: DimensionlessParams, u: float) -> float:
    return 2.0 * u**3 - (2.0 / 3.0) * d.alpha * u + d.beta


def cubic_slope(d: DimensionlessParams, u: float) -> float:
    return 6.0 * u**2 - (2.0 / 3.0) * d.alpha


def pair_threshold(d: DimensionlessParams) -> float:
    """Largest beta (exclusive) for which two positive roots exist."""
    return 4.0 / 27.0 * d.alpha**1.5


def pair_exists(d: DimensionlessParams) -> bool:
    """True iff the cubic has two distinct positive roots (tangency excluded)."""
    return d.beta < pair_threshold(d)


def _residual_scale(d, u):
    return max(d.beta, (2.0 / 3.0) * d.alpha * abs(u))


def find_root(d: DimensionlessParams, lo: float, hi: float, max_iter: int = MAX_ITER):
    """Root of the cubic in ``[lo, hi]``, which must bracket a sign change.

    Newton steps are taken from the current best point while they stay
    inside the bracket and at least halve it; otherwise the bracket is
    bisected. Returns ``(u, iterations)``.
    """
    f_lo, f_hi = cubic_residual(d, lo), cubic_residual(d, hi)
    if f_lo == 0.0:
        return lo, 0
    if f_hi == 0.0:
        return hi, 0
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise NumericalFailure(f"no sign change on [{lo!r}, {hi!r}]", bracket=(lo, hi))

    u = 0.5 * (lo + hi)
    for it in range(1, max_iter + 1):
        fu = cubic_residual(d, u)
        if abs(fu) <= RESIDUAL_RTOL * _residual_scale(d, u):
            return u, it
        if (fu > 0.0) == (f_lo > 0.0):
            lo, f_lo = u, fu
        else:
            hi = u
        width = hi - lo
        slope = cubic_slope(d, u)
        step = u - fu / slope if slope != 0.0 else math.nan
        if lo < step < hi and abs(step - u) < 0.5 * width:
            u = step
        else:
            u = 0.5 * (lo + hi)
        if hi - lo <= 2.0 * math.ulp(max(abs(lo), abs(hi))):
            break
    raise NumericalFailure(
        f"root not converged after {max_iter} iterations "
        f"(alpha={d.alpha!r}, beta={d.beta!r})",
        bracket=(lo, hi),
    )


def cubic_roots(d: DimensionlessParams) -> tuple[CubicRoot, ...]:
    """All real roots, largest u first; empty when no positive pair exists.

    Each root is bracketed independently, so Vieta's relations
    (sum 0, product ``-beta/2``) are a genuine check on the result.
    """
    if not pair_exists(d):
        return ()
    u_star = math.sqrt(d.alpha) / 3.0
    u_hi = math.sqrt(d.alpha / 3.0) + d.beta
    early, _ = find_root(d, u_star, u_hi)
    late, _ = find_root(d, 0.0, u_star)
    # f(-v) < 0 once v^2 exceeds alpha/3 by enough to swamp beta
    v = math.sqrt(d.alpha / 3.0) + d.beta ** (1.0 / 3.0) + 1.0
    negative, _ = find_root(d, -v, -u_star)
    return (
        CubicRoot(early, PHYSICAL_EARLY),
        CubicRoot(late, PHYSICAL_LATE),
        CubicRoot(negative, UNPHYSICAL_NEGATIVE),
    )


def u_to_years(d: DimensionlessParams, u: float) -> float:
    return d.t_0 / u**3


def approx_t_cr1(p: ModelParams) -> float:
    """Early critical time neglecting nuclear burning: ``t_0 (3 T_0 / T_nr)**1.5``."""
    return p.t_0 * (3.0 * p.temp_0 / p.temp_nr) ** 1.5


def approx_t_cr2(p: ModelParams) -> float:
    """Late critical time neglecting the ``2/t`` term: ``t_0 ((2/3)(T_nr/T_0)(t_nr/t_0))**3``."""
    return p.t_0 * ((2.0 / 3.0) * (p.temp_nr / p.temp_0) * (p.t_nr / p.t_0)) ** 3


def critical_pair(p: ModelParams) -> tuple[float | None, float | None]:
    """``(t_cr1, t_cr2)`` in years, or ``(None, None)``."""
    d = to_dimensionless(p)
    roots = cubic_roots(d)
    if not roots:
        return None, None
    return u_to_years(d, roots[0].u), u_to_years(d, roots[1].u)


def solve_critical_times(p: ModelParams, t_dec: float = DEFAULT_T_DEC) -> CriticalTimesReport:
    if not (t_dec > 0.0 and math.isfinite(t_dec)):
        raise ValidationError(f"decoupling time must be positive, got {t_dec!r}", "t_dec")
    d = to_dimensionless(p)
    a1, a2 = approx_t_cr1(p), approx_t_cr2(p)
    roots = cubic_roots(d)
    if not roots:
        return CriticalTimesReport(
            params=p, t_dec=t_dec, exists_pair=False, approx_t_cr1=a1, approx_t_cr2=a2
        )
    t1 = u_to_years(d, roots[0].u)
    t2 = u_to_years(d, roots[1].u)
    return CriticalTimesReport(
        params=p,
        t_dec=t_dec,
        exists_pair=True,
        t_cr1=t1,
        t_cr2=t2,
        u_roots=roots,
        approx_t_cr1=a1,
        approx_t_cr2=a2,
        rel_err_1=abs(a1 - t1) / t1,
        rel_err_2=abs(a2 - t2) / t2,
        valid_after_decoupling=(t1 > t_dec, t2 > t_dec),
        valid_after_t_nr=(t1 > p.t_nr, t2 > p.t_nr),
    )
