"""Closed-form evolution of the matter-radiation entropy gap.

The gap is

    dS(t) = -C1 * exp(-gamma t) * t**-2 * exp(alpha * (t / t_0)**(2/3))

with ``T(t) = temp_0 (t_0 / t)**(2/3)`` substituted into
``-C T**3 exp(-gamma t) exp(temp_nr / T)``. The exponent grows with t:
``temp_nr / T(t) = alpha (t / t_0)**(2/3)``. Printed variants with
``(t_0 / t)**(2/3)`` disagree with the time derivative and with the
critical-time equation, and are not used here.

At fiducial parameters ``ln|dS / C1|`` is ~3e5 at the present age, so
values are only ever handled as (sign, log-magnitude). The amplitude C1 is
unknown and cancels in every reported quantity, which are all relative to
a reference time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .critical_times import critical_pair
from .errors import DomainError, NumericalFailure, ValidationError
from .quantities import ModelParams, to_dimensionless

# largest argument for which math.exp stays finite, with margin
SAFE_EXP_MAX = 700.0

PHASES = ("before_tcr1", "between", "after_tcr2", "monotone")


@dataclass(frozen=True)
class LogGapValue:
    """Signed value stored as ``sign * exp(ln_magnitude)`` (amplitude C1 divided out)."""

    sign: int
    ln_magnitude: float

    def ln_ratio(self, other: "LogGapValue") -> float:
        """``ln|self / other|``; both must be non-zero."""
        if self.sign == 0 or other.sign == 0:
            raise ValueError("log ratio undefined for a zero gap")
        return self.ln_magnitude - other.ln_magnitude

    def relative_to(self, other: "LogGapValue") -> float:
        """``self / other`` as a float, refusing to overflow."""
        return self.sign * other.sign * safe_exp(self.ln_ratio(other))


@dataclass(frozen=True)
class GapCurvePoint:
    t: float
    ln_gap_rel: float
    bracket: float
    phase: str


def safe_exp(x: float) -> float:
    if x > SAFE_EXP_MAX:
        raise NumericalFailure(f"exp({x:.6g}) would overflow a 64-bit float")
    return math.exp(x)


def _check_time(t):
    if not (t > 0.0 and math.isfinite(t)):
        raise DomainError(f"time must be positive and finite, got {t!r}", "t")


def temperature_at(p: ModelParams, t: float) -> float:
    """Radiation temperature in Kelvin at ``t`` years for matter-dominated expansion."""
    _check_time(t)
    return p.temp_0 * (p.t_0 / t) ** (2.0 / 3.0)


def ln_gap(p: ModelParams, t: float) -> LogGapValue:
    """Sign and ``ln|dS / C1|`` at ``t`` years (the t**-2 term uses t in years)."""
    _check_time(t)
    d = to_dimensionless(p)
    x = t / p.t_0
    ln_mag = -d.beta * x - 2.0 * math.log(t) + d.alpha * x ** (2.0 / 3.0)
    return LogGapValue(sign=-1, ln_magnitude=ln_mag)


def ln_gap_rel(p: ModelParams, t: float, t_ref: float | None = None) -> float:
    """``ln|dS(t)| - ln|dS(t_ref)|``, evaluated term by term to avoid cancellation."""
    t_ref = p.t_0 if t_ref is None else t_ref
    _check_time(t)
    _check_time(t_ref)
    d = to_dimensionless(p)
    x, x_ref = t / p.t_0, t_ref / p.t_0
    return (
        -d.beta * (x - x_ref)
        - 2.0 * math.log(t / t_ref)
        + d.alpha * (x ** (2.0 / 3.0) - x_ref ** (2.0 / 3.0))
    )


def bracket_rate(p: ModelParams, t: float) -> float:
    """Logarithmic growth rate ``d ln|dS| / dt`` in 1/year.

    Negative terms are nuclear burning (``-gamma``) and the ``t**-2``
    prefactor; the positive term is the cooling of the radiation relative
    to the nuclear energy scale.
    """
    _check_time(t)
    expansion = (2.0 / 3.0) * (p.temp_nr / (p.t_0 * p.temp_0)) * (p.t_0 / t) ** (1.0 / 3.0)
    return -p.gamma - 2.0 / t + expansion


def bracket_terms(p: ModelParams, t: float) -> tuple[float, float, float]:
    """The three summands of :func:`bracket_rate`, for conditioning estimates."""
    _check_time(t)
    return (
        -p.gamma,
        -2.0 / t,
        (2.0 / 3.0) * (p.temp_nr / (p.t_0 * p.temp_0)) * (p.t_0 / t) ** (1.0 / 3.0),
    )


def equilibrium_entropy(temp: float, volume: float, sigma: float = 1.0) -> float:
    """Black-body entropy ``16/3 sigma V T**3`` (units of sigma K^3 V)."""
    if not temp > 0.0:
        raise DomainError(f"temperature must be positive, got {temp!r}", "temp")
    if not volume > 0.0:
        raise DomainError(f"volume must be positive, got {volume!r}", "volume")
    return 16.0 / 3.0 * sigma * volume * temp**3


def phase_of(t: float, t_cr1: float | None, t_cr2: float | None) -> str:
    """Which side of the critical times ``t`` lies on.

    With no critical pair the gap shrinks monotonically and the phase is
    ``"monotone"``.
    """
    if t_cr1 is None or t_cr2 is None:
        return "monotone"
    if t < t_cr1:
        return "before_tcr1"
    if t <= t_cr2:
        return "between"
    return "after_tcr2"


def _check_grid(t_grid: Sequence[float]):
    if len(t_grid) < 1:
        raise ValidationError("time grid is empty", "t_grid")
    prev = 0.0
    for t in t_grid:
        if not (t > prev and math.isfinite(t)):
            raise ValidationError("time grid must be positive and strictly increasing", "t_grid")
        prev = t


def gap_curve(p, t_grid, t_ref=None, critical=None) -> list[GapCurvePoint]:
    """Sample the relative log-gap, growth rate and phase on ``t_grid``.

    ``critical`` is ``(t_cr1, t_cr2)``; it is solved for when omitted.
    """
    _check_grid(t_grid)
    t_cr1, t_cr2 = critical_pair(p) if critical is None else critical
    return [
        GapCurvePoint(
            t=t,
            ln_gap_rel=ln_gap_rel(p, t, t_ref),
            bracket=bracket_rate(p, t),
            phase=phase_of(t, t_cr1, t_cr2),
        )
        for t in t_grid
    ]


def actual_entropy_curve(p, epsilon_plot, t_grid, t_cr2=None):
    """Constant maximum entropy and the actual entropy beneath it.

    The maximum entropy is normalised to 1 (it is constant under homogeneous
    expansion). The gap is scaled so its deepest point, at ``t_cr2``, is
    ``-epsilon_plot``. Returns a list of ``(t, s_max, s_act)``.
    """
    if not (0.0 < epsilon_plot < 1.0):
        raise ValidationError(f"epsilon_plot must lie in (0, 1), got {epsilon_plot!r}", "epsilon_plot")
    _check_grid(t_grid)
    if t_cr2 is None:
        t_cr2 = critical_pair(p)[1]
        if t_cr2 is None:
            raise ValidationError("no critical pair: the gap has no deepest point to normalise to")
    rows = []
    for t in t_grid:
        gap = -epsilon_plot * safe_exp(ln_gap_rel(p, t, t_cr2))
        rows.append((t, 1.0, 1.0 + gap))
    return rows
