"""Finite-dimensional check of the entropy-gap expansion.

States are diagonal in an energy basis, so the conditional entropy
``-tr[rho log(rho_eq^-1 rho)]`` reduces to a negative relative entropy of
probability vectors. The oracle builds a discrete black-body state, a
trace-free perturbation peaked at the nuclear energy, and compares the
exact gap with its quadratic and Wien-limit approximations.

Spectral temperatures here are free inputs. At the model's physical ratio
``temp_nr / T ~ 3e5`` the equilibrium weight of the peak is ``exp(-3e5)``,
far below the smallest double, so the oracle works at moderate ratios
(default 20) where every quantity is representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GapLabError, NumericalFailure, ValidationError
from .quantities import ModelParams

NORM_TOL = 1e-12
# below this |x| the series for (1+x)log(1+x) - x is used
SERIES_CUTOFF = 1e-3
EXP_GUARD = 700.0


class DegenerateStateError(NumericalFailure):
    """Every Bose weight underflowed to zero."""


class EmptyPeakError(ValidationError):
    """The Gaussian bump is too narrow to land on any grid point."""


class NonPhysicalStateError(ValidationError):
    """The perturbed state has a negative probability."""

    def __init__(self, message, worst_index, max_amplitude):
        super().__init__(message, "amplitude")
        self.worst_index = worst_index
        self.max_amplitude = max_amplitude


class InfiniteDivergenceError(GapLabError, ArithmeticError):
    """The state has weight where the reference has none: the gap is -inf."""

    def __init__(self, message, indices):
        super().__init__(message)
        self.indices = indices


class WienRegimeError(ValidationError):
    """Peak energy is not far enough above the temperature for the Wien form."""


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EnergyGrid:
    """Strictly increasing positive energies in Kelvin."""

    omegas: np.ndarray

    def __post_init__(self):
        om = _frozen(self.omegas)
        if om.ndim != 1 or om.size < 1:
            raise ValidationError("energy grid must be a non-empty 1-d sequence", "omegas")
        if not np.all(np.isfinite(om)) or om[0] <= 0.0:
            raise ValidationError("energies must be finite and strictly positive", "omegas")
        if np.any(np.diff(om) <= 0.0):
            raise ValidationError("energies must be strictly increasing", "omegas")
        object.__setattr__(self, "omegas", om)

    @property
    def count(self) -> int:
        return self.omegas.size


@dataclass(frozen=True, eq=False)
class SpectralState:
    """Diagonal of a density matrix on ``grid``."""

    grid: EnergyGrid
    probs: np.ndarray

    def __post_init__(self):
        pr = _frozen(self.probs)
        if pr.shape != self.grid.omegas.shape:
            raise ValidationError("probabilities and grid differ in length", "probs")
        if np.any(pr < 0.0) or not np.all(np.isfinite(pr)):
            raise ValidationError("probabilities must be finite and non-negative", "probs")
        if abs(pr.sum() - 1.0) > NORM_TOL:
            raise ValidationError(f"probabilities sum to {pr.sum()!r}, not 1", "probs")
        object.__setattr__(self, "probs", pr)


@dataclass(frozen=True, eq=False)
class Perturbation:
    """Trace-free correction to a state; ``devs`` sums to zero."""

    grid: EnergyGrid
    devs: np.ndarray
    peak_omega: float
    width: float

    def __post_init__(self):
        dv = _frozen(self.devs)
        if dv.shape != self.grid.omegas.shape:
            raise ValidationError("deviations and grid differ in length", "devs")
        if abs(dv.sum()) > NORM_TOL:
            raise ValidationError(f"deviations sum to {dv.sum()!r}, not 0", "devs")
        object.__setattr__(self, "devs", dv)


def standard_grid(temp: float, peak_omega: float, points: int = 2048) -> EnergyGrid:
    """Geometric grid over ``[temp/100, 50 peak_omega]``."""
    return EnergyGrid(np.geomspace(temp / 100.0, 50.0 * peak_omega, points))


def bose_weights(omegas: np.ndarray, temp: float) -> np.ndarray:
    """Unnormalised occupancies ``1 / (exp(w/T) - 1)``."""
    x = np.asarray(omegas, dtype=float) / temp
    big = x > EXP_GUARD
    out = np.empty_like(x)
    out[~big] = 1.0 / np.expm1(x[~big])
    xb = x[big]
    # exp(-x) / (1 - exp(-x)); underflows to 0 past ~745
    out[big] = np.exp(-xb) / -np.expm1(-xb)
    return out


def blackbody_state(grid: EnergyGrid, temp: float) -> SpectralState:
    if not temp > 0.0:
        raise ValidationError(f"temperature must be positive, got {temp!r}", "temp")
    w = bose_weights(grid.omegas, temp)
    total = w.sum()
    if total == 0.0:
        raise DegenerateStateError(f"all Bose weights underflow at T={temp!r}")
    return SpectralState(grid, w / total)


def peaked_perturbation(grid: EnergyGrid, peak_omega: float, width: float, base: SpectralState):
    """Gaussian bump at ``peak_omega`` made trace-free against ``base``.

    ``devs = g - sum(g) * base`` and is then rescaled so the largest
    fractional deviation ``|devs_i| / base_i`` equals 1. With this scale
    any amplitude in [0, 1] keeps the perturbed state non-negative, and the
    amplitude is the maximum fractional change of any equilibrium weight,
    i.e. the natural expansion parameter of the gap.
    """
    om = grid.omegas
    if not (om[0] <= peak_omega <= om[-1]):
        raise ValidationError(f"peak {peak_omega!r} lies outside the grid", "peak_omega")
    if not width > 0.0:
        raise ValidationError(f"width must be positive, got {width!r}", "width")
    g = np.exp(-((om - peak_omega) ** 2) / (2.0 * width**2))
    if not np.any(g > 1e-30):
        raise EmptyPeakError(f"no grid point within reach of a width-{width!r} peak", "width")
    g = np.where(base.probs > 0.0, g, 0.0)
    devs = g - g.sum() * base.probs
    # recentre against rounding so the trace is zero to the last bit we can get
    devs -= devs.sum() * base.probs
    support = base.probs > 0.0
    scale = np.max(np.abs(devs[support]) / base.probs[support])
    if scale > 0.0:
        devs = devs / scale
    if np.any(devs):
        i = int(np.argmax(np.abs(devs)))
        if abs(om[i] - peak_omega) > width:
            raise ValidationError(
                f"largest deviation sits at {om[i]!r}, more than one width from the peak", "width"
            )
    return Perturbation(grid, devs, float(peak_omega), float(width))


def effective_amplitude(amplitude: float, gamma: float, t: float) -> float:
    return amplitude * math.exp(-gamma * t)


def state_at(base: SpectralState, pert: Perturbation, amplitude, gamma, t) -> SpectralState:
    """``base + amplitude exp(-gamma t) devs``."""
    eps = effective_amplitude(amplitude, gamma, t)
    probs = base.probs + eps * pert.devs
    if np.any(probs < 0.0):
        worst = int(np.argmin(probs))
        neg = pert.devs < 0.0
        limit = np.min(base.probs[neg] / -pert.devs[neg]) * math.exp(gamma * t)
        raise NonPhysicalStateError(
            f"negative probability {probs[worst]!r} at index {worst}; "
            f"amplitude must not exceed {limit!r}",
            worst_index=worst,
            max_amplitude=float(limit),
        )
    return SpectralState(base.grid, probs)


def _excess(x: np.ndarray) -> np.ndarray:
    """``(1+x) log(1+x) - x`` for ``x >= -1``, non-negative and cancellation-free."""
    out = np.empty_like(x)
    small = np.abs(x) < SERIES_CUTOFF
    xs = x[small]
    # sum_{n>=2} (-1)^n x^n / (n (n-1))
    out[small] = xs**2 * (0.5 - xs * (1 / 6 - xs * (1 / 12 - xs * (1 / 20 - xs * (1 / 30)))))
    xl = x[~small]
    with np.errstate(divide="ignore", invalid="ignore"):
        out[~small] = np.where(xl == -1.0, 1.0, (1.0 + xl) * np.log1p(xl) - xl)
    return out


def conditional_entropy(state: SpectralState, reference: SpectralState) -> float:
    """``-sum s_i log(s_i / r_i)``, always <= 0.

    Evaluated as ``-sum r_i phi(s_i / r_i - 1)`` with
    ``phi(x) = (1+x) log(1+x) - x >= 0``, which equals the plain sum for
    normalised states and keeps every term non-negative, so gaps of order
    1e-20 survive without cancellation.
    """
    s, r = state.probs, reference.probs
    if s.shape != r.shape or not np.array_equal(state.grid.omegas, reference.grid.omegas):
        raise ValidationError("state and reference live on different grids", "grid")
    bad = np.flatnonzero((r == 0.0) & (s > 0.0))
    if bad.size:
        raise InfiniteDivergenceError(
            f"state has weight at {bad.size} energies where the reference is zero", bad
        )
    support = r > 0.0
    x = (s[support] - r[support]) / r[support]
    return -float(np.sum(r[support] * _excess(x)))


def quadratic_sum(base: SpectralState, pert: Perturbation) -> float:
    """``sum devs_i^2 / base_i`` over the support of ``base``."""
    support = base.probs > 0.0
    return float(np.sum(pert.devs[support] ** 2 / base.probs[support]))


def quadratic_gap(base, pert, amplitude, gamma, t, paper_literal=False) -> float:
    """Second-order gap ``-(eps^2 / 2) sum devs^2 / base``, ``eps = amplitude e^{-gamma t}``.

    ``paper_literal=True`` returns ``-e^{-gamma t} amplitude^2 sum devs^2 / base``:
    one power of the decay factor and no 1/2, as the expansion is often
    quoted. The exact gap follows the default form.
    """
    state_at(base, pert, amplitude, gamma, t)
    k = quadratic_sum(base, pert)
    if paper_literal:
        return -math.exp(-gamma * t) * amplitude**2 * k
    eps = effective_amplitude(amplitude, gamma, t)
    return -0.5 * eps**2 * k


def partition_sum(grid: EnergyGrid, temp: float) -> float:
    return float(bose_weights(grid.omegas, temp).sum())


def wien_constant(pert: Perturbation, calibration_temp: float) -> float:
    """Prefactor ``C`` of ``-C T^3 eps^2 exp(w1/T)`` fixed at ``calibration_temp``.

    Replacing ``1/base_i`` by ``Z exp(w_i/T)`` (Wien limit) and ``w_i`` by
    the peak energy gives ``-(eps^2/2) Z exp(w1/T) sum devs^2``; the discrete
    partition sum ``Z`` plays the role of the continuum ``T^3`` scaling.
    """
    z = partition_sum(pert.grid, calibration_temp)
    return 0.5 * z * float(np.sum(pert.devs**2)) / calibration_temp**3


def wien_gap(base_temp, pert, amplitude, gamma, t, calibration_temp=None) -> float:
    """Peaked Wien-limit gap ``-C T^3 eps^2 exp(w1 / T)``.

    ``C`` comes from :func:`wien_constant` at ``calibration_temp``
    (default ``base_temp``), so changing ``base_temp`` with a fixed
    calibration follows the closed form exactly.
    """
    ratio = pert.peak_omega / base_temp
    if not ratio > 10.0:
        raise WienRegimeError(f"peak/temperature ratio {ratio:.4g} is not > 10", "base_temp")
    if ratio > EXP_GUARD:
        raise WienRegimeError(f"exp({ratio:.4g}) overflows; use log-domain quantities", "base_temp")
    c = wien_constant(pert, base_temp if calibration_temp is None else calibration_temp)
    eps = effective_amplitude(amplitude, gamma, t)
    return -c * base_temp**3 * eps**2 * math.exp(ratio)


def scaling_exponent(base, pert, epsilons) -> float:
    """Least-squares slope of ``ln|gap_exact|`` against ``ln eps``."""
    eps = np.asarray(epsilons, dtype=float)
    gaps = np.array([-conditional_entropy(state_at(base, pert, e, 0.0, 0.0), base) for e in eps])
    if np.any(gaps <= 0.0):
        raise NumericalFailure("exact gap vanished inside the amplitude sweep")
    slope, _ = np.polyfit(np.log(eps), np.log(gaps), 1)
    return float(slope)


@dataclass(frozen=True)
class OracleConfig:
    """Spectral setup; the base temperature is ``temp_nr / peak_ratio``."""

    points: int = 2048
    peak_ratio: float = 20.0
    width_fraction: float = 1.0 / 20.0
    sweep: tuple[float, ...] = tuple(np.logspace(-4.0, -1.0, 13))

    def __post_init__(self):
        if self.points < 3:
            raise ValidationError("oracle grid needs at least 3 points", "points")
        if not self.peak_ratio > 0.0:
            raise ValidationError("peak ratio must be positive", "peak_ratio")
        if not self.width_fraction > 0.0:
            raise ValidationError("width fraction must be positive", "width_fraction")


@dataclass(frozen=True)
class OracleRow:
    t: float
    epsilon: float
    delta_s_exact: float
    delta_s_quadratic: float
    delta_s_wien: float | None
    ln_abs_exact: float
    ln_abs_quadratic: float
    ln_abs_wien: float | None
    rel_dev_quadratic: float
    rel_dev_wien: float | None


@dataclass(frozen=True)
class OracleReport:
    config: OracleConfig
    base_temp: float
    peak_omega: float
    width: float
    amplitude: float
    paper_literal: bool
    rows: tuple[OracleRow, ...]
    scaling_exponent: float


def _ln_abs(x):
    return math.log(abs(x)) if x != 0.0 else -math.inf


def _rel_dev(approx, exact):
    return abs(approx - exact) / abs(exact) if exact != 0.0 else math.nan


def oracle_setup(p: ModelParams, config: OracleConfig = OracleConfig()):
    """``(base_temp, base_state, perturbation)`` for ``p`` and ``config``."""
    w1 = p.temp_nr
    temp = w1 / config.peak_ratio
    grid = standard_grid(temp, w1, config.points)
    base = blackbody_state(grid, temp)
    pert = peaked_perturbation(grid, w1, w1 * config.width_fraction, base)
    return temp, base, pert


def oracle_report(p, config=OracleConfig(), amplitude=0.1, t_grid=None, paper_literal=False):
    """Exact, quadratic and Wien gaps along ``t_grid`` (years).

    The nuclear energy and decay rate come from ``p``; the spectral
    temperature from ``config``. Rows are independent of one another, so
    evaluation order cannot change any value.
    """
    gamma = p.gamma
    if t_grid is None:
        t_grid = np.linspace(p.t_nr, 10.0 * p.t_nr, 10)
    temp, base, pert = oracle_setup(p, config)
    wien_ok = config.peak_ratio > 10.0
    rows = []
    for t in t_grid:
        t = float(t)
        state = state_at(base, pert, amplitude, gamma, t)
        exact = conditional_entropy(state, base)
        quad = quadratic_gap(base, pert, amplitude, gamma, t, paper_literal=paper_literal)
        wien = wien_gap(temp, pert, amplitude, gamma, t) if wien_ok else None
        rows.append(
            OracleRow(
                t=t,
                epsilon=effective_amplitude(amplitude, gamma, t),
                delta_s_exact=exact,
                delta_s_quadratic=quad,
                delta_s_wien=wien,
                ln_abs_exact=_ln_abs(exact),
                ln_abs_quadratic=_ln_abs(quad),
                ln_abs_wien=None if wien is None else _ln_abs(wien),
                rel_dev_quadratic=_rel_dev(quad, exact),
                rel_dev_wien=None if wien is None else _rel_dev(wien, exact),
            )
        )
    return OracleReport(
        config=config,
        base_temp=temp,
        peak_omega=pert.peak_omega,
        width=pert.width,
        amplitude=amplitude,
        paper_literal=paper_literal,
        rows=tuple(rows),
        scaling_exponent=scaling_exponent(base, pert, config.sweep),
    )
