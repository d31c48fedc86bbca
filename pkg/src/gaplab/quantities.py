"""Physical parameters of the homogeneous model and their dimensionless groups.

Energies are temperatures in Kelvin (Boltzmann constant = 1) and times are
in years. Nothing in the package converts to SI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ValidationError, WienLimitError

# config-file key -> ModelParams field
CONFIG_KEYS = {
    "temp_nr_kelvin": "temp_nr",
    "t_nr_years": "t_nr",
    "t_0_years": "t_0",
    "temp_0_kelvin": "temp_0",
}


@dataclass(frozen=True)
class ModelParams:
    """The four inputs of the model.

    Parameters
    ----------
    t_nr : float
        Mean life of the nuclear burning process, years (inverse decay rate).
    temp_nr : float
        Characteristic nuclear energy expressed as a temperature, Kelvin.
    t_0 : float
        Present age of the universe, years.
    temp_0 : float
        Present radiation temperature, Kelvin.
    """

    t_nr: float
    temp_nr: float
    t_0: float
    temp_0: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ValidationError(f"{f.name} must be a real number, got {value!r}", f.name)
            if not math.isfinite(value):
                raise ValidationError(f"{f.name} must be finite, got {value!r}", f.name)
            if value <= 0.0:
                raise ValidationError(f"{f.name} must be strictly positive, got {value!r}", f.name)
            object.__setattr__(self, f.name, value)
        if self.temp_nr <= self.temp_0:
            raise WienLimitError(
                f"temp_nr ({self.temp_nr:g} K) must exceed temp_0 ({self.temp_0:g} K); "
                "the gap formula assumes nuclear energies far above the radiation temperature",
                "temp_nr",
            )

    @property
    def gamma(self) -> float:
        """Nuclear decay rate, per year."""
        return 1.0 / self.t_nr


@dataclass(frozen=True)
class DimensionlessParams:
    """``alpha = temp_nr / temp_0`` and ``beta = t_0 / t_nr``; ``t_0`` in years."""

    alpha: float
    beta: float
    t_0: float

    def __post_init__(self):
        for name in ("alpha", "beta", "t_0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValidationError(f"{name} must be positive and finite, got {value!r}", name)


def make_params(temp_nr, t_nr, t_0, temp_0) -> ModelParams:
    """Validated parameters from temperatures in Kelvin and times in years."""
    return ModelParams(t_nr=t_nr, temp_nr=temp_nr, t_0=t_0, temp_0=temp_0)


def fiducial_params() -> ModelParams:
    """Lower ends of the nuclear ranges with today's age and temperature."""
    return make_params(temp_nr=1e6, t_nr=1e6, t_0=1.5e10, temp_0=3.0)


def to_dimensionless(p: ModelParams) -> DimensionlessParams:
    return DimensionlessParams(alpha=p.temp_nr / p.temp_0, beta=p.t_0 / p.t_nr, t_0=p.t_0)


def parse_config(text: str) -> dict[str, float]:
    """Parse ``key=value`` lines into ModelParams keyword arguments.

    Blank lines and lines starting with ``#`` are skipped. Only the four
    documented keys are accepted; any of them may be absent.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in CONFIG_KEYS:
            known = ", ".join(CONFIG_KEYS)
            raise ValidationError(f"config line {lineno}: unknown key {key!r} (known: {known})", key)
        try:
            out[CONFIG_KEYS[key]] = float(value)
        except ValueError:
            raise ValidationError(f"config line {lineno}: {key} is not a number: {value!r}", key)
    return out


def load_config(path) -> dict[str, float]:
    return parse_config(Path(path).read_text())
