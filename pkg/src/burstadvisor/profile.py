"""
Power-law application profiles.

An application profile maps the total processor count ``P`` of a job to its
execution time ``t = a * P**b``. Profiles are fitted from timing observations
and are evaluated (or inverted) by the placement policies.

Example usage::

    from burstadvisor.profile import ApplicationProfile, TimeUnit, eval_time

    cloud = ApplicationProfile(a=7004.86, b=-2.06, time_unit=TimeUnit.MINUTES)
    eval_time(cloud, 16)                        # minutes
    eval_time(cloud, 16, unit=TimeUnit.HOURS)   # hours
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import curve_fit

logger = logging.getLogger(__name__)


class ProfileError(ValueError):
    """Base exception for invalid profiles or profile arguments"""
    pass


class InsufficientDataError(ProfileError):
    """Raised when fewer than two observations are available for fitting"""
    pass


class DegenerateObservationsError(ProfileError):
    """Raised when all observations share a single processor count"""
    pass


class ProfileFitError(ProfileError):
    """Raised when the fitted exponent does not describe a scaling application"""
    pass


class TimeUnit(str, Enum):
    SECONDS = "seconds"
    MINUTES = "minutes"
    HOURS = "hours"

    @property
    def seconds(self) -> float:
        return _SECONDS_PER_UNIT[self]

    @classmethod
    def parse(cls, value: Union[str, "TimeUnit"]) -> "TimeUnit":
        if isinstance(value, TimeUnit):
            return value
        key = str(value).strip().lower()
        if key in _UNIT_ALIASES:
            return _UNIT_ALIASES[key]
        raise ProfileError(f"Unknown time unit '{value}'. Available: {[u.value for u in cls]}")


_SECONDS_PER_UNIT = {
    TimeUnit.SECONDS: 1.0,
    TimeUnit.MINUTES: 60.0,
    TimeUnit.HOURS: 3600.0,
}

_UNIT_ALIASES = {
    "s": TimeUnit.SECONDS, "sec": TimeUnit.SECONDS, "seconds": TimeUnit.SECONDS,
    "m": TimeUnit.MINUTES, "min": TimeUnit.MINUTES, "minutes": TimeUnit.MINUTES,
    "h": TimeUnit.HOURS, "hr": TimeUnit.HOURS, "hours": TimeUnit.HOURS,
}


def convert_time(value: float, from_unit, to_unit) -> float:
    """Convert a duration between time units."""
    from_unit = TimeUnit.parse(from_unit)
    to_unit = TimeUnit.parse(to_unit)
    if from_unit is to_unit:
        return float(value)
    return float(value) * from_unit.seconds / to_unit.seconds


@dataclass(frozen=True)
class TimingObservation:
    """One measured run: total processors and elapsed time"""
    processors: int
    elapsed: float
    unit: TimeUnit = TimeUnit.HOURS

    def __post_init__(self):
        object.__setattr__(self, "unit", TimeUnit.parse(self.unit))
        if int(self.processors) != self.processors or self.processors < 1:
            raise ProfileError(f"processors must be a positive integer, got {self.processors}")
        if not self.elapsed > 0:
            raise ProfileError(f"elapsed must be positive, got {self.elapsed}")

    def elapsed_in(self, unit) -> float:
        return convert_time(self.elapsed, self.unit, unit)


@dataclass(frozen=True)
class ApplicationProfile:
    """
    Power-law profile ``t = a * P**b``.

    Attributes:
        a: Scale coefficient, the execution time on one processor, in ``time_unit``
        b: Scaling exponent, strictly negative
        time_unit: Unit in which ``a`` is expressed
        fit_residual: Sum of squared residuals of the fit that produced the profile
        observed_p_range: (min, max) processor counts seen while fitting
    """
    a: float
    b: float
    time_unit: TimeUnit = TimeUnit.HOURS
    fit_residual: Optional[float] = None
    observed_p_range: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        object.__setattr__(self, "time_unit", TimeUnit.parse(self.time_unit))
        if not (math.isfinite(self.a) and self.a > 0):
            raise ProfileError(f"Profile coefficient a must be positive, got {self.a}")
        if not (math.isfinite(self.b) and self.b < 0):
            raise ProfileError(
                f"Profile exponent b must be negative (time must decrease with processors), got {self.b}"
            )
        if self.observed_p_range is not None:
            low, high = (int(p) for p in self.observed_p_range)
            object.__setattr__(self, "observed_p_range", (low, high))

    def to_unit(self, unit) -> "ApplicationProfile":
        """Return the same profile with ``a`` expressed in another time unit."""
        unit = TimeUnit.parse(unit)
        if unit is self.time_unit:
            return self
        factor = convert_time(1.0, self.time_unit, unit)
        residual = None if self.fit_residual is None else self.fit_residual * factor ** 2
        return replace(self, a=self.a * factor, time_unit=unit, fit_residual=residual)

    def read_as(self, unit) -> "ApplicationProfile":
        """
        The same coefficients with ``a`` read in ``unit``.

        Unlike :meth:`to_unit` nothing is converted; this is for profiles whose
        recorded unit is an assumption.
        """
        return replace(self, time_unit=TimeUnit.parse(unit))

    def is_extrapolated(self, processors: float) -> bool:
        """True when ``processors`` lies outside the range the profile was fitted on."""
        if self.observed_p_range is None:
            return False
        low, high = self.observed_p_range
        return not (low <= processors <= high)

    def to_dict(self) -> Dict:
        return {
            "a": self.a,
            "b": self.b,
            "time_unit": self.time_unit.value,
            "fit_residual": self.fit_residual,
            "observed_p_range": list(self.observed_p_range) if self.observed_p_range else None,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ApplicationProfile":
        try:
            p_range = data.get("observed_p_range")
            return cls(
                a=float(data["a"]),
                b=float(data["b"]),
                time_unit=TimeUnit.parse(data.get("time_unit", TimeUnit.HOURS)),
                fit_residual=None if data.get("fit_residual") is None else float(data["fit_residual"]),
                observed_p_range=tuple(p_range) if p_range else None,
            )
        except KeyError as e:
            raise ProfileError(f"Profile document is missing field {e}") from e

    def save(self, path: Union[str, Path]):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ApplicationProfile":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def eval_time(profile: ApplicationProfile, processors: float, unit=None) -> float:
    """
    Execution time of the profiled application on ``processors`` processors.

    Args:
        profile: The application profile
        processors: Total processor count, at least 1
        unit: Optional unit for the result (defaults to the profile's unit)

    Raises:
        ProfileError: If ``processors`` is below 1
    """
    if not processors >= 1:
        raise ProfileError(f"processors must be at least 1, got {processors}")
    if profile.is_extrapolated(processors):
        logger.debug(f"Evaluating profile outside its observed range at P={processors}")
    t = profile.a * float(processors) ** profile.b
    if unit is None:
        return t
    return convert_time(t, profile.time_unit, unit)


def required_processors(profile: ApplicationProfile, time_budget: float, unit=None) -> float:
    """
    Fractional processor count that runs the application in ``time_budget``.

    The result is not rounded; rounding to available node sizes is done by
    the placement policies.

    Args:
        profile: The application profile
        time_budget: Allowed execution time, positive
        unit: Unit of ``time_budget`` (defaults to the profile's unit)
    """
    if not time_budget > 0:
        raise ProfileError(f"time budget must be positive, got {time_budget}")
    if unit is not None:
        time_budget = convert_time(time_budget, unit, profile.time_unit)
    return (time_budget / profile.a) ** (1.0 / profile.b)


def _power_law(p, a, b):
    return a * np.power(p, b)


def fit_loglog(processors: Sequence[float], elapsed: Sequence[float]) -> Tuple[float, float]:
    """Closed-form linear regression of log(t) on log(P); returns (a, b)."""
    b, log_a = np.polyfit(np.log(processors), np.log(elapsed), 1)
    return float(np.exp(log_a)), float(b)


def fit_profile(observations: Sequence[TimingObservation], unit=TimeUnit.HOURS) -> ApplicationProfile:
    """
    Fit a power-law profile by non-linear least squares.

    The log-log regression provides the starting point, which is exact for
    noiseless data; ``scipy.optimize.curve_fit`` then minimizes the squared
    residuals of the elapsed times. When the refinement fails to converge the
    log-log estimate is returned.

    Args:
        observations: Timing observations, possibly in mixed units
        unit: Time unit of the fitted profile

    Raises:
        InsufficientDataError: Fewer than two observations
        DegenerateObservationsError: Fewer than two distinct processor counts
        ProfileFitError: The fitted exponent is not negative
    """
    unit = TimeUnit.parse(unit)
    observations = list(observations)
    if len(observations) < 2:
        raise InsufficientDataError(
            f"At least 2 observations are required to fit a profile, got {len(observations)}"
        )
    p = np.array([o.processors for o in observations], dtype=float)
    t = np.array([o.elapsed_in(unit) for o in observations], dtype=float)
    if np.unique(p).size < 2:
        raise DegenerateObservationsError(
            f"Observations cover a single processor count (P={int(p[0])}); cannot fit a scaling exponent"
        )

    a0, b0 = fit_loglog(p, t)
    try:
        popt, _ = curve_fit(
            _power_law, p, t,
            p0=[a0, b0],
            maxfev=10000,
            ftol=1e-12, xtol=1e-12,
        )
        a, b = float(popt[0]), float(popt[1])
        if not (np.isfinite(a) and np.isfinite(b) and a > 0):
            raise RuntimeError(f"non-physical coefficients a={a}, b={b}")
    except (RuntimeError, ValueError) as e:
        logger.warning(f"Non-linear refinement failed ({e}); using log-log estimate")
        a, b = a0, b0

    if b >= 0:
        raise ProfileFitError(
            f"Fitted exponent b={b:.4g} is not negative; the observations do not show scaling"
        )
    residual = float(np.sum((t - _power_law(p, a, b)) ** 2))
    logger.info(f"Fitted profile a={a:.6g} {unit.value}, b={b:.6g} over {len(observations)} observations")
    return ApplicationProfile(
        a=a,
        b=b,
        time_unit=unit,
        fit_residual=residual,
        observed_p_range=(int(p.min()), int(p.max())),
    )


def load_observations(path: Union[str, Path], default_unit=TimeUnit.HOURS) -> list:
    """
    Read timing observations from a delimited file with columns
    ``processors,elapsed,unit`` (``unit`` optional).
    """
    df = pd.read_csv(path, skipinitialspace=True, comment="#")
    missing = {"processors", "elapsed"} - set(df.columns)
    if missing:
        raise ProfileError(f"Observation file {path} lacks columns: {sorted(missing)}")
    if "unit" not in df.columns:
        df["unit"] = TimeUnit.parse(default_unit).value
    return [
        TimingObservation(int(row.processors), float(row.elapsed), TimeUnit.parse(row.unit))
        for row in df.itertuples(index=False)
    ]
