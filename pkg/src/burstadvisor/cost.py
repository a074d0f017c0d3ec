"""
Infrastructure cost models.

Hourly prices are modelled as linear in the processor count, ``dC/dt = alpha * P``,
with the slope ``alpha`` fitted through the origin from a provider price table.
The on-premise cluster is priced as a multiple ``k`` of the cloud rate.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np
import pandas as pd

from .utils import data_path

logger = logging.getLogger(__name__)

# Bundled SoftLayer list-price columns, keyed by memory configuration.
BUNDLED_PRICE_TABLES: Dict[str, str] = {
    "1GB/proc": "softlayer_1gb.csv",
    "2GB/proc": "softlayer_2gb.csv",
    "4GB/proc": "softlayer_4gb.csv",
}


class CostModelError(ValueError):
    """Exception raised for invalid price tables or cost model arguments"""
    pass


class BillingMode(str, Enum):
    CONTINUOUS = "continuous"
    HOURLY = "hourly"


@dataclass(frozen=True)
class PriceTable:
    """Hourly price per node size for one memory configuration"""
    cores: Tuple[int, ...]
    hourly_cost: Tuple[float, ...]
    memory_per_core: str = "4GB/proc"
    currency: str = "USD"

    def __post_init__(self):
        cores = tuple(int(c) for c in self.cores)
        costs = tuple(float(c) for c in self.hourly_cost)
        object.__setattr__(self, "cores", cores)
        object.__setattr__(self, "hourly_cost", costs)
        if len(cores) != len(costs):
            raise CostModelError("cores and hourly_cost must have the same length")
        if any(c < 1 for c in cores) or any(not c > 0 for c in costs):
            raise CostModelError("cores and hourly costs must be positive")
        if any(b <= a for a, b in zip(cores, cores[1:])):
            raise CostModelError("cores must be strictly increasing across rows")
        if any(b <= a for a, b in zip(costs, costs[1:])):
            raise CostModelError("hourly costs must be strictly increasing across rows")

    def __len__(self):
        return len(self.cores)

    @classmethod
    def from_csv(cls, path: Union[str, Path], memory_per_core: str = None,
                 currency: str = "USD") -> "PriceTable":
        """Read a price table with header ``cores,cost_per_hour``."""
        df = pd.read_csv(path, skipinitialspace=True, comment="#")
        missing = {"cores", "cost_per_hour"} - set(df.columns)
        if missing:
            raise CostModelError(f"Price table {path} lacks columns: {sorted(missing)}")
        df = df.sort_values("cores")
        return cls(
            cores=tuple(df["cores"].astype(int)),
            hourly_cost=tuple(df["cost_per_hour"].astype(float)),
            memory_per_core=memory_per_core or Path(path).stem,
            currency=currency,
        )

    @classmethod
    def bundled(cls, memory_per_core: str = "4GB/proc") -> "PriceTable":
        """Load one of the bundled SoftLayer price columns."""
        key = memory_per_core if "/" in memory_per_core else f"{memory_per_core}/proc"
        if key not in BUNDLED_PRICE_TABLES:
            raise CostModelError(
                f"Unknown memory configuration '{memory_per_core}'. "
                f"Available: {list(BUNDLED_PRICE_TABLES)}"
            )
        path = os.path.join(data_path(), "prices", BUNDLED_PRICE_TABLES[key])
        return cls.from_csv(path, memory_per_core=key)


@dataclass(frozen=True)
class CostModel:
    """
    Linear hourly-rate model.

    Attributes:
        alpha: Currency per processor-hour
        k: Price ratio applied on top of ``alpha`` (1.0 for the cloud reference)
        billing: Continuous integration of cost, or whole started hours
    """
    alpha: float
    k: float = 1.0
    billing: BillingMode = BillingMode.CONTINUOUS

    def __post_init__(self):
        object.__setattr__(self, "billing", BillingMode(self.billing))
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise CostModelError(f"alpha must be positive, got {self.alpha}")
        if not (math.isfinite(self.k) and self.k > 0):
            raise CostModelError(f"price ratio k must be positive, got {self.k}")

    @property
    def rate_per_processor(self) -> float:
        return self.k * self.alpha

    def with_ratio(self, k: float) -> "CostModel":
        return replace(self, k=k)


@dataclass(frozen=True)
class AlphaFit:
    """Diagnostics of an hourly-rate fit"""
    alpha: float
    intercept_alpha: float
    intercept_beta: float
    relative_residuals: Tuple[float, ...]

    @property
    def max_relative_residual(self) -> float:
        return max(abs(r) for r in self.relative_residuals)


def fit_alpha_report(table: PriceTable) -> AlphaFit:
    """
    Fit the hourly rate slope through the origin and report diagnostics.

    The offset of the general linear form ``alpha * P + beta`` is dropped; the
    unconstrained fit is still computed so its intercept can be inspected.
    """
    if len(table) < 2:
        raise CostModelError(f"At least 2 price rows are required, got {len(table)}")
    p = np.asarray(table.cores, dtype=float)
    c = np.asarray(table.hourly_cost, dtype=float)
    alpha = float(np.dot(p, c) / np.dot(p, p))
    slope, intercept = np.polyfit(p, c, 1)
    residuals = tuple(float(r) for r in (alpha * p - c) / c)
    logger.debug(f"alpha={alpha:.6g} ({table.memory_per_core}); unconstrained beta={intercept:.4g}")
    return AlphaFit(
        alpha=alpha,
        intercept_alpha=float(slope),
        intercept_beta=float(intercept),
        relative_residuals=residuals,
    )


def fit_alpha(table: PriceTable) -> float:
    """Least-squares slope of hourly cost against cores, constrained through the origin."""
    return fit_alpha_report(table).alpha


def hourly_rate(model: CostModel, processors: int) -> float:
    """Hourly price of ``processors`` processors: ``k * alpha * P``."""
    if not processors >= 1:
        raise CostModelError(f"processors must be at least 1, got {processors}")
    return model.k * model.alpha * processors


def billed_hours(model: CostModel, turnaround: float) -> float:
    """Hours charged for a run of ``turnaround`` hours under the model's billing mode."""
    if model.billing is BillingMode.HOURLY:
        return float(math.ceil(turnaround - 1e-12)) if turnaround > 0 else 0.0
    return float(turnaround)


def total_cost(model: CostModel, processors: int, turnaround: float) -> float:
    """
    Total cost of holding ``processors`` processors for ``turnaround`` hours.

    Raises:
        CostModelError: If ``turnaround`` is not positive
    """
    if not turnaround > 0:
        raise CostModelError(f"turnaround must be positive, got {turnaround}")
    return billed_hours(model, turnaround) * hourly_rate(model, processors)
