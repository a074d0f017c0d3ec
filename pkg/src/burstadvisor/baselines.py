"""
Reference decision policies the advisor is compared against.

Baselines reuse the advisor's sizing for their environment; only the
placement decision differs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .advisor import CLOUD, LOCAL, Recommendation

logger = logging.getLogger(__name__)


class BaselineError(ValueError):
    """Exception raised for invalid baseline policies"""
    pass


class BaselineKind(str, Enum):
    ALWAYS_LOCAL = "always_local"
    ALWAYS_CLOUD = "always_cloud"
    RANDOM = "random"
    WORST_CASE = "worst_case"


@dataclass(frozen=True)
class BaselinePolicy:
    kind: BaselineKind
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", BaselineKind(self.kind))
        if self.kind is BaselineKind.RANDOM:
            if self.seed is None:
                raise BaselineError("The random baseline requires a seed")
            if int(self.seed) < 0:
                raise BaselineError(f"seed must be non-negative, got {self.seed}")

    @property
    def name(self) -> str:
        return self.kind.value


def default_baselines(seed: int = 0):
    """The four reference policies, in reporting order."""
    return (
        BaselinePolicy(BaselineKind.ALWAYS_LOCAL),
        BaselinePolicy(BaselineKind.ALWAYS_CLOUD),
        BaselinePolicy(BaselineKind.RANDOM, seed=seed),
        BaselinePolicy(BaselineKind.WORST_CASE),
    )


def random_choice(seed: int, index: int) -> str:
    """
    Coin flip between local and cloud as a pure function of ``(seed, index)``.

    A fresh generator is seeded per request index so the outcome does not
    depend on evaluation order.
    """
    rng = np.random.default_rng([int(seed), int(index)])
    return LOCAL if rng.integers(2) == 0 else CLOUD


def decide(policy: BaselinePolicy, recommendation: Recommendation, index: int = 0) -> str:
    """
    Environment a baseline picks for a request the advisor has already sized.

    Args:
        policy: The baseline policy
        recommendation: The advisor's recommendation, with local and cloud plans
        index: Position of the request in a sweep (drives the random baseline)
    """
    names = [p.environment for p in recommendation.plans]
    if LOCAL not in names or CLOUD not in names:
        raise BaselineError(f"Baselines need both '{LOCAL}' and '{CLOUD}' plans, got {names}")

    if policy.kind is BaselineKind.ALWAYS_LOCAL:
        return LOCAL
    if policy.kind is BaselineKind.ALWAYS_CLOUD:
        return CLOUD
    if policy.kind is BaselineKind.RANDOM:
        return random_choice(policy.seed, index)

    # worst case: anything but the advisor's pick
    objective = recommendation.objective
    if recommendation.feasible:
        others = [p for p in recommendation.plans if p.environment != recommendation.chosen]
    else:
        others = list(recommendation.plans)
    worst = max(others, key=lambda p: p.objective_value(objective))
    return worst.environment
