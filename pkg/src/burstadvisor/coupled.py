"""
Coupled profile-cost model.

Composing the hourly rate ``dC/dt = k * alpha * P`` with the inverted profile
``P(t) = (t / a)**(1 / b)`` and integrating over ``[0, T]`` gives the cost of a
turnaround ``T`` in closed form::

    C(T) = k * alpha * a * (T / a)**x / x,    x = 1 + 1/b

The integral only converges for ``x > 0``, i.e. ``b < -1`` for scaling profiles.

Note that this prices a continuously varying allocation, while final plan
costs use the fixed-P form ``C = T * k * alpha * P``. The budget policy uses
the coupled model to derive an execution time and the fixed-P form for the
reported cost.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .cost import CostModel
from .profile import ApplicationProfile, TimeUnit

logger = logging.getLogger(__name__)


class ModelDomainError(ValueError):
    """Exception raised when a model is evaluated outside its mathematical domain"""
    pass


@dataclass(frozen=True)
class CoupledModel:
    """Profile and cost model of one environment, with times in hours"""
    profile: ApplicationProfile
    cost: CostModel

    def __post_init__(self):
        object.__setattr__(self, "profile", self.profile.to_unit(TimeUnit.HOURS))
        if not self.exponent > 0:
            raise ModelDomainError(
                f"Coupled cost model requires 1 + 1/b > 0 (b < -1); got b={self.profile.b}. "
                "Profiles with b in [-1, 0) make the cost integral diverge."
            )

    @property
    def exponent(self) -> float:
        return 1.0 + 1.0 / self.profile.b

    @property
    def scale(self) -> float:
        """Cost of a turnaround equal to ``a``."""
        return self.cost.k * self.cost.alpha * self.profile.a / self.exponent


def cost_of_time(model: CoupledModel, turnaround: float) -> float:
    """
    Cost accumulated over ``turnaround`` hours under the coupled model.

    Raises:
        ModelDomainError: If ``turnaround`` is not positive
    """
    if not turnaround > 0:
        raise ModelDomainError(f"turnaround must be positive, got {turnaround}")
    return model.scale * (turnaround / model.profile.a) ** model.exponent


def time_of_cost(model: CoupledModel, budget: float) -> float:
    """
    Turnaround (hours) whose coupled cost equals ``budget``; inverse of :func:`cost_of_time`.

    Raises:
        ModelDomainError: If ``budget`` is not positive
    """
    if not budget > 0:
        raise ModelDomainError(f"budget must be positive, got {budget}")
    return model.profile.a * (budget / model.scale) ** (1.0 / model.exponent)
