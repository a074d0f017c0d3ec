"""
Placement policies for hybrid (on-premise + cloud) HPC jobs.

Two policies are provided:

- deadline-aware: size each environment to finish within the deadline and
  pick the cheapest feasible placement;
- budget-aware: size each environment to stay within the budget and pick the
  feasible placement with the shortest turnaround.

Both policies size a job from the application profile, snap the fractional
processor count to the node sizes an environment offers, recompute time and
cost from the snapped count, and compare environments.

Example usage::

    from burstadvisor.advisor import AdviceRequest, advise
    from burstadvisor.config import default_environments

    envs = default_environments(price_ratio=1.8, queue_hours=2.0, setup_hours=0.5)
    rec = advise(AdviceRequest("deadline_aware", deadline_hours=10), envs)
    rec.chosen, rec.chosen_plan.total_cost
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .cost import CostModel, total_cost
from .coupled import CoupledModel, ModelDomainError, time_of_cost
from .profile import ApplicationProfile, TimeUnit, eval_time, required_processors
from .utils import parse_node_sizes

logger = logging.getLogger(__name__)

LOCAL = "local"
CLOUD = "cloud"
NONE_FEASIBLE = "none-feasible"

# Objective values closer than this (relative) are ties; ties go to LOCAL.
TIE_TOLERANCE = 1e-9
# Slack on deadline/budget comparisons to absorb floating point noise.
FEASIBILITY_TOLERANCE = 1e-9
# Upper bound on a single allocation.
MAX_PROCESSORS = 10_000_000
# Fractional counts this close (relative) to an integer are treated as that integer.
SNAP_TOLERANCE = 1e-12


class AdviceRequestError(ValueError):
    """Exception raised for malformed advice requests or environment lists"""
    pass


class AllocationError(ModelDomainError):
    """Exception raised when a processor count cannot be allocated"""
    pass


class Objective(str, Enum):
    COST = "cost"
    TURNAROUND = "turnaround"


class Policy(str, Enum):
    DEADLINE_AWARE = "deadline_aware"
    BUDGET_AWARE = "budget_aware"

    @property
    def objective(self) -> Objective:
        return Objective.COST if self is Policy.DEADLINE_AWARE else Objective.TURNAROUND

    @classmethod
    def parse(cls, value) -> "Policy":
        if isinstance(value, Policy):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"deadline": cls.DEADLINE_AWARE, "budget": cls.BUDGET_AWARE}
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise AdviceRequestError(
                f"Unknown policy '{value}'. Available: {[p.value for p in cls]}"
            ) from None


class Rounding(str, Enum):
    DOWN_FOR_BUDGET = "down_for_budget"
    UP_FOR_DEADLINE = "up_for_deadline"


@dataclass(frozen=True)
class Environment:
    """
    An execution venue.

    Attributes:
        name: Label, usually ``"local"`` or ``"cloud"``
        allowed_node_sizes: Processors-per-node values the venue offers, ascending, starting at 1
        profile: Application profile on this venue (stored in hours)
        cost: Cost model of the venue
        overhead_hours: Queue wait (local) or provisioning time (cloud)
        bill_overhead: Whether the overhead time is charged
    """
    name: str
    allowed_node_sizes: Tuple[int, ...]
    profile: ApplicationProfile
    cost: CostModel
    overhead_hours: float = 0.0
    bill_overhead: bool = False

    def __post_init__(self):
        sizes = parse_node_sizes(self.allowed_node_sizes)
        if not sizes:
            raise AdviceRequestError(f"Environment '{self.name}' offers no node sizes")
        if sizes[0] != 1:
            raise AdviceRequestError(
                f"Environment '{self.name}' must offer single-processor nodes (smallest size is {sizes[0]})"
            )
        if not (math.isfinite(self.overhead_hours) and self.overhead_hours >= 0):
            raise AdviceRequestError(f"overhead_hours must be non-negative, got {self.overhead_hours}")
        object.__setattr__(self, "allowed_node_sizes", sizes)
        object.__setattr__(self, "profile", self.profile.to_unit(TimeUnit.HOURS))

    @property
    def max_node_size(self) -> int:
        return self.allowed_node_sizes[-1]

    @cached_property
    def coupled(self) -> CoupledModel:
        return CoupledModel(self.profile, self.cost)

    def with_overhead(self, hours: float) -> "Environment":
        return replace(self, overhead_hours=hours)

    def with_ratio(self, k: float) -> "Environment":
        return replace(self, cost=self.cost.with_ratio(k))


@dataclass(frozen=True)
class AdviceRequest:
    """User constraints: a deadline (hours) or a budget (currency)"""
    policy: Policy
    deadline_hours: Optional[float] = None
    budget: Optional[float] = None

    def __post_init__(self):
        policy = Policy.parse(self.policy)
        object.__setattr__(self, "policy", policy)
        if policy is Policy.DEADLINE_AWARE:
            if self.deadline_hours is None:
                raise AdviceRequestError("deadline-aware requests require deadline_hours")
            if not self.deadline_hours > 0:
                raise AdviceRequestError(f"deadline_hours must be positive, got {self.deadline_hours}")
        else:
            if self.budget is None:
                raise AdviceRequestError("budget-aware requests require a budget")
            if not self.budget > 0:
                raise AdviceRequestError(f"budget must be positive, got {self.budget}")

    @property
    def objective(self) -> Objective:
        return self.policy.objective

    @property
    def limit(self) -> float:
        """The constrained quantity: deadline for deadline-aware, budget for budget-aware."""
        return self.deadline_hours if self.policy is Policy.DEADLINE_AWARE else self.budget

    @property
    def rounding(self) -> Rounding:
        if self.policy is Policy.DEADLINE_AWARE:
            return Rounding.UP_FOR_DEADLINE
        return Rounding.DOWN_FOR_BUDGET


@dataclass(frozen=True)
class PlacementPlan:
    """Sized placement of one job on one environment"""
    environment: str
    proc_per_node: Tuple[int, ...]
    total_processors: int
    execution_time_hours: float
    turnaround_hours: float
    total_cost: float
    feasible: bool
    billed_hours: float
    extrapolated: bool = False

    def objective_value(self, objective: Objective) -> float:
        if Objective(objective) is Objective.COST:
            return self.total_cost
        return self.turnaround_hours

    def to_dict(self) -> Dict[str, Any]:
        return {
            "environment": self.environment,
            "proc_per_node": list(self.proc_per_node),
            "total_processors": self.total_processors,
            "execution_time_hours": self.execution_time_hours,
            "turnaround_hours": self.turnaround_hours,
            "billed_hours": self.billed_hours,
            "total_cost": self.total_cost,
            "feasible": self.feasible,
            "extrapolated": self.extrapolated,
        }


@dataclass(frozen=True)
class Recommendation:
    """
    Outcome of a policy run.

    ``chosen`` is the recommended environment or :data:`NONE_FEASIBLE`; in the
    latter case ``closest`` names the plan nearest to meeting the constraint.
    """
    request: AdviceRequest
    plans: Tuple[PlacementPlan, ...]
    chosen: str
    closest: Optional[str] = None

    @property
    def objective(self) -> Objective:
        return self.request.objective

    @property
    def feasible(self) -> bool:
        return self.chosen != NONE_FEASIBLE

    def plan(self, environment: str) -> PlacementPlan:
        for p in self.plans:
            if p.environment == environment:
                return p
        raise KeyError(f"No plan for environment '{environment}'")

    @property
    def chosen_plan(self) -> Optional[PlacementPlan]:
        return self.plan(self.chosen) if self.feasible else None

    @property
    def decision_plan(self) -> PlacementPlan:
        """The chosen plan, or the closest plan when nothing is feasible."""
        return self.plan(self.chosen if self.feasible else self.closest)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "policy": self.request.policy.value,
            "deadline_hours": self.request.deadline_hours,
            "budget": self.request.budget,
            "objective": self.objective.value,
            "chosen": self.chosen,
            "closest": self.closest,
            "plans": [p.to_dict() for p in self.plans],
        }


@dataclass(frozen=True)
class RelativeOutcome:
    """Relative difference of the best objective value against the local one"""
    value: float
    objective: Objective
    local_value: float
    best_value: float


def distribute_processors(n: float, sizes: Sequence[int], rounding) -> List[int]:
    """
    Spread ``n`` processors over nodes of the allowed sizes.

    Nodes are filled at the largest size; a non-zero remainder becomes one
    more node of the largest allowed size not above it (``down_for_budget``)
    or the smallest allowed size not below it (``up_for_deadline``).

    Args:
        n: Fractional processor count, positive
        sizes: Allowed processors-per-node values
        rounding: A :class:`Rounding` mode

    Returns:
        The processors-per-node vector. Never empty: when down-rounding leaves
        nothing, a single node of the smallest size is returned.
    """
    rounding = Rounding(rounding)
    if not (n > 0 and math.isfinite(n)):
        raise AllocationError(f"processor count must be positive and finite, got {n}")
    if n > MAX_PROCESSORS:
        raise AllocationError(f"processor count {n:.4g} exceeds the allocation limit {MAX_PROCESSORS}")
    sizes = parse_node_sizes(sizes)
    nearest = round(n)
    if nearest > 0 and math.isclose(n, nearest, rel_tol=SNAP_TOLERANCE):
        n = nearest

    largest = sizes[-1]
    full = int(n // largest)
    remainder = n - full * largest
    nodes = [largest] * full
    if remainder > 0:
        if rounding is Rounding.UP_FOR_DEADLINE:
            nodes.append(sizes[bisect.bisect_left(sizes, remainder)])
        else:
            idx = bisect.bisect_right(sizes, remainder) - 1
            if idx >= 0:
                nodes.append(sizes[idx])
    if not nodes:
        nodes = [sizes[0]]
    return nodes


def _meets(request: AdviceRequest, turnaround: float, cost: float) -> bool:
    value = turnaround if request.policy is Policy.DEADLINE_AWARE else cost
    return value <= request.limit * (1.0 + FEASIBILITY_TOLERANCE)


def _build_plan(env: Environment, nodes: Sequence[int], request: AdviceRequest,
                force_infeasible: bool = False) -> PlacementPlan:
    total = int(sum(nodes))
    execution = eval_time(env.profile, total)
    turnaround = env.overhead_hours + execution
    billed = execution + (env.overhead_hours if env.bill_overhead else 0.0)
    cost = total_cost(env.cost, total, billed)
    return PlacementPlan(
        environment=env.name,
        proc_per_node=tuple(int(x) for x in nodes),
        total_processors=total,
        execution_time_hours=execution,
        turnaround_hours=turnaround,
        total_cost=cost,
        feasible=(not force_infeasible) and _meets(request, turnaround, cost),
        billed_hours=billed,
        extrapolated=env.profile.is_extrapolated(total),
    )


def plan_for_processors(env: Environment, processors: float, request: AdviceRequest) -> PlacementPlan:
    """
    Plan for an explicit processor count.

    The count is snapped to node sizes with the request's rounding, then time,
    cost and feasibility are recomputed from the environment's profile.
    """
    nodes = distribute_processors(processors, env.allowed_node_sizes, request.rounding)
    return _build_plan(env, nodes, request)


def _check_inputs(request: AdviceRequest, environments: Sequence[Environment], policy: Policy):
    if not isinstance(request, AdviceRequest):
        raise AdviceRequestError(f"Expected an AdviceRequest, got {type(request).__name__}")
    if request.policy is not policy:
        raise AdviceRequestError(f"Request policy is {request.policy.value}, expected {policy.value}")
    if not environments:
        raise AdviceRequestError("At least one environment is required")
    names = [env.name for env in environments]
    if len(set(names)) != len(names):
        raise AdviceRequestError(f"Environment names must be unique, got {names}")


def recommend(request: AdviceRequest, plans: Sequence[PlacementPlan]) -> Recommendation:
    """
    Choose among sized plans.

    The feasible plan with the lowest objective value wins; values within
    :data:`TIE_TOLERANCE` of the best are ties and go to ``local``, otherwise
    to the first environment listed.
    """
    plans = tuple(plans)
    objective = request.objective
    feasible = [p for p in plans if p.feasible]
    if not feasible:
        closest = min(plans, key=lambda p: p.objective_value(
            Objective.TURNAROUND if request.policy is Policy.DEADLINE_AWARE else Objective.COST
        ) / request.limit)
        logger.info(f"No environment meets the {request.policy.value} constraint; closest is {closest.environment}")
        return Recommendation(request=request, plans=plans, chosen=NONE_FEASIBLE, closest=closest.environment)

    best = min(p.objective_value(objective) for p in feasible)
    tied = [p for p in feasible if math.isclose(p.objective_value(objective), best, rel_tol=TIE_TOLERANCE)]
    winner = next((p for p in tied if p.environment == LOCAL), tied[0])
    return Recommendation(request=request, plans=plans, chosen=winner.environment)


def advise_deadline(request: AdviceRequest, environments: Sequence[Environment]) -> Recommendation:
    """
    Deadline-aware placement: the cheapest environment that finishes in time.

    For each environment the execution window is ``deadline - overhead``; the
    profile gives the processors needed for that window, which are rounded up
    to node sizes before time and cost are recomputed.
    """
    _check_inputs(request, environments, Policy.DEADLINE_AWARE)
    plans = []
    for env in environments:
        window = request.deadline_hours - env.overhead_hours
        if window <= 0:
            logger.debug(f"{env.name}: overhead {env.overhead_hours:.4g}h leaves no execution window")
            plans.append(_build_plan(env, [env.allowed_node_sizes[0]], request, force_infeasible=True))
            continue
        n = required_processors(env.profile, window)
        nodes = distribute_processors(n, env.allowed_node_sizes, Rounding.UP_FOR_DEADLINE)
        plans.append(_build_plan(env, nodes, request))
    return recommend(request, plans)


def advise_budget(request: AdviceRequest, environments: Sequence[Environment]) -> Recommendation:
    """
    Budget-aware placement: the fastest environment that stays within budget.

    For each environment the coupled profile-cost model turns the budget into
    an execution time, the profile turns that time into processors, which are
    rounded down to node sizes before time and cost are recomputed.
    """
    _check_inputs(request, environments, Policy.BUDGET_AWARE)
    plans = []
    for env in environments:
        execution = time_of_cost(env.coupled, request.budget)
        n = required_processors(env.profile, execution)
        nodes = distribute_processors(n, env.allowed_node_sizes, Rounding.DOWN_FOR_BUDGET)
        plans.append(_build_plan(env, nodes, request))
    return recommend(request, plans)


def advise(request: AdviceRequest, environments: Sequence[Environment]) -> Recommendation:
    """Run the policy named by the request."""
    if request.policy is Policy.DEADLINE_AWARE:
        return advise_deadline(request, environments)
    return advise_budget(request, environments)


def compare(recommendation: Recommendation) -> RelativeOutcome:
    """
    Relative difference between the best and the local objective value:
    ``(min(values) - local) / local``. Never positive.

    Raises:
        AdviceRequestError: When the local plan is missing or has a zero objective value
    """
    objective = recommendation.objective
    try:
        local_value = recommendation.plan(LOCAL).objective_value(objective)
    except KeyError:
        raise AdviceRequestError("Relative comparison requires a local plan") from None
    if not local_value > 0:
        raise AdviceRequestError(f"Local {objective.value} must be positive, got {local_value}")
    best = min(p.objective_value(objective) for p in recommendation.plans)
    return RelativeOutcome(
        value=(best - local_value) / local_value,
        objective=objective,
        local_value=local_value,
        best_value=best,
    )
