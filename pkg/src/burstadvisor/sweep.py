"""
Evaluation harness.

Runs both placement policies and the reference baselines over a grid of
deadlines, budgets, queue and setup times and price ratios, aggregates the
relative differences per price ratio, and measures how often decisions change
when the profile-derived processor counts are wrong by a fixed relative error.

All outputs are deterministic functions of the configuration: grid points are
visited in a fixed order and the random baseline depends only on the seed and
the grid-point index.

Example usage::

    from burstadvisor.sweep import SweepConfig, run_sweep, results_frame, aggregate_by_ratio

    config = SweepConfig.default()
    results = run_sweep(config)
    frame = results_frame(results)
    aggregate_by_ratio(frame, "deadline_aware")
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from .advisor import (
    CLOUD,
    LOCAL,
    AdviceRequest,
    Environment,
    Policy,
    Recommendation,
    advise,
    compare,
    plan_for_processors,
    recommend,
)
from .baselines import BaselinePolicy, decide, default_baselines
from .cost import BillingMode
from .profile import ProfileError, TimeUnit
from .utils import data_path, fingerprint

logger = logging.getLogger(__name__)

ADVISOR = "advisor"

# Input ranges the harness is calibrated for; wider grids need allow_out_of_range.
SUPPORTED_RANGES: Dict[str, Tuple[float, float]] = {
    "deadline_hours": (1.0, 100.0),
    "budget": (10.0, 100.0),
    "queue_fraction": (0.01, 0.50),
    "setup_fraction": (0.01, 0.50),
    "price_ratio": (0.7, 3.4),
}

AXES = tuple(SUPPORTED_RANGES)

DEFAULT_GRID_SIZES: Dict[str, int] = {
    "deadline_hours": 10,
    "budget": 10,
    "queue_fraction": 7,
    "setup_fraction": 5,
    "price_ratio": 8,
}

# Price ratios the harness reports on, including 1.8 and 2.2.
DEFAULT_PRICE_RATIOS: Tuple[float, ...] = (0.7, 1.0, 1.4, 1.8, 2.2, 2.6, 3.0, 3.4)

DEFAULT_ERRORS: Tuple[float, ...] = (-0.9, -0.5, -0.1, 0.1, 0.5, 0.9)
ERROR_RANGE: Tuple[float, float] = (-0.9, 1.0)

RAW_RESULTS_FILE = "raw_results.csv"
AGGREGATE_FILES = {
    Policy.DEADLINE_AWARE: "deadline_by_ratio.csv",
    Policy.BUDGET_AWARE: "budget_by_ratio.csv",
}
SENSITIVITY_RAW_FILE = "sensitivity_raw.csv"
SENSITIVITY_TABLE_FILE = "sensitivity_table.csv"

SUMMARY_FLOAT_FORMAT = "%.10g"


class SweepError(ValueError):
    """Exception raised for invalid sweep inputs"""
    pass


class SweepConfigError(SweepError):
    """Exception raised for invalid sweep configurations"""
    pass


def k_from_cloud_fraction(cloud_fraction: float) -> float:
    """
    Convert "cloud price as a fraction of local price" to the local multiplier K.

    The harness sweeps K directly (local hourly rate = K x cloud rate); this is
    the single place where the reciprocal framing is translated.
    """
    if not cloud_fraction > 0:
        raise SweepConfigError(f"price fraction must be positive, got {cloud_fraction}")
    return 1.0 / cloud_fraction


@dataclass(frozen=True)
class GridAxis:
    """
    Values of one sweep dimension: ``points`` linearly spaced values between
    ``min`` and ``max``, or the explicit ``levels`` when given.
    """
    min: float
    max: float
    points: int
    levels: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.levels:
            levels = tuple(float(v) for v in self.levels)
            if any(b <= a for a, b in zip(levels, levels[1:])):
                raise SweepConfigError(f"grid axis levels must be strictly increasing, got {list(levels)}")
            object.__setattr__(self, "levels", levels)
            object.__setattr__(self, "min", levels[0])
            object.__setattr__(self, "max", levels[-1])
            object.__setattr__(self, "points", len(levels))
            return
        if int(self.points) != self.points or self.points < 1:
            raise SweepConfigError(f"grid axis needs at least one point, got {self.points}")
        if self.max < self.min:
            raise SweepConfigError(f"grid axis max {self.max} is below min {self.min}")
        object.__setattr__(self, "points", int(self.points))
        object.__setattr__(self, "min", float(self.min))
        object.__setattr__(self, "max", float(self.max))

    @classmethod
    def of(cls, levels: Sequence[float]) -> "GridAxis":
        levels = tuple(levels)
        if not levels:
            raise SweepConfigError("grid axis needs at least one level")
        return cls(levels[0], levels[-1], len(levels), levels)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GridAxis":
        if "levels" in data:
            return cls.of(data["levels"])
        return cls(data["min"], data["max"], data["points"])

    def to_dict(self) -> Dict[str, Any]:
        if self.levels:
            return {"levels": list(self.levels)}
        return {"min": self.min, "max": self.max, "points": self.points}

    def with_points(self, points: int) -> "GridAxis":
        """Linearly spaced axis over the same range; explicit levels are kept only if the count matches."""
        if self.levels and int(points) == len(self.levels):
            return self
        return GridAxis(self.min, self.max, int(points))

    def values(self) -> Tuple[float, ...]:
        if self.levels:
            return self.levels
        if self.points == 1:
            return (self.min,)
        return tuple(float(v) for v in np.linspace(self.min, self.max, self.points))


def _default_axis(name: str) -> GridAxis:
    if name == "price_ratio":
        return GridAxis.of(DEFAULT_PRICE_RATIOS)
    low, high = SUPPORTED_RANGES[name]
    return GridAxis(low, high, DEFAULT_GRID_SIZES[name])


@dataclass(frozen=True)
class SweepConfig:
    """
    Sweep grid and environment switches.

    Queue and setup times are fractions of the deadline; ``price_ratio`` is
    the local multiplier K. The product of the axis sizes is the number of
    evaluations per policy. ``profile_time_unit``, when set, is the unit the
    profiles' ``a`` coefficients are read in, overriding the unit recorded
    with them.
    """
    deadline_hours: GridAxis = field(default_factory=lambda: _default_axis("deadline_hours"))
    budget: GridAxis = field(default_factory=lambda: _default_axis("budget"))
    queue_fraction: GridAxis = field(default_factory=lambda: _default_axis("queue_fraction"))
    setup_fraction: GridAxis = field(default_factory=lambda: _default_axis("setup_fraction"))
    price_ratio: GridAxis = field(default_factory=lambda: _default_axis("price_ratio"))
    seed: int = 2015
    memory_per_core: str = "4GB/proc"
    bill_queue: bool = False
    bill_setup: bool = True
    billing: BillingMode = BillingMode.CONTINUOUS
    allow_out_of_range: bool = False
    profile_time_unit: Optional[TimeUnit] = TimeUnit.HOURS

    def __post_init__(self):
        object.__setattr__(self, "billing", BillingMode(self.billing))
        if self.profile_time_unit is not None:
            try:
                object.__setattr__(self, "profile_time_unit", TimeUnit.parse(self.profile_time_unit))
            except ProfileError as e:
                raise SweepConfigError(str(e)) from e
        if int(self.seed) < 0:
            raise SweepConfigError(f"seed must be non-negative, got {self.seed}")
        for name in AXES:
            axis = getattr(self, name)
            if axis.min <= 0:
                raise SweepConfigError(f"{name} values must be positive, got min={axis.min}")
            if name.endswith("_fraction") and axis.max >= 1:
                raise SweepConfigError(f"{name} must stay below 1, got max={axis.max}")
            low, high = SUPPORTED_RANGES[name]
            if not self.allow_out_of_range and (axis.min < low - 1e-12 or axis.max > high + 1e-12):
                raise SweepConfigError(
                    f"{name} range [{axis.min}, {axis.max}] is outside the supported range "
                    f"[{low}, {high}]; set allow_out_of_range to sweep it anyway"
                )

    @classmethod
    def default(cls) -> "SweepConfig":
        return cls.from_file(Path(data_path()) / "sweep_default.json")

    @property
    def grid_sizes(self) -> Dict[str, int]:
        return {name: getattr(self, name).points for name in AXES}

    @property
    def total_points(self) -> int:
        return int(np.prod(list(self.grid_sizes.values())))

    def points(self) -> Iterator["GridPoint"]:
        """Grid points in a fixed order, with consecutive indices."""
        axes = [getattr(self, name).values() for name in AXES]
        for index, values in enumerate(itertools.product(*axes)):
            yield GridPoint(index, *values)

    def with_grid_sizes(self, sizes: Union[Sequence[int], Dict[str, int]]) -> "SweepConfig":
        if not isinstance(sizes, dict):
            sizes = list(sizes)
            if len(sizes) != len(AXES):
                raise SweepConfigError(f"expected {len(AXES)} grid sizes ({', '.join(AXES)}), got {len(sizes)}")
            sizes = dict(zip(AXES, sizes))
        changes = {name: getattr(self, name).with_points(n) for name, n in sizes.items()}
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        data = {name: getattr(self, name).to_dict() for name in AXES}
        data.update(
            seed=int(self.seed),
            memory_per_core=self.memory_per_core,
            bill_queue=self.bill_queue,
            bill_setup=self.bill_setup,
            billing=self.billing.value,
            allow_out_of_range=self.allow_out_of_range,
            profile_time_unit=self.profile_time_unit.value if self.profile_time_unit else None,
        )
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SweepConfig":
        known = set(AXES) | {
            "seed", "memory_per_core", "bill_queue", "bill_setup", "billing", "allow_out_of_range", "profile_time_unit",
        }
        unknown = set(data) - known
        if unknown:
            raise SweepConfigError(f"Unknown sweep configuration keys: {sorted(unknown)}")
        kwargs = dict(data)
        for name in AXES:
            if name in kwargs:
                axis = kwargs[name]
                try:
                    kwargs[name] = GridAxis.from_dict(axis)
                except (KeyError, TypeError) as e:
                    raise SweepConfigError(f"Axis '{name}' needs min, max and points, or levels: {axis!r}") from e
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SweepConfig":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def fingerprint(self) -> str:
        return fingerprint(self.to_dict())


@dataclass(frozen=True)
class GridPoint:
    index: int
    deadline_hours: float
    budget: float
    queue_fraction: float
    setup_fraction: float
    price_ratio: float

    @property
    def queue_hours(self) -> float:
        return self.queue_fraction * self.deadline_hours

    @property
    def setup_hours(self) -> float:
        return self.setup_fraction * self.deadline_hours

    def request(self, policy: Policy) -> AdviceRequest:
        if policy is Policy.DEADLINE_AWARE:
            return AdviceRequest(policy, deadline_hours=self.deadline_hours)
        return AdviceRequest(policy, budget=self.budget)


@dataclass(frozen=True)
class PolicyOutcome:
    """What one decision policy picked at one grid point"""
    chosen: str
    cost: float
    turnaround_hours: float
    objective_value: float
    feasible: bool
    relative: float


@dataclass(frozen=True)
class SweepResult:
    """
    One grid point evaluated under one advisor policy.

    ``relative`` values are relative to the always-local decision; they are
    excluded from aggregates when ``feasible`` is False (the advisor found no
    feasible placement). The advisor's value is the better of the two plans
    against local, so it lies in [-1, 0].
    """
    point: GridPoint
    policy: Policy
    feasible: bool
    per_policy: Dict[str, PolicyOutcome]


@dataclass(frozen=True)
class SensitivityRecord:
    """Decision with an accurate versus an error-injected profile at one grid point"""
    index: int
    policy: Policy
    error: float
    accurate_choice: str
    inaccurate_choice: str
    same_decision: bool
    relative_delta: float


def base_environments(config: SweepConfig) -> Tuple[Environment, Environment]:
    from .config import default_environments
    return default_environments(
        memory_per_core=config.memory_per_core,
        bill_queue=config.bill_queue,
        bill_setup=config.bill_setup,
        billing=config.billing,
        profile_time_unit=config.profile_time_unit,
    )


def environments_at(point: GridPoint, environments: Sequence[Environment]) -> List[Environment]:
    """Apply a grid point's price ratio, queue and setup times to the base environments."""
    placed = []
    for env in environments:
        if env.name == LOCAL:
            placed.append(replace(env, overhead_hours=point.queue_hours, cost=env.cost.with_ratio(point.price_ratio)))
        elif env.name == CLOUD:
            placed.append(env.with_overhead(point.setup_hours))
        else:
            placed.append(env)
    return placed


def _outcome(rec: Recommendation, environment: str, chosen: str, local_value: float) -> PolicyOutcome:
    plan = rec.plan(environment)
    value = plan.objective_value(rec.objective)
    return PolicyOutcome(
        chosen=chosen,
        cost=plan.total_cost,
        turnaround_hours=plan.turnaround_hours,
        objective_value=value,
        feasible=plan.feasible,
        relative=(value - local_value) / local_value,
    )


def evaluate_point(point: GridPoint, policy: Policy, environments: Sequence[Environment],
                   baselines: Sequence[BaselinePolicy]) -> SweepResult:
    """Advisor and baselines at one grid point."""
    rec = advise(point.request(policy), environments_at(point, environments))
    local_value = rec.plan(LOCAL).objective_value(rec.objective)
    advisor_env = rec.chosen if rec.feasible else rec.closest
    # best plan against local, whether or not local meets the constraint
    advisor = replace(_outcome(rec, advisor_env, rec.chosen, local_value), relative=compare(rec).value)
    per_policy = {ADVISOR: advisor}
    for baseline in baselines:
        env = decide(baseline, rec, index=point.index)
        per_policy[baseline.name] = _outcome(rec, env, env, local_value)
    return SweepResult(point=point, policy=policy, feasible=rec.feasible, per_policy=per_policy)


def _check_environments(environments: Sequence[Environment]):
    names = {env.name for env in environments}
    if not {LOCAL, CLOUD} <= names:
        raise SweepError(f"Sweeps need '{LOCAL}' and '{CLOUD}' environments, got {sorted(names)}")


def run_sweep(
    config: SweepConfig,
    environments: Optional[Sequence[Environment]] = None,
    policies: Sequence[Policy] = (Policy.DEADLINE_AWARE, Policy.BUDGET_AWARE),
    baselines: Optional[Sequence[BaselinePolicy]] = None,
    show_progress: bool = False,
) -> List[SweepResult]:
    """
    Evaluate every grid point under each advisor policy and every baseline.

    Args:
        config: Grid and switches
        environments: Base local and cloud environments (defaults built from ``config``)
        policies: Advisor policies to run
        baselines: Reference policies (defaults to the four standard ones seeded from ``config``)
        show_progress: Display a tqdm progress bar

    Returns:
        Results ordered by grid point, then policy
    """
    if config.total_points < 1:
        raise SweepConfigError("The sweep grid has no points")
    environments = tuple(environments) if environments else base_environments(config)
    _check_environments(environments)
    baselines = tuple(baselines) if baselines is not None else default_baselines(config.seed)
    policies = [Policy.parse(p) for p in policies]

    results = []
    points = config.points()
    if show_progress:
        points = tqdm(points, total=config.total_points, desc="Sweeping grid")
    for point in points:
        for policy in policies:
            results.append(evaluate_point(point, policy, environments, baselines))
    logger.info(f"Evaluated {config.total_points} grid points x {len(policies)} policies")
    return results


def results_frame(results: Sequence[SweepResult]) -> pd.DataFrame:
    """One row per (grid point, advisor policy, decision policy)."""
    rows = []
    for result in results:
        p = result.point
        for name, outcome in result.per_policy.items():
            rows.append({
                "index": p.index,
                "advisor_policy": result.policy.value,
                "deadline_hours": p.deadline_hours,
                "budget": p.budget,
                "queue_fraction": p.queue_fraction,
                "setup_fraction": p.setup_fraction,
                "price_ratio": p.price_ratio,
                "queue_hours": p.queue_hours,
                "setup_hours": p.setup_hours,
                "point_feasible": result.feasible,
                "decision_policy": name,
                "chosen": outcome.chosen,
                "cost": outcome.cost,
                "turnaround_hours": outcome.turnaround_hours,
                "objective_value": outcome.objective_value,
                "plan_feasible": outcome.feasible,
                "relative": outcome.relative,
            })
    return pd.DataFrame(rows)


def _as_frame(results) -> pd.DataFrame:
    if isinstance(results, pd.DataFrame):
        return results
    return results_frame(list(results))


def aggregate_by_ratio(results, advisor_policy) -> pd.DataFrame:
    """
    Distribution of relative metrics per price ratio and decision policy.

    Columns: ``price_ratio``, ``decision_policy``, ``count``, ``excluded``,
    ``min``, ``q1``, ``median``, ``mean``, ``q3``, ``max`` and
    ``local_chosen_fraction``, the share of included points where the advisor
    placed the job locally (local cheapest for the deadline policy, local
    fastest for the budget policy).

    Raises:
        SweepError: If there are no results for ``advisor_policy``
    """
    policy = Policy.parse(advisor_policy)
    df = _as_frame(results)
    if df.empty:
        raise SweepError("No sweep results to aggregate")
    df = df[df["advisor_policy"] == policy.value]
    if df.empty:
        raise SweepError(f"No sweep results for {policy.value}")

    decision_policies = list(dict.fromkeys(df["decision_policy"]))
    rows = []
    for ratio in sorted(df["price_ratio"].unique()):
        bucket = df[df["price_ratio"] == ratio]
        included = bucket[bucket["point_feasible"]]
        advisor_rows = included[included["decision_policy"] == ADVISOR]
        local_fraction = float((advisor_rows["chosen"] == LOCAL).mean()) if len(advisor_rows) else float("nan")
        for name in decision_policies:
            values = included.loc[included["decision_policy"] == name, "relative"].to_numpy(dtype=float)
            excluded = int(((bucket["decision_policy"] == name) & ~bucket["point_feasible"]).sum())
            if values.size:
                q = np.quantile(values, [0.0, 0.25, 0.5, 0.75, 1.0])
                stats = dict(min=q[0], q1=q[1], median=q[2], mean=float(values.mean()), q3=q[3], max=q[4])
            else:
                stats = dict.fromkeys(["min", "q1", "median", "mean", "q3", "max"], float("nan"))
            rows.append({
                "price_ratio": float(ratio),
                "decision_policy": name,
                "count": int(values.size),
                "excluded": excluded,
                **{k: float(v) for k, v in stats.items()},
                "local_chosen_fraction": local_fraction,
            })
    return pd.DataFrame(rows)


def summarize(results) -> Dict[str, Any]:
    """
    Headline numbers of a sweep: evaluation counts, infeasible counts, the
    first price ratio at which the advisor places the majority of jobs in the
    cloud, and the local share at the ratios closest to 1.8 and 2.2.
    """
    df = _as_frame(results)
    summary: Dict[str, Any] = {}
    for policy in dict.fromkeys(df["advisor_policy"]):
        advisor_rows = df[(df["advisor_policy"] == policy) & (df["decision_policy"] == ADVISOR)]
        agg = aggregate_by_ratio(df, policy)
        by_ratio = agg[agg["decision_policy"] == ADVISOR].set_index("price_ratio")["local_chosen_fraction"]
        cloud_majority = [r for r, frac in by_ratio.items() if frac < 0.5]
        ratios = np.asarray(by_ratio.index, dtype=float)

        def _nearest(target):
            r = float(ratios[np.argmin(np.abs(ratios - target))])
            return {"price_ratio": r, "local_fraction": float(by_ratio[r])}

        summary[policy] = {
            "evaluations": int(len(advisor_rows)),
            "infeasible": int((~advisor_rows["point_feasible"]).sum()),
            "crossover_ratio": float(cloud_majority[0]) if cloud_majority else None,
            "near_1.8": _nearest(1.8),
            "near_2.2": _nearest(2.2),
        }
    return summary


def _write_table(df: pd.DataFrame, path: Path, config_fingerprint: str, float_format: Optional[str] = None):
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"# config_sha256={config_fingerprint}\n")
        df.to_csv(f, index=False, float_format=float_format, lineterminator="\n")


def load_results(path: Union[str, Path]) -> pd.DataFrame:
    """Read a raw results file written by :func:`write_sweep_outputs`."""
    return pd.read_csv(path, comment="#", float_precision="round_trip")


def write_sweep_outputs(results, config: SweepConfig, output_dir: Union[str, Path]) -> Dict[str, Path]:
    """
    Write the raw results and one aggregate file per advisor policy.

    Every file starts with a ``# config_sha256=...`` line.
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    df = _as_frame(results)
    digest = config.fingerprint()
    paths = {"raw": output_dir / RAW_RESULTS_FILE}
    _write_table(df, paths["raw"], digest)
    for policy, filename in AGGREGATE_FILES.items():
        if (df["advisor_policy"] == policy.value).any():
            paths[policy.value] = output_dir / filename
            _write_table(aggregate_by_ratio(df, policy), paths[policy.value], digest, SUMMARY_FLOAT_FORMAT)
    logger.info(f"Wrote sweep outputs to {output_dir}")
    return paths


def inject_error(plan_processor_count: int, error: float) -> int:
    """
    Processor count a profile with relative ``error`` would have produced:
    ``round(count * (1 + error))``, at least 1.

    Raises:
        SweepError: If ``error`` is outside [-0.9, 1.0]
    """
    low, high = ERROR_RANGE
    if not (low - 1e-12 <= error <= high + 1e-12):
        raise SweepError(f"error must lie in [{low}, {high}], got {error}")
    if plan_processor_count < 1:
        raise SweepError(f"processor count must be positive, got {plan_processor_count}")
    return max(1, int(math.floor(plan_processor_count * (1.0 + error) + 0.5)))


def _inaccurate_recommendation(rec: Recommendation, environments: Sequence[Environment],
                               error: float) -> Recommendation:
    request = rec.request
    plans = []
    for env in environments:
        plan = rec.plan(env.name)
        if request.policy is Policy.DEADLINE_AWARE and request.deadline_hours - env.overhead_hours <= 0:
            plans.append(plan)
            continue
        count = inject_error(plan.total_processors, error)
        plans.append(plan_for_processors(env, count, request))
    return recommend(request, plans)


def run_sensitivity(
    config: SweepConfig,
    errors: Sequence[float] = DEFAULT_ERRORS,
    environments: Optional[Sequence[Environment]] = None,
    policies: Sequence[Policy] = (Policy.DEADLINE_AWARE, Policy.BUDGET_AWARE),
    show_progress: bool = False,
) -> List[SensitivityRecord]:
    """
    Compare advisor decisions made with accurate and error-injected profiles.

    For every grid point and policy the accurate recommendation is computed
    once. For each error, every environment's processor count is scaled by
    ``1 + error``, snapped to node sizes, and time and cost are re-evaluated
    with the accurate profile, i.e. the run time the mis-sized allocation
    would really have. The relative delta compares the objective value of the
    resulting decision against the accurate one.
    """
    errors = [float(e) for e in errors]
    for e in errors:
        inject_error(1, e)
    if not errors:
        raise SweepError("At least one error level is required")
    environments = tuple(environments) if environments else base_environments(config)
    _check_environments(environments)
    policies = [Policy.parse(p) for p in policies]

    records = []
    points = config.points()
    if show_progress:
        points = tqdm(points, total=config.total_points, desc="Sensitivity grid")
    for point in points:
        placed = environments_at(point, environments)
        for policy in policies:
            accurate = advise(point.request(policy), placed)
            accurate_value = accurate.decision_plan.objective_value(accurate.objective)
            for error in errors:
                inaccurate = _inaccurate_recommendation(accurate, placed, error)
                value = inaccurate.decision_plan.objective_value(inaccurate.objective)
                records.append(SensitivityRecord(
                    index=point.index,
                    policy=policy,
                    error=error,
                    accurate_choice=accurate.chosen,
                    inaccurate_choice=inaccurate.chosen,
                    same_decision=inaccurate.chosen == accurate.chosen,
                    relative_delta=(value - accurate_value) / accurate_value,
                ))
    return records


def sensitivity_frame(records: Sequence[SensitivityRecord]) -> pd.DataFrame:
    return pd.DataFrame([
        {
            "index": r.index,
            "policy": r.policy.value,
            "error": r.error,
            "accurate_choice": r.accurate_choice,
            "inaccurate_choice": r.inaccurate_choice,
            "same_decision": r.same_decision,
            "relative_delta": r.relative_delta,
        }
        for r in records
    ])


def same_decision_fractions(records) -> Dict[Tuple[str, float], float]:
    """Share of unchanged decisions per (policy, error)."""
    df = records if isinstance(records, pd.DataFrame) else sensitivity_frame(records)
    grouped = df.groupby(["policy", "error"], sort=False)["same_decision"].mean()
    return {(policy, float(error)): float(v) for (policy, error), v in grouped.items()}


def sensitivity_table(records) -> pd.DataFrame:
    """
    Same/different decision blocks per error level, with avg, std and size of
    the relative delta (and the share of the total) for each policy.
    """
    df = records if isinstance(records, pd.DataFrame) else sensitivity_frame(records)
    if df.empty:
        raise SweepError("No sensitivity records to aggregate")
    policies = list(dict.fromkeys(df["policy"]))
    rows = []
    for error in dict.fromkeys(df["error"]):
        for label, same in (("same", True), ("different", False)):
            row: Dict[str, Any] = {"error": float(error), "decision": label}
            for policy in policies:
                block = df[(df["policy"] == policy) & (df["error"] == error)]
                deltas = block.loc[block["same_decision"] == same, "relative_delta"].to_numpy(dtype=float)
                row[f"{policy}_avg"] = float(deltas.mean()) if deltas.size else float("nan")
                row[f"{policy}_std"] = float(deltas.std()) if deltas.size else float("nan")
                row[f"{policy}_size"] = int(deltas.size)
                row[f"{policy}_share"] = deltas.size / len(block) if len(block) else float("nan")
            rows.append(row)
    return pd.DataFrame(rows)


def write_sensitivity_outputs(records, config: SweepConfig, errors: Sequence[float],
                              output_dir: Union[str, Path]) -> Dict[str, Path]:
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    df = records if isinstance(records, pd.DataFrame) else sensitivity_frame(records)
    digest = fingerprint({"sweep": config.to_dict(), "errors": [float(e) for e in errors]})
    paths = {
        "raw": output_dir / SENSITIVITY_RAW_FILE,
        "table": output_dir / SENSITIVITY_TABLE_FILE,
    }
    _write_table(df, paths["raw"], digest)
    _write_table(sensitivity_table(df), paths["table"], digest, SUMMARY_FLOAT_FORMAT)
    logger.info(f"Wrote sensitivity outputs to {output_dir}")
    return paths
