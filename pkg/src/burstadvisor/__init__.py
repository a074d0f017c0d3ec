# burstadvisor __init__.py
__version__ = "0.1.0"

from .profile import (
    ApplicationProfile,
    TimingObservation,
    TimeUnit,
    ProfileError,
    InsufficientDataError,
    DegenerateObservationsError,
    ProfileFitError,
    eval_time,
    required_processors,
    fit_profile,
    load_observations,
)
from .cost import (
    PriceTable,
    CostModel,
    CostModelError,
    BillingMode,
    fit_alpha,
    fit_alpha_report,
    hourly_rate,
    total_cost,
)
from .coupled import CoupledModel, ModelDomainError, cost_of_time, time_of_cost
from .advisor import (
    LOCAL,
    CLOUD,
    NONE_FEASIBLE,
    AdviceRequest,
    AdviceRequestError,
    AllocationError,
    Environment,
    PlacementPlan,
    Policy,
    Recommendation,
    Rounding,
    advise,
    advise_budget,
    advise_deadline,
    compare,
    distribute_processors,
    plan_for_processors,
)
from .baselines import BaselineKind, BaselinePolicy, BaselineError, default_baselines, decide
from .config import ConfigManager, default_environments, load_profile, show_config
from .logstore import ExecutionRecord, LogStore, LogStoreError
from .sweep import (
    SweepConfig,
    SweepConfigError,
    run_sweep,
    results_frame,
    load_results,
    aggregate_by_ratio,
    inject_error,
    run_sensitivity,
    sensitivity_table,
)
