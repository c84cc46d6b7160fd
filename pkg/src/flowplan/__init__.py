"""Energy-aware feedback motion planning over layered current fields.

Pipeline: load or generate a FlowField, build the state-lattice planning
graph, compute a goal-rooted FeedbackPlan (optimal action + cost-to-go
for every state), then validate it with simulator rollouts. The hot
kernels run in a compiled extension when available; see
``flowplan._kernels.BACKEND``.
"""

from ._kernels import BACKEND
from .flowfield import (
    ContinuousPosition,
    FieldError,
    FlowField,
    GridGeometry,
    euler_step,
    flow_at,
    generate_synthetic_field,
    map_cell,
    trace_flow_line,
)
from .fieldio import FieldFormatError, field_digest, load_flow_field, save_flow_field
from .lattice import GoalSpec, Lattice, LatticeError, State
from .transitions import (
    Action,
    ActionUnavailable,
    CostSet,
    OutcomeSet,
    UncertaintyConfig,
    action_cost,
    alignment_score,
    angular_distance,
    displacement_cells,
    flow_direction,
    successors,
)
from .planner import (
    FeedbackPlan,
    PlanError,
    PlanningGraph,
    build_graph,
    check_bellman,
    compute_feedback_plan,
    plan_action,
)
from .oracle import per_state_dijkstra_oracle
from .simulator import (
    DisturbanceConfig,
    ReachabilitySummary,
    Terminal,
    Trajectory,
    batch_reachability,
    rollout,
)
from .config import ConfigError, PlannerConfig, parse_config

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "Action",
    "ActionUnavailable",
    "ConfigError",
    "ContinuousPosition",
    "CostSet",
    "DisturbanceConfig",
    "FeedbackPlan",
    "FieldError",
    "FieldFormatError",
    "FlowField",
    "GoalSpec",
    "GridGeometry",
    "Lattice",
    "LatticeError",
    "OutcomeSet",
    "PlanError",
    "PlannerConfig",
    "PlanningGraph",
    "ReachabilitySummary",
    "State",
    "Terminal",
    "Trajectory",
    "UncertaintyConfig",
    "action_cost",
    "alignment_score",
    "angular_distance",
    "batch_reachability",
    "build_graph",
    "check_bellman",
    "compute_feedback_plan",
    "displacement_cells",
    "euler_step",
    "field_digest",
    "flow_at",
    "flow_direction",
    "generate_synthetic_field",
    "load_flow_field",
    "map_cell",
    "parse_config",
    "per_state_dijkstra_oracle",
    "plan_action",
    "rollout",
    "save_flow_field",
    "successors",
    "trace_flow_line",
]
