"""Optimal green/brown investment policies and pollution dynamics on networks.

Layers, bottom up: ``network`` (weighted graphs, drift generators),
``transition`` (state transition matrices), ``alpha`` (per-site shadow cost
of emissions), ``policy`` (closed-form pointwise optima plus the grid-search
oracle), ``dynamics`` (trajectories, steady states, welfare), ``scenario``
(configs, experiment runners, CSV/JSON writers), and ``cli``.
"""

from .alpha import AlphaField, alpha_autonomous, alpha_bounds, alpha_time_varying
from .dynamics import (
    AdmissibilityReport,
    SteadyState,
    Trajectory,
    WelfareValue,
    check_admissibility,
    convergence_check,
    objective_direct,
    objective_reduced,
    simulate,
    steady_state,
    truncation_horizon,
)
from .errors import (
    ComparisonNotApplicableError,
    ConfigError,
    IllConditionedError,
    InsufficientHorizonError,
    ModelError,
)
from .network import (
    Generator,
    GraphOperator,
    NetworkSpec,
    build_blocked,
    build_distance_based,
    build_nearest_neighbor,
    build_wind,
    center_node,
    make_generator,
)
from .policy import (
    ConvexCost,
    EconomyParams,
    LinearCost,
    NodePolicy,
    NoCost,
    QuadraticCost,
    SiteParams,
    brute_force_maximize,
    emission_comparison,
    flow_value,
    kkt_report,
    solve_brown_only,
    solve_linear,
    solve_node,
    solve_strictly_convex,
)
from .scenario import (
    FigureConfig,
    RenewableComparison,
    ScenarioConfig,
    ScenarioResult,
    compare_renewable,
    figure_config,
    load_config,
    parse_config,
    run_figure,
    run_scenario,
)
from .transition import (
    TransitionMatrix,
    column_sum_window,
    matrix_exponential,
    peano_baker,
    transition_matrix,
)

__version__ = "0.1.0"
