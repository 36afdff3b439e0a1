from .cascade import CascadeModel, FittedStage, RouteTrace, cascade_predict, evaluate_cascade, train_cascade
from .report import CategorizationReport, Comparison, ComparisonRow, StageMetrics, compare_strategies
from .single_type import (
    SingleTypeModelSet,
    evaluate_single_type,
    single_type_categorize,
    train_single_type,
    train_single_type_set,
)
from .stages import (
    Routing,
    StageSpec,
    build_default_cascade_spec,
    default_groups,
    format_cascade_spec,
    parse_cascade_spec,
    read_cascade_spec,
    resolve_routing,
    write_cascade_spec,
)
