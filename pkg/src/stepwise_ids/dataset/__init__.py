from .core import (
    NEGATIVE,
    POSITIVE,
    ClassStats,
    Dataset,
    Record,
    class_stats,
    drop_constant_features,
    filter_labels,
    from_records,
    load_csv,
    relabel_binary,
    restrict_labels,
    write_csv,
)
from .encoding import OTHER, EncodingMap, apply_encoding, fit_encoding
from .labels import (
    ALL_LABELS,
    ATTACK_LABELS,
    CAT1,
    EXCLUDED_BY_DEFAULT,
    REPORT_ORDER,
    TEST_COUNTS,
    TRAIN_COUNTS,
    AttackLabel,
    by_count,
    parse_label,
    parse_labels,
)
from .schema import (
    CATEGORICAL,
    NUMERIC,
    Feature,
    FeatureSchema,
    infer_schema,
    read_schema,
    unsw_nb15_schema,
    write_schema,
)
from .synthetic import (
    Categorical,
    ClassSpec,
    Gaussian,
    SynthSpec,
    Uniform,
    read_synth_spec,
    parse_synth_spec,
    format_synth_spec,
    scaled_counts,
    default_labels,
    separable_spec,
    synthesize,
)
