"""Labeled two-qutrit datasets: generation, statistics, features, persistence."""

from .balance import (
    DatasetManifest,
    FidelityStats,
    fidelity_stats,
    generate_balanced,
)
from .features import (
    EXPANDED_WIDTH,
    RAW_WIDTH,
    FeatureScaler,
    expand_features,
    featurize,
    split,
)
from .io import (
    DATASET_CSV,
    MANIFEST_TXT,
    REJECTIONS_LOG,
    FeatureRow,
    load_dataset,
    load_rows,
    manifest_from_text,
    manifest_to_text,
    rows_from_states,
    save_dataset,
    save_rows,
    verify_rows,
)
from .labeling import (
    LABELS,
    ORIGIN_ARTIFICIAL,
    ORIGIN_RANDOM,
    LabeledState,
    label_random_state,
    make_artificial_pptes,
)

__all__ = [
    "DATASET_CSV",
    "EXPANDED_WIDTH",
    "LABELS",
    "MANIFEST_TXT",
    "ORIGIN_ARTIFICIAL",
    "ORIGIN_RANDOM",
    "RAW_WIDTH",
    "REJECTIONS_LOG",
    "DatasetManifest",
    "FeatureRow",
    "FeatureScaler",
    "FidelityStats",
    "LabeledState",
    "expand_features",
    "featurize",
    "fidelity_stats",
    "generate_balanced",
    "label_random_state",
    "load_dataset",
    "load_rows",
    "make_artificial_pptes",
    "manifest_from_text",
    "manifest_to_text",
    "rows_from_states",
    "save_dataset",
    "save_rows",
    "split",
    "verify_rows",
]
