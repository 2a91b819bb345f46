"""Rich-image detection pipeline and Position Recall game engine."""

from ._recallkit import (
    ArgumentError,
    Corpus,
    DataError,
    GameError,
    GameSession,
    RandomForest,
    RecallkitError,
    assign_cell,
    confusion,
    cosine_similarity,
    f1,
    feature_length,
    fit_forest,
    gini,
    make_synthetic,
    run_matrix,
    select_rich,
    train,
)

__all__ = [
    "ArgumentError",
    "Corpus",
    "DataError",
    "GameError",
    "GameSession",
    "RandomForest",
    "RecallkitError",
    "assign_cell",
    "confusion",
    "cosine_similarity",
    "f1",
    "feature_length",
    "fit_forest",
    "gini",
    "make_synthetic",
    "run_matrix",
    "select_rich",
    "train",
]
