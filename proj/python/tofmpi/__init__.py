"""Simulated time-of-flight multipath interference and its learned correction."""

from ._tofmpi import (
    CornerKind,
    CornerScene,
    ForestConfig,
    RegressionForest,
    ToFConfig,
    TofmpiError,
    WardMaterial,
    WardNormalization,
    builtin_materials,
    canny,
    combine_phasors,
    confidence,
    evaluate,
    extract_features,
    feature_layout,
    gabor_bank,
    gradients,
    laplacian,
    lbp,
    render,
    rpe,
    run_pipeline,
    sample_challenging_scene,
    sample_simple_scene,
    train_forest,
)

__all__ = [name for name in dir() if not name.startswith("_")]
