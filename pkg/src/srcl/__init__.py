"""Sparse-reconstruction grading with a range constraint.

A test sample is expressed as a sparse nonnegative-free combination of
reference samples with known grades; the grade of the combination is read
off the weights. The range-constraint refinement re-solves the sparse
problem while shrinking the usable grade range around the current
estimate, alternating weight updates with a closed-form grade update.
"""

from .augment import augment_with_distance, augment_with_rc
from .core import (
    DEGENERATE_EPSILON,
    SUPPORT_EPSILON,
    Dictionary,
    FeatureVector,
    GroupPartition,
    Hyperparameters,
    RangeConstraint,
    SolveTrace,
    SparseCoefficients,
    TraceEntry,
    validate_problem,
)
from .data import (
    DatasetManifest,
    FeatureKind,
    SyntheticData,
    cup_prototype,
    generate_synthetic,
    load_dictionary,
    load_gray_image,
    load_manifest,
    load_samples,
    save_manifest,
    save_pgm,
    save_samples,
)
from .distances import (
    DistanceKind,
    DistanceVector,
    chi_square_distances,
    custom_distances,
    euclidean_distances,
    gaussian_locality,
)
from .errors import (
    BadDimension,
    ConstantVector,
    DegenerateWeights,
    DimensionMismatch,
    EmptyDictionary,
    EmptyInput,
    GradeMissing,
    GradingError,
    ImageSmallerThanPatch,
    InvalidImage,
    LengthMismatch,
    NegativeGamma,
    NegativeHistogramEntry,
    NegativeLambda,
    NonFiniteData,
    NonPositiveSigma,
    ParseError,
    SingularSystem,
    TooFewPatches,
)
from .features import (
    Codebook,
    GrayImage,
    bow_histogram,
    build_codebook,
    extract_patches,
    patch_grid_counts,
    resize_flatten,
)
from .grading import (
    VARIANT_NAMES,
    MethodKind,
    MethodVariant,
    SolveResult,
    baseline_grade,
    default_hyperparameters,
    grade_bin_partition,
    rc_grade_update,
    solve_variant,
)
from .metrics import (
    integral_agreement,
    mean_absolute_error,
    pearson_correlation,
    tolerance_ratio,
)
from .solvers import (
    LarsResult,
    ProxResult,
    lars_l1,
    llc_closed_form,
    sparse_group_lasso,
)

__version__ = "0.1.0"

__all__ = [
    "DEGENERATE_EPSILON",
    "SUPPORT_EPSILON",
    "BadDimension",
    "Codebook",
    "ConstantVector",
    "DatasetManifest",
    "DegenerateWeights",
    "Dictionary",
    "DimensionMismatch",
    "DistanceKind",
    "DistanceVector",
    "EmptyDictionary",
    "EmptyInput",
    "FeatureKind",
    "FeatureVector",
    "GradeMissing",
    "GradingError",
    "GrayImage",
    "GroupPartition",
    "Hyperparameters",
    "ImageSmallerThanPatch",
    "InvalidImage",
    "LarsResult",
    "LengthMismatch",
    "MethodKind",
    "MethodVariant",
    "NegativeGamma",
    "NegativeHistogramEntry",
    "NegativeLambda",
    "NonFiniteData",
    "NonPositiveSigma",
    "ParseError",
    "ProxResult",
    "RangeConstraint",
    "SingularSystem",
    "SolveResult",
    "SolveTrace",
    "SparseCoefficients",
    "SyntheticData",
    "TooFewPatches",
    "TraceEntry",
    "VARIANT_NAMES",
    "augment_with_distance",
    "augment_with_rc",
    "baseline_grade",
    "bow_histogram",
    "build_codebook",
    "chi_square_distances",
    "cup_prototype",
    "custom_distances",
    "default_hyperparameters",
    "euclidean_distances",
    "extract_patches",
    "gaussian_locality",
    "generate_synthetic",
    "grade_bin_partition",
    "integral_agreement",
    "lars_l1",
    "llc_closed_form",
    "load_dictionary",
    "load_gray_image",
    "load_manifest",
    "load_samples",
    "mean_absolute_error",
    "patch_grid_counts",
    "pearson_correlation",
    "rc_grade_update",
    "resize_flatten",
    "save_manifest",
    "save_pgm",
    "save_samples",
    "solve_variant",
    "sparse_group_lasso",
    "tolerance_ratio",
    "validate_problem",
]
