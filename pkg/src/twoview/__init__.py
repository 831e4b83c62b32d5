"""Two-view epipolar geometry toolkit.

Minimal fundamental-matrix estimation from five correspondences of
rotation-invariant features (three co-planar plus two general), classical
seven- and eight-point baselines, a locally optimized robust estimator,
and a synthetic benchmark harness.
"""

from .errors import (
    AllCoefficientsZero,
    CollinearSample,
    DegenerateAffine,
    DegeneratePointSet,
    DepthSingular,
    NoModelFound,
    NoRealRoot,
    NotEnoughPoints,
    NoValidCandidate,
    ParseError,
    RankDefect,
    RetryExhausted,
    RotationDegenerate,
    TwoViewError,
)
from .fundamental import (
    EpipolarSystem,
    eight_point,
    epipolar_rows,
    five_point_fundamental,
    fundamental_from_homography_and_points,
    hallucinate_correspondences,
    sample_degeneracy_check,
    seven_point,
)
from .geometry import (
    affine_from_homography,
    decompose_affine,
    denormalize_fundamental,
    hartley_normalize,
    nullspace,
    oriented_epipolar_check,
    real_cubic_roots,
    symmetric_epipolar_distance,
    symmetric_epipolar_distance_flagged,
    symmetric_epipolar_distances,
)
from .homography import (
    HomographyFit,
    NullSpaceCombination,
    RotationConstraintSystem,
    ac_constraint_rows,
    build_rotation_system,
    dlt_rows,
    fit_homography_from_rotations,
    homography_from_three_sift,
    select_rotation_pair,
    solve_rotation_system,
    solve_rotation_system_numeric,
    symmetric_transfer_error,
)
from .ransac import (
    RobustConfig,
    RobustResult,
    classify_inliers,
    estimate,
    ransac_iterations,
)
from .synthetic import (
    CameraPair,
    SweepRow,
    SyntheticScene,
    add_noise,
    camera_rig,
    generate_robust_dataset,
    generate_scene,
    run_noise_sweep,
    write_sweep_csv,
)
from .types import (
    AffineDecomposition,
    Correspondence,
    FundamentalMatrix,
    Homography,
    LocalAffine,
    NormalizationTransform,
    canonical_distance,
    canonicalize_matrix,
    correspondence_array,
    wrap_angle,
)

__version__ = "0.1.0"

__all__ = [
    "AffineDecomposition",
    "AllCoefficientsZero",
    "CameraPair",
    "CollinearSample",
    "Correspondence",
    "DegenerateAffine",
    "DegeneratePointSet",
    "DepthSingular",
    "EpipolarSystem",
    "FundamentalMatrix",
    "Homography",
    "HomographyFit",
    "LocalAffine",
    "NoModelFound",
    "NoRealRoot",
    "NormalizationTransform",
    "NotEnoughPoints",
    "NoValidCandidate",
    "NullSpaceCombination",
    "ParseError",
    "RankDefect",
    "RetryExhausted",
    "RobustConfig",
    "RobustResult",
    "RotationConstraintSystem",
    "RotationDegenerate",
    "SweepRow",
    "SyntheticScene",
    "TwoViewError",
    "ac_constraint_rows",
    "add_noise",
    "affine_from_homography",
    "build_rotation_system",
    "camera_rig",
    "canonical_distance",
    "canonicalize_matrix",
    "classify_inliers",
    "correspondence_array",
    "decompose_affine",
    "denormalize_fundamental",
    "dlt_rows",
    "eight_point",
    "epipolar_rows",
    "estimate",
    "fit_homography_from_rotations",
    "five_point_fundamental",
    "fundamental_from_homography_and_points",
    "generate_robust_dataset",
    "generate_scene",
    "hallucinate_correspondences",
    "hartley_normalize",
    "homography_from_three_sift",
    "nullspace",
    "oriented_epipolar_check",
    "ransac_iterations",
    "real_cubic_roots",
    "run_noise_sweep",
    "sample_degeneracy_check",
    "select_rotation_pair",
    "seven_point",
    "solve_rotation_system",
    "solve_rotation_system_numeric",
    "symmetric_epipolar_distance",
    "symmetric_epipolar_distance_flagged",
    "symmetric_epipolar_distances",
    "symmetric_transfer_error",
    "wrap_angle",
]
