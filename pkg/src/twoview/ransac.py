"""Locally optimized RANSAC over fundamental-matrix hypotheses.

Uniform minimal samples (seeded PCG64 generator, so runs are
deterministic given data order and seed), inlier counting under the
symmetric epipolar distance, adaptive confidence-based termination, an
optional wall-clock budget, and an inner least-squares re-fit of the
best-so-far model on its inlier set (iterated normalized eight-point, up
to ten rounds).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NoModelFound, NotEnoughPoints, RankDefect
from .fundamental import (
    eight_point,
    fundamental_from_homography_and_points,
    sample_degeneracy_check,
    seven_point,
)
from .geometry import symmetric_epipolar_distances
from .homography import fit_homography_from_rotations
from .types import Correspondence, FundamentalMatrix, correspondence_array

SOLVERS = ("five_point", "seven_point", "eight_point")
SAMPLE_SIZE = {"five_point": 5, "seven_point": 7, "eight_point": 8}
MAX_ITERATIONS_CAP = 2**63 - 1
LO_MAX_ROUNDS = 10


def ransac_iterations(
    confidence: float, outlier_ratio: float, sample_size: int
) -> int:
    """Theoretical number of uniform samples needed to hit one all-inlier
    sample with the given confidence.

    Rounds log(1 - confidence) / log(1 - (1 - outlier_ratio)^m) to the
    nearest integer (never below 1), saturating when the all-inlier
    probability underflows.
    """
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    if not 0.0 <= outlier_ratio < 1.0:
        raise ValueError("outlier ratio must be in [0, 1)")
    if sample_size < 1:
        raise ValueError("sample size must be >= 1")
    p_good = (1.0 - outlier_ratio) ** sample_size
    if p_good <= 0.0:
        return MAX_ITERATIONS_CAP
    if p_good >= 1.0:
        return 1
    denom = math.log1p(-p_good)
    count = math.log(1.0 - confidence) / denom
    if not math.isfinite(count) or count >= MAX_ITERATIONS_CAP:
        return MAX_ITERATIONS_CAP
    return max(1, int(math.floor(count + 0.5)))


@dataclass(frozen=True)
class RobustConfig:
    """Knobs of the robust engine.

    ``inlier_threshold`` and ``degeneracy_threshold`` are in pixels;
    ``time_budget`` is wall-clock seconds (None disables it); the solver
    is one of five_point / seven_point / eight_point.
    """

    inlier_threshold: float
    confidence: float = 0.99
    max_iterations: int = 100_000
    time_budget: float | None = None
    seed: int = 0
    solver: str = "five_point"
    degeneracy_threshold: float = 1.0
    lo_enabled: bool = True

    def __post_init__(self):
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must be in (0, 1)")
        if self.inlier_threshold <= 0.0:
            raise ValueError("inlier threshold must be positive")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    @property
    def sample_size(self) -> int:
        return SAMPLE_SIZE[self.solver]


@dataclass
class RobustResult:
    """Best model plus run statistics."""

    fundamental: FundamentalMatrix
    inliers: np.ndarray
    samples_drawn: int
    lo_iterations: int
    elapsed: float
    terminated_by: str  # "confidence" | "budget" | "max_iter"
    residuals: np.ndarray = field(repr=False, default=None)


def classify_inliers(F: FundamentalMatrix, data, threshold: float) -> np.ndarray:
    """Indices whose symmetric epipolar distance is within the threshold."""
    coords = data if isinstance(data, np.ndarray) else correspondence_array(data)
    return np.flatnonzero(symmetric_epipolar_distances(F.m, coords) <= threshold)


def _solve_sample(cfg: RobustConfig, sample: list[Correspondence]):
    """Candidate models of one minimal sample; empty list on rejection."""
    if cfg.solver == "five_point":
        anchors, generals = sample[:3], sample[3:]
        try:
            fit = fit_homography_from_rotations(anchors)
            if sample_degeneracy_check(
                fit.homography, generals, cfg.degeneracy_threshold
            ):
                return []
            return fundamental_from_homography_and_points(
                fit.homography, anchors, generals
            )
        except Exception:
            return []
    if cfg.solver == "seven_point":
        try:
            return seven_point(sample)
        except RankDefect:
            return []
    try:
        return [eight_point(sample)]
    except RankDefect:
        return []


def estimate(data, cfg: RobustConfig) -> RobustResult:
    """Run the robust loop over the correspondence set.

    Samples are drawn uniformly without replacement; with the five-point
    solver the first three members take the plane role and samples whose
    two general pairs both transfer through the estimated homography are
    discarded (they still count as drawn). Each new best model is
    (optionally) re-fit on its inliers until the inlier count stops
    growing, and the adaptive termination bound follows the best inlier
    ratio seen so far.
    """
    data = list(data)
    m = cfg.sample_size
    n = len(data)
    if n < m:
        raise NotEnoughPoints(f"{cfg.solver} needs at least {m} correspondences")
    coords = correspondence_array(data)
    rng = np.random.default_rng(cfg.seed)
    start = time.perf_counter()

    best_f: FundamentalMatrix | None = None
    best_count = 0
    confidence_bound = cfg.max_iterations
    samples_drawn = 0
    lo_iterations = 0

    def local_optimize(f, count):
        nonlocal lo_iterations
        cur_f, cur_count = f, count
        for _ in range(LO_MAX_ROUNDS):
            inl = classify_inliers(cur_f, coords, cfg.inlier_threshold)
            if len(inl) < 8:
                break
            try:
                refit = eight_point([data[i] for i in inl])
            except RankDefect:
                break
            lo_iterations += 1
            refit_count = int(
                np.count_nonzero(
                    symmetric_epipolar_distances(refit.m, coords)
                    <= cfg.inlier_threshold
                )
            )
            if refit_count >= cur_count:
                grew = refit_count > cur_count
                cur_f, cur_count = refit, refit_count
                if not grew:
                    break
            else:
                break
        return cur_f, cur_count

    terminated_by = "max_iter"
    while True:
        if best_f is not None and samples_drawn >= confidence_bound:
            terminated_by = "confidence"
            break
        if samples_drawn >= cfg.max_iterations:
            terminated_by = "max_iter"
            break
        if (
            cfg.time_budget is not None
            and time.perf_counter() - start >= cfg.time_budget
        ):
            terminated_by = "budget"
            break

        idx = rng.choice(n, m, replace=False)
        samples_drawn += 1
        sample = [data[i] for i in idx]
        for f in _solve_sample(cfg, sample):
            count = int(
                np.count_nonzero(
                    symmetric_epipolar_distances(f.m, coords) <= cfg.inlier_threshold
                )
            )
            if count <= best_count:
                continue
            best_f, best_count = f, count
            if cfg.lo_enabled:
                best_f, best_count = local_optimize(best_f, best_count)
            confidence_bound = min(
                cfg.max_iterations,
                ransac_iterations(cfg.confidence, 1.0 - best_count / n, m),
            )

    if best_f is None:
        raise NoModelFound("every drawn sample was rejected")
    residuals = symmetric_epipolar_distances(best_f.m, coords)
    return RobustResult(
        fundamental=best_f,
        inliers=np.flatnonzero(residuals <= cfg.inlier_threshold),
        samples_drawn=samples_drawn,
        lo_iterations=lo_iterations,
        elapsed=time.perf_counter() - start,
        terminated_by=terminated_by,
        residuals=residuals,
    )
