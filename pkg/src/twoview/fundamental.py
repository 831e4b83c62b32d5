"""Fundamental-matrix solvers.

The five-correspondence solver turns a plane homography (from three
co-planar rotation features) plus two general point pairs into epipolar
constraints via hallucinated correspondences, then intersects the
two-dimensional null space with the det(F) = 0 cubic. The classical
seven- and eight-point algorithms are provided as baselines; all three
apply Hartley conditioning by default.
"""

from __future__ import annotations

import math

import numpy as np
from dataclasses import dataclass

from .errors import (
    DepthSingular,
    NoRealRoot,
    NotEnoughPoints,
    NoValidCandidate,
    RankDefect,
    RotationDegenerate,
)
from .geometry import (
    DEPTH_TOL,
    hartley_normalize,
    nullspace,
    oriented_epipolar_check,
    real_cubic_roots,
)
from .homography import fit_homography_from_rotations, symmetric_transfer_error
from .types import (
    Correspondence,
    FundamentalMatrix,
    Homography,
    NormalizationTransform,
)


def epipolar_rows(coords: np.ndarray) -> np.ndarray:
    """Epipolar constraint rows [u1u2, v1u2, u2, u1v2, v1v2, v2, u1, v1, 1]."""
    u1, v1, u2, v2 = coords[:, 0], coords[:, 1], coords[:, 2], coords[:, 3]
    ones = np.ones_like(u1)
    return np.column_stack(
        [u1 * u2, v1 * u2, u2, u1 * v2, v1 * v2, v2, u1, v1, ones]
    )


@dataclass(frozen=True)
class EpipolarSystem:
    """Stacked epipolar rows and the two-vector null basis (e, g).

    Candidate matrices are eps * E + (1 - eps) * G: fixing the weights to
    sum to one removes the scale ambiguity while keeping the pencil
    symmetric under swapping the (arbitrary) basis labels.
    """

    rows: np.ndarray
    e: np.ndarray
    g: np.ndarray

    @classmethod
    def from_coords(cls, coords: np.ndarray) -> "EpipolarSystem":
        rows = epipolar_rows(coords)
        basis = nullspace(rows, 2)
        return cls(rows=rows, e=basis[0], g=basis[1])

    def matrix_at(self, eps: float) -> np.ndarray:
        return (eps * self.e + (1.0 - eps) * self.g).reshape(3, 3)


def _det3(m) -> float:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def _pencil_cubic(g: np.ndarray, k: np.ndarray) -> tuple[float, float, float, float]:
    """Coefficients (c3, c2, c1, c0) of det(G + eps * K).

    Evaluated at the nodes eps in {0, 1, -1, 2} and solved exactly; this
    avoids expanding the determinant symbolically.
    """
    d0 = _det3(g)
    d1 = _det3(g + k)
    dm1 = _det3(g - k)
    d2 = _det3(g + 2.0 * k)
    c2 = 0.5 * (d1 + dm1) - d0
    odd1 = d1 - d0 - c2  # c3 + c1
    odd2 = d2 - d0 - 4.0 * c2  # 8*c3 + 2*c1
    c3 = (odd2 - 2.0 * odd1) / 6.0
    c1 = odd1 - c3
    return c3, c2, c1, d0


def hallucinate_correspondences(H: Homography, anchors) -> list[Correspondence]:
    """Five deterministic correspondences generated by the homography.

    Image-1 points are the three anchors plus the midpoints of anchor
    pairs (0, 1) and (1, 2); image-2 points are their projections through
    H, so every output satisfies H p1 ~ p2 exactly and the five points are
    never collinear for a valid anchor triple.
    """
    anchors = list(anchors)
    pts1 = [a.p1 for a in anchors]
    pts1.append(((pts1[0][0] + pts1[1][0]) / 2.0, (pts1[0][1] + pts1[1][1]) / 2.0))
    pts1.append(((pts1[1][0] + pts1[2][0]) / 2.0, (pts1[1][1] + pts1[2][1]) / 2.0))
    h = H.m
    h_norm = np.linalg.norm(h)
    out = []
    for u1, v1 in pts1:
        s = u1 * h[2, 0] + v1 * h[2, 1] + h[2, 2]
        if abs(s) <= DEPTH_TOL * h_norm:
            raise DepthSingular("hallucinated point has vanishing depth")
        u2 = (u1 * h[0, 0] + v1 * h[0, 1] + h[0, 2]) / s
        v2 = (u1 * h[1, 0] + v1 * h[1, 1] + h[1, 2]) / s
        out.append(Correspondence(u1, v1, u2, v2))
    return out


def sample_degeneracy_check(H: Homography, generals, threshold: float) -> bool:
    """True (reject the sample) when both general correspondences lie on the
    homography's plane, i.e. transfer within ``threshold`` pixels."""
    return all(symmetric_transfer_error(H, c) < threshold for c in generals)


def _normalize_coords(coords: np.ndarray, normalize: bool):
    if not normalize:
        identity = NormalizationTransform.identity()
        return coords, identity, identity
    t1, pts1 = hartley_normalize(coords[:, 0:2])
    t2, pts2 = hartley_normalize(coords[:, 2:4])
    return np.column_stack([pts1, pts2]), t1, t2


def _pencil_candidates(
    system: EpipolarSystem,
    t1: NormalizationTransform,
    t2: NormalizationTransform,
) -> list[FundamentalMatrix]:
    """Rank-2 members of the null-space pencil, denormalized.

    Roots of the normalized det cubic are reused in the raw frame (the
    similarity transforms rescale the cubic without moving its roots) and
    Newton-polished there so det residuals stay at machine level.
    """
    e_raw = t2.matrix.T @ system.e.reshape(3, 3) @ t1.matrix
    g_raw = t2.matrix.T @ system.g.reshape(3, 3) @ t1.matrix
    k_raw = e_raw - g_raw
    c3, c2, c1, c0 = _pencil_cubic(
        system.g.reshape(3, 3), system.e.reshape(3, 3) - system.g.reshape(3, 3)
    )
    try:
        eps_roots = real_cubic_roots(c3, c2, c1, c0)
    except NoRealRoot:
        return []
    r3, r2, r1, r0 = _pencil_cubic(g_raw, k_raw)
    scale = max(abs(r3), abs(r2), abs(r1), abs(r0), 1e-300)
    candidates = []
    for eps in eps_roots:
        for _ in range(3):
            f = ((r3 * eps + r2) * eps + r1) * eps + r0
            df = (3.0 * r3 * eps + 2.0 * r2) * eps + r1
            if abs(df) <= 1e-14 * scale:
                break
            step = f / df
            if not math.isfinite(step):
                break
            eps -= step
        matrix = g_raw + eps * k_raw
        norm = np.linalg.norm(matrix)
        if norm == 0.0 or abs(_det3(matrix)) > FundamentalMatrix.DET_TOL * norm**3:
            continue
        sv = np.linalg.svd(matrix, compute_uv=False)
        if sv[1] <= FundamentalMatrix.RANK_TOL * sv[0]:
            continue
        candidates.append(FundamentalMatrix(matrix))
    return candidates


def fundamental_from_homography_and_points(
    H: Homography, anchors, generals, normalize: bool = True
) -> list[FundamentalMatrix]:
    """Fundamental matrices compatible with a plane homography and two
    general correspondences.

    Five hallucinated correspondences plus the two general pairs give the
    epipolar constraints; the rows of the three measured anchors are added
    as well. Candidates come from the two-dimensional null space and the
    det cubic; those violating the oriented epipolar constraint on the
    five real correspondences are discarded.

    Callers are expected to have screened the sample with
    ``sample_degeneracy_check`` first.
    """
    anchors = list(anchors)
    generals = list(generals)
    real = anchors + generals
    hallucinated = hallucinate_correspondences(H, anchors)
    stack = hallucinated + generals + anchors
    coords = np.array([[c.u1, c.v1, c.u2, c.v2] for c in stack])
    coords_n, t1, t2 = _normalize_coords(coords, normalize)
    system = EpipolarSystem.from_coords(coords_n)
    candidates = _pencil_candidates(system, t1, t2)
    kept = [f for f in candidates if oriented_epipolar_check(f, real)]
    if not kept:
        raise NoValidCandidate("no candidate passed the oriented epipolar check")
    return kept


def five_point_fundamental(
    sample,
    plane_indices=(0, 1, 2),
    normalize: bool = True,
    degeneracy_threshold: float | None = None,
    try_all_rotation_pairs: bool = False,
) -> list[FundamentalMatrix]:
    """Minimal five-correspondence solve: homography from the plane triple,
    then the fundamental matrix from it and the two remaining pairs.

    Every rejection (collinear triple, degenerate rotations, rank defect,
    oriented-constraint wipeout, and - when ``degeneracy_threshold`` is
    given - both general points lying on the plane) yields an empty list.
    """
    sample = list(sample)
    if len(sample) != 5:
        raise ValueError("need exactly five correspondences")
    plane_indices = tuple(plane_indices)
    anchors = [sample[i] for i in plane_indices]
    generals = [sample[i] for i in range(5) if i not in plane_indices]
    try:
        fit = fit_homography_from_rotations(anchors, try_all_rotation_pairs)
        if degeneracy_threshold is not None and sample_degeneracy_check(
            fit.homography, generals, degeneracy_threshold
        ):
            return []
        return fundamental_from_homography_and_points(
            fit.homography, anchors, generals, normalize
        )
    except (RankDefect, RotationDegenerate, NoValidCandidate, DepthSingular):
        return []


def seven_point(sample, normalize: bool = True) -> list[FundamentalMatrix]:
    """Seven-point algorithm: two-dimensional null space plus the det cubic.

    Returns one to three candidates; no cheirality filtering is applied.
    """
    sample = list(sample)
    if len(sample) != 7:
        raise NotEnoughPoints("seven-point solver needs exactly 7 correspondences")
    coords = np.array([[c.u1, c.v1, c.u2, c.v2] for c in sample])
    coords_n, t1, t2 = _normalize_coords(coords, normalize)
    system = EpipolarSystem.from_coords(coords_n)
    return _pencil_candidates(system, t1, t2)


def eight_point(sample, normalize: bool = True) -> FundamentalMatrix:
    """Normalized eight-point algorithm (least squares for n > 8).

    The rank-two constraint is enforced by zeroing the smallest singular
    value before denormalization.
    """
    sample = list(sample)
    if len(sample) < 8:
        raise NotEnoughPoints("eight-point solver needs at least 8 correspondences")
    coords = np.array([[c.u1, c.v1, c.u2, c.v2] for c in sample])
    coords_n, t1, t2 = _normalize_coords(coords, normalize)
    rows = epipolar_rows(coords_n)
    f = nullspace(rows, 1)[0].reshape(3, 3)
    u, s, vt = np.linalg.svd(f)
    f2 = (u * np.array([s[0], s[1], 0.0])) @ vt
    return FundamentalMatrix(t2.matrix.T @ f2 @ t1.matrix)
