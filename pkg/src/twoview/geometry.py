"""Shared numeric primitives for two-view geometry.

Local affine frames from homographies, Hartley point conditioning,
epipolar error metrics, null-space extraction, real cubic roots and the
oriented (cheirality) epipolar test. Everything here is a pure function
of its inputs.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import (
    AllCoefficientsZero,
    DegenerateAffine,
    DegeneratePointSet,
    DepthSingular,
    NoRealRoot,
    RankDefect,
)
from .types import (
    AffineDecomposition,
    Correspondence,
    FundamentalMatrix,
    Homography,
    LocalAffine,
    NormalizationTransform,
)

# Relative gap below which a singular value counts as zero (rank decisions).
RANK_GAP = 1e-10
# Relative projective-depth cutoff for Jacobian evaluation.
DEPTH_TOL = 1e-12
# Absolute epipolar-line-normal cutoff (point sits on the epipole).
EPIPOLE_TOL = 1e-14


def homogeneous(point) -> np.ndarray:
    u, v = point[0], point[1]
    return np.array([u, v, 1.0])


def affine_from_homography(H: Homography, p1) -> LocalAffine:
    """First-order Jacobian of the homography at an image-1 point.

    Writing (u2, v2) for the projection of ``p1`` and s for the projective
    depth u1*h7 + v1*h8 + h9, the partial derivatives are

        a1 = (h1 - h7*u2) / s    a2 = (h2 - h8*u2) / s
        a3 = (h4 - h7*v2) / s    a4 = (h5 - h8*v2) / s

    Raises DepthSingular when |s| <= 1e-12 * ||H||_F.
    """
    h = H.m
    u1, v1 = float(p1[0]), float(p1[1])
    s = u1 * h[2, 0] + v1 * h[2, 1] + h[2, 2]
    if abs(s) <= DEPTH_TOL * np.linalg.norm(h):
        raise DepthSingular("projective depth vanishes at this point")
    u2 = (u1 * h[0, 0] + v1 * h[0, 1] + h[0, 2]) / s
    v2 = (u1 * h[1, 0] + v1 * h[1, 1] + h[1, 2]) / s
    return LocalAffine(
        a1=(h[0, 0] - h[2, 0] * u2) / s,
        a2=(h[0, 1] - h[2, 1] * u2) / s,
        a3=(h[1, 0] - h[2, 0] * v2) / s,
        a4=(h[1, 1] - h[2, 1] * v2) / s,
    )


def decompose_affine(A: LocalAffine) -> AffineDecomposition:
    """Factor A into rotation, axis scales and shear: A = R(alpha) [[s_u, w], [0, s_v]].

    The first column of A fixes alpha = atan2(a3, a1) and s_u = |(a1, a3)|;
    rotating the second column back by alpha yields (w, s_v).
    """
    s_u = math.hypot(A.a1, A.a3)
    if s_u < 1e-12:
        raise DegenerateAffine("first column of the affine frame is (near) zero")
    c, s = A.a1 / s_u, A.a3 / s_u
    return AffineDecomposition(
        alpha=math.atan2(A.a3, A.a1),
        s_u=s_u,
        s_v=-s * A.a2 + c * A.a4,
        w=c * A.a2 + s * A.a4,
    )


def hartley_normalize(points) -> tuple[NormalizationTransform, np.ndarray]:
    """Similarity transform giving zero centroid and mean point norm sqrt(2).

    Returns the transform and the transformed (n, 2) points.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] < 2:
        raise DegeneratePointSet("need at least two points")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    mean_dist = np.linalg.norm(centered, axis=1).mean()
    if mean_dist < 1e-12:
        raise DegeneratePointSet("all points coincide")
    scale = math.sqrt(2.0) / mean_dist
    t = np.array(
        [
            [scale, 0.0, -scale * centroid[0]],
            [0.0, scale, -scale * centroid[1]],
            [0.0, 0.0, 1.0],
        ]
    )
    return NormalizationTransform(t), centered * scale


def denormalize_fundamental(
    Fn: FundamentalMatrix,
    T1: NormalizationTransform,
    T2: NormalizationTransform,
) -> FundamentalMatrix:
    """Map a fundamental matrix fitted on conditioned points back to raw ones."""
    return FundamentalMatrix(T2.matrix.T @ Fn.m @ T1.matrix)


def _epipolar_terms(F: np.ndarray, c: Correspondence):
    p1 = np.array([c.u1, c.v1, 1.0])
    p2 = np.array([c.u2, c.v2, 1.0])
    l2 = F @ p1
    l1 = F.T @ p2
    n2 = math.hypot(l2[0], l2[1])
    n1 = math.hypot(l1[0], l1[1])
    algebraic = float(p2 @ l2)
    return algebraic, n1, n2


def symmetric_epipolar_distance_flagged(
    F: FundamentalMatrix, c: Correspondence
) -> tuple[float, bool]:
    """Symmetric point-to-epipolar-line distance, plus an epipole flag.

    Returns (0.0, True) when either epipolar line has a (near) zero normal,
    i.e. the point coincides with an epipole and the distance is undefined.
    """
    algebraic, n1, n2 = _epipolar_terms(F.m, c)
    if n1 < EPIPOLE_TOL or n2 < EPIPOLE_TOL:
        return 0.0, True
    return 0.5 * abs(algebraic) * (1.0 / n1 + 1.0 / n2), False


def symmetric_epipolar_distance(F: FundamentalMatrix, c: Correspondence) -> float:
    """Average of the point-to-epipolar-line distances in both images (pixels)."""
    return symmetric_epipolar_distance_flagged(F, c)[0]


def symmetric_epipolar_distances(F: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Vectorized symmetric epipolar distance for an (n, >=4) coordinate array."""
    u1, v1, u2, v2 = coords[:, 0], coords[:, 1], coords[:, 2], coords[:, 3]
    l2x = F[0, 0] * u1 + F[0, 1] * v1 + F[0, 2]
    l2y = F[1, 0] * u1 + F[1, 1] * v1 + F[1, 2]
    l2z = F[2, 0] * u1 + F[2, 1] * v1 + F[2, 2]
    l1x = F[0, 0] * u2 + F[1, 0] * v2 + F[2, 0]
    l1y = F[0, 1] * u2 + F[1, 1] * v2 + F[2, 1]
    algebraic = np.abs(u2 * l2x + v2 * l2y + l2z)
    n2 = np.hypot(l2x, l2y)
    n1 = np.hypot(l1x, l1y)
    with np.errstate(divide="ignore", invalid="ignore"):
        dist = 0.5 * algebraic * (1.0 / n1 + 1.0 / n2)
    # points sitting on an epipole get distance 0 by convention
    return np.where((n1 < EPIPOLE_TOL) | (n2 < EPIPOLE_TOL), 0.0, dist)


def _polish_root(root: float, c3: float, c2: float, c1: float, c0: float) -> float:
    for _ in range(2):
        f = ((c3 * root + c2) * root + c1) * root + c0
        df = (3.0 * c3 * root + 2.0 * c2) * root + c1
        if abs(df) < 1e-300:
            break
        step = f / df
        if not math.isfinite(step):
            break
        root -= step
    return root


def real_cubic_roots(c3: float, c2: float, c1: float, c0: float) -> list[float]:
    """Real roots of c3*x^3 + c2*x^2 + c1*x + c0, in ascending order.

    A vanishing leading coefficient degrades gracefully to the quadratic or
    linear problem. Roots are Newton-polished so that
    |poly(r)| <= 1e-9 * max|c_i| * max(1, |r|)^3.
    """
    scale = max(abs(c3), abs(c2), abs(c1), abs(c0))
    if scale == 0.0:
        raise AllCoefficientsZero("all cubic coefficients are zero")
    c3, c2, c1, c0 = c3 / scale, c2 / scale, c1 / scale, c0 / scale

    if abs(c3) <= 1e-14:
        if abs(c2) <= 1e-14:
            if abs(c1) <= 1e-14:
                raise NoRealRoot("constant polynomial has no roots")
            return [-c0 / c1]
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc < 0.0:
            raise NoRealRoot("quadratic discriminant is negative")
        sq = math.sqrt(disc)
        q = -0.5 * (c1 + math.copysign(sq, c1)) if c1 != 0.0 else -0.5 * sq
        if q == 0.0:
            roots = [0.0, -c1 / c2] if c1 != 0.0 else [0.0]
        else:
            roots = [q / c2, c0 / q]
    else:
        # Numerical Recipes form of the trigonometric / Cardano split.
        a, b, c = c2 / c3, c1 / c3, c0 / c3
        q = (a * a - 3.0 * b) / 9.0
        r = (2.0 * a**3 - 9.0 * a * b + 27.0 * c) / 54.0
        if r * r < q**3:
            theta = math.acos(max(-1.0, min(1.0, r / q**1.5)))
            m = -2.0 * math.sqrt(q)
            roots = [
                m * math.cos(theta / 3.0) - a / 3.0,
                m * math.cos((theta + 2.0 * math.pi) / 3.0) - a / 3.0,
                m * math.cos((theta - 2.0 * math.pi) / 3.0) - a / 3.0,
            ]
        else:
            big = -math.copysign(
                (abs(r) + math.sqrt(max(r * r - q**3, 0.0))) ** (1.0 / 3.0), r
            )
            small = q / big if big != 0.0 else 0.0
            roots = [big + small - a / 3.0]

    roots = sorted(_polish_root(x, c3, c2, c1, c0) for x in roots)
    unique: list[float] = []
    for x in roots:
        if not unique or abs(x - unique[-1]) > 1e-8 * max(1.0, abs(x)):
            unique.append(x)
    return unique


def nullspace(matrix, expected_dim: int) -> np.ndarray:
    """Orthonormal basis (rows) of the expected null space of an m x 9 system.

    Takes the ``expected_dim`` right singular vectors of smallest singular
    value. Raises RankDefect when the (9 - expected_dim)-th singular value
    falls below 1e-10 times the largest: the system is rank-deficient and
    the sample that produced it is degenerate.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[1] != 9:
        raise ValueError("expected an m x 9 matrix")
    _, s, vt = np.linalg.svd(m, full_matrices=True)
    full = np.zeros(9)
    full[: len(s)] = s
    guard = 9 - expected_dim
    if guard > 0 and full[guard - 1] <= RANK_GAP * full[0]:
        raise RankDefect("system rank is below the model's requirement")
    return vt[9 - expected_dim :]


def left_epipole(F: np.ndarray) -> np.ndarray:
    """Left null vector of F: the epipole in image 2, homogeneous."""
    u, _, _ = np.linalg.svd(F)
    return u[:, 2]


def oriented_epipolar_check(F: FundamentalMatrix, correspondences) -> bool:
    """Cheirality test: every correspondence must induce the same sign
    relating the epipolar line F p1 and the oriented line (e2 x p2).

    Degenerate correspondences (image-2 point at the epipole, vanishing
    line) are skipped.
    """
    f = F.m
    e2 = left_epipole(f)
    reference = 0.0
    for c in correspondences:
        line = f @ np.array([c.u1, c.v1, 1.0])
        oriented = np.cross(e2, np.array([c.u2, c.v2, 1.0]))
        norm = np.linalg.norm(line) * np.linalg.norm(oriented)
        if norm < EPIPOLE_TOL:
            continue
        agreement = float(oriented @ line)
        if abs(agreement) <= 1e-12 * norm:
            continue
        sign = math.copysign(1.0, agreement)
        if reference == 0.0:
            reference = sign
        elif sign != reference:
            return False
    return True
