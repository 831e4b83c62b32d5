"""Homography from three co-planar correspondences with feature rotations.

The point coordinates pin six of the eight degrees of freedom (a 6x9 DLT
system with a three-dimensional null space); the rotations of the two
closest correspondences supply the remaining two through a closed-form
solve. The scale/shear equations of the full affine model carry the
unknown s_v and w and are dropped; the rotation-only pair per
correspondence reduces, after eliminating the axis scale s_u, to one
homogeneous linear constraint each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import CollinearSample, RankDefect, RotationDegenerate
from .geometry import hartley_normalize, nullspace
from .types import Correspondence, Homography, LocalAffine, NormalizationTransform

# Relative threshold on the closed-form denominator below which the
# parametrization (delta = 1) fails and the sample is rejected.
DENOMINATOR_TOL = 1e-12


def dlt_rows(c: Correspondence) -> np.ndarray:
    """Two homogeneous DLT rows r with r . h = 0 for every H with H p1 ~ p2."""
    u1, v1, u2, v2 = c.u1, c.v1, c.u2, c.v2
    return np.array(
        [
            [u1, v1, 1.0, 0.0, 0.0, 0.0, -u1 * u2, -v1 * u2, -u2],
            [0.0, 0.0, 0.0, u1, v1, 1.0, -u1 * v2, -v1 * v2, -v2],
        ]
    )


def ac_constraint_rows(c: Correspondence, A: LocalAffine) -> np.ndarray:
    """Four homogeneous rows tying a local affine frame to the homography.

    Each Jacobian entry a_k contributes one row; multiplying the Jacobian
    relation through by the projective depth s = u1*h7 + v1*h8 + h9 makes
    the constraint linear in h (the depth factor lands on columns 7-9).
    """
    u1, v1, u2, v2 = c.u1, c.v1, c.u2, c.v2
    a1, a2, a3, a4 = A.a1, A.a2, A.a3, A.a4
    return np.array(
        [
            [1, 0, 0, 0, 0, 0, -(u2 + a1 * u1), -a1 * v1, -a1],
            [0, 1, 0, 0, 0, 0, -a2 * u1, -(u2 + a2 * v1), -a2],
            [0, 0, 0, 1, 0, 0, -(v2 + a3 * u1), -a3 * v1, -a3],
            [0, 0, 0, 0, 1, 0, -a4 * u1, -(v2 + a4 * v1), -a4],
        ],
        dtype=float,
    )


def select_rotation_pair(sample) -> tuple[int, int]:
    """Indices of the two closest correspondences of a three-point sample.

    Distance is the sum of the Euclidean distances in both images; ties go
    to the lexicographically smallest index pair.
    """
    best = None
    best_dist = math.inf
    for i, j in combinations(range(3), 2):
        a, b = sample[i], sample[j]
        dist = math.hypot(a.u1 - b.u1, a.v1 - b.v1) + math.hypot(
            a.u2 - b.u2, a.v2 - b.v2
        )
        if dist < best_dist:
            best_dist = dist
            best = (i, j)
    return best


@dataclass(frozen=True)
class NullSpaceCombination:
    """Null basis of the 6x9 DLT system and the combination weights.

    The homography vector is beta * b + gamma * c + delta * d with delta
    fixed to 1 (scale ambiguity).
    """

    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    beta: float
    gamma: float
    delta: float = 1.0

    def vector(self) -> np.ndarray:
        return self.beta * self.b + self.gamma * self.c + self.delta * self.d


@dataclass(frozen=True)
class RotationConstraintSystem:
    """Linear system the two feature rotations impose on (beta, gamma).

    ``coefficients`` is 4x8 over the monomials
    [beta, gamma, s_u1, s_u1*beta, s_u1*gamma, s_u2, s_u2*beta, s_u2*gamma]
    and ``constants`` the trailing column: coefficients @ monomials +
    constants = 0. Rows come in (cos, sin) pairs, one pair per rotation;
    only the s_v/w-free equations of the affine model are used.
    """

    coefficients: np.ndarray
    constants: np.ndarray
    cos_alpha: np.ndarray
    sin_alpha: np.ndarray


def build_rotation_system(
    b: np.ndarray, c: np.ndarray, d: np.ndarray, pair
) -> RotationConstraintSystem:
    """Assemble the 4x8 rotation system from the null basis and two
    correspondences carrying rotations."""
    coeffs = np.zeros((4, 8))
    consts = np.zeros(4)
    cos_a = np.zeros(2)
    sin_a = np.zeros(2)
    for k, corr in enumerate(pair):
        ca, sa = math.cos(corr.alpha), math.sin(corr.alpha)
        cos_a[k], sin_a[k] = ca, sa
        depth_b = corr.u1 * b[6] + corr.v1 * b[7] + b[8]
        depth_c = corr.u1 * c[6] + corr.v1 * c[7] + c[8]
        depth_d = corr.u1 * d[6] + corr.v1 * d[7] + d[8]
        su_col = 2 + 3 * k
        row = 2 * k
        coeffs[row, 0] = b[0] - corr.u2 * b[6]
        coeffs[row, 1] = c[0] - corr.u2 * c[6]
        coeffs[row, su_col] = -ca * depth_d
        coeffs[row, su_col + 1] = -ca * depth_b
        coeffs[row, su_col + 2] = -ca * depth_c
        consts[row] = d[0] - corr.u2 * d[6]
        coeffs[row + 1, 0] = b[3] - corr.v2 * b[6]
        coeffs[row + 1, 1] = c[3] - corr.v2 * c[6]
        coeffs[row + 1, su_col] = -sa * depth_d
        coeffs[row + 1, su_col + 1] = -sa * depth_b
        coeffs[row + 1, su_col + 2] = -sa * depth_c
        consts[row + 1] = d[3] - corr.v2 * d[6]
    return RotationConstraintSystem(coeffs, consts, cos_a, sin_a)


def solve_rotation_system(system: RotationConstraintSystem) -> tuple[float, float]:
    """Closed-form (beta, gamma).

    Multiplying each rotation's cos row by sin(alpha) and its sin row by
    cos(alpha) and subtracting cancels every s_u monomial, leaving one
    linear equation per rotation; Cramer's rule on the resulting 2x2
    system gives beta and gamma.
    """
    co, ct = system.coefficients, system.constants
    p = np.empty(2)
    q = np.empty(2)
    r = np.empty(2)
    for k in range(2):
        sa, ca = system.sin_alpha[k], system.cos_alpha[k]
        p[k] = sa * co[2 * k, 0] - ca * co[2 * k + 1, 0]
        q[k] = sa * co[2 * k, 1] - ca * co[2 * k + 1, 1]
        r[k] = sa * ct[2 * k] - ca * ct[2 * k + 1]
    det = p[0] * q[1] - p[1] * q[0]
    magnitude = max(abs(p[0]), abs(q[0]), abs(r[0])) * max(
        abs(p[1]), abs(q[1]), abs(r[1])
    )
    if abs(det) <= DENOMINATOR_TOL * max(magnitude, 1e-300):
        raise RotationDegenerate("rotation constraints are (near) dependent")
    beta = (q[0] * r[1] - q[1] * r[0]) / det
    gamma = (p[1] * r[0] - p[0] * r[1]) / det
    return beta, gamma


def solve_rotation_system_numeric(
    system: RotationConstraintSystem,
) -> tuple[float, float, float, float]:
    """Reference solve of the same system as a plain 4x4 linear problem.

    Collapsing each rotation's s_u monomials into the assembled unknown
    t_k = s_uk * (S_b*beta + S_c*gamma + S_d) leaves a linear system in
    (beta, gamma, t_1, t_2).
    """
    co, ct = system.coefficients, system.constants
    m = np.array(
        [
            [co[0, 0], co[0, 1], -system.cos_alpha[0], 0.0],
            [co[1, 0], co[1, 1], -system.sin_alpha[0], 0.0],
            [co[2, 0], co[2, 1], 0.0, -system.cos_alpha[1]],
            [co[3, 0], co[3, 1], 0.0, -system.sin_alpha[1]],
        ]
    )
    beta, gamma, t1, t2 = np.linalg.solve(m, -ct)
    return float(beta), float(gamma), float(t1), float(t2)


def _axis_scale(h: np.ndarray, corr: Correspondence) -> float:
    """Solver-estimated s_u of a rotation correspondence under h (9-vector)."""
    ca, sa = math.cos(corr.alpha), math.sin(corr.alpha)
    depth = corr.u1 * h[6] + corr.v1 * h[7] + h[8]
    numer = ca * (h[0] - corr.u2 * h[6]) + sa * (h[3] - corr.v2 * h[6])
    return numer / depth if depth != 0.0 else math.inf


@dataclass(frozen=True)
class HomographyFit:
    """Full output of the three-correspondence solve, for inspection."""

    homography: Homography
    combination: NullSpaceCombination
    rotation_pair: tuple[int, int]
    axis_scales: tuple[float, float]
    t1: NormalizationTransform
    t2: NormalizationTransform


def _fit_with_pair(basis, pair_idx, normalized, t1, t2) -> HomographyFit:
    b, c, d = basis
    selected = [normalized[pair_idx[0]], normalized[pair_idx[1]]]
    system = build_rotation_system(b, c, d, selected)
    beta, gamma = solve_rotation_system(system)
    combination = NullSpaceCombination(b, c, d, beta, gamma)
    h = combination.vector()
    scales = (_axis_scale(h, selected[0]), _axis_scale(h, selected[1]))
    raw = t2.inverse_matrix() @ h.reshape(3, 3) @ t1.matrix
    return HomographyFit(
        homography=Homography(raw),
        combination=combination,
        rotation_pair=pair_idx,
        axis_scales=scales,
        t1=t1,
        t2=t2,
    )


def fit_homography_from_rotations(
    sample, try_all_rotation_pairs: bool = False
) -> HomographyFit:
    """Estimate the homography of a co-planar three-correspondence sample.

    The DLT system is conditioned with per-image similarity transforms
    (rotation angles are invariant under scale + translation, so the alpha
    inputs are used as-is). By default the rotations of the two closest
    correspondences are used; with ``try_all_rotation_pairs`` all three
    pairs are solved and the fit with the smallest symmetric transfer
    error over the triple wins.

    Raises CollinearSample for collinear triples and RotationDegenerate
    when the closed-form denominator (the delta = 1 parametrization)
    collapses.
    """
    sample = list(sample)
    if len(sample) != 3:
        raise ValueError("need exactly three correspondences")
    t1, pts1n = hartley_normalize([[c.u1, c.v1] for c in sample])
    t2, pts2n = hartley_normalize([[c.u2, c.v2] for c in sample])
    normalized = [
        Correspondence(p1[0], p1[1], p2[0], p2[1], c.alpha)
        for p1, p2, c in zip(pts1n, pts2n, sample)
    ]
    rows = np.vstack([dlt_rows(c) for c in normalized])
    try:
        basis = nullspace(rows, 3)
    except RankDefect as exc:
        raise CollinearSample("three-point sample is collinear") from exc

    if not try_all_rotation_pairs:
        return _fit_with_pair(basis, select_rotation_pair(sample), normalized, t1, t2)

    best = None
    best_err = math.inf
    failure: Exception | None = None
    for pair_idx in combinations(range(3), 2):
        try:
            fit = _fit_with_pair(basis, pair_idx, normalized, t1, t2)
        except RotationDegenerate as exc:
            failure = exc
            continue
        err = transfer_error_sum(fit.homography, sample)
        if err < best_err:
            best_err = err
            best = fit
    if best is None:
        raise failure if failure is not None else RotationDegenerate("no valid pair")
    return best


def homography_from_three_sift(
    sample, try_all_rotation_pairs: bool = False
) -> Homography:
    """Homography from three co-planar point pairs plus feature rotations."""
    return fit_homography_from_rotations(sample, try_all_rotation_pairs).homography


def symmetric_transfer_error(H: Homography, c: Correspondence) -> float:
    """0.5 * (||H p1 - p2|| + ||H^-1 p2 - p1||) in pixels."""
    forward = H.apply([(c.u1, c.v1)])[0]
    backward = Homography(np.linalg.inv(H.m)).apply([(c.u2, c.v2)])[0]
    err_f = math.hypot(forward[0] - c.u2, forward[1] - c.v2)
    err_b = math.hypot(backward[0] - c.u1, backward[1] - c.v1)
    if not (math.isfinite(err_f) and math.isfinite(err_b)):
        return math.inf
    return 0.5 * (err_f + err_b)


def transfer_error_sum(H: Homography, correspondences) -> float:
    return sum(symmetric_transfer_error(H, c) for c in correspondences)
