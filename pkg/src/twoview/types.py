"""Core value types: correspondences, local affine frames, 3x3 geometry maps.

All types are immutable and safe to share across threads. Matrices are
stored as read-only float64 numpy arrays; scale-ambiguous quantities
(homographies, fundamental matrices) are compared through their canonical
form (unit Frobenius norm, largest-magnitude entry positive).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def wrap_angle(angle: float) -> float:
    """Wrap an angle in radians to the interval (-pi, pi]."""
    wrapped = math.remainder(angle, math.tau)
    if wrapped <= -math.pi:
        wrapped += math.tau
    return wrapped


def _freeze(matrix, shape) -> np.ndarray:
    m = np.array(matrix, dtype=float)
    if m.shape != shape:
        raise ValueError(f"expected shape {shape}, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    m.flags.writeable = False
    return m


@dataclass(frozen=True)
class Correspondence:
    """A point pair between two images plus the feature-rotation difference.

    ``alpha`` is the relative rotation of the matched feature (orientation
    in image 2 minus orientation in image 1), wrapped to (-pi, pi].
    It defaults to 0 for plain point matches.
    """

    u1: float
    v1: float
    u2: float
    v2: float
    alpha: float = 0.0

    def __post_init__(self):
        for name in ("u1", "v1", "u2", "v2", "alpha"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        object.__setattr__(self, "alpha", wrap_angle(self.alpha))

    @property
    def p1(self) -> tuple[float, float]:
        return (self.u1, self.v1)

    @property
    def p2(self) -> tuple[float, float]:
        return (self.u2, self.v2)


def correspondence_array(correspondences) -> np.ndarray:
    """Stack correspondences into an (n, 5) float array [u1 v1 u2 v2 alpha]."""
    return np.array(
        [[c.u1, c.v1, c.u2, c.v2, c.alpha] for c in correspondences], dtype=float
    ).reshape(-1, 5)


@dataclass(frozen=True)
class LocalAffine:
    """2x2 Jacobian of the image-1 -> image-2 map at a correspondence."""

    a1: float
    a2: float
    a3: float
    a4: float

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.a1, self.a2], [self.a3, self.a4]])

    def det(self) -> float:
        return self.a1 * self.a4 - self.a2 * self.a3


@dataclass(frozen=True)
class AffineDecomposition:
    """Rotation / axis scales / shear factorization of a local affine frame.

    Recomposition is R(alpha) @ [[s_u, w], [0, s_v]]; ``s_u`` is positive
    by construction, which makes the factorization canonical.
    """

    alpha: float
    s_u: float
    s_v: float
    w: float

    def recompose(self) -> LocalAffine:
        c, s = math.cos(self.alpha), math.sin(self.alpha)
        return LocalAffine(
            a1=self.s_u * c,
            a2=self.w * c - self.s_v * s,
            a3=self.s_u * s,
            a4=self.w * s + self.s_v * c,
        )


@dataclass(frozen=True)
class Homography:
    """3x3 plane-induced projective map between two views, scale-ambiguous."""

    m: np.ndarray

    def __post_init__(self):
        m = _freeze(self.m, (3, 3))
        if not np.any(m):
            raise ValueError("homography must not be the zero matrix")
        object.__setattr__(self, "m", m)

    def apply(self, points) -> np.ndarray:
        """Project (n, 2) image-1 points; rows with vanishing depth give inf."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ph = np.column_stack([pts, np.ones(len(pts))])
        mapped = ph @ self.m.T
        with np.errstate(divide="ignore", invalid="ignore"):
            out = mapped[:, :2] / mapped[:, 2:3]
        return out

    def canonical(self) -> np.ndarray:
        return canonicalize_matrix(self.m)


@dataclass(frozen=True)
class FundamentalMatrix:
    """3x3 rank-2 epipolar map, scale-ambiguous.

    Solvers only return values satisfying |det F| <= 1e-8 * ||F||^3 and
    rank exactly 2; ``validate`` re-checks both.
    """

    m: np.ndarray

    DET_TOL = 1e-8
    RANK_TOL = 1e-10

    def __post_init__(self):
        m = _freeze(self.m, (3, 3))
        if not np.any(m):
            raise ValueError("fundamental matrix must not be the zero matrix")
        object.__setattr__(self, "m", m)

    def det_residual(self) -> float:
        """|det F| relative to ||F||_F^3."""
        norm = np.linalg.norm(self.m)
        return abs(np.linalg.det(self.m)) / norm**3

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.m, compute_uv=False)

    def validate(self) -> None:
        if self.det_residual() > self.DET_TOL:
            raise ValueError("fundamental matrix is not singular enough")
        s = self.singular_values()
        if s[1] <= self.RANK_TOL * s[0]:
            raise ValueError("fundamental matrix has rank < 2")

    def canonical(self) -> np.ndarray:
        return canonicalize_matrix(self.m)


@dataclass(frozen=True)
class NormalizationTransform:
    """Similarity (isotropic scale + translation) conditioning one image."""

    matrix: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        object.__setattr__(self, "matrix", _freeze(self.matrix, (3, 3)))

    @classmethod
    def identity(cls) -> "NormalizationTransform":
        return cls(np.eye(3))

    def apply(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts * self.matrix[0, 0] + self.matrix[:2, 2]

    def inverse_matrix(self) -> np.ndarray:
        s = self.matrix[0, 0]
        t = self.matrix[:2, 2]
        inv = np.eye(3)
        inv[0, 0] = inv[1, 1] = 1.0 / s
        inv[:2, 2] = -t / s
        return inv


def canonicalize_matrix(m: np.ndarray) -> np.ndarray:
    """Scale to unit Frobenius norm with the largest-magnitude entry positive."""
    m = np.asarray(m, dtype=float)
    norm = np.linalg.norm(m)
    if norm == 0.0:
        raise ValueError("cannot canonicalize the zero matrix")
    out = m / norm
    flat = out.ravel()
    lead = flat[np.argmax(np.abs(flat))]
    if lead < 0:
        out = -out
    return out


def canonical_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius distance between the canonical forms of two 3x3 matrices."""
    return float(np.linalg.norm(canonicalize_matrix(a) - canonicalize_matrix(b)))
