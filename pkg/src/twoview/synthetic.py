"""Synthetic two-view scenes and the noise-sweep benchmark harness.

Scenes follow the desk-scale recipe: two perspective cameras about ten
units from the origin (random on a sphere, or pure sideways / forward
displacement with a 0.1-std jitter on the centers), five random planes
sampled at four locations each, ground-truth plane homographies and
fundamental matrix derived from the projection matrices, and feature
rotations taken from the homography Jacobians.

All randomness flows through numpy's seeded PCG64 generator, so equal
seeds give bit-identical scenes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, asdict

import numpy as np

from .errors import RetryExhausted
from .fundamental import eight_point, five_point_fundamental, seven_point
from .geometry import affine_from_homography, decompose_affine
from .geometry import symmetric_epipolar_distances
from .types import Correspondence, FundamentalMatrix, Homography, LocalAffine

MOTIONS = ("random", "sideways", "forward")
DEFAULT_IMAGE_SIZE = (640, 480)
DEFAULT_FOCAL = 600.0
# Scene extent around the origin and plane patch half-size (world units).
SCENE_BOX = 1.2
PATCH_HALF = 0.8
MIN_DEPTH = 1.0
FRAME_MARGIN = 10.0
MIN_TRIANGLE_AREA = 30.0
PLANE_ATTEMPTS = 100


@dataclass(frozen=True)
class CameraPair:
    """Projection matrices of the two views."""

    P1: np.ndarray
    P2: np.ndarray

    def __post_init__(self):
        for name in ("P1", "P2"):
            m = np.array(getattr(self, name), dtype=float)
            if m.shape != (3, 4) or not np.all(np.isfinite(m)):
                raise ValueError(f"{name} must be a finite 3x4 matrix")
            m.flags.writeable = False
            object.__setattr__(self, name, m)

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        c1 = -np.linalg.solve(self.P1[:, :3], self.P1[:, 3])
        c2 = -np.linalg.solve(self.P2[:, :3], self.P2[:, 3])
        return c1, c2


@dataclass
class SyntheticScene:
    """Noise-free two-view scene with ground truth."""

    cameras: CameraPair
    planes: np.ndarray  # (5, 4) plane coefficients, n . x + d = 0
    points3d: np.ndarray  # (20, 3)
    plane_index: np.ndarray  # (20,) plane id of each point
    correspondences: list[Correspondence]
    gt_F: FundamentalMatrix
    gt_H: list[Homography]
    image_size: tuple[int, int]


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array(
        [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]]
    )


def _look_at(center: np.ndarray, target: np.ndarray) -> np.ndarray:
    """World-to-camera rotation with the optical axis through ``target``."""
    z = target - center
    z = z / np.linalg.norm(z)
    up = np.array([0.0, 1.0, 0.0])
    if abs(z @ up) > 0.999:
        up = np.array([1.0, 0.0, 0.0])
    x = np.cross(up, z)
    x = x / np.linalg.norm(x)
    y = np.cross(z, x)
    return np.vstack([x, y, z])


def camera_rig(
    motion: str,
    rng: np.random.Generator,
    image_size=DEFAULT_IMAGE_SIZE,
    focal: float = DEFAULT_FOCAL,
    jitter: float = 0.1,
) -> CameraPair:
    """Camera pair for one of the motion regimes.

    random   - both centers uniform on a 10-radius sphere, looking at the
               origin.
    sideways - centers ten units out along -z, displaced +-1 unit along x,
               parallel optical axes; jitter (default 0.1 std, per the
               desk-scale recipe) perturbs each center coordinate.
    forward  - centers on the -z axis at depths 11 and 9, parallel axes,
               same jitter.
    """
    if motion not in MOTIONS:
        raise ValueError(f"unknown motion {motion!r}")
    k = np.array(
        [
            [focal, 0.0, image_size[0] / 2.0],
            [0.0, focal, image_size[1] / 2.0],
            [0.0, 0.0, 1.0],
        ]
    )
    if motion == "random":
        centers = []
        while len(centers) < 2:
            v = rng.normal(size=3)
            n = np.linalg.norm(v)
            if n < 1e-9:
                continue
            c = 10.0 * v / n
            if centers and np.linalg.norm(c - centers[0]) < 2.0:
                continue  # reject near-coincident camera pairs
            centers.append(c)
        rotations = [_look_at(c, np.zeros(3)) for c in centers]
    else:
        if motion == "sideways":
            centers = [np.array([-1.0, 0.0, -10.0]), np.array([1.0, 0.0, -10.0])]
        else:
            centers = [np.array([0.0, 0.0, -11.0]), np.array([0.0, 0.0, -9.0])]
        if jitter > 0.0:
            centers = [c + rng.normal(0.0, jitter, 3) for c in centers]
        rotations = [np.eye(3), np.eye(3)]
    p1 = k @ np.column_stack([rotations[0], -rotations[0] @ centers[0]])
    p2 = k @ np.column_stack([rotations[1], -rotations[1] @ centers[1]])
    return CameraPair(p1, p2)


def project(P: np.ndarray, points3d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Project (n, 3) world points; returns pixel coordinates and depths."""
    pts = np.atleast_2d(points3d)
    ph = np.column_stack([pts, np.ones(len(pts))])
    x = ph @ P.T
    depth = x[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        px = x[:, :2] / depth[:, None]
    return px, depth


def plane_homography(cameras: CameraPair, plane: np.ndarray) -> Homography:
    """Exact homography induced by a plane between the two views.

    Back-projects an image-1 point onto the plane and reprojects it into
    image 2; the composition is linear in the homogeneous image point.
    """
    c1, _ = cameras.centers()
    c1h = np.append(c1, 1.0)
    ray = np.vstack([np.linalg.inv(cameras.P1[:, :3]), np.zeros(3)])
    g = (np.outer(c1h, plane) - (plane @ c1h) * np.eye(4)) @ ray
    return Homography(cameras.P2 @ g)


def gt_fundamental(cameras: CameraPair) -> FundamentalMatrix:
    """Ground-truth fundamental matrix from the projection matrices."""
    c1, _ = cameras.centers()
    e2 = cameras.P2 @ np.append(c1, 1.0)
    return FundamentalMatrix(_skew(e2) @ cameras.P2 @ np.linalg.pinv(cameras.P1))


def _min_triangle_area(pts: np.ndarray) -> float:
    n = len(pts)
    best = math.inf
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                v1 = pts[j] - pts[i]
                v2 = pts[k] - pts[i]
                best = min(best, 0.5 * abs(v1[0] * v2[1] - v1[1] * v2[0]))
    return best


def _visible(px: np.ndarray, depth: np.ndarray, image_size) -> bool:
    w, h = image_size
    return bool(
        np.all(depth > MIN_DEPTH)
        and np.all(px[:, 0] > FRAME_MARGIN)
        and np.all(px[:, 0] < w - FRAME_MARGIN)
        and np.all(px[:, 1] > FRAME_MARGIN)
        and np.all(px[:, 1] < h - FRAME_MARGIN)
    )


def _plane_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ref = np.array([0.0, 0.0, 1.0]) if abs(normal[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(normal, ref)
    e1 = e1 / np.linalg.norm(e1)
    return e1, np.cross(normal, e1)


def _sample_plane(rng, cameras, image_size):
    """One plane with four visible, well-spread sample points."""
    c1h = np.append(cameras.centers()[0], 1.0)
    c2h = np.append(cameras.centers()[1], 1.0)
    for _ in range(PLANE_ATTEMPTS):
        center = rng.uniform(-SCENE_BOX, SCENE_BOX, 3)
        normal = rng.normal(size=3)
        norm = np.linalg.norm(normal)
        if norm < 1e-9:
            continue
        normal = normal / norm
        plane = np.append(normal, -normal @ center)
        if abs(plane @ c1h) < 0.5 or abs(plane @ c2h) < 0.5:
            continue  # plane too close to a camera center
        e1, e2 = _plane_basis(normal)
        offsets = rng.uniform(-PATCH_HALF, PATCH_HALF, (4, 2))
        pts = center + offsets[:, :1] * e1 + offsets[:, 1:] * e2
        px1, d1 = project(cameras.P1, pts)
        px2, d2 = project(cameras.P2, pts)
        if not (_visible(px1, d1, image_size) and _visible(px2, d2, image_size)):
            continue
        if (
            _min_triangle_area(px1) < MIN_TRIANGLE_AREA
            or _min_triangle_area(px2) < MIN_TRIANGLE_AREA
        ):
            continue
        return plane, pts, px1, px2
    raise RetryExhausted("could not place a visible plane patch")


def generate_scene(
    motion: str, seed, image_size=DEFAULT_IMAGE_SIZE
) -> SyntheticScene:
    """Deterministic ground-truth scene: cameras, 5 planes x 4 points,
    exact correspondences with rotation components, gt F and per-plane H."""
    rng = np.random.default_rng(seed)
    cameras = camera_rig(motion, rng, image_size)
    planes = []
    points = []
    plane_idx = []
    correspondences = []
    homographies = []
    for k in range(5):
        plane, pts, px1, px2 = _sample_plane(rng, cameras, image_size)
        h = plane_homography(cameras, plane)
        planes.append(plane)
        homographies.append(h)
        for i in range(4):
            alpha = decompose_affine(affine_from_homography(h, px1[i])).alpha
            correspondences.append(
                Correspondence(px1[i, 0], px1[i, 1], px2[i, 0], px2[i, 1], alpha)
            )
            points.append(pts[i])
            plane_idx.append(k)
    return SyntheticScene(
        cameras=cameras,
        planes=np.array(planes),
        points3d=np.array(points),
        plane_index=np.array(plane_idx),
        correspondences=correspondences,
        gt_F=gt_fundamental(cameras),
        gt_H=homographies,
        image_size=tuple(image_size),
    )


def least_squares_affine(pts1: np.ndarray, pts2: np.ndarray) -> LocalAffine:
    """Best-fit 2x2 affine frame (plus translation, discarded) mapping
    image-1 points to image-2 points."""
    design = np.column_stack([pts1, np.ones(len(pts1))])
    sol, *_ = np.linalg.lstsq(design, pts2, rcond=None)
    return LocalAffine(a1=sol[0, 0], a2=sol[1, 0], a3=sol[0, 1], a4=sol[1, 1])


def add_noise(scene: SyntheticScene, sigma: float, seed) -> list[Correspondence]:
    """Gaussian-perturb all four coordinates of every correspondence.

    The rotation components are recomputed from the contaminated data:
    each plane's local affine frame is re-estimated from its four
    perturbed point pairs by least squares and decomposed, so coordinate
    noise propagates into alpha. sigma = 0 returns the input unchanged.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0.0:
        return list(scene.correspondences)
    rng = np.random.default_rng(seed)
    coords = np.array(
        [[c.u1, c.v1, c.u2, c.v2] for c in scene.correspondences]
    )
    coords = coords + rng.normal(0.0, sigma, coords.shape)
    alphas = np.empty(len(coords))
    for k in range(len(scene.gt_H)):
        members = np.flatnonzero(scene.plane_index == k)
        frame = least_squares_affine(coords[members, 0:2], coords[members, 2:4])
        alphas[members] = decompose_affine(frame).alpha
    return [
        Correspondence(c[0], c[1], c[2], c[3], a) for c, a in zip(coords, alphas)
    ]


@dataclass(frozen=True)
class SweepRow:
    """One aggregated cell of the noise sweep."""

    motion: str
    sigma: float
    solver: str
    trials_ok: int
    mean_error_px: float
    median_error_px: float


SOLVER_SAMPLE_SIZE = {"five_point": 5, "seven_point": 7, "eight_point": 8}


def _draw_sweep_sample(solver: str, scene: SyntheticScene, rng) -> np.ndarray:
    """Minimal-sample indices; the five-point draw takes three points from
    one plane and two from the others."""
    if solver == "five_point":
        plane = int(rng.integers(len(scene.gt_H)))
        members = np.flatnonzero(scene.plane_index == plane)
        anchors = rng.choice(members, 3, replace=False)
        others = np.flatnonzero(scene.plane_index != plane)
        generals = rng.choice(others, 2, replace=False)
        return np.concatenate([anchors, generals])
    return rng.choice(
        len(scene.correspondences), SOLVER_SAMPLE_SIZE[solver], replace=False
    )


def _solve_for_sweep(solver: str, sample: list[Correspondence]):
    if solver == "five_point":
        return five_point_fundamental(sample)
    if solver == "seven_point":
        return seven_point(sample)
    return [eight_point(sample)]


def run_noise_sweep(
    motion: str,
    sigmas,
    trials: int,
    solvers=("five_point", "seven_point", "eight_point"),
    seed: int = 0,
    image_size=DEFAULT_IMAGE_SIZE,
) -> list[SweepRow]:
    """Mean held-out symmetric epipolar error per (sigma, solver).

    Each trial shares one scene and one noise draw across all solvers;
    every solver sees its own minimal sample and is scored by the error of
    its best candidate on the correspondences not used for estimation.
    Failed solves are dropped from the aggregate and reflected in
    ``trials_ok``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    motion_code = MOTIONS.index(motion)
    errors: dict[tuple[float, str], list[float]] = {
        (float(s), solver): [] for s in sigmas for solver in solvers
    }
    for trial in range(trials):
        scene = generate_scene(
            motion, np.random.SeedSequence((seed, motion_code, trial)), image_size
        )
        for si, sigma in enumerate(sigmas):
            noisy = add_noise(
                scene, float(sigma), np.random.SeedSequence((seed, motion_code, trial, si, 1))
            )
            coords = np.array([[c.u1, c.v1, c.u2, c.v2] for c in noisy])
            rng = np.random.default_rng(
                np.random.SeedSequence((seed, motion_code, trial, si, 2))
            )
            for solver in solvers:
                idx = _draw_sweep_sample(solver, scene, rng)
                sample = [noisy[i] for i in idx]
                try:
                    candidates = _solve_for_sweep(solver, sample)
                except Exception:
                    candidates = []
                if not candidates:
                    continue
                held_out = np.setdiff1d(np.arange(len(noisy)), idx)
                best = min(
                    float(np.mean(symmetric_epipolar_distances(f.m, coords[held_out])))
                    for f in candidates
                )
                errors[(float(sigma), solver)].append(best)
    rows = []
    for sigma in sigmas:
        for solver in solvers:
            vals = errors[(float(sigma), solver)]
            rows.append(
                SweepRow(
                    motion=motion,
                    sigma=float(sigma),
                    solver=solver,
                    trials_ok=len(vals),
                    mean_error_px=float(np.mean(vals)) if vals else math.nan,
                    median_error_px=float(np.median(vals)) if vals else math.nan,
                )
            )
    return rows


def write_sweep_csv(rows, stream) -> None:
    """Write sweep rows as CSV with the canonical column order."""
    writer = csv.DictWriter(
        stream,
        fieldnames=[
            "motion",
            "sigma",
            "solver",
            "trials_ok",
            "mean_error_px",
            "median_error_px",
        ],
    )
    writer.writeheader()
    for row in rows:
        writer.writerow(asdict(row))


def generate_robust_dataset(
    n_points: int = 200,
    outlier_ratio: float = 0.5,
    sigma: float = 0.5,
    seed=0,
    motion: str = "random",
    image_size=DEFAULT_IMAGE_SIZE,
    plane_weights=(0.40, 0.40, 0.04, 0.0, 0.0),
    patch_radius_px: float = 20.0,
):
    """Correspondence set for robust-estimation experiments.

    Inliers are distributed over the scene's planes per ``plane_weights``
    (the remainder become off-plane points whose rotation comes from a
    random tangent plane); outliers are uniform in both images with
    uniform rotations. Gaussian noise of ``sigma`` pixels contaminates the
    inlier coordinates, and the rotation components receive the matching
    angular noise sqrt(2) * sigma / patch_radius_px of a feature patch of
    that radius.

    Returns (correspondences, inlier_indices, scene).
    """
    rng = np.random.default_rng(seed)
    scene = generate_scene(motion, np.random.SeedSequence((seed, 9000)), image_size)
    cameras = scene.cameras
    w, h = image_size
    n_inlier = int(round(n_points * (1.0 - outlier_ratio)))
    weights = np.asarray(plane_weights, dtype=float)
    if weights.sum() > 1.0 + 1e-9 or np.any(weights < 0):
        raise ValueError("plane weights must be non-negative and sum to <= 1")
    choices = len(weights)  # plane ids; index == len(weights) means off-plane
    probs = np.append(weights, 1.0 - weights.sum())
    labels = rng.choice(choices + 1, size=n_inlier, p=probs)

    correspondences: list[Correspondence] = []
    inlier_flags: list[bool] = []
    for label in labels:
        for _ in range(200):
            if label < choices:
                plane = scene.planes[label]
                normal = plane[:3]
                center = -plane[3] * normal  # closest point to origin
                e1, e2 = _plane_basis(normal)
                off = rng.uniform(-1.5 * PATCH_HALF, 1.5 * PATCH_HALF, 2)
                point = center + off[0] * e1 + off[1] * e2
                hom = scene.gt_H[label]
            else:
                point = rng.uniform(-SCENE_BOX, SCENE_BOX, 3)
                hom = _tangent_homography(rng, cameras, point)
            px1, d1 = project(cameras.P1, point[None, :])
            px2, d2 = project(cameras.P2, point[None, :])
            if not (
                _visible(px1, d1, image_size) and _visible(px2, d2, image_size)
            ):
                continue
            try:
                alpha = decompose_affine(affine_from_homography(hom, px1[0])).alpha
            except Exception:
                continue
            alpha += rng.normal(0.0, math.sqrt(2.0) * sigma / patch_radius_px)
            noise = rng.normal(0.0, sigma, 4) if sigma > 0 else np.zeros(4)
            correspondences.append(
                Correspondence(
                    px1[0, 0] + noise[0],
                    px1[0, 1] + noise[1],
                    px2[0, 0] + noise[2],
                    px2[0, 1] + noise[3],
                    alpha,
                )
            )
            inlier_flags.append(True)
            break
        else:
            raise RetryExhausted("could not place a visible inlier point")
    for _ in range(n_points - n_inlier):
        correspondences.append(
            Correspondence(
                rng.uniform(FRAME_MARGIN, w - FRAME_MARGIN),
                rng.uniform(FRAME_MARGIN, h - FRAME_MARGIN),
                rng.uniform(FRAME_MARGIN, w - FRAME_MARGIN),
                rng.uniform(FRAME_MARGIN, h - FRAME_MARGIN),
                rng.uniform(-math.pi, math.pi),
            )
        )
        inlier_flags.append(False)

    order = rng.permutation(len(correspondences))
    shuffled = [correspondences[i] for i in order]
    inliers = np.flatnonzero(np.asarray(inlier_flags)[order])
    return shuffled, inliers, scene


def _tangent_homography(rng, cameras, point: np.ndarray) -> Homography:
    """Homography of a random plane through ``point`` (a local tangent
    surface), used to give off-plane points a realistic rotation."""
    c1h = np.append(cameras.centers()[0], 1.0)
    c2h = np.append(cameras.centers()[1], 1.0)
    while True:
        normal = rng.normal(size=3)
        norm = np.linalg.norm(normal)
        if norm < 1e-9:
            continue
        normal = normal / norm
        plane = np.append(normal, -normal @ point)
        if abs(plane @ c1h) < 0.5 or abs(plane @ c2h) < 0.5:
            continue
        return plane_homography(cameras, plane)
