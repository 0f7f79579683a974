"""Synthetic SLAM maps with ground-truth trajectories for desk-scale experiments.

A pinhole camera (z forward, y down, no distortion) moves along a simple
trajectory looking at the scene center; scene points are sampled uniformly in
a cube plus optional tight clusters so that spatial-diversity costs have
structure to discriminate. Everything is a pure function of the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _quat
from .map_model import CameraIntrinsics, Keyframe, MapPoint, Observation, Pose, SlamMap
from .metrics import Trajectory

TRAJECTORIES = ("circle", "line", "random_walk")


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    n_points: int = 500
    n_keyframes: int = 20
    trajectory: str = "circle"
    trajectory_scale: float = 3.0  # circle radius / line length / walk step, meters
    extent: float = 8.0  # scene cube side, meters
    width: int = 640
    height: int = 480
    fx: float = 525.0
    fy: float = 525.0
    cx: float | None = None  # defaults to width / 2
    cy: float | None = None  # defaults to height / 2
    pixel_noise: float = 0.0
    dropout: float = 0.0
    cluster_fraction: float = 0.3
    cluster_sigma: float | None = None  # defaults to extent / 80
    seed: int = 0

    def __post_init__(self):
        if self.n_points < 1 or self.n_keyframes < 1:
            raise GenerationError("n_points and n_keyframes must be >= 1")
        if self.trajectory not in TRAJECTORIES:
            raise GenerationError(f"trajectory must be one of {TRAJECTORIES}")
        if not 0.0 <= self.dropout <= 1.0:
            raise GenerationError("dropout must be in [0, 1]")
        if not 0.0 <= self.cluster_fraction <= 1.0:
            raise GenerationError("cluster_fraction must be in [0, 1]")
        if self.pixel_noise < 0 or self.trajectory_scale <= 0 or self.extent <= 0:
            raise GenerationError("noise, trajectory_scale and extent must be positive")

    def intrinsics(self) -> CameraIntrinsics:
        return CameraIntrinsics(
            fx=self.fx,
            fy=self.fy,
            cx=self.width / 2.0 if self.cx is None else self.cx,
            cy=self.height / 2.0 if self.cy is None else self.cy,
            width=self.width,
            height=self.height,
        )


def _look_at(position: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Camera-to-world rotation with z toward target and y pointing down."""
    forward = target - position
    dist = np.linalg.norm(forward)
    if dist < 1e-12:
        return np.eye(3)
    z = forward / dist
    up = np.array([0.0, 0.0, 1.0])
    if abs(float(z @ up)) > 0.999:
        up = np.array([0.0, 1.0, 0.0])
    x = np.cross(z, up)
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    return np.column_stack([x, y, z])


def _camera_positions(config: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    k = config.n_keyframes
    scale = config.trajectory_scale
    if config.trajectory == "circle":
        theta = 2.0 * np.pi * np.arange(k) / k
        return np.column_stack([scale * np.cos(theta), scale * np.sin(theta), np.zeros(k)])
    if config.trajectory == "line":
        x = np.linspace(-scale / 2.0, scale / 2.0, k)
        y = np.full(k, -(config.extent / 2.0 + 1.0))
        return np.column_stack([x, y, np.zeros(k)])
    # random walk starting just outside the scene
    steps = rng.normal(size=(k - 1, 3)) if k > 1 else np.zeros((0, 3))
    norms = np.linalg.norm(steps, axis=1, keepdims=True)
    norms[norms < 1e-12] = 1.0
    steps = scale * steps / norms
    start = np.array([config.extent / 2.0 + scale, 0.0, 0.0])
    return start + np.vstack([np.zeros(3), np.cumsum(steps, axis=0)])


def generate(config: SynthConfig) -> tuple[SlamMap, Trajectory]:
    """Build a (map, ground-truth trajectory) pair fully determined by the seed.

    An observation is emitted where a point projects in front of the camera
    and inside the image, then survives the visibility dropout; keypoints are
    the true projections plus Gaussian pixel noise clamped to image bounds.
    Raises :class:`GenerationError` if no point ends up with two observers.
    """
    rng = np.random.default_rng(config.seed)
    half = config.extent / 2.0

    n_cluster = int(round(config.n_points * config.cluster_fraction))
    n_free = config.n_points - n_cluster
    xyz_parts = []
    if n_free:
        xyz_parts.append(rng.uniform(-half, half, size=(n_free, 3)))
    if n_cluster:
        n_clusters = max(1, n_cluster // 25)
        centers = rng.uniform(-half, half, size=(n_clusters, 3))
        assign = rng.integers(0, n_clusters, size=n_cluster)
        sigma = config.extent / 80.0 if config.cluster_sigma is None else config.cluster_sigma
        xyz_parts.append(centers[assign] + rng.normal(0.0, sigma, size=(n_cluster, 3)))
    xyz = np.vstack(xyz_parts)

    cam_pos = _camera_positions(config, rng)
    target = np.zeros(3)
    intr = config.intrinsics()

    keyframes = []
    rotations = []
    for i in range(config.n_keyframes):
        R = _look_at(cam_pos[i], target)
        rotations.append(R)
        q = _quat.from_matrix(R)
        keyframes.append(
            Keyframe(
                id=i,
                seq_index=i,
                timestamp=0.1 * i,
                pose=Pose(q=tuple(float(x) for x in q), t=tuple(float(x) for x in cam_pos[i])),
                intrinsics=intr,
            )
        )

    u_max = np.nextafter(float(intr.width), 0.0)
    v_max = np.nextafter(float(intr.height), 0.0)
    observations = []
    for i in range(config.n_keyframes):
        local = (xyz - cam_pos[i]) @ rotations[i]  # camera coordinates (R^T (X - t))
        keep_draw = rng.random(config.n_points)
        noise = rng.normal(0.0, config.pixel_noise, size=(config.n_points, 2))
        z = local[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = intr.fx * local[:, 0] / z + intr.cx
            v = intr.fy * local[:, 1] / z + intr.cy
        visible = (
            (z > 1e-9)
            & (u >= 0.0)
            & (u < intr.width)
            & (v >= 0.0)
            & (v < intr.height)
            & (keep_draw >= config.dropout)
        )
        if config.pixel_noise > 0:
            u = np.clip(u + noise[:, 0], 0.0, u_max)
            v = np.clip(v + noise[:, 1], 0.0, v_max)
        for pid in np.flatnonzero(visible):
            observations.append(Observation(int(pid), i, float(u[pid]), float(v[pid])))

    points = [MapPoint(id=int(i), position=tuple(float(x) for x in xyz[i])) for i in range(config.n_points)]
    slam_map = SlamMap(keyframes, points, observations)
    if not any(len(slam_map.frames_of_point(p.id)) >= 2 for p in slam_map.points):
        raise GenerationError("configuration produced no point observed by two keyframes")
    trajectory = Trajectory(
        [kf.timestamp for kf in keyframes],
        cam_pos,
        [kf.pose.q for kf in keyframes],
    )
    return slam_map, trajectory


def perturb_trajectory(
    traj: Trajectory, sigma_t: float, sigma_r_deg: float, seed: int = 0
) -> Trajectory:
    """Add i.i.d. Gaussian noise: translation in meters, rotation as a random
    rotation vector with per-axis sigma in degrees (applied on the right).

    With both sigmas zero this is exactly the identity.
    """
    rng = np.random.default_rng(seed)
    n = len(traj)
    dt = rng.normal(0.0, sigma_t, size=(n, 3))
    w = rng.normal(0.0, np.radians(sigma_r_deg), size=(n, 3))
    return Trajectory(
        traj.stamps,
        traj.positions + dt,
        _quat.multiply(traj.quaternions, _quat.from_rotvec(w)),
    )
