"""Trajectory accuracy (translational and rotational RMS error) and map attributes.

Trajectories are timestamped camera-to-world poses. Error metrics associate
estimate and ground truth by nearest timestamp (20 ms window, the usual
convention for TUM-style tooling), optionally align them with a least-squares
rigid or similarity transform, and report RMS statistics of the per-pose
relative transforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Union

import numpy as np

from . import _quat
from .map_model import Pose, SlamMap


class MetricsError(ValueError):
    pass


class AlignmentError(MetricsError):
    """Degenerate (collinear or coincident) point sets cannot be aligned."""


class Trajectory:
    """Timestamped poses stored as parallel arrays (read-only after init)."""

    def __init__(self, stamps, positions, quaternions):
        stamps = np.asarray(stamps, dtype=float)
        positions = np.asarray(positions, dtype=float)
        quaternions = np.asarray(quaternions, dtype=float)
        if stamps.ndim != 1 or positions.shape != (len(stamps), 3) or quaternions.shape != (len(stamps), 4):
            raise MetricsError("trajectory arrays must be (n,), (n, 3) and (n, 4)")
        if len(stamps) > 1 and not np.all(np.diff(stamps) > 0):
            raise MetricsError("timestamps must be strictly increasing")
        self.stamps = stamps.copy()
        self.positions = positions.copy()
        self.quaternions = quaternions.copy()
        for arr in (self.stamps, self.positions, self.quaternions):
            arr.flags.writeable = False

    def __len__(self) -> int:
        return len(self.stamps)

    @classmethod
    def from_poses(cls, pairs: Iterable[tuple[float, Pose]]) -> "Trajectory":
        pairs = list(pairs)
        return cls(
            [ts for ts, _ in pairs],
            [p.t for _, p in pairs],
            [p.q for _, p in pairs],
        )

    def poses(self) -> list[tuple[float, Pose]]:
        return [
            (float(ts), Pose(q=tuple(q), t=tuple(t)))
            for ts, q, t in zip(self.stamps, self.quaternions, self.positions)
        ]


def load_trajectory(source: Union[str, Path, IO[bytes], IO[str]]) -> Trajectory:
    """Read TUM-format text: `timestamp tx ty tz qx qy qz qw`, '#' comments."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    stamps, positions, quats = [], [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 8:
            raise MetricsError(f"line {lineno}: expected 8 fields, got {len(parts)}")
        vals = [float(x) for x in parts]
        stamps.append(vals[0])
        positions.append(vals[1:4])
        quats.append([vals[7], vals[4], vals[5], vals[6]])  # file is xyzw, we store wxyz
    return Trajectory(stamps, positions, quats)


def save_trajectory(traj: Trajectory, sink: Union[str, Path, IO[str]]) -> None:
    lines = ["# timestamp tx ty tz qx qy qz qw"]
    for ts, t, q in zip(traj.stamps.tolist(), traj.positions.tolist(), traj.quaternions.tolist()):
        lines.append(
            f"{ts!r} {t[0]!r} {t[1]!r} {t[2]!r} {q[1]!r} {q[2]!r} {q[3]!r} {q[0]!r}"
        )
    text = "\n".join(lines) + "\n"
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text, encoding="utf-8")
    else:
        sink.write(text)


def associate(stamps_est, stamps_gt, max_offset: float = 0.02) -> list[tuple[int, int]]:
    """Greedy nearest-timestamp association; unmatched poses are dropped.

    Candidates are each estimate's nearest ground-truth neighbors within
    ``max_offset`` seconds, matched smallest time difference first, one use
    per pose on either side.
    """
    stamps_est = np.asarray(stamps_est, dtype=float)
    stamps_gt = np.asarray(stamps_gt, dtype=float)
    candidates = []
    pos = np.searchsorted(stamps_gt, stamps_est)
    for i, (ts, j) in enumerate(zip(stamps_est, pos)):
        for jj in (j - 1, j):
            if 0 <= jj < len(stamps_gt):
                diff = abs(ts - stamps_gt[jj])
                if diff <= max_offset:
                    candidates.append((diff, i, jj))
    candidates.sort()
    used_i: set[int] = set()
    used_j: set[int] = set()
    matches = []
    for _, i, j in candidates:
        if i in used_i or j in used_j:
            continue
        used_i.add(i)
        used_j.add(j)
        matches.append((i, j))
    matches.sort()
    return matches


def align(
    traj_est: Trajectory,
    traj_gt: Trajectory,
    with_scale: bool = False,
    max_offset: float = 0.02,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Least-squares alignment of estimated onto ground-truth positions.

    Returns (s, R, t) minimizing sum ||s*R*p_est + t - p_gt||^2 over the
    timestamp-associated position pairs (s fixed to 1 unless with_scale).
    Requires at least 3 associated pairs; collinear or coincident point sets
    raise :class:`AlignmentError`.
    """
    pairs = associate(traj_est.stamps, traj_gt.stamps, max_offset)
    if len(pairs) < 3:
        raise AlignmentError(f"need at least 3 associated pose pairs, got {len(pairs)}")
    idx_e = [i for i, _ in pairs]
    idx_g = [j for _, j in pairs]
    return _umeyama(traj_est.positions[idx_e], traj_gt.positions[idx_g], with_scale)


def _umeyama(src: np.ndarray, dst: np.ndarray, with_scale: bool):
    n = len(src)
    mu_s = src.mean(axis=0)
    mu_d = dst.mean(axis=0)
    xs = src - mu_s
    xd = dst - mu_d
    cov = xd.T @ xs / n
    U, D, Vt = np.linalg.svd(cov)
    if D[1] <= 1e-12 * max(D[0], 1.0):
        raise AlignmentError("degenerate point set (coincident or collinear)")
    S = np.eye(3)
    if np.linalg.det(U) * np.linalg.det(Vt) < 0:
        S[2, 2] = -1.0
    R = U @ S @ Vt
    if with_scale:
        var_s = (xs ** 2).sum() / n
        s = float(np.trace(np.diag(D) @ S) / var_s)
    else:
        s = 1.0
    t = mu_d - s * R @ mu_s
    return s, R, t


def transform_trajectory(traj: Trajectory, s: float, R: np.ndarray, t: np.ndarray) -> Trajectory:
    """Apply a similarity transform to every pose of a trajectory."""
    q_r = _quat.from_matrix(R)
    return Trajectory(
        traj.stamps,
        s * (traj.positions @ R.T) + t,
        _quat.multiply(q_r[None, :], traj.quaternions),
    )


def _aligned_pairs(traj_est, traj_gt, alignment, max_offset):
    pairs = associate(traj_est.stamps, traj_gt.stamps, max_offset)
    if not pairs:
        raise MetricsError("no pose pairs associated within the timestamp window")
    idx_e = [i for i, _ in pairs]
    idx_g = [j for _, j in pairs]
    pos_e = traj_est.positions[idx_e]
    quat_e = traj_est.quaternions[idx_e]
    pos_g = traj_gt.positions[idx_g]
    quat_g = traj_gt.quaternions[idx_g]
    if alignment != "none":
        if alignment not in ("rigid", "sim"):
            raise MetricsError(f"unknown alignment mode '{alignment}'")
        s, R, t = _umeyama(pos_e, pos_g, with_scale=(alignment == "sim"))
        pos_e = s * (pos_e @ R.T) + t
        quat_e = _quat.multiply(_quat.from_matrix(R)[None, :], quat_e)
    return pos_e, quat_e, pos_g, quat_g


def ate(
    traj_est: Trajectory,
    traj_gt: Trajectory,
    alignment: str = "rigid",
    max_offset: float = 0.02,
) -> float:
    """RMS absolute trajectory error (meters).

    Per associated timestamp the error is the translation magnitude of the
    relative pose gt^-1 * est after alignment, which equals the straight
    distance between the two camera centers.
    """
    pos_e, _, pos_g, _ = _aligned_pairs(traj_est, traj_gt, alignment, max_offset)
    err = pos_e - pos_g
    return float(np.sqrt((err ** 2).sum(axis=1).mean()))


def ate_rot(
    traj_est: Trajectory,
    traj_gt: Trajectory,
    alignment: str = "rigid",
    max_offset: float = 0.02,
) -> float:
    """RMS absolute rotational error (degrees).

    Per associated timestamp the error is the absolute rotation angle of the
    relative pose gt^-1 * est, extracted as 2*atan2(|vec|, |w|) of the
    relative quaternion.
    """
    _, quat_e, _, quat_g = _aligned_pairs(traj_est, traj_gt, alignment, max_offset)
    rel = _quat.multiply(_quat.conjugate(quat_g), quat_e)
    angles = np.degrees(_quat.angle(rel))
    return float(np.sqrt((angles ** 2).mean()))


def attribute_C(slam_map: SlamMap) -> float:
    """Mean observing-keyframe count per map point."""
    if slam_map.n_points == 0:
        raise MetricsError("map has no points")
    total = sum(len(slam_map.frames_of_point(pt.id)) for pt in slam_map.points)
    return total / slam_map.n_points


def attribute_F(slam_map: SlamMap) -> int:
    """Largest seq_index span between keyframes observing a common point."""
    seq_of = {kf.id: kf.seq_index for kf in slam_map.keyframes}
    best = None
    for pt in slam_map.points:
        fids = slam_map.frames_of_point(pt.id)
        if len(fids) < 2:
            continue
        seqs = [seq_of[f] for f in fids]
        span = max(seqs) - min(seqs)
        if best is None or span > best:
            best = span
    if best is None:
        raise MetricsError("no point is observed by at least two keyframes")
    return best


def attribute_S(slam_map: SlamMap, cell_width: int = 64, cell_height: int = 48) -> float:
    """Mean percentage of occupied image-grid cells over keyframes.

    Each image is partitioned into cell_width x cell_height pixel cells
    (edge cells may be smaller, so every keypoint lands in exactly one cell);
    a keyframe's occupancy is the percentage of its cells holding at least
    one observation.
    """
    if slam_map.n_keyframes == 0:
        raise MetricsError("map has no keyframes")
    percents = []
    for kf in slam_map.keyframes:
        cols = math.ceil(kf.intrinsics.width / cell_width)
        rows = math.ceil(kf.intrinsics.height / cell_height)
        occupied = set()
        for pid in slam_map.points_of_frame(kf.id):
            obs = slam_map.observation(pid, kf.id)
            occupied.add((int(obs.u // cell_width), int(obs.v // cell_height)))
        percents.append(100.0 * len(occupied) / (cols * rows))
    return float(np.mean(percents))


@dataclass
class MetricsReport:
    C: float
    F: int | None
    S: float
    ate_rms: float | None
    ate_rot_rms: float | None
    n_points: int
    n_keyframes: int
    n_observations: int

    def to_dict(self) -> dict:
        return {
            "C": self.C,
            "F": self.F,
            "S": self.S,
            "ate_rms_m": self.ate_rms,
            "ate_rot_rms_deg": self.ate_rot_rms,
            "points": self.n_points,
            "keyframes": self.n_keyframes,
            "observations": self.n_observations,
        }


def map_report(
    slam_map: SlamMap,
    traj_est: Trajectory | None = None,
    traj_gt: Trajectory | None = None,
    alignment: str = "rigid",
) -> MetricsReport:
    """Bundle the C/F/S attributes and, when trajectories are given, ATE metrics."""
    try:
        f_value: int | None = attribute_F(slam_map)
    except MetricsError:
        f_value = None
    ate_rms = ate_rot_rms = None
    if traj_est is not None and traj_gt is not None:
        ate_rms = ate(traj_est, traj_gt, alignment=alignment)
        ate_rot_rms = ate_rot(traj_est, traj_gt, alignment=alignment)
    return MetricsReport(
        C=attribute_C(slam_map),
        F=f_value,
        S=attribute_S(slam_map),
        ate_rms=ate_rms,
        ate_rot_rms=ate_rot_rms,
        n_points=slam_map.n_points,
        n_keyframes=slam_map.n_keyframes,
        n_observations=slam_map.n_observations,
    )
