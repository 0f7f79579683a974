import io

import numpy as np
import pytest

from mapsparse.map_model import save_map, validate
from mapsparse.metrics import ate, ate_rot
from mapsparse.synth import GenerationError, SynthConfig, generate, perturb_trajectory


def test_full_visibility_when_points_at_center():
    cfg = SynthConfig(
        n_points=30, n_keyframes=8, extent=1e-6, cluster_fraction=0.0, dropout=0.0, seed=0
    )
    slam_map, _ = generate(cfg)
    for pt in slam_map.points:
        assert len(slam_map.frames_of_point(pt.id)) == 8


def test_total_dropout_raises():
    with pytest.raises(GenerationError):
        generate(SynthConfig(n_points=20, n_keyframes=4, dropout=1.0, seed=0))


def test_seed_determinism_is_byte_identical():
    cfg = SynthConfig(n_points=60, n_keyframes=6, dropout=0.3, pixel_noise=0.4, seed=17)
    a, b = io.StringIO(), io.StringIO()
    save_map(generate(cfg)[0], a)
    save_map(generate(cfg)[0], b)
    assert a.getvalue() == b.getvalue()


def test_generated_maps_validate():
    for traj_kind in ("circle", "line", "random_walk"):
        slam_map, _ = generate(
            SynthConfig(n_points=60, n_keyframes=6, trajectory=traj_kind, dropout=0.2, seed=3)
        )
        assert validate(slam_map).ok


def test_noiseless_observations_reproject_exactly():
    slam_map, _ = generate(SynthConfig(n_points=50, n_keyframes=6, dropout=0.1, seed=5))
    for obs in slam_map.observations:
        kf = slam_map.keyframe(obs.keyframe_id)
        pt = slam_map.point(obs.point_id)
        R = kf.pose.rotation()
        local = R.T @ (np.array(pt.position) - kf.pose.center())
        u = kf.intrinsics.fx * local[0] / local[2] + kf.intrinsics.cx
        v = kf.intrinsics.fy * local[1] / local[2] + kf.intrinsics.cy
        assert abs(u - obs.u) < 1e-6 and abs(v - obs.v) < 1e-6


def test_observation_count_bounded_by_keyframes():
    slam_map, _ = generate(SynthConfig(n_points=100, n_keyframes=7, dropout=0.0, seed=6))
    for pt in slam_map.points:
        assert len(slam_map.frames_of_point(pt.id)) <= 7


def test_trajectory_matches_keyframes():
    slam_map, traj = generate(SynthConfig(n_points=40, n_keyframes=5, seed=9))
    assert len(traj) == 5
    for kf, (ts, pose) in zip(slam_map.keyframes, traj.poses()):
        assert ts == kf.timestamp
        assert pose.t == kf.pose.t


def test_perturb_zero_sigma_is_identity():
    _, traj = generate(SynthConfig(n_points=30, n_keyframes=6, seed=1))
    same = perturb_trajectory(traj, 0.0, 0.0, seed=42)
    assert np.array_equal(same.positions, traj.positions)
    assert np.array_equal(same.quaternions, traj.quaternions)


def test_perturb_noise_magnitudes_track_sigma():
    # closed form for both noises: RMS = sigma * sqrt(3), because the error
    # vector (translation offset / rotation vector) is N(0, sigma^2 I_3)
    _, traj = generate(SynthConfig(n_points=30, n_keyframes=300, seed=2))
    noisy = perturb_trajectory(traj, 0.05, 0.0, seed=3)
    assert ate(noisy, traj, alignment="none") == pytest.approx(0.05 * np.sqrt(3), rel=0.2)
    noisy = perturb_trajectory(traj, 0.0, 1.0, seed=4)
    assert ate_rot(noisy, traj, alignment="none") == pytest.approx(np.sqrt(3), rel=0.2)


def test_config_validation():
    with pytest.raises(GenerationError):
        SynthConfig(n_points=0)
    with pytest.raises(GenerationError):
        SynthConfig(trajectory="spiral")
    with pytest.raises(GenerationError):
        SynthConfig(dropout=1.5)


def test_cluster_fraction_produces_tight_groups():
    cfg = SynthConfig(n_points=400, n_keyframes=4, cluster_fraction=0.5, seed=8)
    slam_map, _ = generate(cfg)
    xyz = np.array([p.position for p in slam_map.points])
    # clustered points are appended after the uniform block
    clustered = xyz[200:]
    uniform = xyz[:200]
    def mean_nn(block):
        d = np.linalg.norm(block[:, None, :] - block[None, :, :], axis=-1)
        np.fill_diagonal(d, np.inf)
        return d.min(axis=1).mean()
    assert mean_nn(clustered) < mean_nn(uniform) / 2
