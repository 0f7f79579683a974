import pytest

from mapsparse.map_model import (
    CameraIntrinsics,
    Keyframe,
    MapPoint,
    Observation,
    Pose,
    SlamMap,
)

DEFAULT_INTRINSICS = CameraIntrinsics(fx=525.0, fy=525.0, cx=320.0, cy=240.0, width=640, height=480)

IDENTITY_Q = (1.0, 0.0, 0.0, 0.0)


def make_map(frame_positions, point_obs, intrinsics=DEFAULT_INTRINSICS):
    """Small-map builder for tests.

    frame_positions: list of (x, y, z) camera centers, frame id = index.
    point_obs: dict point_id -> list of (frame_id, u, v).
    """
    keyframes = [
        Keyframe(
            id=i,
            seq_index=i,
            timestamp=0.1 * i,
            pose=Pose(q=IDENTITY_Q, t=tuple(float(c) for c in pos)),
            intrinsics=intrinsics,
        )
        for i, pos in enumerate(frame_positions)
    ]
    points = [
        MapPoint(id=pid, position=(float(pid), 0.0, 5.0)) for pid in sorted(point_obs)
    ]
    observations = [
        Observation(point_id=pid, keyframe_id=fid, u=float(u), v=float(v))
        for pid, obs in point_obs.items()
        for (fid, u, v) in obs
    ]
    return SlamMap(keyframes, points, observations)


@pytest.fixture
def four_frame_map():
    """Four keyframes sharing three points: p0 on frames 0+1, p1 on all four,
    p2 on frames 2+3. Camera centers give hand-checkable baseline costs and
    keypoints sit far apart so every spatial cost is zero."""
    return make_map(
        frame_positions=[(0, 0, 0), (0, 0, 10), (0, 0, 30), (0, 0, 90)],
        point_obs={
            0: [(0, 50, 50), (1, 50, 50)],
            1: [(0, 300, 240), (1, 300, 240), (2, 300, 240), (3, 300, 240)],
            2: [(2, 550, 400), (3, 550, 400)],
        },
    )
