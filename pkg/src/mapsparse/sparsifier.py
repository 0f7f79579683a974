"""Sparsification pipeline: build graph, solve, threshold flows, cull keyframes."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from fractions import Fraction

from .flow_graph import FlowGraph, GraphConfig, build_graph
from .map_model import SlamMap
from .mcmf import FlowResult, solve


@dataclass(frozen=True)
class SparsifyConfig:
    graph: GraphConfig
    theta_ratio: float = 0.5
    keyframe_min_points: int = 10
    drop_underviewed: bool = True

    def __post_init__(self):
        if not 0.0 <= self.theta_ratio <= 1.0:
            raise ValueError("theta_ratio must be in [0, 1]")
        if self.keyframe_min_points < 1:
            raise ValueError("keyframe_min_points must be >= 1")


@dataclass
class SelectionResult:
    """Outcome of one sparsification run.

    ``point_flow`` maps each graph-eligible point id to its (flow, capacity)
    on the source edge. Points observed by fewer than two keyframes never
    enter the graph; they are listed in ``underviewed_point_ids`` and routed
    to kept or dropped according to ``drop_underviewed``.
    """

    kept_point_ids: frozenset[int]
    dropped_point_ids: frozenset[int]
    culled_keyframe_ids: frozenset[int]
    underviewed_point_ids: frozenset[int]
    point_flow: dict[int, tuple[int, int]]
    total_flow: int | None
    total_cost: int | None
    n_input_points: int
    n_input_keyframes: int
    build_ms: float = 0.0
    solve_ms: float = 0.0

    @property
    def mp_pct(self) -> float:
        """Kept points as a percentage of the input points."""
        if self.n_input_points == 0:
            return 0.0
        return 100.0 * len(self.kept_point_ids) / self.n_input_points

    @property
    def kf_pct(self) -> float:
        """Surviving keyframes as a percentage of the input keyframes."""
        if self.n_input_keyframes == 0:
            return 0.0
        kept = self.n_input_keyframes - len(self.culled_keyframe_ids)
        return 100.0 * kept / self.n_input_keyframes

    def to_json(self, include_timings: bool = True) -> str:
        doc = {
            "kept_point_ids": sorted(self.kept_point_ids),
            "dropped_point_ids": sorted(self.dropped_point_ids),
            "culled_keyframe_ids": sorted(self.culled_keyframe_ids),
            "underviewed_point_ids": sorted(self.underviewed_point_ids),
            "point_flow": {
                str(pid): {"flow": f, "capacity": c}
                for pid, (f, c) in sorted(self.point_flow.items())
            },
            "total_flow": self.total_flow,
            "total_cost": self.total_cost,
            "counts": {
                "input_points": self.n_input_points,
                "input_keyframes": self.n_input_keyframes,
                "kept_points": len(self.kept_point_ids),
                "dropped_points": len(self.dropped_point_ids),
                "culled_keyframes": len(self.culled_keyframe_ids),
            },
            "mp_pct": self.mp_pct,
            "kf_pct": self.kf_pct,
        }
        if include_timings:
            doc["timings_ms"] = {"build": self.build_ms, "solve": self.solve_ms}
        return json.dumps(doc, indent=2, sort_keys=True)


def select_points(result: FlowResult, graph: FlowGraph, theta_ratio: float) -> set[int]:
    """Points whose source-edge flow strictly exceeds theta_ratio * capacity.

    The comparison is exact: the ratio is cross-multiplied as a fraction, so
    the default 0.5 reduces to the integer test 2*flow > capacity and a point
    sitting exactly on the threshold is dropped.
    """
    frac = Fraction(theta_ratio)
    num, den = frac.numerator, frac.denominator
    kept = set()
    for pid, ei in graph.point_source_edge.items():
        if result.edge_flows[ei] * den > num * graph.edges[ei].capacity:
            kept.add(pid)
    return kept


def cull_keyframes(slam_map: SlamMap, kept_points: set[int], keyframe_min_points: int) -> set[int]:
    """Keyframes observing fewer than ``keyframe_min_points`` kept points.

    The first and last keyframes (by seq_index) are never culled; they anchor
    the trajectory.
    """
    if not slam_map.keyframes:
        return set()
    by_seq = sorted(slam_map.keyframes, key=lambda k: k.seq_index)
    anchors = {by_seq[0].id, by_seq[-1].id}
    culled = set()
    for kf in slam_map.keyframes:
        if kf.id in anchors:
            continue
        count = sum(1 for pid in slam_map.points_of_frame(kf.id) if pid in kept_points)
        if count < keyframe_min_points:
            culled.add(kf.id)
    return culled


def sparsify(slam_map: SlamMap, config: SparsifyConfig) -> SelectionResult:
    """Full pipeline on one map; deterministic for fixed (map, config)."""
    t0 = time.perf_counter()
    graph = build_graph(slam_map, config.graph)
    t1 = time.perf_counter()
    result = solve(graph)
    t2 = time.perf_counter()

    kept = select_points(result, graph, config.theta_ratio)
    underviewed = frozenset(
        pt.id for pt in slam_map.points if len(slam_map.frames_of_point(pt.id)) < 2
    )
    if not config.drop_underviewed:
        kept |= underviewed
    dropped = {pt.id for pt in slam_map.points} - kept
    culled = cull_keyframes(slam_map, kept, config.keyframe_min_points)

    point_flow = {
        pid: (result.edge_flows[ei], graph.edges[ei].capacity)
        for pid, ei in graph.point_source_edge.items()
    }
    return SelectionResult(
        kept_point_ids=frozenset(kept),
        dropped_point_ids=frozenset(dropped),
        culled_keyframe_ids=frozenset(culled),
        underviewed_point_ids=underviewed,
        point_flow=point_flow,
        total_flow=result.total_flow,
        total_cost=result.total_cost,
        n_input_points=slam_map.n_points,
        n_input_keyframes=slam_map.n_keyframes,
        build_ms=(t1 - t0) * 1000.0,
        solve_ms=(t2 - t1) * 1000.0,
    )


def apply_selection(slam_map: SlamMap, selection: SelectionResult) -> SlamMap:
    """New map containing only kept points, surviving keyframes, and their observations."""
    kept = selection.kept_point_ids
    culled = selection.culled_keyframe_ids
    keyframes = [kf for kf in slam_map.keyframes if kf.id not in culled]
    points = [pt for pt in slam_map.points if pt.id in kept]
    observations = [
        o
        for o in slam_map.observations
        if o.point_id in kept and o.keyframe_id not in culled
    ]
    return SlamMap(keyframes, points, observations)
