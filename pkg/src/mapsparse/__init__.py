"""Min-cost max-flow sparsification of feature-based SLAM maps."""

from .baselines import select_grid_bucketed, select_radius_suppressed, select_top_m
from .flow_graph import (
    SINK,
    SOURCE,
    FlowEdge,
    FlowGraph,
    GraphConfig,
    GraphError,
    baseline_cost,
    build_graph,
    connectivity_cost,
    nearby_count,
    pair_vertex,
    point_capacity,
    point_vertex,
    spatial_cost,
    to_dimacs,
)
from .map_model import (
    CameraIntrinsics,
    CovisPair,
    Keyframe,
    MapFormatError,
    MapIntegrityError,
    MapPoint,
    Observation,
    Pose,
    SlamMap,
    ValidationReport,
    covisibility,
    load_map,
    maps_equal,
    save_map,
    validate,
)
from .mcmf import FlowResult, max_flow_oracle, parse_dimacs, solve, verify_optimality
from .metrics import (
    AlignmentError,
    MetricsError,
    MetricsReport,
    Trajectory,
    align,
    associate,
    ate,
    ate_rot,
    attribute_C,
    attribute_F,
    attribute_S,
    load_trajectory,
    map_report,
    save_trajectory,
    transform_trajectory,
)
from .sparsifier import (
    SelectionResult,
    SparsifyConfig,
    apply_selection,
    cull_keyframes,
    select_points,
    sparsify,
)
from .synth import GenerationError, SynthConfig, generate, perturb_trajectory

__version__ = "0.1.0"
