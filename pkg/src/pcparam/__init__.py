"""Point-cloud surface parametrization by smooth Hausdorff and localized
distortion energies, minimized over small sine networks with a staged
stochastic scheme; plus boundary detection and surface reconstruction."""

from .boltzmann import (
    boltzmann,
    boltzmann_gradient,
    boltzmann_rows,
    extremum_error_and_bound,
)
from .domains import (
    Arc,
    Domain,
    Line,
    PRESETS,
    landmark_targets_lines,
    load_domain,
    preset_domain,
    save_domain,
)
from .geometry import (
    AngleDistortionReport,
    TriangleMesh,
    angle_distortion,
    as_cloud,
    edge_incidence,
    hausdorff_exact,
    modified_hausdorff_exact,
    pairwise_distances,
    sampling_gap_estimate,
)
from .losses import (
    BoundAuditReport,
    HandConfig,
    LegConfig,
    LossBreakdown,
    ObjectiveConfig,
    audit_theorem_bound,
    hand,
    hand_with_grad,
    lambda_pair_from_inverse,
    landmark_energy,
    leg,
    leg_with_grad,
    total_loss,
    total_loss_with_grad,
)
from .meshing import (
    InverseInterpolator,
    ReconstructionResult,
    boundary_edges,
    delaunay,
    generate_param_mesh,
    interpolate_inverse,
    prune_long_faces,
    reconstruct_surface,
)
from .neural import (
    NetworkSpec,
    backward,
    default_lambda_spec,
    default_map_spec,
    default_shape_spec,
    forward,
    init_params,
    load_checkpoint,
    param_count,
    save_checkpoint,
)
from .optimizer import (
    RmsPropConfig,
    RmsPropState,
    StageConfig,
    StageRecord,
    TrainLog,
    TrainResult,
    TrainingError,
    advance_stage,
    alpha_schedule,
    rmsprop_step,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "boltzmann",
    "boltzmann_gradient",
    "boltzmann_rows",
    "extremum_error_and_bound",
    "Arc",
    "Domain",
    "Line",
    "PRESETS",
    "landmark_targets_lines",
    "load_domain",
    "preset_domain",
    "save_domain",
    "AngleDistortionReport",
    "TriangleMesh",
    "angle_distortion",
    "as_cloud",
    "edge_incidence",
    "hausdorff_exact",
    "modified_hausdorff_exact",
    "pairwise_distances",
    "sampling_gap_estimate",
    "BoundAuditReport",
    "HandConfig",
    "LegConfig",
    "LossBreakdown",
    "ObjectiveConfig",
    "audit_theorem_bound",
    "hand",
    "hand_with_grad",
    "lambda_pair_from_inverse",
    "landmark_energy",
    "leg",
    "leg_with_grad",
    "total_loss",
    "total_loss_with_grad",
    "InverseInterpolator",
    "ReconstructionResult",
    "boundary_edges",
    "delaunay",
    "generate_param_mesh",
    "interpolate_inverse",
    "prune_long_faces",
    "reconstruct_surface",
    "NetworkSpec",
    "backward",
    "default_lambda_spec",
    "default_map_spec",
    "default_shape_spec",
    "forward",
    "init_params",
    "load_checkpoint",
    "param_count",
    "save_checkpoint",
    "RmsPropConfig",
    "RmsPropState",
    "StageConfig",
    "StageRecord",
    "TrainLog",
    "TrainResult",
    "TrainingError",
    "advance_stage",
    "alpha_schedule",
    "rmsprop_step",
    "train",
    "__version__",
]
