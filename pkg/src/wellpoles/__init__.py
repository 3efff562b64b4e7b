"""S-matrix pole spectra and complex-coupling pole trajectories of the 1D rectangular well."""

from ._kernels import USING_NUMBA
from .errors import (
    ConvergedElsewhere,
    DocumentError,
    EdgeTooClose,
    ModelInvalid,
    NoConvergence,
    NoRootInBracket,
    PoleHit,
    SeedNotOnPole,
    StallAtDoubleZero,
    WellpolesError,
)
from .smatrix import (
    Channel,
    ComplexCoupling,
    InteriorMomentum,
    PotentialSpec,
    SMatrixValue,
    denom_full,
    denom_minus,
    denom_minus_reduced,
    denom_plus,
    interior_momentum,
    parity_channels,
    pole_function,
    s_full,
    s_minus,
    s_plus,
    transfer_matrix_s,
    verify_relations,
    well_layers,
)
from .rootfinder import (
    CountRegion,
    Pole,
    PoleKind,
    classify,
    count_zeros,
    count_zeros_padded,
    multiplicity_at,
    newton_refine,
    scan_axis,
)
from .trajectory import (
    Closure,
    ClosureKind,
    CollisionEvent,
    ExitReason,
    StepControl,
    TraceCaps,
    Trajectory,
    branch_at_double_zero,
    combine,
    mirror,
    mirror_defect,
    point_at,
    trace,
)
from .chart import (
    CriticalDepth,
    PoleChart,
    SweepResult,
    WorkingWindow,
    bound_count,
    bound_threshold,
    build_chart,
    critical_depth,
    depth_sweep,
    threshold_flip,
    working_window,
)
from .config import RunConfig, load_config_file, merge_config
from .document import (
    canonical_dumps,
    chart_document,
    parse_chart_document,
    poles_csv,
    trajectories_csv,
)
from .svgplot import chart_svg

__version__ = "0.1.0"

__all__ = [
    "USING_NUMBA",
    "__version__",
    "Channel",
    "ComplexCoupling",
    "InteriorMomentum",
    "PotentialSpec",
    "SMatrixValue",
    "denom_full",
    "denom_minus",
    "denom_minus_reduced",
    "denom_plus",
    "interior_momentum",
    "parity_channels",
    "pole_function",
    "s_full",
    "s_minus",
    "s_plus",
    "transfer_matrix_s",
    "verify_relations",
    "well_layers",
    "CountRegion",
    "Pole",
    "PoleKind",
    "classify",
    "count_zeros",
    "count_zeros_padded",
    "multiplicity_at",
    "newton_refine",
    "scan_axis",
    "Closure",
    "ClosureKind",
    "CollisionEvent",
    "ExitReason",
    "StepControl",
    "TraceCaps",
    "Trajectory",
    "branch_at_double_zero",
    "combine",
    "mirror",
    "mirror_defect",
    "point_at",
    "trace",
    "CriticalDepth",
    "PoleChart",
    "SweepResult",
    "WorkingWindow",
    "bound_count",
    "bound_threshold",
    "build_chart",
    "critical_depth",
    "depth_sweep",
    "threshold_flip",
    "working_window",
    "RunConfig",
    "load_config_file",
    "merge_config",
    "canonical_dumps",
    "chart_document",
    "parse_chart_document",
    "poles_csv",
    "trajectories_csv",
    "chart_svg",
    "WellpolesError",
    "PoleHit",
    "NoConvergence",
    "ConvergedElsewhere",
    "EdgeTooClose",
    "SeedNotOnPole",
    "StallAtDoubleZero",
    "ModelInvalid",
    "NoRootInBracket",
    "DocumentError",
]
