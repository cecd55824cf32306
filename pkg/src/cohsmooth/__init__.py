"""Smoothed coherence quantifiers, one-shot bounds and a property harness."""
from ._accel import NUMBA_ENABLED, backend
from .measures import (
    DistanceMeasureResult,
    MeasureKind,
    TDCConfig,
    c_geometric_pure,
    c_l1,
    c_rel_ent,
    c_rel_ent_direct,
    c_trace_distance,
    coherence,
    distance_based_measure,
)
from .oneshot import (
    MaxCoherentState,
    OneShotResult,
    OperationFamily,
    bound_consistency,
    cost_one_shot,
    distill_one_shot,
)
from .reports import PropReport
from .smoothing import (
    BallSpec,
    SmoothConfig,
    SmoothResult,
    qubit_bloch_oracle,
    smooth_max,
    smooth_min,
    smooth_min_relent_ball,
    tensor_invariance_check,
)
from .states import (
    DensityMatrix,
    IncoherentState,
    KrausChannel,
    PureState,
    ValidationError,
    apply_kraus,
    dephase,
    hermitian_eig,
    is_incoherent_channel,
    mixing_channel,
    random_density,
    random_incoherent,
    random_pure,
    relative_entropy,
    selective_apply,
    tensor,
    trace_distance,
    von_neumann_entropy,
)

__version__ = "0.1.0"
