"""Low-rank tensor completion with the truncated tensor Schatten-p norm."""

from .errors import (
    DimensionError,
    EmptyEvaluationError,
    FormatError,
    LrtcError,
    NumericalError,
    ParameterError,
    TruncationError,
    UnrecoverableInputError,
    UnrecoverableMaskError,
)
from .eval_harness import (
    ImputationReport,
    SweepGrid,
    compare_baselines,
    run_experiment,
    run_sweep,
    score,
)
from .patterns import MissingSpec, Pattern, fiber_structure_check, generate_mask
from .prox_gst import GstParams, gst, gst_array, gst_threshold, truncated_spn_prox
from .solver import (
    CompletionResult,
    SolverConfig,
    SolverState,
    decayed_theta,
    halrtc_config,
    init_state,
    lrtc_tnn_config,
    missing_rate,
    solve,
    step,
    truncation_ranks,
    tspn_objective,
)
from .tensor_core import (
    MaskTensor,
    Tensor3,
    fold,
    frobenius_norm,
    hadamard,
    inner_product,
    unfold,
)

__version__ = "0.1.0"
