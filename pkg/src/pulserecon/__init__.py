"""Statistical reconstruction of a recurring pulse from short sample trains."""
from .curve_ordering import Ordering, nn_crust, on_axis, order_trains, orient
from .errors import (
    ConditionViolation,
    InsufficientData,
    MissingCoordinateData,
    NoAxisPoint,
    ReconstructionError,
)
from .reconstruction import (
    AlphaEstimates,
    PolygonalChain,
    PulseEstimate,
    QuantileEstimate,
    algorithm1_oracle,
    algorithm2,
    arc_coordinate,
    build_chain,
    chain_point,
    estimate_alphas,
    estimate_quantile,
    estimate_Tp,
    q_hat,
    reconstruct_pulse,
)
from .signal_model import (
    GapLaw,
    Interp,
    PulseSignal,
    PulseStream,
    SamplingConfig,
    SamplingMode,
    default_pulse,
    eval_pulse,
    extract_trains,
    sample_train,
    synth_stream,
    triangle_pulse,
)

__version__ = "0.1.0"
