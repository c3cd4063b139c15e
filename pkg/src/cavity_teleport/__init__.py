"""Cavity-QED teleportation of atomic entangled states by entanglement swapping."""
from .kernels import BACKEND
from .statevec import QState, MeasurementRecord, init_product, apply_unitary, measure, project
from .cavity_ops import BellKind, DispersiveParams, JCParams, bell_state, bell_discriminate
from .protocol import (
    ChannelSpec,
    CorrectionOp,
    InputState,
    ProtocolRunRecord,
    teleport_ghz_n,
    teleport_maximal,
    teleport_nonmaximal,
)
from .analysis import (
    ProtocolParams,
    analytic_success_prob,
    enumerate_branches,
    exhaustive_success_prob,
    monte_carlo,
    run_protocol,
    timing_sensitivity,
)

__version__ = "0.1.0"
