"""Measurement-induced phases and dephasing of a steered qubit.

A qubit is dragged around a closed path on the Bloch sphere by a sequence
of generalized measurements; averaging the squared postselected amplitude
over readout sequences yields the signal z = exp(2i chi - alpha).  This
package computes z by brute-force enumeration, an exact finite-N replica
transfer matrix, and the quasicontinuous exp(Lambda) limit; samples
individual quantum trajectories; and maps the dephasing divergences
(zeros of z) that mark topological transitions of the phase winding.
"""

from .errors import (
    ContinuationStalled,
    DegenerateProbability,
    EnumerationTooLarge,
    IllDefinedPath,
    MatrixExpOverflow,
    MipdError,
    NoConvergence,
    OutOfDomain,
    SymmetryViolation,
    UndefinedSignal,
)
from .linalg import mat_exp, mat_mul, tensor2
from .output import AxisSpec
from .protocol import (
    ProtocolParams,
    delta_R,
    initial_state,
    kraus_backaction,
    kraus_full,
    rotation,
)
from .replica import (
    DephasingSplit,
    ReplicaStep,
    SignalPoint,
    amplitude_for_sequence,
    asymptotic_signal,
    brute_force_signal,
    lambda_matrix,
    replica_step,
    signal,
    split_dephasing,
    transfer_signal,
    verify_symmetries,
)
from .topology import (
    CriticalPoint,
    PhaseCurve,
    ScanGrid,
    find_critical_point,
    find_critical_point_fixed_theta,
    grid_local_minima,
    loop_phase_winding,
    scan_grid,
    trace_critical_line,
    unwrap_phase,
    winding_number,
)
from .trajectories import McEstimate, TrajectoryRecord, estimate_signal, sample_trajectory

__version__ = "0.1.0"

__all__ = [
    "AxisSpec",
    "ContinuationStalled",
    "CriticalPoint",
    "DegenerateProbability",
    "DephasingSplit",
    "EnumerationTooLarge",
    "IllDefinedPath",
    "MatrixExpOverflow",
    "McEstimate",
    "MipdError",
    "NoConvergence",
    "OutOfDomain",
    "PhaseCurve",
    "ProtocolParams",
    "ReplicaStep",
    "ScanGrid",
    "SignalPoint",
    "SymmetryViolation",
    "TrajectoryRecord",
    "UndefinedSignal",
    "amplitude_for_sequence",
    "asymptotic_signal",
    "brute_force_signal",
    "delta_R",
    "estimate_signal",
    "find_critical_point",
    "find_critical_point_fixed_theta",
    "grid_local_minima",
    "initial_state",
    "kraus_backaction",
    "kraus_full",
    "lambda_matrix",
    "loop_phase_winding",
    "mat_exp",
    "mat_mul",
    "replica_step",
    "rotation",
    "sample_trajectory",
    "scan_grid",
    "signal",
    "split_dephasing",
    "tensor2",
    "trace_critical_line",
    "transfer_signal",
    "unwrap_phase",
    "verify_symmetries",
    "winding_number",
]
