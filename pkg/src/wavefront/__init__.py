"""Nonspreading counterpropagating Bessel wavepackets in one dimension.

Closed-form traveling solutions of the time-dependent Schrodinger equation
with an exponentially decaying potential, plus the machinery to verify
them: finite-difference residual operators with a sign-convention probe, a
Crank-Nicolson propagation oracle, front-tracking metrics, and a CLI that
emits deterministic CSV/JSON data and rendered figures.
"""

__version__ = "0.1.0"

from .model import (
    Branch,
    ComplexField,
    DomainClippingError,
    GridSpec,
    ModelParams,
    ParameterError,
    PhaseParams,
    QReading,
    TimeSpec,
    make_params,
    make_phase,
    potential,
)
from .analytic import (
    MadelungFields,
    PhaseVariant,
    envelope_general,
    envelope_q0,
    eval_psi,
    madelung_fields,
    phase_S,
    quantum_potential,
    velocity_field,
)
from .residual import (
    ResidualReport,
    ScanResult,
    SignConvention,
    SignProbeVerdict,
    constraint_scan,
    continuity_residual,
    envelope_ode_residual,
    qhj_residual,
    sign_probe,
    tdse_residual,
)
from .propagator import (
    BCMode,
    PropagationConfig,
    SolverError,
    propagate,
    propagation_study,
    step_crank_nicolson,
)
from .metrics import (
    DirectionReport,
    FrontTrack,
    ShapeDeviation,
    direction_report,
    shape_deviation,
    track_front,
)

__all__ = [
    "__version__",
    "Branch",
    "ComplexField",
    "DomainClippingError",
    "GridSpec",
    "ModelParams",
    "ParameterError",
    "PhaseParams",
    "QReading",
    "TimeSpec",
    "make_params",
    "make_phase",
    "potential",
    "MadelungFields",
    "PhaseVariant",
    "envelope_general",
    "envelope_q0",
    "eval_psi",
    "madelung_fields",
    "phase_S",
    "quantum_potential",
    "velocity_field",
    "ResidualReport",
    "ScanResult",
    "SignConvention",
    "SignProbeVerdict",
    "constraint_scan",
    "continuity_residual",
    "envelope_ode_residual",
    "qhj_residual",
    "sign_probe",
    "tdse_residual",
    "BCMode",
    "PropagationConfig",
    "SolverError",
    "propagate",
    "propagation_study",
    "step_crank_nicolson",
    "DirectionReport",
    "FrontTrack",
    "ShapeDeviation",
    "direction_report",
    "shape_deviation",
    "track_front",
]
