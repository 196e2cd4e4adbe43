"""Core domain types and the dimensionless unit convention.

Everything downstream works in units where hbar, the mass and the potential
amplitude are explicit dimensionless parameters.  The defaults hbar = 1,
mass = 1, C = 1/8 put the envelope scale sqrt(8*mass*C)/hbar at exactly 1.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class ParameterError(ValueError):
    """Invalid model, grid or phase parameters."""


class DomainClippingError(RuntimeError):
    """The requested window reaches the overflow region of the potential.

    The exponential envelope argument exceeds float range toward x -> -inf;
    consumers must clip the usable domain instead.
    """


class Branch(enum.Enum):
    """Which of the two traveling solutions is selected.

    PLUS pairs decay constant k = -2 with phase slope +2*mass, MINUS pairs
    k = +2 with phase slope -2*mass.
    """

    PLUS = "plus"
    MINUS = "minus"


BRANCH_K = {Branch.PLUS: -2.0, Branch.MINUS: 2.0}

#: Exponent above which exp() would overflow a double.
_EXP_OVERFLOW = 700.0


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the model and the selected branch.

    ``k`` is the decay-rate constant of the potential C*exp(-x - k*t).  When
    a branch is set, k is pinned to -2 (PLUS) or +2 (MINUS); a free k is
    allowed only without a branch (constraint-scan mode).
    """

    hbar: float = 1.0
    mass: float = 1.0
    coupling_c: float = 0.125
    k: float = -2.0
    branch: Branch | None = Branch.PLUS

    def __post_init__(self) -> None:
        if not (self.hbar > 0.0) or not math.isfinite(self.hbar):
            raise ParameterError(f"hbar must be positive and finite, got {self.hbar}")
        if not (self.mass > 0.0) or not math.isfinite(self.mass):
            raise ParameterError(f"mass must be positive and finite, got {self.mass}")
        if not math.isfinite(self.coupling_c) or not math.isfinite(self.k):
            raise ParameterError("coupling_c and k must be finite")
        if self.coupling_c < 0.0:
            raise ParameterError(
                "coupling_c must be nonnegative; the sign placement of the "
                "potential term is handled by the residual sign conventions"
            )
        if self.branch is not None:
            if self.coupling_c <= 0.0:
                raise ParameterError(
                    "coupling_c must be positive when a branch is selected "
                    "(the envelope argument would not be real)"
                )
            expected = BRANCH_K[self.branch]
            if self.k != expected:
                raise ParameterError(
                    f"branch {self.branch.value} requires k = {expected}, got {self.k}"
                )

    @property
    def lam(self) -> float:
        """Envelope scale sqrt(8*mass*coupling_c)/hbar (0 when C = 0)."""
        return math.sqrt(8.0 * self.mass * self.coupling_c) / self.hbar

    @property
    def alpha(self) -> float:
        """Phase slope paired with k: alpha = -k*mass (+2m PLUS, -2m MINUS)."""
        return -self.k * self.mass


def make_params(
    hbar: float = 1.0,
    mass: float = 1.0,
    coupling_c: float = 0.125,
    branch: Branch | None = Branch.PLUS,
    k: float | None = None,
) -> ModelParams:
    """Build validated ModelParams.

    With a branch, k is derived (a conflicting explicit k is rejected).
    Without a branch an explicit k is required.
    """
    if branch is not None:
        derived = BRANCH_K[branch]
        if k is not None and k != derived:
            raise ParameterError(
                f"explicit k = {k} conflicts with branch {branch.value} (k = {derived})"
            )
        k = derived
    elif k is None:
        raise ParameterError("k is required when no branch is selected")
    return ModelParams(hbar=hbar, mass=mass, coupling_c=coupling_c, k=k, branch=branch)


def potential(params: ModelParams, x, t):
    """Potential amplitude C*exp(-x - k*t).

    Overflow toward x -> -inf propagates as +inf, never wrapped.
    """
    arg = -np.asarray(x, dtype=float) - params.k * t
    with np.errstate(over="ignore"):
        out = params.coupling_c * np.exp(arg)
    if np.ndim(x) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class GridSpec:
    """Uniform spatial grid with nx samples on [x_min, x_max]."""

    x_min: float
    x_max: float
    nx: int

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max):
            raise ParameterError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if self.nx < 8:
            raise ParameterError(f"nx must be >= 8, got {self.nx}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    def refined(self, factor: int = 2) -> "GridSpec":
        """Same interval with dx divided by ``factor`` (nodes nest)."""
        return GridSpec(self.x_min, self.x_max, (self.nx - 1) * factor + 1)


@dataclass(frozen=True)
class TimeSpec:
    """Uniform time stepping: nt steps from t0 to t1."""

    t0: float
    t1: float
    nt: int

    def __post_init__(self) -> None:
        if self.nt < 1:
            raise ParameterError(f"nt must be >= 1, got {self.nt}")
        if not (self.t1 > self.t0):
            raise ParameterError(f"need t1 > t0, got [{self.t0}, {self.t1}]")

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / self.nt

    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.nt + 1)

    def refined(self, factor: int = 2) -> "TimeSpec":
        return TimeSpec(self.t0, self.t1, self.nt * factor)


@dataclass(frozen=True)
class ComplexField:
    """Complex samples of the wavefunction on a grid at one time."""

    grid: GridSpec
    time: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=np.complex128, copy=True)
        if vals.shape != (self.grid.nx,):
            raise ParameterError(
                f"values shape {vals.shape} does not match grid nx = {self.grid.nx}"
            )
        if not np.all(np.isfinite(vals.real)) or not np.all(np.isfinite(vals.imag)):
            raise ParameterError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def density(self) -> np.ndarray:
        return np.abs(self.values) ** 2


class QReading(enum.Enum):
    """Candidate maps from the phase constant ``a`` to the envelope order.

    The separated envelope equation admits Bessel solutions whose order is a
    square root of a multiple of -a*mass; the three candidates differ in how
    hbar and the prefactor enter.  ODE_MATCHED, q = 2*sqrt(-2*a*mass)/hbar,
    is the one validated by the envelope-equation residual (see
    residual.order_reading_report).
    """

    ROOT_OVER_HBAR = "root_over_hbar"      # q = sqrt(-2*a*mass)/hbar
    RATIO_UNDER_ROOT = "ratio_under_root"  # q = sqrt(-2*a*mass/hbar)
    ODE_MATCHED = "ode_matched"            # q = 2*sqrt(-2*a*mass)/hbar


@dataclass(frozen=True)
class PhaseParams:
    """Linear traveling phase S = alpha*(x - beta*t) and derived constants."""

    alpha: float
    beta: float
    mass: float = 1.0
    hbar: float = 1.0
    reading: QReading = QReading.ODE_MATCHED

    def __post_init__(self) -> None:
        if not (self.mass > 0.0) or not (self.hbar > 0.0):
            raise ParameterError("mass and hbar must be positive")

    @property
    def a(self) -> float:
        """Reduced constant alpha**2/(2*mass) - alpha*beta."""
        return self.alpha * self.alpha / (2.0 * self.mass) - self.alpha * self.beta

    def bessel_order(self, reading: QReading | None = None) -> float:
        """Envelope order under the given (or stored) reading.

        All readings give order 0 exactly when a = 0; a real order otherwise
        requires a <= 0.
        """
        reading = self.reading if reading is None else reading
        a = self.a
        if a == 0.0:
            return 0.0
        radicand = -2.0 * a * self.mass
        if reading is QReading.RATIO_UNDER_ROOT:
            radicand = -2.0 * a * self.mass / self.hbar
        if radicand < 0.0:
            raise ParameterError(
                f"envelope order is imaginary for a = {a} under {reading.value}"
            )
        root = math.sqrt(radicand)
        if reading is QReading.ROOT_OVER_HBAR:
            return root / self.hbar
        if reading is QReading.RATIO_UNDER_ROOT:
            return root
        return 2.0 * root / self.hbar

    @property
    def q(self) -> float:
        return self.bessel_order()


def make_phase(
    alpha: float,
    beta: float,
    params: ModelParams,
    reading: QReading = QReading.ODE_MATCHED,
) -> PhaseParams:
    """PhaseParams sharing mass and hbar with ``params``."""
    return PhaseParams(alpha=alpha, beta=beta, mass=params.mass, hbar=params.hbar, reading=reading)
