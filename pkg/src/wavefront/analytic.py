"""Closed-form traveling solutions and their Madelung decomposition.

The two branch solutions share the shape

    psi(x, t) = c * J0(lam * exp(-(x + k*t)/2)) * exp(i*S(x, t)/hbar)

with lam = sqrt(8*mass*C)/hbar, k = -2 (PLUS) or +2 (MINUS) and a linear
phase S = alpha*(x - beta*t), alpha = -k*mass.  The amplitude is a rigidly
translating front: the density depends on x and t only through x + k*t.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    Branch,
    ComplexField,
    DomainClippingError,
    GridSpec,
    ModelParams,
    ParameterError,
    PhaseParams,
)
from . import specfun

#: Relative amplitude floor below which R''/R is masked (the envelope has
#: genuine zeros; the quotient is removable there, not clampable).
DEFAULT_EPS_R = 1e-10


class PhaseVariant(enum.Enum):
    """Phase candidates for a branch, named by the phase-front direction.

    COMOVING ties the phase speed to the packet direction (beta = +1 on the
    PLUS branch, beta = -1 on MINUS) and is the variant validated by the
    residual probe.  OPPOSING keeps beta = +1 on the MINUS branch so its
    phase fronts run against the packet; it fails the equation and is kept
    callable for the probe's candidate set.  On the PLUS branch both names
    select the same (only) phase.
    """

    COMOVING = "comoving"
    OPPOSING = "opposing"


def _require_branch(params: ModelParams) -> Branch:
    if params.branch is None:
        raise ParameterError("operation requires params with a branch selected")
    return params.branch


def phase_beta(params: ModelParams, variant: PhaseVariant = PhaseVariant.COMOVING) -> float:
    """Phase speed beta for the branch and variant."""
    branch = _require_branch(params)
    if branch is Branch.PLUS or variant is PhaseVariant.OPPOSING:
        return 1.0
    return -1.0


def envelope_argument(params: ModelParams, x, t):
    """Bessel argument lam * exp(-(x + k*t)/2); overflow raises."""
    x = np.asarray(x, dtype=float)
    exponent = -0.5 * (x + params.k * t)
    if params.lam > 0.0:
        if np.max(exponent) + math.log(params.lam) > 700.0:
            raise DomainClippingError(
                "envelope argument overflows toward x -> -inf; clip the domain "
                f"(max exponent {np.max(exponent):.1f})"
            )
        return params.lam * np.exp(exponent)
    return np.zeros_like(x)


def envelope_q0(params: ModelParams, x, t):
    """Order-zero envelope J0(lam * exp(-(x + k*t)/2)) for the branch."""
    _require_branch(params)
    z = envelope_argument(params, x, t)
    out = specfun.bessel_j(0.0, z)
    if np.ndim(x) == 0:
        return float(out)
    return out


def envelope_general(
    params: ModelParams,
    phase: PhaseParams,
    x,
    t,
    c1: float = 0.0,
    c2: float = 1.0,
):
    """General envelope c1*J_{-q}(z)*Gamma(1-q) + c2*J_q(z)*Gamma(1+q).

    Terms with a zero coefficient are skipped, so c1 = 0 avoids the J_{-q}
    blowup at z -> 0 and the Gamma(1-q) poles at positive integer q.
    """
    if params.coupling_c <= 0.0:
        raise ParameterError("envelope_general requires coupling_c > 0")
    q = phase.q
    z = envelope_argument(params, x, t)
    out = np.zeros_like(np.asarray(z, dtype=float))
    if c1 != 0.0:
        out = out + c1 * specfun.gamma_fn(1.0 - q) * specfun.bessel_j(-q, z)
    if c2 != 0.0:
        out = out + c2 * specfun.gamma_fn(1.0 + q) * specfun.bessel_j(q, z)
    if np.ndim(x) == 0:
        return float(out)
    return out


def phase_S(params: ModelParams, x, t, variant: PhaseVariant = PhaseVariant.COMOVING):
    """Linear phase S = alpha*(x - beta*t) in action units."""
    beta = phase_beta(params, variant)
    out = params.alpha * (np.asarray(x, dtype=float) - beta * t)
    if np.ndim(x) == 0:
        return float(out)
    return out


def psi_values(
    params: ModelParams,
    x,
    t,
    amplitude: complex = 1.0,
    variant: PhaseVariant = PhaseVariant.COMOVING,
) -> np.ndarray:
    """Raw complex samples of the branch solution at time t."""
    _require_branch(params)
    z = envelope_argument(params, x, t)
    envelope = specfun.bessel_j(0.0, z)
    phase = phase_S(params, x, t, variant) / params.hbar
    return amplitude * envelope * np.exp(1j * np.asarray(phase, dtype=float))


def eval_psi(
    params: ModelParams,
    grid: GridSpec,
    t: float,
    amplitude: complex = 1.0,
    variant: PhaseVariant = PhaseVariant.COMOVING,
) -> ComplexField:
    """Branch solution sampled on a grid as a ComplexField."""
    values = psi_values(params, grid.points(), t, amplitude, variant)
    return ComplexField(grid=grid, time=t, values=values)


def quantum_potential(
    r: np.ndarray,
    dx: float,
    params: ModelParams,
    eps_r: float = DEFAULT_EPS_R,
) -> np.ndarray:
    """-(hbar^2/2m) * R''/R by central differences, NaN where |R| ~ 0.

    Boundary samples are NaN (no one-sided stencils); interior samples with
    |R| < eps_r * max|R| are masked as undefined.
    """
    r = np.asarray(r, dtype=float)
    if r.size < 5:
        raise ParameterError("quantum_potential needs at least 5 samples")
    out = np.full_like(r, np.nan)
    second = (r[2:] - 2.0 * r[1:-1] + r[:-2]) / (dx * dx)
    floor = eps_r * np.max(np.abs(r))
    interior = r[1:-1]
    safe = np.abs(interior) >= max(floor, 1e-300)
    if not np.any(safe):
        raise ParameterError("quantum_potential: amplitude vanishes everywhere")
    coeff = -params.hbar * params.hbar / (2.0 * params.mass)
    vals = np.full_like(interior, np.nan)
    vals[safe] = coeff * second[safe] / interior[safe]
    out[1:-1] = vals
    return out


def velocity_field(params: ModelParams, grid: GridSpec, t: float) -> np.ndarray:
    """Transport velocity (dS/dx)/mass: the constant alpha/mass = -k."""
    _require_branch(params)
    return np.full(grid.nx, params.alpha / params.mass)


@dataclass(frozen=True)
class MadelungFields:
    """Amplitude/phase split of a branch solution with derived quantities.

    R is signed (the envelope oscillates through zero); density = R**2 and
    R*exp(i*S/hbar) reproduces the complex field exactly.  qpot is NaN at
    boundary samples and at envelope zeros.
    """

    grid: GridSpec
    time: float
    r: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)
    current: np.ndarray = field(repr=False)
    qpot: np.ndarray = field(repr=False)

    def to_complex(self, hbar: float) -> np.ndarray:
        return self.r * np.exp(1j * self.s / hbar)


def madelung_fields(
    params: ModelParams,
    grid: GridSpec,
    t: float,
    amplitude: float = 1.0,
    variant: PhaseVariant = PhaseVariant.COMOVING,
    eps_r: float = DEFAULT_EPS_R,
) -> MadelungFields:
    """Madelung decomposition of the branch solution on a grid."""
    xs = grid.points()
    r = amplitude * np.asarray(envelope_q0(params, xs, t), dtype=float)
    s = np.asarray(phase_S(params, xs, t, variant), dtype=float)
    density = r * r
    current = density * (params.alpha / params.mass)
    qpot = quantum_potential(r, grid.dx, params, eps_r=eps_r)
    return MadelungFields(grid=grid, time=t, r=r, s=s, density=density, current=current, qpot=qpot)
