"""Crank-Nicolson time evolution on a truncated domain.

The closed forms are non-normalizable fronts (|psi| -> |c| as x -> +inf),
so the solver runs with time-dependent Dirichlet boundary values taken from
the closed form (a manufactured-solution setup); FROZEN_DIRICHLET pins the
initial boundary values instead and exists for null tests.  The potential
is evaluated at the half step, keeping the scheme second order in dt.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import analytic
from .analytic import PhaseVariant
from .model import (
    ComplexField,
    DomainClippingError,
    GridSpec,
    ModelParams,
    ParameterError,
    TimeSpec,
    potential,
)
from .residual import SIGMA, SignConvention


class SolverError(RuntimeError):
    """The tridiagonal step system could not be solved."""


class BCMode(enum.Enum):
    ANALYTIC_DIRICHLET = "analytic_dirichlet"
    FROZEN_DIRICHLET = "frozen_dirichlet"


@dataclass(frozen=True)
class PropagationConfig:
    """Discretization, sign convention and boundary handling for one run."""

    grid: GridSpec
    time: TimeSpec
    convention: SignConvention = SignConvention.ATTRACTIVE
    bc_mode: BCMode = BCMode.ANALYTIC_DIRICHLET
    variant: PhaseVariant = PhaseVariant.COMOVING
    amplitude: complex = 1.0
    snapshot_stride: int = 0
    potential_cap: float = 1e6

    def __post_init__(self) -> None:
        if self.snapshot_stride < 0:
            raise ParameterError("snapshot_stride must be >= 0")

    def check_domain(self, params: ModelParams) -> None:
        """Reject grids whose left edge reaches overflow-scale potentials."""
        cap = self.potential_cap * max(abs(params.coupling_c), 1.0)
        worst = max(
            abs(potential(params, self.grid.x_min, self.time.t0)),
            abs(potential(params, self.grid.x_min, self.time.t1)),
        )
        if not math.isfinite(worst) or worst > cap:
            raise DomainClippingError(
                f"potential magnitude {worst:.3g} at x_min exceeds the cap {cap:.3g}; "
                "move x_min right"
            )

    def stability_diagnostic(self, params: ModelParams) -> float:
        """dt*hbar/(2*mass*dx^2); informational, the scheme is A-stable."""
        return self.time.dt * params.hbar / (2.0 * params.mass * self.grid.dx**2)


def _boundary_values(
    params: ModelParams,
    config: PropagationConfig,
    current: ComplexField,
    t_next: float,
) -> tuple[complex, complex]:
    if config.bc_mode is BCMode.FROZEN_DIRICHLET:
        return complex(current.values[0]), complex(current.values[-1])
    left = analytic.psi_values(
        params, np.asarray([config.grid.x_min]), t_next, config.amplitude, config.variant
    )[0]
    right = analytic.psi_values(
        params, np.asarray([config.grid.x_max]), t_next, config.amplitude, config.variant
    )[0]
    return complex(left), complex(right)


def step_crank_nicolson(
    field: ComplexField,
    params: ModelParams,
    config: PropagationConfig,
) -> ComplexField:
    """One Crank-Nicolson step of length config.time.dt from field.time.

    Solves (I + i*dt/(2*hbar) H) psi_next = (I - i*dt/(2*hbar) H) psi with
    H built from the half-step potential under the configured convention;
    boundary rows are identity rows pinned to the boundary values.
    """
    if field.grid != config.grid:
        raise ParameterError("field grid does not match config grid")
    dt = config.time.dt
    t = field.time
    xs = config.grid.points()
    dx = config.grid.dx
    v_eff = -SIGMA[config.convention] * potential(params, xs, t + 0.5 * dt)
    if not np.all(np.isfinite(v_eff)):
        raise DomainClippingError("potential overflows inside the grid; clip the domain")
    hbar, mass = params.hbar, params.mass
    off = -(hbar * hbar) / (2.0 * mass * dx * dx)
    diag = (hbar * hbar) / (mass * dx * dx) + v_eff
    theta = dt / (2.0 * hbar)

    psi = field.values
    rhs = (1.0 - 1j * theta * diag) * psi
    rhs[1:] += (-1j * theta * off) * psi[:-1]
    rhs[:-1] += (-1j * theta * off) * psi[1:]

    n = config.grid.nx
    ab = np.zeros((3, n), dtype=np.complex128)
    ab[0, 1:] = 1j * theta * off  # superdiagonal
    ab[1, :] = 1.0 + 1j * theta * diag
    ab[2, :-1] = 1j * theta * off  # subdiagonal

    left, right = _boundary_values(params, config, field, t + dt)
    ab[1, 0] = 1.0
    ab[0, 1] = 0.0
    ab[1, -1] = 1.0
    ab[2, -2] = 0.0
    rhs[0] = left
    rhs[-1] = right

    try:
        new_values = scipy.linalg.solve_banded((1, 1), ab, rhs)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:  # pragma: no cover
        raise SolverError(f"tridiagonal step system is singular: {exc}") from exc
    if not np.all(np.isfinite(new_values.real)) or not np.all(np.isfinite(new_values.imag)):
        raise SolverError("step produced non-finite values")
    return ComplexField(grid=config.grid, time=t + dt, values=new_values)


def propagate(
    params: ModelParams,
    config: PropagationConfig,
    initial: ComplexField,
) -> list[ComplexField]:
    """Iterate step_crank_nicolson over the TimeSpec.

    Returns snapshots: the initial field, every snapshot_stride-th step when
    the stride is positive, and always the final field.
    """
    config.check_domain(params)
    if initial.grid != config.grid:
        raise ParameterError("initial field grid does not match config grid")
    if not math.isclose(initial.time, config.time.t0, rel_tol=0.0, abs_tol=1e-12):
        raise ParameterError(
            f"initial field time {initial.time} does not match t0 = {config.time.t0}"
        )
    snapshots = [initial]
    current = initial
    for step in range(1, config.time.nt + 1):
        current = step_crank_nicolson(current, params, config)
        # re-pin the timestamp so it does not accumulate rounding drift
        exact_t = config.time.t0 + step * config.time.dt
        current = ComplexField(grid=config.grid, time=exact_t, values=current.values)
        take = config.snapshot_stride > 0 and step % config.snapshot_stride == 0
        if take or step == config.time.nt:
            snapshots.append(current)
    return snapshots


def interior_error(field: ComplexField, reference: np.ndarray) -> float:
    """L-inf of field - reference over the grid interior."""
    if reference.shape != (field.grid.nx,):
        raise ParameterError("reference shape does not match grid")
    return float(np.max(np.abs(field.values[1:-1] - reference[1:-1])))


def interior_norm(field: ComplexField) -> float:
    """Discrete L2 norm over the interior, sqrt(dx * sum |psi|^2)."""
    return float(
        math.sqrt(field.grid.dx * float(np.sum(np.abs(field.values[1:-1]) ** 2)))
    )


@dataclass(frozen=True)
class StudyRow:
    dx: float
    dt: float
    nx: int
    nt: int
    error_linf: float
    order: float | None


def propagation_study(
    params: ModelParams,
    config: PropagationConfig,
    levels: int = 3,
) -> list[StudyRow]:
    """Refinement study: (dx, dt) halved per level, manufactured initial data.

    Error is the interior L-inf against the closed form at t1; orders are
    two-grid estimates between consecutive levels.
    """
    rows: list[StudyRow] = []
    grid, time = config.grid, config.time
    prev_err: float | None = None
    for _ in range(levels):
        cfg = PropagationConfig(
            grid=grid,
            time=time,
            convention=config.convention,
            bc_mode=config.bc_mode,
            variant=config.variant,
            amplitude=config.amplitude,
            snapshot_stride=0,
            potential_cap=config.potential_cap,
        )
        initial = analytic.eval_psi(params, grid, time.t0, config.amplitude, config.variant)
        final = propagate(params, cfg, initial)[-1]
        exact = analytic.psi_values(
            params, grid.points(), time.t1, config.amplitude, config.variant
        )
        err = interior_error(final, exact)
        order = None if prev_err is None else math.log2(prev_err / err)
        rows.append(StudyRow(grid.dx, time.dt, grid.nx, time.nt, err, order))
        prev_err = err
        grid = grid.refined(2)
        time = time.refined(2)
    return rows
