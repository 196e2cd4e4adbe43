"""Finite-difference residual operators and the sign-convention probe.

All operators use second-order central differences in both x and t and
exclude boundary samples rather than switching to one-sided stencils, so a
single convergence-order story (error ~ dx^2 + dt^2) applies everywhere.

Two sign placements of the potential term are supported:

* ATTRACTIVE: i*hbar*psi_t = -(hbar^2/2m)*psi_xx - C*exp(-x-k*t)*psi
* REPULSIVE:  i*hbar*psi_t = -(hbar^2/2m)*psi_xx + C*exp(-x-k*t)*psi

A convention names the equation, and every residual family (full equation,
phase/amplitude split) derives its internal signs from it, so exactly one
convention makes all residuals of the closed forms vanish.  The probe
measures which.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import analytic, specfun
from .analytic import PhaseVariant
from .model import (
    Branch,
    GridSpec,
    ModelParams,
    ParameterError,
    PhaseParams,
    potential,
)

PsiSource = Callable[[np.ndarray, float], np.ndarray]
MadelungSource = Callable[[np.ndarray, float], tuple[np.ndarray, np.ndarray]]

#: Ratio of candidate residuals below which a probe verdict is inconclusive.
DECISIVE_RATIO = 10.0


class SignConvention(enum.Enum):
    ATTRACTIVE = "attractive"
    REPULSIVE = "repulsive"


#: sigma multiplying C*exp(-x-k*t)*psi in the full-equation residual
#: -(hbar^2/2m)*D2 psi - i*hbar*Dt psi - sigma*V*psi.
SIGMA = {SignConvention.ATTRACTIVE: 1.0, SignConvention.REPULSIVE: -1.0}


@dataclass(frozen=True)
class ResidualReport:
    """Norms of a discrete residual over the grid interior.

    ``term_scale`` is the interior maximum of the summed magnitudes of the
    residual's constituent terms; ``linf_rel``/``l2_rel`` divide by it so
    "vanishing" is scale-free.
    """

    l2_norm: float
    linf_norm: float
    term_scale: float
    grid: GridSpec
    dt_used: float
    sign_convention: SignConvention | None = None
    convergence_order: float | None = None

    @property
    def linf_rel(self) -> float:
        return self.linf_norm / self.term_scale if self.term_scale > 0.0 else self.linf_norm

    @property
    def l2_rel(self) -> float:
        return self.l2_norm / self.term_scale if self.term_scale > 0.0 else self.l2_norm

    def to_dict(self) -> dict:
        return {
            "l2_norm": self.l2_norm,
            "linf_norm": self.linf_norm,
            "term_scale": self.term_scale,
            "linf_rel": self.linf_rel,
            "dt": self.dt_used,
            "nx": self.grid.nx,
            "sign_convention": self.sign_convention.value if self.sign_convention else None,
            "convergence_order": self.convergence_order,
        }


def _norms(residual: np.ndarray, scale_terms: np.ndarray, dx: float) -> tuple[float, float, float]:
    linf = float(np.max(np.abs(residual)))
    l2 = float(math.sqrt(dx * float(np.sum(np.abs(residual) ** 2))))
    scale = float(np.max(scale_terms))
    return l2, linf, scale


def tdse_residual(
    psi: PsiSource,
    params: ModelParams,
    grid: GridSpec,
    t: float,
    dt: float,
    convention: SignConvention = SignConvention.ATTRACTIVE,
) -> ResidualReport:
    """Full-equation residual of a time-indexed field source at time t."""
    if dt <= 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    xs = grid.points()
    psi_m = np.asarray(psi(xs, t - dt), dtype=np.complex128)
    psi_0 = np.asarray(psi(xs, t), dtype=np.complex128)
    psi_p = np.asarray(psi(xs, t + dt), dtype=np.complex128)
    for arr in (psi_m, psi_0, psi_p):
        if arr.shape != xs.shape:
            raise ParameterError("psi source returned wrong shape")
        if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
            raise ParameterError("psi source returned non-finite values")
    dx = grid.dx
    kin = -(params.hbar**2 / (2.0 * params.mass)) * (
        psi_0[2:] - 2.0 * psi_0[1:-1] + psi_0[:-2]
    ) / (dx * dx)
    time_term = -1j * params.hbar * (psi_p[1:-1] - psi_m[1:-1]) / (2.0 * dt)
    v = potential(params, xs[1:-1], t)
    pot_term = -SIGMA[convention] * v * psi_0[1:-1]
    residual = kin + time_term + pot_term
    scale_terms = np.abs(kin) + np.abs(time_term) + np.abs(pot_term)
    l2, linf, scale = _norms(residual, scale_terms, dx)
    return ResidualReport(l2, linf, scale, grid, dt, convention)


def residual_refinement(
    psi: PsiSource,
    params: ModelParams,
    grid: GridSpec,
    t: float,
    dt: float,
    convention: SignConvention,
    levels: int = 3,
) -> list[ResidualReport]:
    """Residual on successively halved (dx, dt); attaches two-grid orders."""
    reports: list[ResidualReport] = []
    g, step = grid, dt
    for level in range(levels):
        rep = tdse_residual(psi, params, g, t, step, convention)
        if reports:
            prev = reports[-1]
            order = math.log2(prev.linf_norm / rep.linf_norm) if rep.linf_norm > 0 else math.inf
            rep = replace(rep, convergence_order=order)
        reports.append(rep)
        g = g.refined(2)
        step = 0.5 * step
    return reports


def default_probe_grid() -> GridSpec:
    """Window covering the front of either branch near t ~ 0.5."""
    return GridSpec(-6.0, 6.0, 6001)


@dataclass(frozen=True)
class SignProbeVerdict:
    """Outcome of racing the sign conventions (and Minus phase variants)."""

    branch: Branch
    winning_convention: SignConvention
    winning_phase_variant: PhaseVariant | None
    residual_ratio: float
    inconclusive: bool
    winning_linf: float
    losing_linf: float
    candidates: tuple[tuple[SignConvention, PhaseVariant, float], ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "branch": self.branch.value,
            "winning_convention": self.winning_convention.value,
            "winning_phase_variant": (
                self.winning_phase_variant.value if self.winning_phase_variant else None
            ),
            "residual_ratio": self.residual_ratio,
            "inconclusive": self.inconclusive,
            "winning_linf": self.winning_linf,
            "losing_linf": self.losing_linf,
            "candidates": [
                {"convention": c.value, "phase_variant": v.value, "linf": r}
                for c, v, r in self.candidates
            ],
        }


def sign_probe(
    params: ModelParams,
    grid: GridSpec | None = None,
    t: float = 0.5,
    dt: float | None = None,
) -> SignProbeVerdict:
    """Race both conventions (x both phase variants on MINUS) on one grid.

    The winner is the candidate with the smallest interior L-inf residual;
    the ratio to the runner-up below DECISIVE_RATIO marks the verdict
    inconclusive (e.g. C -> 0, where the conventions coincide).
    """
    if params.branch is None:
        raise ParameterError("sign_probe requires a branch")
    grid = grid or default_probe_grid()
    dt = grid.dx if dt is None else dt
    variants = (
        (PhaseVariant.COMOVING,)
        if params.branch is Branch.PLUS
        else (PhaseVariant.COMOVING, PhaseVariant.OPPOSING)
    )
    results: list[tuple[SignConvention, PhaseVariant, float]] = []
    for convention in SignConvention:
        for variant in variants:
            def source(x, tt, _variant=variant):
                return analytic.psi_values(params, x, tt, variant=_variant)

            rep = tdse_residual(source, params, grid, t, dt, convention)
            results.append((convention, variant, rep.linf_norm))
    results.sort(key=lambda item: item[2])
    best, second = results[0], results[1]
    ratio = second[2] / best[2] if best[2] > 0.0 else math.inf
    return SignProbeVerdict(
        branch=params.branch,
        winning_convention=best[0],
        winning_phase_variant=best[1] if params.branch is Branch.MINUS else None,
        residual_ratio=ratio,
        inconclusive=ratio < DECISIVE_RATIO,
        winning_linf=best[2],
        losing_linf=second[2],
        candidates=tuple(results),
    )


def madelung_source(
    params: ModelParams,
    amplitude: float = 1.0,
    variant: PhaseVariant = PhaseVariant.COMOVING,
) -> MadelungSource:
    """(x, t) -> (R, S) sampled from the branch closed form."""

    def source(x: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
        r = amplitude * np.asarray(analytic.envelope_q0(params, x, t), dtype=float)
        s = np.asarray(analytic.phase_S(params, x, t, variant), dtype=float)
        return r, s

    return source


def superposition_source(
    params_a: ModelParams,
    params_b: ModelParams,
    amplitude_a: complex = 1.0,
    amplitude_b: complex = 1.0,
) -> PsiSource:
    """Sum of two branch solutions, used by the non-closure check."""

    def source(x: np.ndarray, t: float) -> np.ndarray:
        return analytic.psi_values(params_a, x, t, amplitude_a) + analytic.psi_values(
            params_b, x, t, amplitude_b
        )

    return source


def qhj_residual(
    fields: MadelungSource,
    params: ModelParams,
    grid: GridSpec,
    t: float,
    dt: float,
    convention: SignConvention = SignConvention.ATTRACTIVE,
    eps_r: float = analytic.DEFAULT_EPS_R,
    zero_radius: float = 0.0,
) -> ResidualReport:
    """Residual of the phase (Hamilton-Jacobi) half of the split equation.

    residual = S_t + (S_x)^2/2m - sigma*C*exp(-x-k*t) - (hbar^2/2m) R''/R

    with sigma from the convention, so the convention that zeroes the full
    equation zeroes this too.  Samples with |R| < eps_r * max|R| (envelope
    zeros) are excluded from the norms.  A positive ``zero_radius``
    additionally excludes a fixed x-neighborhood of every sign change of R,
    which keeps the R''/R quotient uniformly bounded so the residual of an
    exact solution converges at second order (with the amplitude floor
    alone, grid points can land arbitrarily close to a zero and the L-inf
    norm stalls there).
    """
    if dt <= 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    xs = grid.points()
    r_m, s_m = fields(xs, t - dt)
    r_0, s_0 = fields(xs, t)
    r_p, s_p = fields(xs, t + dt)
    dx = grid.dx
    s_t = (s_p[1:-1] - s_m[1:-1]) / (2.0 * dt)
    s_x = (s_0[2:] - s_0[:-2]) / (2.0 * dx)
    r_second = (r_0[2:] - 2.0 * r_0[1:-1] + r_0[:-2]) / (dx * dx)
    r_mid = r_0[1:-1]
    keep = np.abs(r_mid) >= max(eps_r * float(np.max(np.abs(r_0))), 1e-300)
    if zero_radius > 0.0:
        sign_flip = np.sign(r_0[:-1]) * np.sign(r_0[1:]) < 0.0
        crossings = xs[:-1][sign_flip] + 0.5 * dx
        if crossings.size:
            distance = np.min(np.abs(xs[1:-1, None] - crossings[None, :]), axis=1)
            keep &= distance >= zero_radius
    if not np.any(keep):
        raise ParameterError("qhj_residual: amplitude mask covers the whole interior")
    v = potential(params, xs[1:-1], t)
    kin = s_x**2 / (2.0 * params.mass)
    qpot = np.zeros_like(r_mid)
    qpot[keep] = (params.hbar**2 / (2.0 * params.mass)) * r_second[keep] / r_mid[keep]
    residual = (s_t + kin - SIGMA[convention] * v - qpot)[keep]
    scale_terms = (np.abs(s_t) + np.abs(kin) + np.abs(v) + np.abs(qpot))[keep]
    l2, linf, scale = _norms(residual, scale_terms, dx)
    return ResidualReport(l2, linf, scale, grid, dt, convention)


def continuity_residual(
    fields: MadelungSource,
    params: ModelParams,
    grid: GridSpec,
    t: float,
    dt: float,
) -> ResidualReport:
    """Residual of the transport half: R_t + (R_x S_x)/m + R S_xx/(2m) = 0."""
    if dt <= 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    xs = grid.points()
    r_m, _ = fields(xs, t - dt)
    r_0, s_0 = fields(xs, t)
    r_p, _ = fields(xs, t + dt)
    dx = grid.dx
    r_t = (r_p[1:-1] - r_m[1:-1]) / (2.0 * dt)
    r_x = (r_0[2:] - r_0[:-2]) / (2.0 * dx)
    s_x = (s_0[2:] - s_0[:-2]) / (2.0 * dx)
    s_second = (s_0[2:] - 2.0 * s_0[1:-1] + s_0[:-2]) / (dx * dx)
    inv_m = 1.0 / params.mass
    transport = inv_m * r_x * s_x
    compression = 0.5 * inv_m * r_0[1:-1] * s_second
    residual = r_t + transport + compression
    scale_terms = np.abs(r_t) + np.abs(transport) + np.abs(compression)
    l2, linf, scale = _norms(residual, scale_terms, dx)
    return ResidualReport(l2, linf, scale, grid, dt, None)


def envelope_ode_residual(
    params: ModelParams,
    phase: PhaseParams,
    t: float,
    grid: GridSpec,
    sign: float = -1.0,
    c1: float = 0.0,
    c2: float = 1.0,
) -> ResidualReport:
    """Residual of R'' = sign*(2m/hbar^2)*(C*exp(-x-k*t) + a)*R.

    sign = -1 (the placement consistent with the ATTRACTIVE convention) is
    the one the Bessel envelopes satisfy; sign = +1 leaves an O(1) defect.
    """
    if sign not in (-1.0, 1.0):
        raise ParameterError(f"sign must be +1 or -1, got {sign}")
    xs = grid.points()
    if params.coupling_c > 0.0:
        r = np.asarray(analytic.envelope_general(params, phase, xs, t, c1, c2), dtype=float)
    else:
        q = phase.q
        j_at_zero = specfun.bessel_j(q, 0.0) if c2 != 0.0 else 0.0
        jm_at_zero = specfun.bessel_j(-q, 0.0) if c1 != 0.0 else 0.0
        const = c1 * (specfun.gamma_fn(1.0 - q) if c1 != 0.0 else 0.0) * jm_at_zero
        const += c2 * (specfun.gamma_fn(1.0 + q) if c2 != 0.0 else 0.0) * j_at_zero
        r = np.full_like(xs, const)
    dx = grid.dx
    r_second = (r[2:] - 2.0 * r[1:-1] + r[:-2]) / (dx * dx)
    bracket = (2.0 * params.mass / params.hbar**2) * (potential(params, xs[1:-1], t) + phase.a)
    forcing = sign * bracket * r[1:-1]
    residual = r_second - forcing
    scale_terms = np.abs(r_second) + np.abs(forcing)
    l2, linf, scale = _norms(residual, scale_terms, dx)
    return ResidualReport(l2, linf, scale, grid, dx, None)


def order_reading_report(
    params: ModelParams,
    alpha: float = 1.0,
    beta: float | None = None,
    t: float = 0.25,
    grid: GridSpec | None = None,
) -> dict[str, float]:
    """Relative envelope-equation residual for each order reading.

    Uses a phase with a < 0 so the candidate orders are real and distinct
    (run with hbar != 1 to separate the two non-matched readings).  The
    reading whose residual vanishes under refinement is the validated map.
    """
    from .model import QReading

    grid = grid or GridSpec(-3.0, 3.0, 2001)
    if beta is None:
        # a = alpha^2/2m - alpha*beta = -1
        beta = (alpha**2 / (2.0 * params.mass) + 1.0) / alpha
    out: dict[str, float] = {}
    for reading in QReading:
        phase = PhaseParams(alpha, beta, params.mass, params.hbar, reading)
        rep = envelope_ode_residual(params, phase, t, grid, sign=-1.0, c1=0.0, c2=1.0)
        out[reading.value] = rep.linf_rel
    return out


def thread_cap() -> int:
    """Sweep parallelism cap from WAVEFRONT_THREADS (default 1)."""
    raw = os.environ.get("WAVEFRONT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ScanResult:
    """Continuity-residual surface over (alpha, k) for the order-0 envelope.

    The underlying operator vanishes identically along the line
    k = -alpha/mass (every point on it is an exact traveling solution), so
    the surface has a zero valley; the two branch pairings lie on it.
    """

    alphas: np.ndarray
    ks: np.ndarray
    linf: np.ndarray  # shape (len(alphas), len(ks))
    grid: GridSpec
    t: float
    dt: float

    def rows(self) -> list[tuple[float, float, float]]:
        out = []
        for i, a in enumerate(self.alphas):
            for j, k in enumerate(self.ks):
                out.append((float(a), float(k), float(self.linf[i, j])))
        return out

    def global_min(self) -> tuple[float, float, float]:
        i, j = np.unravel_index(int(np.argmin(self.linf)), self.linf.shape)
        return float(self.alphas[i]), float(self.ks[j]), float(self.linf[i, j])

    def value_near(self, alpha0: float, k0: float, cells: int = 1) -> tuple[float, float, float]:
        """Smallest surface value within ``cells`` grid cells of (alpha0, k0)."""
        i0 = int(np.argmin(np.abs(self.alphas - alpha0)))
        j0 = int(np.argmin(np.abs(self.ks - k0)))
        i_lo, i_hi = max(0, i0 - cells), min(len(self.alphas), i0 + cells + 1)
        j_lo, j_hi = max(0, j0 - cells), min(len(self.ks), j0 + cells + 1)
        window = self.linf[i_lo:i_hi, j_lo:j_hi]
        di, dj = np.unravel_index(int(np.argmin(window)), window.shape)
        i, j = i_lo + di, j_lo + dj
        return float(self.alphas[i]), float(self.ks[j]), float(self.linf[i, j])

    def is_local_min(self, alpha0: float, k0: float, cells: int = 1) -> bool:
        """True when the best node within ``cells`` of (alpha0, k0) is a
        4-neighborhood local minimum of the surface (ties allowed)."""
        a, k, v = self.value_near(alpha0, k0, cells)
        i = int(np.argmin(np.abs(self.alphas - a)))
        j = int(np.argmin(np.abs(self.ks - k)))
        tol = 1e-12 + 1e-9 * float(np.max(self.linf))
        for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            ii, jj = i + di, j + dj
            if 0 <= ii < len(self.alphas) and 0 <= jj < len(self.ks):
                if self.linf[ii, jj] < v - tol:
                    return False
        return True


def constraint_scan(
    params: ModelParams,
    alphas: Sequence[float] | np.ndarray,
    ks: Sequence[float] | np.ndarray,
    grid: GridSpec | None = None,
    t: float = 0.25,
    dt: float = 1e-3,
) -> ScanResult:
    """Continuity-residual L-inf over candidate (alpha, k) pairings.

    For each candidate the amplitude is the order-0 envelope built with that
    k and the phase is alpha*(x - beta*t); the surface must attain its
    minimum floor at the two branch pairings (+2m, -2) and (-2m, +2).
    Parallelism over k is capped by WAVEFRONT_THREADS.
    """
    grid = grid or GridSpec(-4.0, 4.0, 1201)
    alphas = np.asarray(list(alphas), dtype=float)
    ks = np.asarray(list(ks), dtype=float)
    xs = grid.points()
    dx = grid.dx
    lam = params.lam
    inv_m = 1.0 / params.mass

    def column(k: float) -> np.ndarray:
        def envelope(tt: float) -> np.ndarray:
            if lam == 0.0:
                return np.ones_like(xs)
            z = lam * np.exp(-0.5 * (xs + k * tt))
            return np.asarray(specfun.bessel_j(0.0, z))

        r_m = envelope(t - dt)
        r_0 = envelope(t)
        r_p = envelope(t + dt)
        r_t = (r_p[1:-1] - r_m[1:-1]) / (2.0 * dt)
        r_x = (r_0[2:] - r_0[:-2]) / (2.0 * dx)
        vals = np.empty(len(alphas))
        for i, alpha in enumerate(alphas):
            vals[i] = np.max(np.abs(r_t + alpha * inv_m * r_x))
        return vals

    workers = thread_cap()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(column, [float(k) for k in ks]))
    else:
        columns = [column(float(k)) for k in ks]
    linf = np.column_stack(columns)
    return ScanResult(alphas=alphas, ks=ks, linf=linf, grid=grid, t=t, dt=dt)
