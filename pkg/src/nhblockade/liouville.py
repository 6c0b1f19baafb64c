"""Trace-preserving non-Hermitian master equation and its steady states.

The generator is

    drho/dt = -i[H+, rho] - i{H-, rho} + sum_j k_j D[a_j] rho + 2i Tr(rho H-) rho,

with D[a] rho = 2 a rho a^dag - a^dag a rho - rho a^dag a acting on the
photonic modes only. Dropping the last term leaves a linear superoperator;
the nonlinear term only renormalizes its flow, so the steady state is the
trace-normalized eigenmatrix of the linear part with the largest real
eigenvalue. Two solvers are provided and each is the other's oracle:
fixed-step RK4 time evolution of the full nonlinear equation, and direct
diagonalization of the linear superoperator.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse

from .exceptions import (
    ConvergenceError,
    DegenerateSteadyStateError,
    LayoutMismatchError,
    PositivityError,
)
from .hilbert import FockLayout, Operator, destroy
from .model import (
    HamiltonianPair,
    ModelParams,
    effective_hamiltonian,
    hermitian_split,
    kerr_strength,
    total_hamiltonian,
)

__all__ = [
    "DensityMatrix",
    "SteadyStateReport",
    "FullModelComparison",
    "master_rhs",
    "linear_superoperator",
    "evolve_to_steady",
    "evolve_period_averaged",
    "steady_by_eigen",
    "steady_state",
    "validate_full_vs_effective",
    "decay_rates_for",
]

log = logging.getLogger(__name__)

DEFAULT_DT = 0.01
DEFAULT_T_MAX = 200.0
DEFAULT_TOL = 1e-8
POSITIVITY_FLOOR = -1e-8
EIGEN_MAX_DIM = 64
RK4_STABILITY = 2.7


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    layout: FockLayout
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        d = self.layout.total_dim
        if entries.shape != (d, d):
            raise ValueError(f"entries must be {d}x{d}, got {entries.shape}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def vacuum(cls, layout: FockLayout) -> "DensityMatrix":
        rho = np.zeros((layout.total_dim,) * 2, dtype=complex)
        rho[0, 0] = 1.0
        return cls(layout, rho)

    @classmethod
    def maximally_mixed(cls, layout: FockLayout) -> "DensityMatrix":
        return cls(layout, np.eye(layout.total_dim) / layout.total_dim)

    @classmethod
    def from_ket(cls, layout: FockLayout, psi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(layout, np.outer(psi, psi.conj()))

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.entries + self.entries.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def validate(self, herm_tol: float = 1e-10, trace_tol: float = 1e-10,
                 floor: float = POSITIVITY_FLOOR) -> None:
        if self.hermiticity_error() >= herm_tol:
            raise ValueError(f"density matrix not Hermitian ({self.hermiticity_error():.2e})")
        if abs(self.trace - 1) >= trace_tol:
            raise ValueError(f"density matrix trace {self.trace} != 1")
        lowest = self.min_eigenvalue()
        if lowest <= floor:
            raise PositivityError(f"density matrix has eigenvalue {lowest:.3e}")

    def expect(self, op: Operator) -> complex:
        if op.layout != self.layout:
            raise LayoutMismatchError(f"{op.layout.dims} vs {self.layout.dims}")
        # Tr(rho A) without forming the product
        return complex(np.sum(self.entries * op.entries.T))

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.entries)).copy()

    def reduced(self, keep: Sequence[int]) -> "DensityMatrix":
        """Partial trace onto the modes listed in ``keep`` (order preserved)."""
        dims = self.layout.dims
        n = len(dims)
        keep = sorted(keep)
        traced = [k for k in range(n) if k not in keep]
        t = self.entries.reshape(dims + dims)
        for k in sorted(traced, reverse=True):
            t = np.trace(t, axis1=k, axis2=k + t.ndim // 2)
        sub = tuple(dims[k] for k in keep)
        d = int(np.prod(sub))
        return DensityMatrix(FockLayout(sub), t.reshape(d, d))


@dataclass
class SteadyStateReport:
    rho: DensityMatrix
    method: str
    residual: float
    steps: int
    rightmost_eigenvalue: complex | None = None
    t: float | None = None
    extras: dict = field(default_factory=dict)


class _Generator:
    """Precomputed pieces of the master equation for repeated evaluation.

    Hamiltonians and ladder operators have a handful of nonzeros per row, so
    products with the dense state go through CSR matrices; every term is
    written as ``X`` or ``X @ Y^dag`` with sparse-times-dense products only.
    """

    def __init__(self, pair: HamiltonianPair, decay_rates: Sequence[float]):
        layout = pair.h_plus.layout
        if pair.h_minus.layout != layout:
            raise LayoutMismatchError("H+ and H- live on different layouts")
        if len(decay_rates) > layout.n_modes:
            raise ValueError("more decay rates than modes")
        self.layout = layout
        self.h_minus = pair.h_minus.entries
        h = pair.h_plus.entries + pair.h_minus.entries
        damping = np.zeros_like(h)
        self.jumps = []
        for mode, rate in enumerate(decay_rates):
            if rate == 0:
                continue
            a = destroy(layout, mode).entries
            damping += rate * (a.conj().T @ a)
            self.jumps.append((2.0 * rate, sparse.csr_matrix(a)))
        # -i(H rho - rho H^dag) - {Gamma, rho} == -i(K rho - rho K^dag)
        self.k = h - 1j * damping
        self.k_sparse = sparse.csr_matrix(self.k)
        self.h_minus_t = np.ascontiguousarray(self.h_minus.T)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        rho_dag = rho.conj().T
        out = -1j * (self.k_sparse @ rho - (self.k_sparse @ rho_dag).conj().T)
        for c, a in self.jumps:
            # a rho a^dag == a (a rho^dag)^dag
            out += c * (a @ (a @ rho_dag).conj().T)
        out += 2j * np.sum(rho * self.h_minus_t) * rho
        return out

    def linear(self) -> np.ndarray:
        """Row-major superoperator of the equation with the nonlinear term removed."""
        d = self.layout.total_dim
        eye = np.eye(d)
        sup = -1j * (np.kron(self.k, eye) - np.kron(eye, self.k.conj()))
        for c, a in self.jumps:
            dense = a.toarray()
            sup += c * np.kron(dense, dense.conj())
        return sup

    def spectral_radius(self) -> float:
        e = np.linalg.eigvals(self.k)
        return float(np.max(np.abs(e[:, None] - e.conj()[None, :])))


def decay_rates_for(params: ModelParams, layout: FockLayout, decay_scale: float = 1.0) -> list[float]:
    """Dissipator coefficient per photonic mode (never the mechanical mode)."""
    n_photonic = min(2, layout.n_modes)
    return [params.gamma * decay_scale] * n_photonic


def _as_array(rho) -> tuple[np.ndarray, FockLayout | None]:
    if isinstance(rho, DensityMatrix):
        return rho.entries, rho.layout
    return np.asarray(rho, dtype=complex), None


def master_rhs(rho, pair: HamiltonianPair, decay_rates: Sequence[float]) -> np.ndarray:
    """Time derivative of ``rho`` under the nonlinear master equation."""
    arr, layout = _as_array(rho)
    if layout is not None and layout != pair.h_plus.layout:
        raise LayoutMismatchError(f"{layout.dims} vs {pair.h_plus.layout.dims}")
    return _Generator(pair, decay_rates)(arr)


def _hamiltonian_for(params: ModelParams, layout: FockLayout) -> Operator:
    if layout.n_modes == 2:
        return effective_hamiltonian(params, layout)
    if layout.n_modes == 3:
        return total_hamiltonian(params, layout)
    raise ValueError(f"no model for a {layout.n_modes}-mode layout")


def _generator(params: ModelParams, layout: FockLayout, decay_scale: float) -> _Generator:
    pair = hermitian_split(_hamiltonian_for(params, layout))
    return _Generator(pair, decay_rates_for(params, layout, decay_scale))


def linear_superoperator(params: ModelParams, layout: FockLayout,
                         decay_scale: float = 1.0) -> np.ndarray:
    return _generator(params, layout, decay_scale).linear()


def _check_positive(rho: DensityMatrix) -> None:
    lowest = rho.min_eigenvalue()
    if lowest <= POSITIVITY_FLOOR:
        raise PositivityError(f"steady state has eigenvalue {lowest:.3e}")


def evolve_to_steady(
    params: ModelParams,
    layout: FockLayout,
    tol: float = DEFAULT_TOL,
    dt: float = DEFAULT_DT,
    t_max: float = DEFAULT_T_MAX,
    decay_scale: float = 1.0,
    rho0: DensityMatrix | None = None,
) -> SteadyStateReport:
    """Integrate from ``rho0`` (vacuum by default) until ||drho/dt||_F < tol.

    ``dt`` and ``t_max`` are in units of 1/gamma. Each RK4 step is followed by
    re-Hermitization and trace renormalization.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    gen = _generator(params, layout, decay_scale)
    step = dt / params.gamma
    radius = gen.spectral_radius()
    if step * radius > RK4_STABILITY:
        raise ValueError(
            f"dt={dt} is unstable for this generator (spectral radius {radius:.3g}/gamma); "
            f"use dt <= {RK4_STABILITY / radius * params.gamma:.3g}"
        )
    rho = (rho0 or DensityMatrix.vacuum(layout)).entries.copy()
    max_steps = int(np.ceil(t_max / dt))
    for n in range(max_steps + 1):
        candidate, k1 = _rk4_step(gen, rho, step)
        residual = float(np.linalg.norm(k1))
        if residual < tol * params.gamma:
            break
        if n == max_steps or not np.isfinite(residual):
            raise ConvergenceError(
                f"no steady state by t={t_max}/gamma (residual {residual:.3e})",
                residual=residual,
                t=n * dt,
            )
        rho = candidate
    state = DensityMatrix(layout, rho)
    _check_positive(state)
    return SteadyStateReport(
        rho=state,
        method="time-evolution",
        residual=residual / params.gamma,
        steps=n,
        t=n * dt,
    )


def _rk4_step(gen: _Generator, rho: np.ndarray, step: float) -> tuple[np.ndarray, np.ndarray]:
    half = 0.5 * step
    k1 = gen(rho)
    k2 = gen(rho + half * k1)
    k3 = gen(rho + half * k2)
    k4 = gen(rho + step * k3)
    rho = rho + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real, k1


def evolve_period_averaged(
    params: ModelParams,
    layout: FockLayout,
    tol: float = 1e-4,
    t_max: float = DEFAULT_T_MAX,
    max_dt: float = DEFAULT_DT,
    decay_scale: float = 1.0,
) -> SteadyStateReport:
    """Quasi-steady state of the optomechanical model.

    Without a mechanical dissipator the mechanical coherences rotate at
    multiples of omega_m forever and the drive slowly heats the oscillator,
    so there is no stationary state and ||drho/dt|| never vanishes. Instead the
    state is averaged over consecutive mechanical periods, and integration
    stops once the photonic reduced state of two successive averages differs
    by less than ``tol`` per unit time (Frobenius norm, units of gamma). The
    default sits above the residual heating drift (about 2e-5 at F = 0.1) so
    the photonic transient is gone when it triggers. The last period average
    of the full state is returned.
    """
    if layout.n_modes != 3 or not params.has_mechanics:
        raise ValueError("period averaging needs the 3-mode optomechanical model")
    gen = _generator(params, layout, decay_scale)
    radius = gen.spectral_radius()
    period = 2 * np.pi / params.omega_m
    limit = min(max_dt / params.gamma, 0.9 * RK4_STABILITY / radius)
    per_period = int(np.ceil(period / limit))
    step = period / per_period
    rho = DensityMatrix.vacuum(layout).entries.copy()
    previous = None
    periods = int(np.ceil(t_max * params.gamma / (period * params.gamma))) if t_max else 0
    for k in range(1, periods + 1):
        acc = np.zeros_like(rho)
        for _ in range(per_period):
            rho, _ = _rk4_step(gen, rho, step)
            acc += rho
        average = acc / per_period
        if previous is not None:
            diff = DensityMatrix(layout, average - previous).reduced([0, 1]).entries
            change = float(np.linalg.norm(diff)) / period
            if change < tol * params.gamma:
                state = DensityMatrix(layout, average)
                _check_positive(state)
                return SteadyStateReport(
                    rho=state,
                    method="time-evolution",
                    residual=change / params.gamma,
                    steps=k * per_period,
                    t=k * period * params.gamma,
                    extras={"criterion": "period-averaged", "dt": step * params.gamma,
                            "period": period * params.gamma},
                )
        previous = average
    raise ConvergenceError(
        f"period averages still moving at t={t_max}/gamma",
        t=t_max,
    )


def steady_by_eigen(
    params: ModelParams,
    layout: FockLayout,
    decay_scale: float = 1.0,
    degeneracy_tol: float = 1e-9,
) -> SteadyStateReport:
    """Steady state as the rightmost eigenmatrix of the linear superoperator."""
    if layout.n_modes != 2 or layout.total_dim > EIGEN_MAX_DIM:
        raise ValueError(
            f"eigen method is limited to 2-mode layouts with total_dim <= {EIGEN_MAX_DIM}"
        )
    gen = _generator(params, layout, decay_scale)
    vals, vecs = np.linalg.eig(gen.linear())
    order = np.argsort(-vals.real, kind="stable")
    lead = vals[order[0]]
    scale = max(1.0, abs(lead))
    close = np.abs(vals.real - lead.real) < degeneracy_tol * scale * params.gamma
    multiplicity = int(np.count_nonzero(close))
    if multiplicity > 1:
        raise DegenerateSteadyStateError(
            f"rightmost eigenvalue {lead:.6g} has multiplicity {multiplicity}",
            multiplicity=multiplicity,
            eigenvalues=vals[close],
        )
    d = layout.total_dim
    rho = vecs[:, order[0]].reshape(d, d)
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    residual = float(np.linalg.norm(gen(rho))) / params.gamma
    state = DensityMatrix(layout, rho)
    _check_positive(state)
    gap = lead.real - vals[order[1]].real
    return SteadyStateReport(
        rho=state,
        method="liouvillian-eigen",
        residual=residual,
        steps=0,
        rightmost_eigenvalue=complex(lead) / params.gamma,
        extras={"spectral_gap": float(gap) / params.gamma},
    )


def steady_state(params: ModelParams, layout: FockLayout, method: str = "eigen",
                 **options) -> SteadyStateReport:
    """Dispatch to ``steady_by_eigen`` ("eigen") or ``evolve_to_steady`` ("evolve")."""
    if method in ("eigen", "liouvillian-eigen"):
        return steady_by_eigen(params, layout, **options)
    if method in ("evolve", "time-evolution"):
        return evolve_to_steady(params, layout, **options)
    raise ValueError(f"unknown steady-state method {method!r}")


@dataclass
class FullModelComparison:
    g2_effective: float
    g2_full: float
    relative_deviation: float
    g2_full_doubled: float | None
    truncation_change: float | None
    effective: SteadyStateReport
    full: SteadyStateReport


def validate_full_vs_effective(
    params: ModelParams,
    photonic_layout: FockLayout | None = None,
    mech_dim: int = 8,
    u_tol: float = 1e-3,
    check_truncation: bool = True,
    truncation_tol: float = 0.01,
    tol: float = 1e-4,
    t_max: float = DEFAULT_T_MAX,
    dt: float | None = None,
    decay_scale: float = 1.0,
) -> FullModelComparison:
    """Compare steady-state g2(0) of the Kerr model with the optomechanical one.

    The Kerr model uses U = g^2/omega_m exactly; ``params.U`` must already
    agree with it to ``u_tol`` (in units of gamma). The full model has no
    mechanical dissipator, so its state is the period-averaged quasi-steady
    state from ``evolve_period_averaged``; ``dt`` caps the integration step.
    """
    from .observables import g2_zero

    if not params.has_mechanics:
        raise ValueError("full-model validation needs omega_m and g")
    u_mech = kerr_strength(params.g, params.omega_m)
    if abs(u_mech - params.U) > u_tol * params.gamma:
        raise ValueError(
            f"U = {params.U} inconsistent with g^2/omega_m = {u_mech} (tolerance {u_tol})"
        )
    photonic_layout = photonic_layout or FockLayout([4, 4])
    eff_params = params.replace(U=u_mech)
    if photonic_layout.total_dim <= EIGEN_MAX_DIM:
        eff = steady_by_eigen(eff_params, photonic_layout, decay_scale=decay_scale)
    else:
        eff = evolve_to_steady(eff_params, photonic_layout, decay_scale=decay_scale)
    g2_eff = g2_zero(eff.rho, 0)

    def solve_full(md: int) -> SteadyStateReport:
        layout = FockLayout(photonic_layout.dims + (md,))
        return evolve_period_averaged(params, layout, tol=tol, t_max=t_max,
                                      max_dt=dt or DEFAULT_DT, decay_scale=decay_scale)

    full = solve_full(mech_dim)
    g2_full = g2_zero(full.rho, 0)
    doubled = change = None
    if check_truncation:
        doubled = g2_zero(solve_full(2 * mech_dim).rho, 0)
        change = abs(doubled - g2_full) / abs(g2_full)
        if change > truncation_tol:
            raise ConvergenceError(
                f"mechanical truncation not converged: g2 changes by {change:.2%} "
                f"when mech_dim {mech_dim} -> {2 * mech_dim}"
            )
    return FullModelComparison(
        g2_effective=g2_eff,
        g2_full=g2_full,
        relative_deviation=abs(g2_full - g2_eff) / abs(g2_eff),
        g2_full_doubled=doubled,
        truncation_change=change,
        effective=eff,
        full=full,
    )
