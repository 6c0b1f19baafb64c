"""Physical parameters and Hamiltonians of the two-scatterer resonator.

All Hamiltonians are written in the frame rotating at the laser frequency,
so the detuning ``Delta`` is the only frequency input. ``Delta`` is real; the
non-Hermiticity lives entirely in the complex scatterer splittings that enter
the inter-mode couplings.
"""

from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass, replace

from scipy.linalg import expm

from .hilbert import FockLayout, Operator, destroy, number

__all__ = [
    "ModelParams",
    "ScatteringRates",
    "HamiltonianPair",
    "scattering_rates",
    "kerr_strength",
    "effective_hamiltonian",
    "total_hamiltonian",
    "polaron_hamiltonian",
    "polaron_unitary",
    "hermitian_split",
]


@dataclass(frozen=True)
class ModelParams:
    """Inputs of the driven two-mode resonator.

    Rates are absolute (inverse time). With the default ``gamma = 1`` they are
    numerically equal to the same quantities in units of gamma, which is how
    every example and test in this package is phrased.

    ``omega_m`` and ``g`` are only needed for the full optomechanical model.
    """

    lambda1: complex
    lambda2: complex
    m: int
    mu: float
    Delta: float
    U: float
    gamma: float = 1.0
    F: float = 0.0
    omega_m: float | None = None
    g: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "lambda1", complex(self.lambda1))
        object.__setattr__(self, "lambda2", complex(self.lambda2))
        if isinstance(self.Delta, complex):
            if self.Delta.imag != 0:
                raise ValueError("Delta must be real; put losses in lambda1/lambda2")
            object.__setattr__(self, "Delta", self.Delta.real)
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"azimuthal number m must be a positive integer, got {self.m}")
        object.__setattr__(self, "m", int(self.m))
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.F < 0:
            raise ValueError(f"drive amplitude F must be >= 0, got {self.F}")
        if self.U < 0:
            raise ValueError(f"Kerr strength U must be >= 0, got {self.U}")
        if self.omega_m is not None:
            if self.g is None:
                raise ValueError("omega_m given without g")
            if self.omega_m <= 0:
                raise ValueError("omega_m must be positive")
            ratio = abs(self.g) / self.omega_m
            if ratio >= 1:
                raise ValueError(f"g/omega_m = {ratio:.3g} is outside the weak-coupling regime")
            if ratio > 0.5:
                warnings.warn(
                    f"g/omega_m = {ratio:.3g}; the Kerr reduction is unreliable above 0.5",
                    stacklevel=2,
                )
        elif self.g is not None:
            raise ValueError("g given without omega_m")

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    @property
    def has_mechanics(self) -> bool:
        return self.omega_m is not None


@dataclass(frozen=True)
class ScatteringRates:
    """Backscattering rates: ``e1`` feeds CW from CCW, ``e2`` feeds CCW from CW."""

    e1: complex
    e2: complex

    @property
    def product(self) -> complex:
        return self.e1 * self.e2

    @property
    def sqrt_product(self) -> complex:
        return cmath.sqrt(self.e1 * self.e2)


@dataclass(frozen=True)
class HamiltonianPair:
    h_plus: Operator
    h_minus: Operator

    @property
    def full(self) -> Operator:
        return self.h_plus + self.h_minus


def scattering_rates(params: ModelParams) -> ScatteringRates:
    phase = cmath.exp(2j * params.m * params.mu)
    return ScatteringRates(
        e1=params.lambda1 + params.lambda2 * phase,
        e2=params.lambda1 + params.lambda2 / phase,
    )


def kerr_strength(g: float, omega_m: float) -> float:
    """Kerr coefficient left behind by the polaron transform."""
    return g * g / omega_m


def _photonic_terms(params: ModelParams, layout: FockLayout) -> tuple[Operator, ...]:
    a1, a2 = destroy(layout, 0), destroy(layout, 1)
    n1, n2 = number(layout, 0), number(layout, 1)
    rates = scattering_rates(params)
    bare = params.Delta * (n1 + n2)
    hopping = rates.e1 * (a1.dag @ a2) + rates.e2 * (a2.dag @ a1)
    return bare, hopping, n1 + n2, a1


def effective_hamiltonian(params: ModelParams, layout: FockLayout) -> Operator:
    """Kerr Hamiltonian of the two optical modes with the CW drive.

    The Kerr term keeps the operator ordering U (n1 + n2)^2, i.e. with n^2
    rather than n(n - 1) on each mode, so the single-photon level sits at
    Delta - U.
    """
    if layout.n_modes != 2:
        raise ValueError(f"effective model needs a 2-mode layout, got {layout.dims}")
    bare, hopping, n_tot, a1 = _photonic_terms(params, layout)
    kerr = params.U * (n_tot @ n_tot)
    drive = params.F * (a1.dag + a1)
    return bare + hopping - kerr + drive


def total_hamiltonian(params: ModelParams, layout: FockLayout) -> Operator:
    """Optomechanical Hamiltonian with modes (CW, CCW, mechanical)."""
    if layout.n_modes != 3:
        raise ValueError(f"full model needs a 3-mode layout, got {layout.dims}")
    if not params.has_mechanics:
        raise ValueError("total_hamiltonian needs omega_m and g")
    bare, hopping, n_tot, a1 = _photonic_terms(params, layout)
    b = destroy(layout, 2)
    mech = params.omega_m * (b.dag @ b)
    coupling = params.g * ((b.dag + b) @ n_tot)
    drive = params.F * (a1.dag + a1)
    return bare + mech + hopping - coupling + drive


def polaron_unitary(params: ModelParams, layout: FockLayout) -> Operator:
    """exp[(g/omega_m) (n1 + n2)(b^dag - b)] on the truncated space."""
    if layout.n_modes != 3 or not params.has_mechanics:
        raise ValueError("polaron transform needs a 3-mode layout and omega_m, g")
    n_tot = number(layout, 0) + number(layout, 1)
    b = destroy(layout, 2)
    gen = (params.g / params.omega_m) * (n_tot @ (b.dag - b))
    return Operator(layout, expm(gen.entries))


def polaron_hamiltonian(params: ModelParams, layout: FockLayout) -> Operator:
    """Polaron-frame Hamiltonian before the displacement in the drive is dropped.

    Mechanics is decoupled from the photon number; the price is a Kerr term
    g^2/omega_m (n1 + n2)^2 and a drive dressed by mechanical displacements.
    """
    if layout.n_modes != 3 or not params.has_mechanics:
        raise ValueError("polaron Hamiltonian needs a 3-mode layout and omega_m, g")
    bare, hopping, n_tot, a1 = _photonic_terms(params, layout)
    b = destroy(layout, 2)
    s = params.g / params.omega_m
    shift = Operator(layout, expm((s * (b - b.dag)).entries))
    kerr = kerr_strength(params.g, params.omega_m) * (n_tot @ n_tot)
    mech = params.omega_m * (b.dag @ b)
    drive = params.F * (shift @ a1.dag + shift.dag @ a1)
    return bare + mech + hopping - kerr + drive


def hermitian_split(h: Operator) -> HamiltonianPair:
    return HamiltonianPair(h_plus=(h + h.dag) * 0.5, h_minus=(h - h.dag) * 0.5)

