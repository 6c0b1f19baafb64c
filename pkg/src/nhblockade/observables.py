"""Photon statistics and drive-free spectra.

Spectral quantities come in closed form and are cross-checked against a
numerical diagonalization of the projected effective Hamiltonian.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .exceptions import UndefinedCorrelationError
from .hilbert import FockLayout, destroy
from .liouville import DensityMatrix, steady_state
from .model import ModelParams, effective_hamiltonian, scattering_rates

__all__ = [
    "SpectralReport",
    "PhotonDistribution",
    "g2_zero",
    "mean_occupation",
    "subspace_spectrum",
    "splitting_scan",
    "photon_distribution",
    "probability_trace",
]

SINGLE = "single-excitation"
DOUBLE = "two-excitation"


def mean_occupation(rho: DensityMatrix, mode: int) -> float:
    a = destroy(rho.layout, mode)
    return rho.expect(a.dag @ a).real


def g2_zero(rho: DensityMatrix, mode: int = 0) -> float:
    """Equal-time second-order correlation <a^dag a^dag a a>/<a^dag a>^2.

    The state need not be trace-normalized; both moments are divided by the
    trace first.
    """
    a = destroy(rho.layout, mode)
    ad = a.dag
    tr = rho.trace
    n = rho.expect(ad @ a) / tr
    if abs(n) <= 1e-300:
        raise UndefinedCorrelationError(f"mode {mode} has zero occupation")
    pair = rho.expect(ad @ ad @ a @ a) / tr
    value = pair / (n * n)
    if abs(value.imag) > 1e-9 * max(1.0, abs(value.real)):
        raise ValueError(f"g2 has an imaginary part {value.imag:.3e}; state not Hermitian?")
    return float(value.real)


@dataclass
class SpectralReport:
    subspace: str
    eigenvalues: list[complex]
    eigenvectors: list[np.ndarray]
    splitting: complex
    overlap: float
    basis: list[tuple[int, int]]
    numerical_eigenvalues: list[complex]

    @property
    def max_closed_form_error(self) -> float:
        """Largest distance between closed-form and numerically found eigenvalues."""
        return _match_error(self.eigenvalues, self.numerical_eigenvalues)


def _match_error(a: Sequence[complex], b: Sequence[complex]) -> float:
    from itertools import permutations

    a = np.asarray(a)
    b = np.asarray(b)
    return float(min(np.max(np.abs(a - b[list(p)])) for p in permutations(range(len(b)))))


def _normalized(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    return v / norm if norm > 0 else v


def _overlap(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return float(min(1.0, abs(np.vdot(u, v)) / (nu * nv)))


def subspace_spectrum(params: ModelParams, subspace: str = SINGLE) -> SpectralReport:
    """Drive-free eigenpairs in the one- or two-excitation manifold.

    Eigenvectors are given in the basis listed in ``basis`` (CW occupation
    first, descending). The splitting is E+ - E- for one excitation and
    E+ - E0 for two, with E+ the branch carrying the principal square root of
    e1*e2. The overlap is the modulus of the scalar product of the two
    unit-normalized right eigenvectors entering the splitting.
    """
    rates = scattering_rates(params)
    e1, e2 = rates.e1, rates.e2
    root = cmath.sqrt(e1 * e2)
    s1, s2 = cmath.sqrt(e1), cmath.sqrt(e2)
    # choose the sign so that the "+" vector belongs to +root
    sign = 1.0 if abs(s1 * s2 - root) <= abs(s1 * s2 + root) else -1.0
    delta, u = params.Delta, params.U
    layout = FockLayout([3, 3])
    h = effective_hamiltonian(params.replace(F=0.0), layout)

    if subspace == SINGLE:
        basis = [(1, 0), (0, 1)]
        base = delta - u
        values = [base + root, base - root]
        plus = np.array([s1, sign * s2])
        minus = np.array([s1, -sign * s2])
        vectors = [plus, minus]
        splitting = 2 * root
        pair = (plus, minus)
    elif subspace == DOUBLE:
        basis = [(2, 0), (1, 1), (0, 2)]
        base = 2 * delta - 4 * u
        values = [base + 2 * root, base - 2 * root, base]
        sq2 = math.sqrt(2.0)
        plus = np.array([sq2 * e1, 2 * root, sq2 * e2])
        minus = np.array([sq2 * e1, -2 * root, sq2 * e2])
        zero = np.array([-e1, 0.0, e2])
        vectors = [plus, minus, zero]
        splitting = 2 * root
        pair = (plus, zero)
    else:
        raise ValueError(f"unknown subspace {subspace!r}")

    if all(np.linalg.norm(v) == 0 for v in pair):
        # e1 = e2 = 0: ordinary degeneracy, any basis diagonalizes the block
        vectors = [np.eye(len(basis))[k] for k in range(len(basis))]
        overlap = 0.0
    else:
        overlap = _overlap(*pair)
        if overlap > 1 - 1e-12 or any(np.linalg.norm(v) == 0 for v in pair):
            overlap = 1.0
    idx = [layout.index(b) for b in basis]
    numeric = np.linalg.eigvals(h.project(idx))
    return SpectralReport(
        subspace=subspace,
        eigenvalues=[complex(v) for v in values],
        eigenvectors=[_normalized(np.asarray(v, dtype=complex)) for v in vectors],
        splitting=complex(splitting),
        overlap=overlap,
        basis=basis,
        numerical_eigenvalues=[complex(v) for v in numeric],
    )


def splitting_scan(params: ModelParams, mu_grid: Iterable[float],
                   subspace: str = SINGLE) -> dict[str, np.ndarray]:
    """Splitting and eigenvector overlap along a grid of scatterer angles."""
    mu_grid = np.asarray(list(mu_grid), dtype=float)
    if mu_grid.size == 0:
        raise ValueError("empty mu grid")
    rows = [subspace_spectrum(params.replace(mu=float(mu)), subspace) for mu in mu_grid]
    return {
        "mu": mu_grid,
        "splitting_re": np.array([r.splitting.real for r in rows]),
        "splitting_im": np.array([r.splitting.imag for r in rows]),
        "overlap": np.array([r.overlap for r in rows]),
    }


@dataclass
class PhotonDistribution:
    probabilities: np.ndarray
    mean: float
    poisson_reference: np.ndarray
    relative: np.ndarray

    def relative_at(self, n: int) -> float | None:
        value = self.relative[n]
        return None if np.isnan(value) else float(value)


def photon_distribution(rho: DensityMatrix, mode: int = 0,
                        underflow: float = 1e-300) -> PhotonDistribution:
    """Marginal photon-number distribution of ``mode`` and its Poisson deviation.

    The relative deviation is NaN wherever the Poisson reference underflows.
    """
    reduced = rho.reduced([mode])
    probs = reduced.diagonal()
    probs = probs / probs.sum()
    n = np.arange(probs.size)
    mean = float(np.dot(n, probs))
    if mean > 0:
        poisson = np.exp(n * math.log(mean) - mean - gammaln(n + 1))
    else:
        poisson = (n == 0).astype(float)
    relative = np.full(probs.size, np.nan)
    ok = poisson > underflow
    relative[ok] = (probs[ok] - poisson[ok]) / poisson[ok]
    return PhotonDistribution(probs, mean, poisson, relative)


def probability_trace(params: ModelParams, delta_grid: Iterable[float],
                      layout: FockLayout | None = None, method: str = "eigen",
                      **solver_options) -> dict[str, np.ndarray]:
    """Few-photon populations of the steady state along a detuning grid."""
    layout = layout or FockLayout([4, 4])
    states = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    idx = [layout.index(s) for s in states]
    deltas = np.asarray(list(delta_grid), dtype=float)
    table = {"delta": deltas}
    cols = {f"p{a}{b}": [] for a, b in states}
    g2 = []
    for delta in deltas:
        report = steady_state(params.replace(Delta=float(delta)), layout, method,
                              **solver_options)
        diag = report.rho.diagonal()
        for (a, b), i in zip(states, idx):
            cols[f"p{a}{b}"].append(diag[i])
        g2.append(g2_zero(report.rho, 0))
    table.update({k: np.array(v) for k, v in cols.items()})
    table["g2"] = np.array(g2)
    return table
