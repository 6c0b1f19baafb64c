"""Truncated Fock spaces and dense bosonic operators.

Modes are ordered (CW, CCW[, mechanical]) and every operator carries the
layout it was built on, so products between incompatible spaces fail loudly
instead of broadcasting into nonsense.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .exceptions import LayoutMismatchError

__all__ = [
    "FockLayout",
    "Operator",
    "destroy",
    "create",
    "number",
    "identity",
    "compose",
    "adjoint",
    "add",
    "scale",
    "commutator",
]


@dataclass(frozen=True)
class FockLayout:
    """Per-mode truncation dimensions of a tensor-product Fock space."""

    dims: tuple[int, ...]

    def __init__(self, dims: Sequence[int]):
        dims = tuple(int(d) for d in dims)
        if not dims:
            raise ValueError("a layout needs at least one mode")
        if any(d < 2 for d in dims):
            raise ValueError(f"every mode dimension must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    def index(self, occupations: Sequence[int]) -> int:
        """Row index of the product basis state |n_0, n_1, ...>."""
        if len(occupations) != self.n_modes:
            raise ValueError(
                f"expected {self.n_modes} occupation numbers, got {len(occupations)}"
            )
        for n, d in zip(occupations, self.dims):
            if not 0 <= n < d:
                raise ValueError(f"occupation {n} outside truncation {d}")
        return int(np.ravel_multi_index(tuple(occupations), self.dims))

    def occupations(self, index: int) -> tuple[int, ...]:
        return tuple(int(n) for n in np.unravel_index(index, self.dims))

    def basis(self, occupations: Sequence[int]) -> np.ndarray:
        vec = np.zeros(self.total_dim, dtype=complex)
        vec[self.index(occupations)] = 1.0
        return vec

    def excitation_indices(self, total: int, modes: Sequence[int] | None = None) -> list[int]:
        """Indices of basis states whose occupations over `modes` sum to `total`.

        States are listed with the first mode's occupation descending, i.e.
        |N,0>, |N-1,1>, ..., |0,N> for two modes.
        """
        modes = range(self.n_modes) if modes is None else modes
        found = [
            i
            for i in range(self.total_dim)
            if sum(self.occupations(i)[k] for k in modes) == total
        ]
        return sorted(found, key=lambda i: tuple(-n for n in self.occupations(i)))


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix acting on ``layout``."""

    layout: FockLayout
    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        d = self.layout.total_dim
        if entries.shape != (d, d):
            raise ValueError(f"entries must be {d}x{d}, got {entries.shape}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def _check(self, other: "Operator") -> None:
        if not isinstance(other, Operator):
            raise TypeError(f"expected Operator, got {type(other).__name__}")
        if other.layout != self.layout:
            raise LayoutMismatchError(f"{self.layout.dims} vs {other.layout.dims}")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.layout, self.entries @ other.entries)

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.layout, self.entries + other.entries)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.layout, self.entries - other.entries)

    def __neg__(self) -> "Operator":
        return Operator(self.layout, -self.entries)

    def __mul__(self, c: complex) -> "Operator":
        if isinstance(c, Operator):
            raise TypeError("use @ for operator products")
        return Operator(self.layout, complex(c) * self.entries)

    __rmul__ = __mul__

    def __truediv__(self, c: complex) -> "Operator":
        return Operator(self.layout, self.entries / complex(c))

    @property
    def dag(self) -> "Operator":
        return Operator(self.layout, self.entries.conj().T)

    def matrix_element(self, bra: Sequence[int], ket: Sequence[int]) -> complex:
        return complex(self.entries[self.layout.index(bra), self.layout.index(ket)])

    def project(self, indices: Sequence[int]) -> np.ndarray:
        """Block of the matrix on the given basis indices."""
        idx = np.asarray(indices)
        return np.array(self.entries[np.ix_(idx, idx)])

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0) < atol)


def _ladder(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


def _embed(layout: FockLayout, mode: int, local: np.ndarray) -> np.ndarray:
    if not 0 <= mode < layout.n_modes:
        raise IndexError(f"mode {mode} out of range for {layout.n_modes} modes")
    factors = [local if k == mode else np.eye(d) for k, d in enumerate(layout.dims)]
    return reduce(np.kron, factors)


def destroy(layout: FockLayout, mode: int) -> Operator:
    """Truncated annihilation operator for ``mode``, identity elsewhere."""
    if not 0 <= mode < layout.n_modes:
        raise IndexError(f"mode {mode} out of range for {layout.n_modes} modes")
    return Operator(layout, _embed(layout, mode, _ladder(layout.dims[mode])))


def create(layout: FockLayout, mode: int) -> Operator:
    return destroy(layout, mode).dag


def number(layout: FockLayout, mode: int) -> Operator:
    if not 0 <= mode < layout.n_modes:
        raise IndexError(f"mode {mode} out of range for {layout.n_modes} modes")
    local = np.diag(np.arange(layout.dims[mode], dtype=float)).astype(complex)
    return Operator(layout, _embed(layout, mode, local))


def identity(layout: FockLayout) -> Operator:
    return Operator(layout, np.eye(layout.total_dim))


def compose(a: Operator, b: Operator) -> Operator:
    return a @ b


def adjoint(a: Operator) -> Operator:
    return a.dag


def add(a: Operator, b: Operator) -> Operator:
    return a + b


def scale(a: Operator, c: complex) -> Operator:
    return a * c


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a
