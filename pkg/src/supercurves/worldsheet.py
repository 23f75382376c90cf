"""Discretized genus-1 worldsheet: periodic grid, conformal factor, spinor frames.

Grid fields are arrays whose first two axes are (s, t) in s-major order; any
trailing axes are carried along untouched.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

SCHEMES = ("spectral", "central2", "central4")
DIRECTIONS = ("s", "t", "z", "zbar")

# Gamma matrices for the orthonormal frame e1 = d/ds, e2 = d/dt (unit metric).
GAMMA_E1 = np.array([[0, -1], [1, 0]], dtype=complex)
GAMMA_E2 = np.array([[0, 1j], [1j, 0]], dtype=complex)


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class TorusGrid:
    n_s: int
    n_t: int
    P_s: float = 1.0
    P_t: float = 1.0
    scheme: str = "spectral"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise GridError(f"unknown scheme {self.scheme!r}; allowed {SCHEMES}")
        if self.P_s <= 0 or self.P_t <= 0:
            raise GridError("periods must be positive")
        if self.n_s < 8 or self.n_t < 8:
            raise GridError("grid sizes must be >= 8")
        if self.scheme == "spectral" and (self.n_s % 2 or self.n_t % 2):
            raise GridError("spectral scheme needs even grid sizes")

    @property
    def h_s(self) -> float:
        return self.P_s / self.n_s

    @property
    def h_t(self) -> float:
        return self.P_t / self.n_t

    @property
    def area(self) -> float:
        return self.P_s * self.P_t

    def coords(self):
        s = np.arange(self.n_s) * self.h_s
        t = np.arange(self.n_t) * self.h_t
        return np.meshgrid(s, t, indexing="ij")

    def with_scheme(self, scheme: str) -> "TorusGrid":
        return TorusGrid(self.n_s, self.n_t, self.P_s, self.P_t, scheme)

    # derivatives -------------------------------------------------------
    def _d1(self, f, axis: int):
        n = f.shape[axis]
        h = self.h_s if axis == 0 else self.h_t
        if self.scheme == "spectral":
            k = np.fft.fftfreq(n, d=h) * 2 * np.pi
            k[n // 2] = 0.0  # odd derivative: drop the unpaired Nyquist mode
            shape = [1] * f.ndim
            shape[axis] = n
            out = np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(f, axis=axis), axis=axis)
            return out.real if np.isrealobj(f) else out
        if self.scheme == "central2":
            return (np.roll(f, -1, axis) - np.roll(f, 1, axis)) / (2 * h)
        return (-np.roll(f, -2, axis) + 8 * np.roll(f, -1, axis)
                - 8 * np.roll(f, 1, axis) + np.roll(f, 2, axis)) / (12 * h)

    def deriv(self, f, direction: str):
        f = np.asarray(f)
        if f.ndim < 2 or f.shape[:2] != (self.n_s, self.n_t):
            raise GridError(f"field shape {f.shape} does not match grid {(self.n_s, self.n_t)}")
        if direction == "s":
            return self._d1(f, 0)
        if direction == "t":
            return self._d1(f, 1)
        if direction == "z":
            return 0.5 * (self._d1(f, 0) - 1j * self._d1(f, 1))
        if direction == "zbar":
            return 0.5 * (self._d1(f, 0) + 1j * self._d1(f, 1))
        raise GridError(f"unknown direction {direction!r}")

    def integrate_dsdt(self, density):
        return np.sum(density, axis=(0, 1)) * self.h_s * self.h_t


@dataclass(frozen=True)
class ConformalFactor:
    """lambda = const, or lambda = const * (1 + amplitude*sin(2 pi freq s / P_s))."""
    const: float = 1.0
    amplitude: float = 0.0
    freq: int = 1

    def __post_init__(self):
        if self.const <= 0 or abs(self.amplitude) >= 1:
            raise GridError("conformal factor must stay positive")

    @property
    def is_constant(self) -> bool:
        return self.amplitude == 0.0

    def values(self, grid: TorusGrid):
        s, _ = grid.coords()
        return self.const * (1 + self.amplitude * np.sin(2 * np.pi * self.freq * s / grid.P_s))

    def dzbar_power(self, grid: TorusGrid, p: float):
        """Analytic d/dzbar of lambda**p (only s-dependence, so half the s-derivative)."""
        s, _ = grid.coords()
        w = 2 * np.pi * self.freq / grid.P_s
        lam = self.values(grid)
        dlam_ds = self.const * self.amplitude * w * np.cos(w * s)
        return 0.5 * p * lam ** (p - 1) * dlam_ds


@dataclass(frozen=True)
class Worldsheet:
    grid: TorusGrid
    lam: ConformalFactor = field(default_factory=ConformalFactor)

    @property
    def lam_values(self):
        return self.lam.values(self.grid)

    def deriv(self, f, direction: str):
        return self.grid.deriv(f, direction)

    def integrate(self, density, measure: str = "dsdt"):
        density = np.asarray(density)
        if measure == "dsdt":
            return self.grid.integrate_dsdt(density)
        if measure == "dvol":
            lam = self.lam_values.reshape(self.lam_values.shape + (1,) * (density.ndim - 2))
            return self.grid.integrate_dsdt(lam * density)
        raise GridError(f"unknown measure {measure!r}")

    def _bcast(self, arr, like):
        return arr.reshape(arr.shape + (1,) * (np.ndim(like) - 2))

    # spinor frames: e+ = lambda^{1/4} theta+, e- = lambda^{-1/4} theta-
    def to_eplus(self, psi_theta):
        return self._bcast(self.lam_values ** -0.25, psi_theta) * psi_theta

    def from_eplus(self, psi_e):
        return self._bcast(self.lam_values ** 0.25, psi_e) * psi_e

    def to_eminus(self, psi_minus):
        return self._bcast(self.lam_values ** 0.25, psi_minus) * psi_minus

    def from_eminus(self, psi_e):
        return self._bcast(self.lam_values ** -0.25, psi_e) * psi_e

    def with_grid(self, grid: TorusGrid) -> "Worldsheet":
        return Worldsheet(grid, self.lam)


def clifford_check(tol: float = 0.0) -> dict:
    """Verify the gamma-matrix conventions exactly."""
    g1, g2 = GAMMA_E1, GAMMA_E2
    eye = np.eye(2)
    res = {
        "e1_squared": float(np.max(np.abs(g1 @ g1 + eye))),
        "e2_squared": float(np.max(np.abs(g2 @ g2 + eye))),
        "anticommutator": float(np.max(np.abs(g1 @ g2 + g2 @ g1))),
        "product_diag": float(np.max(np.abs(g1 @ g2 - np.diag([-1j, 1j])))),
    }
    res["pass"] = all(v <= tol for v in res.values())
    return res
