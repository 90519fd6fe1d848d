"""Delay-Doppler lattice and signal containers."""
from dataclasses import dataclass
from math import gcd

import numpy as np


@dataclass(frozen=True)
class DDGrid:
    """Discrete delay-Doppler grid.

    M delay bins and N Doppler bins per fundamental period; the Doppler
    period nu_p (Hz) fixes the delay period tau_p = 1/nu_p exactly.
    Bandwidth B = M*nu_p and frame duration T = N*tau_p, so B*T = M*N.
    """

    M: int
    N: int
    nu_p: float = 30e3

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise ValueError("M and N must be positive integers")
        if self.nu_p <= 0:
            raise ValueError("nu_p must be positive")

    @property
    def MN(self) -> int:
        return self.M * self.N

    @property
    def tau_p(self) -> float:
        return 1.0 / self.nu_p

    @property
    def bandwidth(self) -> float:
        return self.M * self.nu_p

    @property
    def duration(self) -> float:
        return self.N * self.tau_p

    def require_pilot_grid(self):
        """Pilot closed forms need M, N odd and coprime."""
        if self.M % 2 == 0 or self.N % 2 == 0:
            raise ValueError("pilot grid needs odd M and N")
        if gcd(self.M, self.N) != 1:
            raise ValueError("pilot grid needs gcd(M, N) = 1")


class DDSignal:
    """Quasi-periodic DD-domain signal stored on the M x N fundamental region.

    The extension to arbitrary integer (k, l) follows the quasi-periodicity
    law: value(k + nM, l + mN) = exp(j2*pi*n*l/N) * value(k, l).
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: DDGrid, values):
        values = np.asarray(values, dtype=complex)
        if values.shape != (grid.M, grid.N):
            raise ValueError(f"values must have shape {(grid.M, grid.N)}, got {values.shape}")
        self.grid = grid
        self.values = values

    def value(self, k, l):
        """Quasi-periodic accessor at arbitrary integer indices (vectorized)."""
        M, N = self.grid.M, self.grid.N
        k = np.asarray(k)
        l = np.asarray(l)
        n = np.floor_divide(k, M)
        lf = np.mod(l, N)
        return np.exp(2j * np.pi * n * lf / N) * self.values[k - n * M, lf]

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    def __add__(self, other):
        if not isinstance(other, DDSignal) or other.grid != self.grid:
            raise ValueError("can only add DDSignals on the same grid")
        return DDSignal(self.grid, self.values + other.values)

    def __sub__(self, other):
        if not isinstance(other, DDSignal) or other.grid != self.grid:
            raise ValueError("can only subtract DDSignals on the same grid")
        return DDSignal(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return DDSignal(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass
class TDSignal:
    """Time-domain samples, critically sampled (Q=1) or oversampled by integer Q."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))
