"""Pilot waveforms: point pulsone, chirp spread pilot, Zadoff-Chu spread pilot.

All exponents are reduced modulo the relevant root order in exact integer
arithmetic before exponentiation; fractional exponents in the closed forms
are modular inverses.
"""
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .grid import DDGrid, DDSignal
from .transforms import spread_point_pilot, zak_transform


def _modinv(a: int, m: int) -> int:
    return pow(int(a) % int(m), -1, int(m))


@dataclass(frozen=True)
class PointPilot:
    grid: DDGrid
    k_p: int = 0
    l_p: int = 0
    energy: float = 1.0

    def __post_init__(self):
        if not (0 <= self.k_p < self.grid.M and 0 <= self.l_p < self.grid.N):
            raise ValueError("pilot location must lie in the fundamental region")
        if self.energy < 0:
            raise ValueError("pilot energy must be nonnegative")


def point_pilot_signal(p: PointPilot) -> DDSignal:
    """Single impulse of amplitude sqrt(E_p) at the pilot location."""
    X = np.zeros((p.grid.M, p.grid.N), dtype=complex)
    X[p.k_p, p.l_p] = np.sqrt(p.energy)
    return DDSignal(p.grid, X)


@dataclass(frozen=True)
class ChirpPilot:
    """Spread pilot obtained by chirp filtering a point pilot.

    The slope q is decomposed as q = a*M + b*N mod MN with 0 <= a < N,
    0 <= b < M; the decomposition is unique when gcd(M, N) = 1.
    """

    grid: DDGrid
    q: int
    location: tuple = (0, 0)

    def __post_init__(self):
        self.grid.require_pilot_grid()
        M, N = self.grid.M, self.grid.N
        if gcd(self.q, M) != 1 or gcd(self.q, N) != 1:
            raise ValueError("slope q must be coprime to both M and N")
        a, b = self.decomposition
        assert (a * M + b * N) % self.grid.MN == self.q % self.grid.MN

    @property
    def decomposition(self):
        M, N = self.grid.M, self.grid.N
        a = (self.q * _modinv(M, N)) % N
        b = (self.q * _modinv(N, M)) % M
        return a, b


def chirp_filter(q: int, MN: int):
    """The MN-periodic spreading filter w_q[k, l] = xi_MN^{q(k^2 + l^2)}."""

    def w(k, l):
        e = (q * (np.asarray(k, dtype=np.int64) ** 2 + np.asarray(l, dtype=np.int64) ** 2)) % MN
        return np.exp(2j * np.pi * e / MN)

    return w


def chirp_pilot_signal(c: ChirpPilot) -> DDSignal:
    """Unit-energy DD representation of the chirp spread pilot.

    Uses the quadratic closed form when available (a != 0 and pilot at the
    origin); otherwise falls back to the direct spreading construction.
    The two agree to machine precision up to one global phase.
    """
    M, N, MN = c.grid.M, c.grid.N, c.grid.MN
    a, b = c.decomposition
    if a == 0 or c.location != (0, 0):
        return spread_point_pilot(chirp_filter(c.q, MN), c.grid, c.location)
    # Quadratic form in k and l with no cross chirp terms beyond k*l.  The
    # M-th and N-th roots of unity are the CRT lifts of xi_MN so that the
    # exponent can be accumulated in xi_MN units exactly.
    lam_M = (N * _modinv(N, M)) % MN   # order-M character
    lam_N = (M * _modinv(M, N)) % MN   # order-N character
    k = np.arange(M, dtype=np.int64)[:, None]
    l = np.arange(N, dtype=np.int64)[None, :]
    cM = (b * N) % M
    cN = (a * M - _modinv(4 * a * M, N)) % N
    e = (cM * lam_M * k * k + (cN * l * l + k * l) * lam_N) % MN
    return DDSignal(c.grid, np.exp(2j * np.pi * e / MN) / np.sqrt(MN))


def chirp_self_ambiguity_support(c: ChirpPilot, k, l):
    """Boolean mask of the chirp self-ambiguity support lattice at shifts (k, l)."""
    M, N = c.grid.M, c.grid.N
    a, b = c.decomposition
    k = np.asarray(k, dtype=np.int64)
    l = np.asarray(l, dtype=np.int64)
    c1 = (_modinv(2 * a * M, N) - 2 * a * M) % N
    return ((k - c1 * l) % N == 0) & ((l - 2 * b * N * k) % M == 0)


@dataclass(frozen=True)
class ZCPilot:
    """Zadoff-Chu spread pilot with root u, sequence length MN."""

    grid: DDGrid
    u: int

    def __post_init__(self):
        self.grid.require_pilot_grid()
        if gcd(self.u, self.grid.MN) != 1:
            raise ValueError("root u must be coprime to MN")

    @property
    def sequence(self):
        return zc_sequence(self.u, self.grid.MN)


def zc_sequence(u: int, MN: int) -> np.ndarray:
    """Constant-modulus ZC time sequence X_u[n] = xi_MN^{-u n(n+1)/2}."""
    n = np.arange(MN, dtype=np.int64)
    e = (-u * (n * (n + 1) // 2)) % MN
    return np.exp(2j * np.pi * e / MN)


def zc_pilot_signal(z: ZCPilot) -> DDSignal:
    """Closed-form DD representation of the ZC pilot (unit energy).

    X[k, l] = (1/sqrt(MN)) xi_MN^{-u k(k+1)/2} xi_N^{(u(2k+1)+2l)^2 / (8uM)}
    with 1/(8uM) the modular inverse mod N.  Equals the Zak transform of the
    time sequence up to one global phase.
    """
    M, N, MN = z.grid.M, z.grid.N, z.grid.MN
    u = z.u
    k = np.arange(M, dtype=np.int64)[:, None]
    l = np.arange(N, dtype=np.int64)[None, :]
    t1 = (-u * (k * (k + 1) // 2)) % MN
    inv8uM = _modinv(8 * u * M, N)
    t2 = ((u * (2 * k + 1) + 2 * l) ** 2 % N) * inv8uM % N
    return DDSignal(z.grid, np.exp(2j * np.pi * t1 / MN) * np.exp(2j * np.pi * t2 / N) / np.sqrt(MN))


def zc_dd_signal(u: int, grid: DDGrid) -> DDSignal:
    """Unit-energy Zak-domain image of a ZC sequence for arbitrary root u.

    No coprimality requirement; used for cross-ambiguity studies where the
    closed form's hypotheses need not hold.
    """
    X = zak_transform(zc_sequence(u, grid.MN), grid)
    return DDSignal(grid, X.values / np.sqrt(grid.MN))


def zc_self_ambiguity_support(u: int, grid: DDGrid, k, l):
    """True where (k, l) lies on the self-ambiguity line l = -u k mod MN."""
    k = np.asarray(k, dtype=np.int64)
    l = np.asarray(l, dtype=np.int64)
    return (l + u * k) % grid.MN == 0


def gauss_sum_magnitude(N: int, a: int) -> float:
    """|sum_p xi_N^{a p^2}| for odd N and gcd(a, N) = 1; equals sqrt(N)."""
    if N < 1 or N % 2 == 0:
        raise ValueError("N must be odd and positive")
    if gcd(a, N) != 1:
        raise ValueError("a must be coprime to N")
    p = np.arange(N, dtype=np.int64)
    return float(abs(np.sum(np.exp(2j * np.pi * ((a * p * p) % N) / N))))


def data_frame_signal(symbols, grid: DDGrid) -> DDSignal:
    """DD frame carrying one symbol per grid point.

    By linearity of the point-pulse superposition the fundamental region is
    just the symbol array itself.
    """
    symbols = np.asarray(symbols, dtype=complex)
    if symbols.shape != (grid.M, grid.N):
        raise ValueError(f"symbols must have shape {(grid.M, grid.N)}")
    return DDSignal(grid, symbols)
