"""Doubly-dispersive channel simulation and the discrete effective channel.

Veh-A power-delay profile, effective channel taps on the information
lattice, crystallization checks and the noisy DD-domain I/O relation.
"""
from dataclasses import dataclass, field
from math import ceil

import numpy as np

from .grid import DDGrid, DDSignal
from .filters import PulseShapingFilter
from .transforms import TwistedOperator, twisted_convolve

# Veh-A power-delay profile
VEH_A_DELAYS = np.array([0.0, 0.31, 0.71, 1.09, 1.73, 2.51]) * 1e-6  # seconds
VEH_A_POWERS_DB = np.array([0.0, -1.0, -9.0, -10.0, -15.0, -20.0])
VEH_A_TAU_MAX = float(VEH_A_DELAYS[-1])


@dataclass(frozen=True)
class ChannelPath:
    gain: complex
    delay: float     # seconds
    doppler: float   # Hz


@dataclass
class PhysicalChannel:
    paths: list
    tau_max: float
    nu_max: float


def draw_veh_a(rng, nu_max: float) -> PhysicalChannel:
    """One Veh-A realization: Rayleigh path gains, Jakes-style Dopplers.

    Mean-square gains follow the profile ratios normalized so the total
    mean power is one; Dopplers are nu_max*cos(theta_i) with theta_i
    uniform on [0, 2 pi).
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    p = 10.0 ** (VEH_A_POWERS_DB / 10.0)
    p = p / p.sum()
    sigma = np.sqrt(p / 2)
    gains = sigma * (rng.standard_normal(6) + 1j * rng.standard_normal(6))
    thetas = rng.uniform(0, 2 * np.pi, 6)
    dopplers = nu_max * np.cos(thetas)
    paths = [ChannelPath(g, d, v) for g, d, v in zip(gains, VEH_A_DELAYS, dopplers)]
    return PhysicalChannel(paths, VEH_A_TAU_MAX, float(nu_max))


@dataclass
class CrystallizationReport:
    k_max: int
    l_max: int
    satisfied: bool


def check_crystallization(grid: DDGrid, tau_max: float, nu_max: float) -> CrystallizationReport:
    """Delay/Doppler spread in bins and whether both fit strictly inside a period."""
    k_max = ceil(grid.M * tau_max / grid.tau_p)
    l_max = ceil(2 * grid.N * nu_max / grid.nu_p)
    return CrystallizationReport(k_max, l_max, k_max < grid.M and l_max < grid.N)


@dataclass
class EffectiveChannel:
    grid: DDGrid
    taps: dict            # {(k, l): complex}
    k_max: int = 0
    l_max: int = 0

    @property
    def energy(self) -> float:
        return float(sum(abs(v) ** 2 for v in self.taps.values()))


def effective_channel(phy: PhysicalChannel, filt: PulseShapingFilter, grid: DDGrid,
                      k_margin: int = 4, l_margin: int = 4) -> EffectiveChannel:
    """Discrete effective channel h_eff[k, l] on the information lattice.

    The physical channel is a sum of Dirac paths, so the twisted
    convolution w_rx * h_phy * w_tx separates into one-dimensional filter
    ambiguity integrals per path:

    h_eff(tau, nu) = sum_i h_i e^{j2 pi nu_i (tau - tau_i)}
                     * A_w1(tau - tau_i, nu_i) * A_w2(nu - nu_i, tau)

    sampled at tau = k tau_p / M, nu = l nu_p / N.  Off-grid path delays
    and Dopplers spread each path over neighbouring taps (basis mismatch).
    """
    cz = check_crystallization(grid, phy.tau_max, phy.nu_max)
    kset = np.arange(-k_margin, cz.k_max + k_margin + 1)
    lset = np.arange(-cz.l_max - l_margin, cz.l_max + l_margin + 1)
    taus = kset * grid.tau_p / grid.M
    nus = lset * grid.nu_p / grid.N
    H = np.zeros((len(kset), len(lset)), dtype=complex)
    for path in phy.paths:
        a1 = filt.delay_ambiguity(taus - path.delay, path.doppler)
        a2 = filt.doppler_ambiguity(nus - path.doppler, taus)
        H += path.gain * (np.exp(2j * np.pi * path.doppler * (taus - path.delay)) * a1)[:, None] * a2
    taps = {(int(k), int(l)): complex(H[i, j])
            for i, k in enumerate(kset) for j, l in enumerate(lset)}
    return EffectiveChannel(grid, taps, cz.k_max, cz.l_max)


def apply_channel(x: DDSignal, h: EffectiveChannel, noise_variance: float, rng=None) -> DDSignal:
    """y = h_eff *s x + n with circular complex Gaussian noise per sample."""
    if noise_variance < 0:
        raise ValueError("noise variance must be nonnegative")
    y = TwistedOperator(h.taps, x.grid).apply(x)
    if noise_variance > 0:
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        n = rng.standard_normal((x.grid.M, x.grid.N)) + 1j * rng.standard_normal((x.grid.M, x.grid.N))
        y = DDSignal(x.grid, y.values + np.sqrt(noise_variance / 2) * n)
    return y


def build_io_matrix(h: EffectiveChannel, grid: DDGrid) -> np.ndarray:
    """Dense MN x MN matrix H with vec(y) = H vec(x), k-major vec ordering."""
    M, N, MN = grid.M, grid.N, grid.MN
    kk = np.arange(M)[:, None]
    ll = np.arange(N)[None, :]
    H = np.zeros((MN, MN), dtype=complex)
    rows = (kk * N + ll).ravel()
    for (k0, l0), v in sorted(h.taps.items()):
        if v == 0:
            continue
        ks = kk - k0
        n = np.floor_divide(ks, M)
        kf = ks - n * M
        lf = np.mod(ll - l0, N)
        cols = (kf * N + lf).ravel()
        phase = (np.exp(2j * np.pi * l0 * ks / MN)
                 * np.exp(2j * np.pi * n * lf / N)).ravel()
        H[rows, cols] += v * phase
    return H
