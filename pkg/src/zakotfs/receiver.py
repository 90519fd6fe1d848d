"""Joint sensing and data recovery in a single DD subframe.

Channel estimation reads taps directly off the cross-ambiguity between the
received signal and the known spread pilot; the pilot is then cancelled and
the data detected with an LMMSE equalizer.  Turbo iterations feed hard data
decisions back to clean up the pilot observation.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .ambiguity import ambiguity_patch
from .channel import EffectiveChannel, check_crystallization
from .grid import DDGrid, DDSignal
from .pilots import (ChirpPilot, ZCPilot, chirp_pilot_signal, chirp_self_ambiguity_support,
                     data_frame_signal, zc_pilot_signal, zc_self_ambiguity_support)
from .transforms import TwistedOperator, inverse_zak_transform, zak_transform


class CrystallizationError(Exception):
    """Read-off window would alias neighbouring self-ambiguity translates."""


@lru_cache(maxsize=64)
def pilot_signal(pilot) -> DDSignal:
    """Unit-energy DD image of a pilot (cached; treat the result as read-only)."""
    if isinstance(pilot, ZCPilot):
        return zc_pilot_signal(pilot)
    if isinstance(pilot, ChirpPilot):
        return chirp_pilot_signal(pilot)
    raise TypeError("pilot must be a ZCPilot or ChirpPilot")


def _pilot_support(pilot, dk, dl):
    if isinstance(pilot, ZCPilot):
        return zc_self_ambiguity_support(pilot.u, pilot.grid, dk, dl)
    return chirp_self_ambiguity_support(pilot, dk, dl)


@dataclass(frozen=True)
class ReadoffRegion:
    """Inclusive window of shifts used to read taps off the cross-ambiguity."""

    k_lo: int
    k_hi: int
    l_lo: int
    l_hi: int
    aliased: bool = False

    @property
    def kset(self):
        return range(self.k_lo, self.k_hi + 1)

    @property
    def lset(self):
        return range(self.l_lo, self.l_hi + 1)


def _window_conflicts(pilot, k_lo, k_hi, l_lo, l_hi) -> bool:
    # Aliasing occurs when two window points differ by a nonzero support
    # point of the pilot self-ambiguity, so check the difference set.
    dk = np.arange(k_lo - k_hi, k_hi - k_lo + 1)[:, None]
    dl = np.arange(l_lo - l_hi, l_hi - l_lo + 1)[None, :]
    m = _pilot_support(pilot, dk + 0 * dl, dl + 0 * dk)
    m = m & ~((dk == 0) & (dl == 0))
    return bool(m.any())


def default_readoff_region(pilot, tau_max: float, nu_max: float,
                           k_margin: int = 4, l_margin: int = 4) -> ReadoffRegion:
    """Read-off window around the origin translate of the pilot ambiguity line.

    Starts from k in [-k_margin, k_max + k_margin], l in [-l_half - l_margin,
    l_half + l_margin] with l_half the one-sided Doppler extent in bins, and
    shrinks the margins until the window's difference set avoids every other
    self-ambiguity support point.  If even the margin-free window conflicts,
    the region is flagged as aliased.
    """
    grid = pilot.grid
    cz = check_crystallization(grid, tau_max, nu_max)
    l_half = int(np.ceil(nu_max * grid.N / grid.nu_p))
    km, lm = k_margin, l_margin
    while lm > 0 and _window_conflicts(pilot, -km, cz.k_max + km, -l_half - lm, l_half + lm):
        lm -= 1
    while km > 0 and _window_conflicts(pilot, -km, cz.k_max + km, -l_half - lm, l_half + lm):
        km -= 1
    aliased = _window_conflicts(pilot, -km, cz.k_max + km, -l_half - lm, l_half + lm)
    return ReadoffRegion(-km, cz.k_max + km, -l_half - lm, l_half + lm, aliased)


@dataclass
class ChannelEstimate:
    grid: DDGrid
    taps: dict
    region: ReadoffRegion = None

    @property
    def energy(self) -> float:
        return float(sum(abs(v) ** 2 for v in self.taps.values()))


def estimate_channel(y: DDSignal, pilot, pilot_energy: float, region: ReadoffRegion,
                     strict: bool = True, denoise: float = 1e-3) -> ChannelEstimate:
    """Read the effective channel off the received/pilot cross-ambiguity.

    taps[k, l] = A_{y, x_p}[k, l] / sqrt(E_p) over the window; estimates
    below `denoise` times the peak magnitude are dropped.  With `strict`,
    a window whose difference set hits a neighbouring self-ambiguity
    translate raises CrystallizationError; pass strict=False to accept the
    aliasing (the regime of severe Doppler spread).
    """
    if strict and (region.aliased or _window_conflicts(
            pilot, region.k_lo, region.k_hi, region.l_lo, region.l_hi)):
        raise CrystallizationError("read-off window overlaps a neighbouring "
                                   "self-ambiguity translate")
    xp = pilot_signal(pilot)
    patch = ambiguity_patch(y, xp, region.kset, region.lset)
    scale = 1.0 / np.sqrt(pilot_energy)
    taps = {kl: v * scale for kl, v in patch.items()}
    peak = max(abs(v) for v in taps.values()) if taps else 0.0
    floor = denoise * peak
    taps = {kl: v for kl, v in taps.items() if abs(v) >= floor}
    return ChannelEstimate(y.grid, taps, region)


def cancel_pilot(y: DDSignal, est: ChannelEstimate, pilot, pilot_energy: float) -> DDSignal:
    """Subtract the estimated received pilot from y."""
    xp = pilot_signal(pilot)
    recon = TwistedOperator(est.taps, y.grid).apply(float(np.sqrt(pilot_energy)) * xp)
    return y - recon


QAM4 = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2)


def qam4_decide(soft):
    """Nearest 4-QAM point, unit average energy."""
    return (np.sign(soft.real) + 1j * np.sign(soft.imag)) / np.sqrt(2)


def qam4_random(rng, shape):
    return QAM4[rng.integers(0, 4, size=shape)]


def lmmse_detect(y_data: DDSignal, est: ChannelEstimate, noise_variance: float,
                 rtol: float = 1e-8, maxiter: int = 2000):
    """LMMSE equalization: soft = (H^H H + sigma^2 I)^{-1} H^H vec(y).

    Solved matrix-free with conjugate gradients on the normal equations.
    The Zak transform is unitary, so the system is solved in the time
    domain where the channel operator is a handful of rolls and products.
    """
    grid = y_data.grid
    MN = grid.MN
    op = TwistedOperator(est.taps, grid)

    def normal_mv(x):
        return op.adjoint_td(op.forward_td(x)) + noise_variance * x

    A = LinearOperator((MN, MN), matvec=normal_mv, dtype=complex)
    b = op.adjoint_td(inverse_zak_transform(y_data).samples)
    sol, info = cg(A, b, rtol=rtol, atol=0.0, maxiter=maxiter)
    if info < 0:
        raise RuntimeError("LMMSE solve failed")
    soft = zak_transform(sol, grid).values
    return qam4_decide(soft), soft


def nmse(est_taps: dict, truth_taps: dict) -> float:
    """Normalized MSE over the union support of estimate and truth."""
    denom = sum(abs(v) ** 2 for v in truth_taps.values())
    if denom == 0:
        raise ValueError("NMSE undefined for zero-energy truth")
    keys = set(est_taps) | set(truth_taps)
    num = sum(abs(est_taps.get(kl, 0.0) - truth_taps.get(kl, 0.0)) ** 2 for kl in keys)
    return float(num / denom)


def ber(decisions, truth) -> float:
    """Fraction of wrong bits (2 bits per 4-QAM symbol)."""
    decisions = np.asarray(decisions)
    truth = np.asarray(truth)
    errs = (np.sign(decisions.real) != np.sign(truth.real)).sum() \
        + (np.sign(decisions.imag) != np.sign(truth.imag)).sum()
    return float(errs) / (2 * truth.size)


@dataclass
class FramePlan:
    """One subframe: spread pilot superposed with 4-QAM data on every bin."""

    pilot: object                 # ZCPilot or ChirpPilot
    data_symbols: np.ndarray      # M x N, unit average energy
    data_snr_db: float = 25.0
    pdr_db: float = 20.0

    @property
    def grid(self) -> DDGrid:
        return self.pilot.grid

    @property
    def noise_variance(self) -> float:
        # unit per-symbol data energy
        return 10.0 ** (-self.data_snr_db / 10.0)

    @property
    def pilot_energy(self) -> float:
        return 10.0 ** (self.pdr_db / 10.0)


def transmit_frame(plan: FramePlan) -> DDSignal:
    xp = pilot_signal(plan.pilot)
    return float(np.sqrt(plan.pilot_energy)) * xp + data_frame_signal(plan.data_symbols, plan.grid)


def _effective_noise(y_pilot_obs: DDSignal, est: ChannelEstimate, noise_variance: float,
                     pilot_energy: float) -> float:
    """Noise-plus-interference variance fed to the LMMSE detector.

    Each read-off tap carries (sigma^2 + P_int)/E_p of estimation error.
    The error hits the detector twice: the residual pilot spreads n_taps
    such errors over MN bins, and the same tap errors corrupt the channel
    model applied to the unit-energy data.
    """
    MN = y_pilot_obs.grid.MN
    p_rx = y_pilot_obs.energy / MN
    p_pilot = pilot_energy * est.energy / MN
    p_int = max(p_rx - p_pilot - noise_variance, 0.0)
    n_taps = len(est.taps)
    return noise_variance + n_taps * (noise_variance + p_int) * (1.0 / MN + 1.0 / pilot_energy)


# turbo loop constants: denoising threshold in per-tap noise stds, and the
# minimum relative residual improvement required to keep iterating
_TAP_THRESHOLD = 2.5
_MIN_RESID_GAIN = 0.02


def turbo_iterate(y: DDSignal, plan: FramePlan, iterations: int, region: ReadoffRegion,
                  truth: EffectiveChannel = None, strict: bool = False):
    """Iterative estimate/cancel/detect loop with hard-decision feedback.

    Iteration 1 is the plain pipeline; each later iteration subtracts the
    reconstructed received data signal before re-estimating the channel.
    Read-off taps below _TAP_THRESHOLD per-tap noise standard deviations are
    zeroed, and the in-window energy they carried feeds the detector's
    interference variance (uncancelled residual pilot).  The loop freezes
    once the frame-model residual ||y - H_hat(sqrt(E_p) x_p + d_hat)||^2
    stops improving by _MIN_RESID_GAIN relative -- hard-decision feedback
    drifts once the decisions stop changing for the better.  Returns one
    record per iteration with the estimate, decisions, and metrics against
    the ground truth when available.
    """
    if iterations < 1:
        raise ValueError("need at least one iteration")
    E_p = plan.pilot_energy
    sigma2 = plan.noise_variance
    xp = pilot_signal(plan.pilot)
    MN = plan.grid.MN

    def _step(y_pilot_obs):
        full = estimate_channel(y_pilot_obs, plan.pilot, E_p, region, strict=strict)
        # a pure-noise window tap has std sqrt((sigma^2 + P_int)/E_p)
        p_int = max(y_pilot_obs.energy / MN - E_p * full.energy / MN - sigma2, 0.0)
        st2 = (sigma2 + p_int) / E_p
        floor = _TAP_THRESHOLD * np.sqrt(st2)
        kept = {kl: v for kl, v in full.taps.items() if abs(v) >= floor}
        if not kept:
            kl = max(full.taps, key=lambda kl: abs(full.taps[kl]))
            kept = {kl: full.taps[kl]}
        est = ChannelEstimate(full.grid, kept, full.region)
        y_data = cancel_pilot(y, est, plan.pilot, E_p)
        # estimation-error energy: dropped in-window taps (less their own
        # noise inflation) plus the noise carried by the kept taps; it acts
        # as residual pilot (x E_p/MN) and as channel-model error on the data
        n_drop = len(full.taps) - len(kept)
        trunc = max(full.energy - est.energy - n_drop * st2, 0.0)
        kept_noise = len(kept) * st2
        sigma_eff = sigma2 + (E_p / MN + 1.0) * (trunc + kept_noise)
        decisions, _ = lmmse_detect(y_data, est, sigma_eff)
        data_hat = data_frame_signal(decisions, plan.grid)
        frame = float(np.sqrt(E_p)) * xp + data_hat
        resid = (y - TwistedOperator(est.taps, plan.grid).apply(frame)).energy
        # cancelling data only shrinks the kept taps' noise; once truncation
        # dominates, another pass has nothing left to improve
        can_gain = kept_noise > trunc
        return est, decisions, data_hat, resid, can_gain

    def _record(est, decisions):
        rec = {"estimate": est, "decisions": decisions,
               "ber": ber(decisions, plan.data_symbols)}
        if truth is not None:
            rec["nmse"] = nmse(est.taps, truth.taps)
        return rec

    est, decisions, data_hat, resid, can_gain = _step(y)
    history = [_record(est, decisions)]
    frozen = not can_gain
    for _ in range(iterations - 1):
        if not frozen:
            cand = _step(y - TwistedOperator(est.taps, plan.grid).apply(data_hat))
            if cand[3] <= (1.0 - _MIN_RESID_GAIN) * resid:
                est, decisions, data_hat, resid, can_gain = cand
                frozen = not can_gain
            else:
                frozen = True
        history.append(_record(est, decisions))
    return history
