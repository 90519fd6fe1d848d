"""Pulse-shaping filters and time-domain waveform synthesis.

The transmit filter factorizes as w1(tau) * w2(nu): w1 is a root-raised-
cosine pulse whose rolloff is kept inside the bandwidth B (symbol time
Ts = (1 + beta_tau)/B), and w2 is an RRC pulse in Doppler whose rolloff is
kept inside the frame duration T (Vs = (1 + beta_nu)/T).  The time-domain
counterpart of w2 is a square-root raised-cosine window of extent exactly T.
The receive filter is matched.
"""
from dataclasses import dataclass

import numpy as np

from .grid import DDGrid, DDSignal, TDSignal
from .transforms import inverse_zak_transform


def rrc_pulse(t, beta):
    """Root-raised-cosine pulse with unit symbol time, amplitude p(0)-normalized later.

    The removable singularities at t = 0 and |4*beta*t| = 1 are patched with
    their limits.
    """
    t = np.asarray(t, dtype=float)
    if beta == 0:
        return np.sinc(t)
    eps = 1e-9
    reg = np.abs(np.abs(4 * beta * t) - 1.0) < eps
    t_ = np.where(reg, 0.0, t)
    num = np.sin(np.pi * t_ * (1 - beta)) + 4 * beta * t_ * np.cos(np.pi * t_ * (1 + beta))
    den = np.pi * t_ * (1 - (4 * beta * t_) ** 2)
    small = np.abs(t_) < eps
    den = np.where(small | reg, 1.0, den)
    out = num / den
    out = np.where(small, 1 - beta + 4 * beta / np.pi, out)
    lim = beta / np.sqrt(2) * ((1 + 2 / np.pi) * np.sin(np.pi / (4 * beta))
                               + (1 - 2 / np.pi) * np.cos(np.pi / (4 * beta)))
    out = np.where(reg, lim, out)
    return out


def sqrt_rc_window(t, extent, beta):
    """Square-root raised-cosine window supported on [0, extent].

    Flat over the central fraction (1-beta)/(1+beta) with cosine-tapered
    edges; beta = 0 degenerates to the rectangular window.
    """
    t = np.asarray(t, dtype=float)
    if beta == 0:
        return ((t >= 0) & (t < extent)).astype(float)
    Tw = extent / (1 + beta)
    x = np.abs(t - extent / 2)
    flat = (1 - beta) * Tw / 2
    edge = (1 + beta) * Tw / 2
    w = np.zeros_like(x)
    w[x <= flat] = 1.0
    roll = (x > flat) & (x < edge)
    w[roll] = np.sqrt(0.5 * (1 + np.cos(np.pi / (beta * Tw) * (x[roll] - flat))))
    return w


@dataclass(frozen=True)
class PulseShapingFilter:
    grid: DDGrid
    beta_tau: float = 0.6
    beta_nu: float = 0.6
    oversamp: int = 16
    span: int = 30  # one-sided support in symbol units; RRC tails are negligible beyond

    def __post_init__(self):
        if not (0 <= self.beta_tau <= 1 and 0 <= self.beta_nu <= 1):
            raise ValueError("rolloffs must lie in [0, 1]")

    @property
    def Ts(self) -> float:
        return (1 + self.beta_tau) / self.grid.bandwidth

    @property
    def Vs(self) -> float:
        return (1 + self.beta_nu) / self.grid.duration

    def delay_ambiguity(self, dtau, nu):
        """integral of w1*(s) w1(s + dtau) e^{j 2 pi nu s} ds, unit-energy w1.

        dtau may be an array; nu is a scalar.
        """
        Ts = self.Ts
        ds = Ts / self.oversamp
        s = np.arange(-self.span * Ts, self.span * Ts, ds)
        w = rrc_pulse(s / Ts, self.beta_tau)
        nsq = np.sum(np.abs(w) ** 2) * ds
        dtau = np.atleast_1d(np.asarray(dtau, dtype=float))
        wsh = rrc_pulse((s[None, :] + dtau[:, None]) / Ts, self.beta_tau)
        ph = w * np.exp(2j * np.pi * nu * s)
        return (wsh @ ph) * ds / nsq

    def doppler_ambiguity(self, dnu, tau):
        """integral of w2*(v) w2(v + dnu) e^{-j 2 pi tau v} dv, unit-energy w2.

        Returns an array of shape (len(tau), len(dnu)).
        """
        Vs = self.Vs
        dv = Vs / self.oversamp
        v = np.arange(-self.span * Vs, self.span * Vs, dv)
        w = rrc_pulse(v / Vs, self.beta_nu)
        nsq = np.sum(np.abs(w) ** 2) * dv
        dnu = np.atleast_1d(np.asarray(dnu, dtype=float))
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        wsh = rrc_pulse((v[None, :] + dnu[:, None]) / Vs, self.beta_nu)
        ph = w[None, :] * np.exp(-2j * np.pi * tau[:, None] * v[None, :])
        return (ph @ wsh.T) * dv / nsq


def synthesize_waveform(dd: DDSignal, filt: PulseShapingFilter, Q: int = 4) -> TDSignal:
    """Pulse-shaped TD realization over the frame [0, T), oversampled by Q.

    s(t) = sum_n x[n mod MN] * W(n/B) * w1(t - n/B) with W the sqrt-RC time
    window of extent T and w1 the delay RRC pulse.
    """
    grid = dd.grid
    B, T, MN = grid.bandwidth, grid.duration, grid.MN
    x = inverse_zak_transform(dd).samples
    n = np.arange(-20, int(np.ceil(T * B)) + 20)
    xn = x[np.mod(n, MN)] * sqrt_rc_window(n / B, T, filt.beta_nu)
    ti = np.arange(Q * MN) / (Q * B)
    interp = rrc_pulse((ti[:, None] - n[None, :] / B) / filt.Ts, filt.beta_tau)
    return TDSignal(interp @ xn, Q * B)
