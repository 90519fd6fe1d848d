"""Self- and cross-ambiguity surfaces of DD-domain signals.

A[k, l] = sum over the fundamental region of x[k', l'] conj(y[k'-k, l'-l])
          * xi_MN^{-l (k'-k)},
with shifted arguments through the quasi-periodic extension.  The surface is
MN-periodic in both shifts.  Computation runs in the time domain: row k of A
is the DFT of x_td[n] conj(y_td[n-k]) times a linear phase, which agrees with
the defining DD-domain sum to machine precision.
"""
from dataclasses import dataclass

import numpy as np

from .grid import DDGrid, DDSignal
from .transforms import inverse_zak_transform


@dataclass
class AmbiguityMap:
    grid: DDGrid
    values: np.ndarray  # (MN, MN), indexed [delay shift k, Doppler shift l]


def cross_ambiguity(x: DDSignal, y: DDSignal) -> AmbiguityMap:
    """Full MN x MN cross-ambiguity surface A_{x,y}."""
    if x.grid != y.grid:
        raise ValueError("signals must share a grid")
    MN = x.grid.MN
    xt = inverse_zak_transform(x).samples
    yt = inverse_zak_transform(y).samples
    shift = np.arange(MN)
    # y[n - k] for every row k at once
    Y = yt[(shift[None, :] - shift[:, None]) % MN]
    A = np.fft.fft(xt[None, :] * np.conj(Y), axis=1)
    A *= np.exp(2j * np.pi * np.outer(shift, shift) / MN)
    return AmbiguityMap(x.grid, A)


def self_ambiguity(x: DDSignal) -> AmbiguityMap:
    return cross_ambiguity(x, x)


def ambiguity_patch(x: DDSignal, y: DDSignal, kset, lset) -> dict:
    """A_{x,y}[k, l] on a small window of shifts, as {(k, l): value}."""
    if x.grid != y.grid:
        raise ValueError("signals must share a grid")
    MN = x.grid.MN
    xt = inverse_zak_transform(x).samples
    yt = inverse_zak_transform(y).samples
    lset = list(lset)
    lidx = np.mod(lset, MN)
    out = {}
    for k in kset:
        row = np.fft.fft(xt * np.conj(np.roll(yt, k)))
        vals = row[lidx] * np.exp(2j * np.pi * np.asarray(lset) * k / MN)
        for l, v in zip(lset, vals):
            out[(int(k), int(l))] = complex(v)
    return out
