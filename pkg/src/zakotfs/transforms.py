"""Zak transforms, twisted convolution, PAPR.

Root-of-unity convention: xi_K = exp(+j*2*pi/K) throughout.
"""
import numpy as np

from .grid import DDGrid, DDSignal, TDSignal


def zak_transform(td, grid: DDGrid) -> DDSignal:
    """Discrete Zak transform of a critically sampled frame.

    X[k, l] = (1/sqrt(N)) * sum_p x[k + p*M] * xi_N^{-p*l}
    """
    x = td.samples if isinstance(td, TDSignal) else np.asarray(td, dtype=complex)
    if x.shape != (grid.MN,):
        raise ValueError(f"expected {grid.MN} samples, got {x.shape}")
    # row p holds x[k + pM]; the FFT kernel exp(-2j pi p l / N) is xi_N^{-pl}
    X = np.fft.fft(x.reshape(grid.N, grid.M), axis=0) / np.sqrt(grid.N)
    return DDSignal(grid, X.T)


def inverse_zak_transform(dd: DDSignal) -> TDSignal:
    grid = dd.grid
    xx = np.fft.ifft(dd.values.T, axis=0) * np.sqrt(grid.N)
    return TDSignal(xx.reshape(grid.MN), grid.bandwidth)


def _tap_list(taps):
    """Normalize taps to a sorted list of (k, l, value).

    Sorting fixes the accumulation order so results are bit-reproducible.
    """
    if hasattr(taps, "items"):
        items = [(int(k), int(l), complex(v)) for (k, l), v in taps.items()]
    else:
        items = [(int(k), int(l), complex(v)) for (k, l, v) in taps]
    items.sort(key=lambda t: (t[0], t[1]))
    return items


def twisted_convolve(taps, b: DDSignal) -> DDSignal:
    """Discrete twisted convolution of a sparse filter with a DD signal.

    (a *s b)[k, l] = sum a[k', l'] b[k-k', l-l'] exp(j2 pi l'(k-k')/MN),
    with b evaluated through its quasi-periodic extension.  An empty tap
    set yields the zero signal.
    """
    grid = b.grid
    MN = grid.MN
    kk = np.arange(grid.M)[:, None]
    ll = np.arange(grid.N)[None, :]
    out = np.zeros((grid.M, grid.N), dtype=complex)
    for k0, l0, h in _tap_list(taps):
        out += h * b.value(kk - k0, ll - l0) * np.exp(2j * np.pi * l0 * (kk - k0) / MN)
    return DDSignal(grid, out)


def twisted_compose(a, b, MN: int) -> dict:
    """Twisted convolution of two sparse filters (tap dictionaries)."""
    out = {}
    for ka, la, va in _tap_list(a):
        for kb, lb, vb in _tap_list(b):
            key = (ka + kb, la + lb)
            out[key] = out.get(key, 0.0) + va * vb * np.exp(2j * np.pi * la * kb / MN)
    return out


class TwistedOperator:
    """Fast application of a fixed sparse twisted-convolution filter.

    In the time domain the filter acts as y[n] = sum h[k,l] x[n-k]
    exp(j2 pi l (n-k)/MN) on the MN-periodic realization, which regroups per
    delay row into y = sum_k roll(x, k) * d_k with a precomputed modulation
    vector d_k.  Exactly equivalent to twisted_convolve (the Zak transform
    is unitary), at a fraction of the cost for tap counts in the hundreds.
    """

    def __init__(self, taps, grid: DDGrid):
        self.grid = grid
        MN = grid.MN
        rows = {}
        for k0, l0, v in _tap_list(taps):
            rows.setdefault(k0, []).append((l0, v))
        n = np.arange(MN)
        W = np.exp(2j * np.pi * n / MN)
        self._rows = []
        for k0, items in sorted(rows.items()):
            ls = np.array([l for l, _ in items])
            hs = np.array([v for _, v in items])
            # b[m] = sum_l h[k0,l] exp(j2 pi l m / MN), via exact integer phase index
            B = W[(ls[:, None] * n[None, :]) % MN]
            b = hs @ B
            self._rows.append((int(k0), b))

    def forward_td(self, x):
        out = np.zeros(self.grid.MN, dtype=complex)
        for k0, b in self._rows:
            out += np.roll(x, k0) * np.roll(b, k0)
        return out

    def adjoint_td(self, y):
        out = np.zeros(self.grid.MN, dtype=complex)
        for k0, b in self._rows:
            out += np.conj(b) * np.roll(y, -k0)
        return out

    def apply(self, x: DDSignal) -> DDSignal:
        xt = inverse_zak_transform(x).samples
        return zak_transform(self.forward_td(xt), self.grid)


def papr(td: TDSignal) -> float:
    """Peak-to-average power ratio in dB."""
    p = np.abs(td.samples) ** 2
    mean = p.mean()
    if mean == 0:
        raise ValueError("PAPR undefined for the zero signal")
    return float(10 * np.log10(p.max() / mean))


def spread_point_pilot(w, grid: DDGrid, location=(0, 0)) -> DDSignal:
    """Apply an MN-periodic DD spreading filter w to a point pilot.

    w is a callable w(k, l) -> complex (vectorized, MN-periodic in both
    arguments).  The output is the unit-energy twisted convolution
    w *s x_pt with the point pilot at `location`, evaluated by summing the
    quasi-periodic pilot translates over one filter period.
    """
    M, N, MN = grid.M, grid.N, grid.MN
    kp, lp = location
    k = np.arange(M)[:, None, None, None]
    l = np.arange(N)[None, :, None, None]
    n = np.arange(N)[None, None, :, None]
    m = np.arange(M)[None, None, None, :]
    vals = w(k - kp - n * M, l - lp - m * N)
    ph = np.exp(2j * np.pi * n * lp / N) \
        * np.exp(2j * np.pi * (l - lp - m * N) * (kp + n * M) / MN)
    X = (vals * ph).sum(axis=(2, 3))
    return DDSignal(grid, X / np.sqrt(np.sum(np.abs(X) ** 2)))
