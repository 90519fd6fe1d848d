"""End-to-end acceptance suite.

Exhaustive algebraic identities run at full scale; the Monte Carlo criteria
(channel-estimation parity, BER shape, preamble-detection orderings) run at
fixed seeds with enough trials that the asserted orderings hold within one
standard error.  Set ZAKOTFS_THREADS to fan the slow sweeps across cores.
"""
import os
from math import gcd

import numpy as np
import pytest

from zakotfs import (DDGrid, DDSignal, PointPilot, PulseShapingFilter, ZCPilot,
                     check_crystallization, chirp_filter, chirp_pilot_signal, ChirpPilot,
                     cross_ambiguity, gauss_sum_magnitude, inverse_zak_transform, papr,
                     point_pilot_signal, self_ambiguity, spread_point_pilot,
                     synthesize_waveform, twisted_compose, twisted_convolve,
                     zak_transform, zc_dd_signal, zc_pilot_signal,
                     zc_self_ambiguity_support)
from zakotfs.experiments import ber_curve, nmse_curve
from zakotfs.rach import build_observation_matrix, missed_detection_curve, ost_detect

GRID = DDGrid(31, 37, 30e3)
FILT = PulseShapingFilter(GRID, 0.6, 0.6)
VEH_A_TAU_MAX = 2.51e-6

WORKERS = max(1, int(os.environ.get("ZAKOTFS_THREADS", os.cpu_count() or 1)))


# ------------------------------------------------------ ZC self-ambiguity line
@pytest.mark.parametrize("u", [11, 23])
def test_zc_self_ambiguity_line_exhaustive(u):
    A = np.abs(self_ambiguity(zc_pilot_signal(ZCPilot(GRID, u))).values)
    kk = np.arange(GRID.MN)[:, None]
    ll = np.arange(GRID.MN)[None, :]
    on_line = zc_self_ambiguity_support(u, GRID, kk, ll)
    assert on_line.sum() == GRID.MN
    assert np.all(np.abs(A[on_line] - 1.0) < 1e-9)
    assert A[~on_line].max() < 1e-9


# ---------------------------------------------------- cross-ambiguity flatness
@pytest.mark.parametrize("u,w", [(7, 11), (7, 13), (11, 13)])
def test_cross_ambiguity_flatness_odd_coprime_grid(u, w):
    # NOTE: the (7, 13) pair has gcd(u - w, MN) = 3, which breaks the
    # quadratic Gauss-sum reduction behind the flatness identity; it fails
    # honestly (the cross-ambiguity concentrates on a sublattice instead).
    g = DDGrid(35, 39)
    A = np.abs(cross_ambiguity(zc_dd_signal(u, g), zc_dd_signal(w, g)).values)
    assert np.all(np.abs(A - 1 / np.sqrt(g.MN)) < 1e-9)


def test_cross_ambiguity_flatness_fails_on_even_grid():
    g = DDGrid(32, 37)
    A = np.abs(cross_ambiguity(zc_dd_signal(11, g), zc_dd_signal(13, g)).values)
    assert A.max() > 1.1 / np.sqrt(g.MN)


# -------------------------------------------------------- quadratic Gauss sums
def test_quadratic_gauss_sum_magnitudes_exhaustive():
    for N in range(1, 102, 2):
        for a in range(1, N + 1):
            if gcd(a, N) == 1:
                assert abs(gauss_sum_magnitude(N, a) - np.sqrt(N)) < 1e-10


# -------------------------------------------- closed forms vs direct spreading
def _phase_aligned(cand, ref, atol=1e-9):
    i = np.unravel_index(np.argmax(np.abs(ref)), ref.shape)
    return np.max(np.abs(cand * (ref[i] / cand[i]) - ref)) < atol


def test_zc_closed_form_matches_zak_of_sequence():
    assert _phase_aligned(zc_pilot_signal(ZCPilot(GRID, 11)).values,
                          zc_dd_signal(11, GRID).values)


def test_chirp_closed_form_matches_direct_spreading():
    closed = chirp_pilot_signal(ChirpPilot(GRID, 3)).values
    direct = spread_point_pilot(chirp_filter(3, GRID.MN), GRID).values
    assert _phase_aligned(closed, direct)


# ----------------------------------------------------------------- PAPR levels
def test_papr_point_pulsone_level():
    dd = point_pilot_signal(PointPilot(GRID, 16, 19))
    assert abs(papr(synthesize_waveform(dd, FILT, Q=4)) - 15.0) <= 1.5


def test_papr_zc_pilot_level():
    # NOTE: measured 4.14 dB against the 6 +/- 1.5 dB target; the ZC pilot's
    # TD realization under this synthesis is flatter than the quoted level.
    # Fails honestly rather than widening the tolerance.
    dd = zc_pilot_signal(ZCPilot(GRID, 23))
    assert abs(papr(synthesize_waveform(dd, FILT, Q=4)) - 6.0) <= 1.5


# ----------------------------------------------- channel spread bin arithmetic
def test_spread_bin_arithmetic():
    r = check_crystallization(GRID, VEH_A_TAU_MAX, 815.0)
    assert (r.k_max, r.l_max, r.satisfied) == (3, 3, True)
    r = check_crystallization(GRID, VEH_A_TAU_MAX, 6000.0)
    assert r.l_max == 15 and r.satisfied


# ---------------------------------------------- spread-pilot estimation parity
@pytest.mark.slow
def test_channel_estimation_parity_spread_pilots():
    pdr_grid = list(range(0, 45, 5))
    curves = {kind: nmse_curve(GRID, FILT, kind, pdr_grid, trials=500,
                               master_seed=0, nu_max=815.0, workers=WORKERS)
              for kind in ("zc", "chirp")}
    zc = np.array([r["nmse_db"] for r in curves["zc"]])
    ch = np.array([r["nmse_db"] for r in curves["chirp"]])
    # the two spread pilots sense the channel equally well
    assert np.max(np.abs(zc - ch)) < 0.5
    # monotone improvement with pilot power, then a floor
    for c in (zc, ch):
        assert np.all(np.diff(c) < 0.3)
        assert c[0] - c.min() > 10.0


# ---------------------------------------------- BER U-shape and turbo ordering
@pytest.mark.slow
def test_ber_u_shape_and_iteration_ordering():
    pdr_grid = list(range(0, 55, 5))
    rows = ber_curve(GRID, FILT, "zc", pdr_grid, trials=200, master_seed=0,
                     iterations=(1, 3, 5), nu_max=6000.0, workers=WORKERS)
    curve = {it: {} for it in (1, 3, 5)}
    se = {it: {} for it in (1, 3, 5)}
    for r in rows:
        curve[r["iterations"]][r["pdr_db"]] = r["ber"]
        se[r["iterations"]][r["pdr_db"]] = r["stderr"]
    final = np.array([curve[5][p] for p in pdr_grid])
    # interior minimum: weak pilots fail outright, overwhelming pilots leave
    # uncancelled residue
    i_min = int(np.argmin(final))
    assert 0 < i_min < len(pdr_grid) - 1
    assert final[0] > final[i_min] + 0.05
    assert final[-1] > final[i_min]
    # more turbo iterations never hurt, within one (combined) standard error
    for p in pdr_grid:
        for hi, lo in ((1, 3), (3, 5)):
            slack = np.hypot(se[hi][p], se[lo][p])
            assert curve[lo][p] <= curve[hi][p] + slack


# ---------------------------------------------------------- preamble detection
def test_preamble_detection_small_instance_bit_exact():
    small = DDGrid(5, 7, 30e3)
    filt = PulseShapingFilter(small, 0.0, 0.0)
    obs = build_observation_matrix((2, 3, 4, 6), small, filt, 0.0, 0.0)
    s = obs.group_size
    for i in range(4):
        for j in range(i + 1, 4):
            y = DDSignal(small, (obs.A[:, i * s] + 0.7 * obs.A[:, j * s])
                         .reshape(small.M, small.N))
            assert ost_detect(obs, y, 2, mode="blind-grouped") == (i, j)


@pytest.mark.slow
def test_preamble_detection_curve_ordering():
    trials = 200
    snr_grid = [-22, -20, -18, -16, -14, -12, -10]
    rows = missed_detection_curve(GRID, FILT, (3, 7, 23, 29, 41, 43, 47, 53),
                                  K=2, snr_grid=snr_grid, trials=trials,
                                  master_seed=5, tau_max=VEH_A_TAU_MAX,
                                  nu_max=815.0, workers=WORKERS)
    curve = {}
    for r in rows:
        curve.setdefault(r["mode"], []).append(r["miss_rate"])

    def se(p):
        return np.sqrt(max(p, 1.0 / trials) * (1 - min(p, 1 - 1.0 / trials)) / trials)

    def leq(a, b):
        return all(x <= y + np.hypot(se(x), se(y)) for x, y in zip(a, b))

    on, grp = curve["on-grid"], curve["blind-grouped"]
    ung, xam = curve["blind-ungrouped"], curve["cross-ambiguity"]
    assert leq(on, grp)
    assert leq(grp, ung)
    assert leq(grp, xam)
    # every detector improves with SNR
    for c in (on, grp, ung, xam):
        assert leq(c[1:], c[:-1])
    # the sparse-prior detectors clearly beat the plain correlator at high SNR
    assert grp[-1] < xam[-1]


# --------------------------------------------- randomized algebraic invariants
RNG = np.random.default_rng(99)
SMALL_GRIDS = [DDGrid(3, 5), DDGrid(5, 7), DDGrid(7, 9), DDGrid(4, 6)]


def _random_dd(grid, rng):
    v = rng.standard_normal((grid.M, grid.N)) + 1j * rng.standard_normal((grid.M, grid.N))
    return DDSignal(grid, v)


def _random_taps(rng, n=3):
    return {(int(rng.integers(-6, 7)), int(rng.integers(-6, 7))):
            complex(rng.standard_normal(), rng.standard_normal()) for _ in range(n)}


def test_randomized_zak_round_trip_and_unitarity():
    for _ in range(1000):
        grid = SMALL_GRIDS[int(RNG.integers(len(SMALL_GRIDS)))]
        x, y = _random_dd(grid, RNG), _random_dd(grid, RNG)
        xt, yt = inverse_zak_transform(x), inverse_zak_transform(y)
        assert np.max(np.abs(zak_transform(xt, grid).values - x.values)) < 1e-10
        assert abs(np.vdot(x.values, y.values) - np.vdot(xt.samples, yt.samples)) < 1e-10 \
            * max(1.0, abs(np.vdot(x.values, y.values)))


def test_randomized_quasi_periodicity():
    for _ in range(1000):
        grid = SMALL_GRIDS[int(RNG.integers(len(SMALL_GRIDS)))]
        x = _random_dd(grid, RNG)
        k, l = int(RNG.integers(grid.M)), int(RNG.integers(grid.N))
        n, m = int(RNG.integers(-5, 6)), int(RNG.integers(-5, 6))
        want = np.exp(2j * np.pi * n * l / grid.N) * x.values[k, l]
        assert abs(x.value(k + n * grid.M, l + m * grid.N) - want) < 1e-10


def test_randomized_twisted_convolution_laws():
    for _ in range(1000):
        grid = SMALL_GRIDS[int(RNG.integers(len(SMALL_GRIDS)))]
        a, b = _random_taps(RNG), _random_taps(RNG)
        x, y = _random_dd(grid, RNG), _random_dd(grid, RNG)
        # identity
        assert np.max(np.abs(twisted_convolve({(0, 0): 1.0}, x).values - x.values)) < 1e-10
        # associativity through filter composition
        lhs = twisted_convolve(twisted_compose(a, b, grid.MN), x)
        rhs = twisted_convolve(a, twisted_convolve(b, x))
        assert np.max(np.abs(lhs.values - rhs.values)) < 1e-10
        # linearity in the signal argument
        alpha = complex(RNG.standard_normal(), RNG.standard_normal())
        lin = twisted_convolve(a, DDSignal(grid, x.values + alpha * y.values))
        ref = twisted_convolve(a, x).values + alpha * twisted_convolve(a, y).values
        assert np.max(np.abs(lin.values - ref)) < 1e-10
