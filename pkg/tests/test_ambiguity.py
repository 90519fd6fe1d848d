"""Ambiguity surfaces: defining-sum agreement, pilot support structure."""
import numpy as np

from zakotfs import (ChirpPilot, DDGrid, DDSignal, ZCPilot, ambiguity_patch,
                     chirp_pilot_signal, chirp_self_ambiguity_support, cross_ambiguity,
                     self_ambiguity, zc_dd_signal, zc_pilot_signal,
                     zc_self_ambiguity_support)


def _random_dd(grid, rng):
    v = rng.standard_normal((grid.M, grid.N)) + 1j * rng.standard_normal((grid.M, grid.N))
    return DDSignal(grid, v)


def _reference_ambiguity(x, y, k, l):
    """Defining DD-domain sum, evaluated directly through the accessor."""
    g = x.grid
    kk = np.arange(g.M)[:, None]
    ll = np.arange(g.N)[None, :]
    return np.sum(x.values * np.conj(y.value(kk - k, ll - l))
                  * np.exp(-2j * np.pi * l * (kk - k) / g.MN))


def test_cross_ambiguity_matches_defining_sum():
    g = DDGrid(3, 5)
    rng = np.random.default_rng(13)
    x, y = _random_dd(g, rng), _random_dd(g, rng)
    A = cross_ambiguity(x, y).values
    for k in range(g.MN):
        for l in range(0, g.MN, 3):
            assert abs(A[k, l] - _reference_ambiguity(x, y, k, l)) < 1e-10


def test_self_ambiguity_origin_is_energy():
    g = DDGrid(5, 7)
    x = _random_dd(g, np.random.default_rng(14))
    A = self_ambiguity(x).values
    assert abs(A[0, 0] - x.energy) < 1e-10
    # the origin dominates every other shift for any signal
    assert np.abs(A).max() <= abs(A[0, 0]) + 1e-10


def test_zc_self_ambiguity_line():
    g = DDGrid(31, 37)
    x = zc_pilot_signal(ZCPilot(g, 11))
    A = np.abs(self_ambiguity(x).values)
    # shift by one delay bin: the sole support point sits 11 Doppler bins down
    row = A[1]
    peak = int(np.argmax(row))
    assert peak == (1147 - 11) % 1147
    assert abs(row[peak] - 1.0) < 1e-9
    row[peak] = 0.0
    assert row.max() < 1e-9


def test_cross_ambiguity_flat_for_distinct_roots():
    # flatness needs the root difference coprime to MN; the Zak-domain image
    # accepts roots that share a factor with MN (13 | 1365)
    g = DDGrid(35, 39)
    A = cross_ambiguity(zc_dd_signal(11, g), zc_dd_signal(13, g)).values
    assert np.allclose(np.abs(A), 1 / np.sqrt(g.MN), atol=1e-9)


def test_chirp_self_ambiguity_support_matches_mask():
    g = DDGrid(31, 37)
    c = ChirpPilot(g, 3)
    A = np.abs(self_ambiguity(chirp_pilot_signal(c)).values)
    kk = np.arange(g.MN)[:, None]
    ll = np.arange(g.MN)[None, :]
    mask = chirp_self_ambiguity_support(c, kk, ll)
    assert np.all(A[mask] > 1.0 - 1e-9)
    assert A[~mask].max() < 1e-9


def test_ambiguity_patch_matches_full_surface():
    g = DDGrid(5, 7)
    rng = np.random.default_rng(15)
    x, y = _random_dd(g, rng), _random_dd(g, rng)
    A = cross_ambiguity(x, y).values
    patch = ambiguity_patch(x, y, range(-3, 4), range(-6, 7))
    for (k, l), v in patch.items():
        assert abs(v - A[k % g.MN, l % g.MN]) < 1e-10


def test_zc_support_predicate_agrees_with_surface():
    g = DDGrid(31, 37)
    u = 23
    A = np.abs(self_ambiguity(zc_pilot_signal(ZCPilot(g, u))).values)
    kk = np.arange(g.MN)[:, None]
    ll = np.arange(g.MN)[None, :]
    mask = zc_self_ambiguity_support(u, g, kk, ll)
    assert np.all(A[mask] > 1.0 - 1e-9)
    assert A[~mask].max() < 1e-9
