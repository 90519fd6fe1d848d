"""Monte Carlo experiment runners for the NMSE, BER and detection curves.

Trial RNGs derive from (master seed, sweep index, trial index) only, so the
ZC and chirp pilot runs see identical channel, data and noise realizations
(common random numbers) and their curves are directly comparable.
"""
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .channel import VEH_A_TAU_MAX, apply_channel, draw_veh_a, effective_channel
from .filters import PulseShapingFilter
from .grid import DDGrid
from .pilots import ChirpPilot, ZCPilot
from .receiver import (FramePlan, ReadoffRegion, default_readoff_region, estimate_channel,
                       nmse, qam4_random, transmit_frame, turbo_iterate)

ZC_ROOT = 11
CHIRP_SLOPE = 3
# Default root for the high-Doppler BER sweep.  The u=11 self-ambiguity line
# has Doppler spacing of only 11 bins per delay bin, below the ~20-bin
# read-off window a 6 kHz spread requires, so its taps alias structurally;
# u=23 keeps every other line point at least 23 Doppler bins away.
BER_ZC_ROOT = 23


def make_pilot(kind: str, grid: DDGrid, root=None):
    if kind == "zc":
        return ZCPilot(grid, ZC_ROOT if root is None else int(root))
    if kind == "chirp":
        return ChirpPilot(grid, CHIRP_SLOPE if root is None else int(root),
                          location=(grid.M // 2, grid.N // 2))
    raise ValueError(f"unknown pilot kind {kind!r}")


def common_region(grid: DDGrid, nu_max: float, tau_max: float = VEH_A_TAU_MAX) -> ReadoffRegion:
    """Largest read-off window valid for both pilot kinds (for fair parity)."""
    rz = default_readoff_region(make_pilot("zc", grid), tau_max, nu_max)
    rc = default_readoff_region(make_pilot("chirp", grid), tau_max, nu_max)
    return ReadoffRegion(max(rz.k_lo, rc.k_lo), min(rz.k_hi, rc.k_hi),
                         max(rz.l_lo, rc.l_lo), min(rz.l_hi, rc.l_hi),
                         aliased=rz.aliased or rc.aliased)


def _map_trials(worker, arglist, workers):
    """Run independent trials, optionally fanned out over processes."""
    if workers > 1:
        chunk = max(1, len(arglist) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(worker, arglist, chunksize=chunk))
    return [worker(a) for a in arglist]


def _nmse_worker(args):
    pilot, region, grid, filt, pdr_db, rho_d_db, nu_max, seed = args
    return nmse_trial(pilot, region, grid, filt, pdr_db, rho_d_db, nu_max,
                      np.random.default_rng(seed))


def nmse_trial(pilot, region, grid, filt, pdr_db, rho_d_db, nu_max, rng):
    """One joint pilot+data frame; returns the channel-estimation NMSE."""
    phy = draw_veh_a(rng, nu_max)
    h = effective_channel(phy, filt, grid)
    plan = FramePlan(pilot, qam4_random(rng, (grid.M, grid.N)),
                     data_snr_db=rho_d_db, pdr_db=pdr_db)
    y = apply_channel(transmit_frame(plan), h, plan.noise_variance, rng)
    est = estimate_channel(y, pilot, plan.pilot_energy, region, strict=False)
    return nmse(est.taps, h.taps)


def nmse_curve(grid: DDGrid, filt: PulseShapingFilter, pilot_kind: str, pdr_grid,
               trials: int, master_seed: int, nu_max: float = 815.0,
               rho_d_db: float = 25.0, tau_max: float = VEH_A_TAU_MAX,
               workers: int = 1, progress=None):
    """Mean NMSE (dB) versus PDR for one pilot kind."""
    pilot = make_pilot(pilot_kind, grid)
    region = common_region(grid, nu_max, tau_max)
    rows = []
    for pi, pdr_db in enumerate(pdr_grid):
        args = [(pilot, region, grid, filt, pdr_db, rho_d_db, nu_max,
                 [master_seed, pi, t]) for t in range(trials)]
        vals = _map_trials(_nmse_worker, args, workers)
        rows.append({"pdr_db": float(pdr_db), "pilot": pilot_kind,
                     "nmse_db": float(10 * np.log10(np.mean(vals))),
                     "trials": trials})
        if progress:
            progress(f"nmse {pilot_kind} pdr={pdr_db} done")
    return rows


def _ber_worker(args):
    pilot, region, grid, filt, pdr_db, rho_d_db, nu_max, iterations, seed = args
    return ber_trial(pilot, region, grid, filt, pdr_db, rho_d_db, nu_max,
                     iterations, np.random.default_rng(seed))


def ber_trial(pilot, region, grid, filt, pdr_db, rho_d_db, nu_max, iterations, rng):
    """One frame through the turbo receiver; returns BER per recorded iteration."""
    phy = draw_veh_a(rng, nu_max)
    h = effective_channel(phy, filt, grid)
    plan = FramePlan(pilot, qam4_random(rng, (grid.M, grid.N)),
                     data_snr_db=rho_d_db, pdr_db=pdr_db)
    y = apply_channel(transmit_frame(plan), h, plan.noise_variance, rng)
    hist = turbo_iterate(y, plan, max(iterations), region, truth=h)
    return {it: hist[it - 1]["ber"] for it in iterations}


def ber_curve(grid: DDGrid, filt: PulseShapingFilter, pilot_kind: str, pdr_grid,
              trials: int, master_seed: int, iterations=(1, 3, 5),
              nu_max: float = 6000.0, rho_d_db: float = 25.0,
              tau_max: float = VEH_A_TAU_MAX, root=None, workers: int = 1,
              progress=None):
    """Mean BER and standard error versus PDR, per turbo iteration count.

    The read-off window uses lean margins: every extra window tap is pure
    estimation noise that the LMMSE stage then eats as model error.
    """
    if root is None and pilot_kind == "zc":
        root = BER_ZC_ROOT
    pilot = make_pilot(pilot_kind, grid, root)
    region = default_readoff_region(pilot, tau_max, nu_max, k_margin=2, l_margin=2)
    iterations = tuple(sorted(iterations))
    rows = []
    for pi, pdr_db in enumerate(pdr_grid):
        args = [(pilot, region, grid, filt, pdr_db, rho_d_db, nu_max, iterations,
                 [master_seed, pi, t]) for t in range(trials)]
        acc = {it: [] for it in iterations}
        for res in _map_trials(_ber_worker, args, workers):
            for it in iterations:
                acc[it].append(res[it])
        for it in iterations:
            v = np.asarray(acc[it])
            rows.append({"pdr_db": float(pdr_db), "iterations": it, "pilot": pilot_kind,
                         "ber": float(v.mean()),
                         "stderr": float(v.std(ddof=1) / np.sqrt(len(v))) if len(v) > 1 else 0.0,
                         "trials": trials})
        if progress:
            progress(f"ber {pilot_kind} pdr={pdr_db} done")
    return rows
