"""Configuration-driven experiment runner.

Subcommands compute pilot diagnostics (ambiguity surfaces, PAPR) and the
Monte Carlo curves (NMSE, BER, preamble missed detection) as CSV tables with
a JSON metadata sidecar.  Progress goes to stderr, results only to the
output file; runs are deterministic given (config, seed).
"""
import argparse
import copy
import csv
import json
import math
import os
import sys

import numpy as np
import yaml

from . import __version__
from .ambiguity import cross_ambiguity, self_ambiguity
from .channel import VEH_A_TAU_MAX
from .experiments import ber_curve, make_pilot, nmse_curve
from .filters import PulseShapingFilter, synthesize_waveform
from .grid import DDGrid
from .pilots import PointPilot, point_pilot_signal
from .rach import missed_detection_curve
from .receiver import pilot_signal
from .transforms import papr

THREADS_ENV = "ZAKOTFS_THREADS"

DEFAULTS = {
    "grid": {"M": 31, "N": 37, "nu_p": 30000.0},
    "filter": {"beta_tau": 0.6, "beta_nu": 0.6},
    "channel": {"model": "veh-a", "nu_max": 815.0, "tau_max": VEH_A_TAU_MAX},
    "pilot": {"kind": "zc", "root": 11, "slope": 3},
    "pilot_b": {"kind": "zc", "root": 13, "slope": 3},
    "ambiguity": {"mode": "self", "nonzero_only": True, "threshold": 1e-9},
    "papr": {"oversample": 4, "kinds": ["point", "zc", "chirp"],
             "zc_root": 23, "chirp_slope": 3},
    "nmse": {"pdr_grid": [0, 5, 10, 15, 20, 25, 30, 35, 40],
             "rho_d_db": 25.0, "kinds": ["zc", "chirp"]},
    "ber": {"pdr_grid": [0, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50],
            "rho_d_db": 25.0, "iterations": [1, 3, 5], "kind": "zc", "root": None},
    "rach": {"K": 2, "num_preambles": 8, "roots": None,
             "snr_grid": [-22, -20, -18, -16, -14, -12, -10],
             "modes": ["on-grid", "blind-grouped", "blind-ungrouped", "cross-ambiguity"]},
    "trials": 100,
    "seed": 0,
    "out": "results.csv",
}


class ConfigError(ValueError):
    pass


def _merge(defaults, override, path=""):
    """Merge a user config over the defaults, rejecting unknown keys."""
    out = copy.deepcopy(defaults)
    for key, val in override.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(defaults[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {path + key!r} must be a mapping")
            out[key] = _merge(defaults[key], val, path + key + ".")
        else:
            out[key] = val
    return out


def load_config(path=None, seed=None, trials=None, out=None):
    user = {}
    if path is not None:
        with open(path) as fh:
            user = yaml.safe_load(fh) or {}
        if not isinstance(user, dict):
            raise ConfigError("config root must be a mapping")
    cfg = _merge(DEFAULTS, user)
    if seed is not None:
        cfg["seed"] = seed
    if trials is not None:
        cfg["trials"] = trials
    if out is not None:
        cfg["out"] = out
    if cfg["channel"]["model"] != "veh-a":
        raise ConfigError(f"unsupported channel model {cfg['channel']['model']!r}")
    return cfg


def _grid(cfg):
    g = cfg["grid"]
    return DDGrid(int(g["M"]), int(g["N"]), float(g["nu_p"]))


def _filter(cfg, grid):
    f = cfg["filter"]
    return PulseShapingFilter(grid, beta_tau=float(f["beta_tau"]),
                              beta_nu=float(f["beta_nu"]))


def _workers():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1")
    return n


def _progress(msg):
    print(msg, file=sys.stderr)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _write_metadata(cfg, command, extra=None):
    meta = {"command": command, "version": __version__, "config": cfg}
    if extra:
        meta.update(extra)
    with open(cfg["out"] + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _pilot_from(section, grid):
    kind = section["kind"]
    root = section["root"] if kind == "zc" else section["slope"]
    return make_pilot(kind, grid, root)


def cmd_ambiguity(cfg):
    grid = _grid(cfg)
    amb = cfg["ambiguity"]
    xa = pilot_signal(_pilot_from(cfg["pilot"], grid))
    if amb["mode"] == "self":
        A = self_ambiguity(xa)
    elif amb["mode"] == "cross":
        A = cross_ambiguity(xa, pilot_signal(_pilot_from(cfg["pilot_b"], grid)))
    else:
        raise ConfigError(f"ambiguity mode must be self or cross, got {amb['mode']!r}")
    mags = np.abs(A.values)
    rows = []
    for k in range(grid.MN):
        for l in range(grid.MN):
            if amb["nonzero_only"] and mags[k, l] <= amb["threshold"]:
                continue
            rows.append((k, l, float(mags[k, l])))
    _write_csv(cfg["out"], ("k", "l", "magnitude"), rows)
    _write_metadata(cfg, "ambiguity")


def cmd_papr(cfg):
    grid = _grid(cfg)
    filt = _filter(cfg, grid)
    p = cfg["papr"]
    rows = []
    for kind in p["kinds"]:
        if kind == "point":
            dd = point_pilot_signal(PointPilot(grid, grid.M // 2, grid.N // 2))
        elif kind == "zc":
            dd = pilot_signal(make_pilot("zc", grid, p["zc_root"]))
        elif kind == "chirp":
            dd = pilot_signal(make_pilot("chirp", grid, p["chirp_slope"]))
        else:
            raise ConfigError(f"unknown papr pilot kind {kind!r}")
        td = synthesize_waveform(dd, filt, Q=int(p["oversample"]))
        rows.append((kind, float(papr(td))))
        _progress(f"papr {kind} done")
    _write_csv(cfg["out"], ("pilot", "papr_db"), rows)
    _write_metadata(cfg, "papr")


def cmd_nmse(cfg):
    grid = _grid(cfg)
    filt = _filter(cfg, grid)
    n = cfg["nmse"]
    rows = []
    for kind in n["kinds"]:
        rows += nmse_curve(grid, filt, kind, n["pdr_grid"], int(cfg["trials"]),
                           int(cfg["seed"]), nu_max=float(cfg["channel"]["nu_max"]),
                           rho_d_db=float(n["rho_d_db"]),
                           tau_max=float(cfg["channel"]["tau_max"]),
                           workers=_workers(), progress=_progress)
    _write_csv(cfg["out"], ("pdr_db", "nmse_db", "pilot", "trials"),
               [(r["pdr_db"], r["nmse_db"], r["pilot"], r["trials"]) for r in rows])
    _write_metadata(cfg, "nmse")


def cmd_ber(cfg):
    grid = _grid(cfg)
    filt = _filter(cfg, grid)
    b = cfg["ber"]
    rows = ber_curve(grid, filt, b["kind"], b["pdr_grid"], int(cfg["trials"]),
                     int(cfg["seed"]), iterations=tuple(b["iterations"]),
                     nu_max=float(cfg["channel"]["nu_max"]),
                     rho_d_db=float(b["rho_d_db"]),
                     tau_max=float(cfg["channel"]["tau_max"]),
                     root=b["root"], workers=_workers(), progress=_progress)
    _write_csv(cfg["out"], ("pdr_db", "ber", "iterations", "stderr", "pilot", "trials"),
               [(r["pdr_db"], r["ber"], r["iterations"], r["stderr"], r["pilot"],
                 r["trials"]) for r in rows])
    _write_metadata(cfg, "ber")


def _pick_roots(grid, count, seed):
    """Deterministic draw of ZC roots coprime to MN."""
    candidates = [u for u in range(2, grid.MN - 1) if math.gcd(u, grid.MN) == 1]
    if count > len(candidates):
        raise ConfigError("more preambles requested than coprime roots available")
    rng = np.random.default_rng([int(seed), 0x5eed])
    return tuple(int(u) for u in rng.choice(candidates, size=count, replace=False))


def cmd_rach(cfg):
    grid = _grid(cfg)
    filt = _filter(cfg, grid)
    r = cfg["rach"]
    roots = r["roots"]
    if roots is None:
        roots = _pick_roots(grid, int(r["num_preambles"]), cfg["seed"])
    roots = tuple(int(u) for u in roots)
    rows = missed_detection_curve(grid, filt, roots, int(r["K"]), r["snr_grid"],
                                  int(cfg["trials"]), int(cfg["seed"]),
                                  tau_max=float(cfg["channel"]["tau_max"]),
                                  nu_max=float(cfg["channel"]["nu_max"]),
                                  modes=tuple(r["modes"]),
                                  workers=_workers(), progress=_progress)
    _write_csv(cfg["out"], ("snr_db", "miss_rate", "detector", "trials"),
               [(row["snr_db"], row["miss_rate"], row["mode"], cfg["trials"])
                for row in rows])
    _write_metadata(cfg, "rach", extra={"roots": list(roots)})


COMMANDS = {
    "ambiguity": cmd_ambiguity,
    "papr": cmd_papr,
    "nmse": cmd_nmse,
    "ber": cmd_ber,
    "rach": cmd_rach,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="zakotfs",
                                 description="Zak-OTFS spread-pilot experiment runner")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=str, default=None, help="YAML config path")
        sp.add_argument("--seed", type=int, default=None, help="master seed override")
        sp.add_argument("--out", type=str, default=None, help="output CSV path")
        sp.add_argument("--trials", type=int, default=None, help="trial count override")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.seed, args.trials, args.out)
        COMMANDS[args.command](cfg)
    except (ConfigError, ValueError, OSError, yaml.YAMLError) as exc:
        print(f"zakotfs {args.command}: {exc}", file=sys.stderr)
        return 2
    _progress(f"wrote {cfg['out']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
