"""Grant-free access: which preambles are on the air?

Each active user picks a ZC preamble and transmits it through its own
doubly-dispersive channel.  The receiver correlates against a dictionary of
delay-Doppler translates of every preamble and sums the correlation energies
per preamble (One-Step Thresholding).  Exploiting the sparse multipath prior
this way beats simply peak-picking the cross-ambiguity, and comes close to a
detector that knows the true path delays.

Run:  python3 demos/preamble_detection.py      (a few minutes single-core)
"""
from zakotfs import DDGrid, PulseShapingFilter, missed_detection_curve

grid = DDGrid(31, 37, 30e3)
filt = PulseShapingFilter(grid)
roots = (3, 7, 23, 29, 41, 43, 47, 53)

rows = missed_detection_curve(
    grid, filt, roots, K=2, snr_grid=[-22, -18, -14, -10], trials=50,
    master_seed=5, tau_max=2.51e-6, nu_max=815.0,
)

curves = {}
for r in rows:
    curves.setdefault(r["mode"], []).append(r["miss_rate"])

print(f"{len(roots)} preambles, 2 active users, 50 trials per SNR\n")
print(f"{'detector':>18} | miss rate at SNR -22, -18, -14, -10 dB")
for mode in ("on-grid", "blind-grouped", "blind-ungrouped", "cross-ambiguity"):
    vals = "  ".join(f"{v:6.3f}" for v in curves[mode])
    print(f"{mode:>18} | {vals}")

print("\n'on-grid' knows the true path delays; 'blind-grouped' sums each")
print("preamble's energies over all delay-Doppler hypotheses and nearly")
print("matches it.  Peak-picking the cross-ambiguity ignores the multipath")
print("structure and pays for it at every SNR.")
