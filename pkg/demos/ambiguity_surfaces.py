"""Why Zadoff-Chu spread pilots make good sensing signals.

The self-ambiguity of a ZC pilot with root u lives on a single discrete line
l = -u k (mod MN): a delay shift of one bin moves the correlation peak u
Doppler bins away.  Between two ZC pilots with suitable distinct roots the
cross-ambiguity is perfectly flat at 1/sqrt(MN), so simultaneous preambles
barely interfere.  Both facts are exact algebra, not asymptotics -- and the
flatness genuinely breaks when the grid loses the odd-coprime structure.

Run:  python3 demos/ambiguity_surfaces.py
"""
import numpy as np

from zakotfs import (DDGrid, ZCPilot, cross_ambiguity, self_ambiguity, zc_dd_signal,
                     zc_pilot_signal)

# --- the self-ambiguity line -------------------------------------------------
grid = DDGrid(31, 37)
for u in (11, 23):
    A = np.abs(self_ambiguity(zc_pilot_signal(ZCPilot(grid, u))).values)
    on_line = A > 0.5
    ks, ls = np.nonzero(on_line)
    print(f"root u={u}: {on_line.sum()} support points out of {grid.MN**2}")
    print(f"  all satisfy l = -{u}k mod {grid.MN}: "
          f"{bool(np.all((ls + u * ks) % grid.MN == 0))}")
    print(f"  on-line magnitude: {A[on_line].min():.9f} .. {A[on_line].max():.9f}")
    print(f"  largest off-line magnitude: {A[~on_line].max():.2e}\n")

# --- flat cross-ambiguity on an odd-coprime grid -----------------------------
g = DDGrid(35, 39)
A = np.abs(cross_ambiguity(zc_dd_signal(11, g), zc_dd_signal(13, g)).values)
print(f"cross-ambiguity, roots (11, 13) on 35 x 39:")
print(f"  min={A.min():.6f}, max={A.max():.6f}, 1/sqrt(MN)={1/np.sqrt(g.MN):.6f}")

# --- ... which an even delay dimension destroys ------------------------------
g_even = DDGrid(32, 37)
A = np.abs(cross_ambiguity(zc_dd_signal(11, g_even), zc_dd_signal(13, g_even)).values)
print(f"\nsame roots on 32 x 37 (even M):")
print(f"  max={A.max():.6f} vs flat level {1/np.sqrt(g_even.MN):.6f} "
      f"({A.max() * np.sqrt(g_even.MN):.1f}x the flat level)")
