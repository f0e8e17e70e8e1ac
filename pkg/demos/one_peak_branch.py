"""Follow the one-peak branch and watch the sup norm and energy drift toward
sqrt(e) and 2 pi e.  Takes about a minute for p in [10, 300]."""
import sys

import numpy as np

from peaklab import asymptotics as A
from peaklab.solver import continuation

p_end = float(sys.argv[1]) if len(sys.argv) > 1 else 300.0
branch = continuation(10.0, p_end, 1.1, m=1)

print(f"{'p':>8} {'linf':>12} {'p*int u^(p+1)':>15} {'mu_p':>10}")
for s in branch.records[::4] + [branch[-1]]:
    d = A.diagnostics(s)
    print(f"{s.p:8.2f} {d.linf:12.8f} {d.p_energy:15.8f} {d.mu_p:10.2e}")

last = branch.records[-10:]
x = [1 / s.p for s in last]
lin = np.polyfit(x, [A.linf(s) for s in last], 1)[1]
en = np.polyfit(x, [s.p * s.boundary_energy() for s in last], 1)[1]
print(f"extrapolated linf {lin:.5f}  (sqrt(e) = {np.sqrt(np.e):.5f})")
print(f"extrapolated energy {en:.4f}  (2 pi e = {2 * np.pi * np.e:.4f})")
