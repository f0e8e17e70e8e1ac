"""Two- and three-peak branches: locate the peaks, read off the weights and
check that the peak positions balance the interaction energy phi_m."""
import numpy as np

from peaklab import asymptotics as A
from peaklab.phim import check_solver_peaks, find_critical, perturbed
from peaklab.solver import continuation

for m in (2, 3):
    branch = continuation(10.0, 60.0, 1.2, m=m)
    s = branch[-1]
    peaks = A.detect_peaks(s)
    w = A.weights(s, peaks)
    rep = check_solver_peaks(branch)
    print(f"m = {m}, p = {s.p:.1f}: angles {np.round(peaks.angles, 10)}")
    print("  weights " + " ".join(f"{e.a_mass:.8f}" for e in w)
          + f"  balance residual {rep.residual:.1e}")
    res = find_critical(perturbed(m, 0.1, seed=1))
    print(f"  phi_{m} optimizer: {res.iterations} steps, separations "
          + " ".join(f"{x:.10f}" for x in res.config.separations()))
