"""Rescale a one-peak solution around its maximum and compare with the
half-plane bubble U = log(4 / (t1^2 + (t2 + 2)^2))."""
import numpy as np

from peaklab import asymptotics as A
from peaklab.solver import continuation

branch = continuation(10.0, 120.0, 1.1, m=1)
for p in (20.0, 60.0, 120.0):
    s = branch.at(p)
    prof = A.rescaled_profile(s)
    print(f"p = {s.p:7.2f}  sup |z_p - U| = {prof.bubble_error:.3e}")

prof = A.rescaled_profile(branch[-1])
on_axis = prof.grid[:, 1] == 0
for (t1, _), z, u in zip(prof.grid[on_axis][::4], prof.z_values[on_axis][::4],
                         prof.bubble_values[on_axis][::4]):
    print(f"t1 = {t1:5.2f}  z = {z: .6f}  U = {u: .6f}")
