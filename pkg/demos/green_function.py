"""Boundary Green function of Delta G = G on the unit disk: values, the
log / regular split and the (constant) Robin function."""
import numpy as np

from peaklab.geometry import boundary_point
from peaklab.greenkernel import boundary_table, kernel, regular_part, robin

kern = kernel()
print(f"Robin constant H(y, y) = {robin():.16f}")
for t in (0.0, 1.0, 2.5):
    print(f"  at theta = {t}: {regular_part(boundary_point(t), t):.16f}")

theta, _, G, H, _ = boundary_table(0.0, 12)
for t, g, h in zip(theta[1:], G[1:], H[1:]):
    print(f"theta = {t:6.4f}  G = {g: .12f}  H = {h: .12f}  -(1/pi) log|x-y| = {g - h: .12f}")
