"""Theorem probe quantities on spheres of growing radius: s^2 |A|^2(base) = 2 s^2 / R^2."""
from curvlab.chart import builtin_surface
from curvlab.verify import theorem_probe

for R in (2.0, 5.0, 10.0, 50.0):
    rec = theorem_probe(builtin_surface("sphere", {"R": R}), (1.0, 1.0), 1.0)
    print(f"R={R:5g}  total_curv={rec.total_curv:.6g}  W1p*={rec.starred_W1p:.6g}  "
          f"W22*={rec.starred_W22:.6g}  s2A0={rec.s2A0:.6g}")
