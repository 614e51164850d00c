"""Mean value and area identities on the unit sphere through the origin."""
import math

from curvlab import verify as V
from curvlab.chart import builtin_surface
from curvlab.geometry import ScalarField

sphere = builtin_surface("sphere", {"R": 1.0, "axis": "x", "center": [0.0, 0.0, 1.0]})
base = V.origin_param(sphere)
one = ScalarField.constant(1.0)

for rec in [V.check_mvp_integral(sphere, one, 0.3, 0.9), V.check_mvi(sphere, one),
            *V.check_area_identities(sphere, base, 1.0)]:
    print(f"{rec.verdict:<5} {rec.id:<18} lhs={rec.lhs:.10g} rhs={rec.rhs:.10g}")
print("cap area 2 pi (1 - cos 1) =", 2 * math.pi * (1 - math.cos(1.0)))
