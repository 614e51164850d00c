"""Norms of the counterexample graphs as eps shrinks, against the |log eps|^(-alpha) rate."""
import math

from curvlab.verify import counterexample_sweep

alpha = 0.3
sweep = counterexample_sweep(alpha, [1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
first = sweep.rows[0]
print(f"{'eps':>8} {'int|A|^2':>10} {'W12(H)':>10} {'|A|(0)':>10} {'rate^2':>8} {'rate':>8}")
for row in sweep.rows:
    rate = (math.log(first["eps"]) / math.log(row["eps"])) ** alpha
    print(f"{row['eps']:8.0e} {row['L2_A2']:10.5f} {row['W12_H']:10.5f} {row['A_at_origin']:10.7f}"
          f" {rate ** 2:8.4f} {rate:8.4f}")
for rec in sweep.records:
    print(rec.verdict, rec.id, rec.metadata)
