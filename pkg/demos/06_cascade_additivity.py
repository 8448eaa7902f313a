"""Loss rates add across a two-stage cascade.

Stage 1 is the xor filter (lossless); stage 2 is a static AND with the
previous stage-1 output (lossy).  The loss bracket of the composed
system must overlap the sum of the per-stage brackets, stage 2 measured
against stage 1's output process.
"""

from infoloss import TableSystem, cascade, loss_rate_report, make_iid, mod_ring, xor_filter
from infoloss.experiments import check_cascade_additivity

bits = mod_ring(2)
src = make_iid(bits, (0.5, 0.5))
first = xor_filter()
# y_n = x_n AND y_{n-1}: table indexed by (y_prev, x)
second = TableSystem(bits, bits, 0, 1, [0, 0, 0, 1])

out = check_cascade_additivity(src, first, second, max_n=10)
c, s1, s2, tot = (out["cascade_bracket"], out["stage1_bracket"],
                  out["stage2_bracket"], out["sum_bracket"])
print(f"stage 1 loss   [{s1[0]:.6f}, {s1[1]:.6f}]   (xor: lossless)")
print(f"stage 2 loss   [{s2[0]:.6f}, {s2[1]:.6f}]")
print(f"stage sum      [{tot[0]:.6f}, {tot[1]:.6f}]")
print(f"cascade loss   [{c[0]:.6f}, {c[1]:.6f}]")
print(f"overlap: {out['overlap']}")

composed = cascade(first, second)
print(f"composed system: N={composed.N}, M={composed.M}, "
      f"kind={type(composed).__name__}")
rep = loss_rate_report(src, composed, max_n=10)
print(f"direct report agrees: [{rep.loss_lower:.6f}, {rep.loss_upper:.6f}]")
