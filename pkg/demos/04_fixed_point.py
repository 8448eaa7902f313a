"""Quantized fixed-point filters on Z_8: lossless vs lossy taps.

A recursive filter with fractional taps, truncated either after each
multiply or after the accumulate, stays losslessly invertible as long
as the leading tap is a unit.  Scale the leading tap by 2 and half of
each input bit pattern collapses: the loss jumps to a full bit.
"""

from fractions import Fraction

from infoloss import (
    FilterCoeffs,
    check_partial_invertibility,
    fixed_point_filter,
    loss_rate_report,
    make_iid,
    mod_ring,
)

alpha = mod_ring(8)
src = make_iid(alpha, [1 / 8] * 8)
half, quarter = Fraction(1, 2), Fraction(1, 4)

for b, a, tag in [
    ((1, half, quarter), (half,), "unit leading tap"),
    ((2, half), (), "leading tap 2 (merges x and x+4)"),
]:
    for placement in ("after-multiply", "after-accumulate"):
        sys_ = fixed_point_filter(alpha, FilterCoeffs(b, a), placement)
        verdict = check_partial_invertibility(sys_)
        rep = loss_rate_report(src, sys_, max_n=12)
        print(f"b={b} a={a}  quantize {placement:<16}  [{tag}]")
        print(f"  invertible: {verdict.invertible}   "
              f"loss in [{rep.loss_lower:.6f}, {rep.loss_upper:.6f}]   "
              f"bound {rep.preimage_bound_bits}")
    print()
