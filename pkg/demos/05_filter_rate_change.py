"""Differential rate change of real-coefficient rational filters.

For a stable filter the change in differential entropy rate equals the
average of ln|G| over the unit circle, which collapses to a sum over
the zeros outside the circle (plus ln of the leading coefficient).
Both routes are computed independently; they must agree to well under
1e-6 nats.  Minimum-phase filters change nothing.
"""

import math

import numpy as np

from infoloss import (
    TransferFunction,
    is_minimum_phase,
    random_stable_filter,
    rate_change_integral,
    rate_change_roots,
)

tf = TransferFunction((1.0, -2.0))
print("G(z) = 1 - 2 z^-1")
print(f"  root formula     {rate_change_roots(tf):.9f} nats")
print(f"  circle average   {rate_change_integral(tf):.9f} nats")
print(f"  ln 2           = {math.log(2):.9f}")
print(f"  minimum phase: {is_minimum_phase(tf)}")
print()

rng = np.random.default_rng(11)
for _ in range(5):
    tf = random_stable_filter(rng, max_degree=4, margin=0.1)
    r, i = rate_change_roots(tf), rate_change_integral(tf)
    print(f"b={np.round(tf.b, 3)} a={np.round(tf.a, 3)}")
    print(f"  roots {r:+.9f}   integral {i:+.9f}   gap {abs(r - i):.2e}"
          f"   min-phase {is_minimum_phase(tf)}")
