"""Two structural identities checked on a random draw.

First: for any finite-memory deterministic system, the joint block
entropy H(X_1^n, Y_1^n) stops depending on n's worth of outputs once
n exceeds the memory; only the first max(M, N) outputs carry anything
the inputs do not already determine.  Second: the output rate can
never exceed the input rate (processing destroys, never creates).
"""

import numpy as np

from infoloss import (
    determinism_identity,
    loss_rate_report,
    plain_alphabet,
    random_source,
    random_table_system,
    source_entropy_rate,
)

rng = np.random.default_rng(7)
ax = plain_alphabet((0, 1, 2))
ay = plain_alphabet((0, 1))
src = random_source(ax, rng)
sys_ = random_table_system(ax, ay, 2, 1, rng)
m = max(sys_.N, sys_.M)

print(f"random system: N={sys_.N}, M={sys_.M}, memory horizon m={m}")
for n in range(m + 1, 9):
    got = determinism_identity(src, sys_, n)
    print(f"  n={n}:  H(X^n,Y^n) = {got['lhs']:.12f}   H(X^n,Y^m) = {got['rhs']:.12f}"
          f"   gap = {abs(got['lhs'] - got['rhs']):.2e}")

rep = loss_rate_report(src, sys_, max_n=10)
hx = source_entropy_rate(src)
print(f"input rate  {hx:.6f} bits/symbol")
print(f"output rate in [{rep.output_bracket.lower:.6f}, {rep.output_bracket.upper:.6f}]")
assert rep.output_bracket.lower <= hx + 1e-9
print("ok: output rate bounded by input rate")
