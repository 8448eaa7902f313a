"""Bracket the loss rate of the ternary squarer.

y_n = x_n^2 over {-1, 0, 1} merges -1 and 1, so with uniform iid inputs
the loss rate is log2(3) - H(1/3, 2/3) = 2/3 bit per symbol exactly.
The report must trap that value between its two certified sides, and the
worst-preimage bound (the pair {-1, 1}) is exactly one bit.
"""

import math

from infoloss import loss_rate_report, make_iid, plain_alphabet, squarer

src = make_iid(plain_alphabet((-1, 0, 1)), (1 / 3, 1 / 3, 1 / 3))
rep = loss_rate_report(src, squarer(), max_n=8, tolerance=1e-9)

print(f"input rate        {rep.input_rate:.9f} bits/symbol  (= log2 3)")
print(f"output bracket    [{rep.output_bracket.lower:.9f}, {rep.output_bracket.upper:.9f}]")
print(f"loss bracket      [{rep.loss_lower:.9f}, {rep.loss_upper:.9f}]")
print(f"closed form       {2 / 3:.9f}")
print(f"preimage bound    {rep.preimage_bound_bits} bits")
print(f"converged         {rep.converged} at block length {rep.output_bracket.block_length}")

assert rep.loss_lower - 1e-9 <= 2 / 3 <= rep.loss_upper + 1e-9
assert math.isclose(rep.input_rate, math.log2(3), abs_tol=1e-12)
print("ok: closed form sits inside the bracket")
