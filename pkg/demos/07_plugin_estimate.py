"""Plug-in loss estimate from sampled paths only.

No model access: draw one long input path, push it through the system,
count k-blocks on both sides and difference the empirical block
entropies.  The xor filter is lossless, so the estimate must hover
near zero; the squarer must hover near its exact 2/3 bit.
"""

from infoloss import (
    make_iid,
    mod_ring,
    plain_alphabet,
    plugin_estimate,
    sample_path,
    simulate,
    squarer,
    xor_filter,
)

bits = mod_ring(2)
src = make_iid(bits, (0.5, 0.5))
x = sample_path(src, 200_000, seed=1)
y = simulate(xor_filter(), x)
print("xor filter, 200k samples (exact loss rate: 0)")
for block in (1, 2, 4, 8):
    est = plugin_estimate(x, y, block=block, x_alphabet=bits, y_alphabet=bits)
    print(f"  block {block}:  loss ~ {est.loss:+.5f}   low coverage: {est.low_coverage}")

t = plain_alphabet((-1, 0, 1))
src3 = make_iid(t, (1 / 3, 1 / 3, 1 / 3))
x3 = sample_path(src3, 200_000, seed=2)
y3 = simulate(squarer(), x3)
print("squarer, 200k samples (exact loss rate: 2/3)")
for block in (1, 2, 4):
    est = plugin_estimate(x3, y3, block=block)
    print(f"  block {block}:  loss ~ {est.loss:+.5f}")
