import math

import numpy as np
import pytest

from infoloss import (
    NumericError,
    ResourceLimitError,
    ValidationError,
    build_joint_chain,
    determinism_identity,
    exact_block_entropy,
    finite_length_loss,
    loss_rate_report,
    make_iid,
    make_markov,
    mod_ring,
    output_rate_bracket,
    plain_alphabet,
    plugin_estimate,
    random_source,
    random_table_system,
    random_invertible_system,
    sample_path,
    simulate,
    source_entropy_rate,
)
from infoloss.zoo import multiplier_system, squarer, xor_filter

from oracles import (
    entropy_bits,
    oracle_block_entropies,
    oracle_stationary,
    oracle_tagged_output_dist,
)

BITS = plain_alphabet((0, 1))


def _random_pair(rng):
    qx = int(rng.integers(2, 4))
    qy = int(rng.integers(2, 4))
    alpha = plain_alphabet(tuple(range(qx)))
    beta = plain_alphabet(tuple(range(qy)))
    src = random_source(alpha, rng)
    sys_ = random_table_system(alpha, beta, int(rng.integers(0, 3)),
                               int(rng.integers(0, 3)), rng)
    return src, sys_


def test_block_entropies_match_exhaustive_oracle():
    rng = np.random.default_rng(11)
    for _ in range(25):
        src, sys_ = _random_pair(rng)
        chain = build_joint_chain(src, sys_)
        n = int(rng.integers(1, 4))
        want = oracle_block_entropies(src, sys_, n)
        for which in ("x", "y", "xy"):
            got = exact_block_entropy(chain, n, which)
            assert got == pytest.approx(want[which], abs=1e-9), (which, n)


def test_input_block_entropy_is_source_block_entropy():
    # the x-marginal never sees the system, so any system gives the same H
    src = make_markov(BITS, [[0.9, 0.1], [0.2, 0.8]])
    c1 = build_joint_chain(src, xor_filter())
    c2 = build_joint_chain(src, multiplier_system(plain_alphabet((0, 1))))
    for n in (1, 2, 3, 4):
        assert exact_block_entropy(c1, n, "x") == pytest.approx(
            exact_block_entropy(c2, n, "x"), abs=1e-12)


def test_joint_chain_stationary_and_emissions():
    rng = np.random.default_rng(23)
    for _ in range(10):
        src, sys_ = _random_pair(rng)
        chain = build_joint_chain(src, sys_)
        mu = chain.stationary
        assert mu.min() >= 0.0
        assert mu.sum() == pytest.approx(1.0, abs=1e-12)
        resid = np.abs(chain.transition.T @ mu - mu).sum()
        assert resid < 1e-9
        chain.validate()


def test_joint_chain_matches_oracle_state_for_state():
    rng = np.random.default_rng(29)
    for _ in range(8):
        src, sys_ = _random_pair(rng)
        states, trans, mu = oracle_stationary(src, sys_)
        chain = build_joint_chain(src, sys_)
        # the oracle BFS finds exactly the engine's live support
        live = {i for i in range(chain.n_states) if chain.stationary[i] > 0}
        key_of = {}
        for i in range(chain.n_states):
            xprev, init = chain.state(i)
            key_of[i] = (src.alphabet.index(xprev), _as_tuple(init))
        oracle_index = {(xp, buf): k for k, (xp, buf) in enumerate(states)}
        for i in live:
            assert key_of[i] in oracle_index
            assert chain.stationary[i] == pytest.approx(
                mu[oracle_index[key_of[i]]], abs=1e-9)


def _as_tuple(init):
    if isinstance(init, tuple):
        return tuple(_as_tuple(s) for s in init)
    return (tuple(init.recent_inputs), tuple(init.recent_outputs))


def test_bracket_sides_match_oracle_conditionals():
    rng = np.random.default_rng(37)
    for _ in range(6):
        src, sys_ = _random_pair(rng)
        chain = build_joint_chain(src, sys_)
        br = output_rate_bracket(chain, max_n=3, tolerance=0.0)
        hy = [oracle_block_entropies(src, sys_, t)["y"] for t in (1, 2, 3)]
        hy_prev = [0.0] + hy[:-1]
        states, trans, mu = oracle_stationary(src, sys_)
        hs0 = entropy_bits([p for p in mu if p > 0])
        hys = [entropy_bits(oracle_tagged_output_dist(src, sys_, t)) for t in (1, 2, 3)]
        hys_prev = [hs0] + hys[:-1]
        for t in range(3):
            assert br.upper_history[t] == pytest.approx(hy[t] - hy_prev[t], abs=1e-9)
            assert br.lower_history[t] == pytest.approx(hys[t] - hys_prev[t], abs=1e-9)


def test_bracket_is_a_monotone_envelope():
    rng = np.random.default_rng(41)
    for _ in range(15):
        src, sys_ = _random_pair(rng)
        chain = build_joint_chain(src, sys_)
        br = output_rate_bracket(chain, max_n=6, tolerance=1e-6)
        assert br.lower <= br.upper + 1e-12
        ups, los = br.upper_history, br.lower_history
        assert all(ups[i + 1] <= ups[i] + 1e-12 for i in range(len(ups) - 1))
        assert all(los[i + 1] >= los[i] - 1e-12 for i in range(len(los) - 1))
        assert br.block_length == len(ups)
        assert br.converged == ((ups[-1] - los[-1]) <= 1e-6)
        assert br.pruned_mass <= 1e-12
        # data processing: the output rate never beats the input rate
        assert br.lower <= source_entropy_rate(src) + 1e-9


def test_loss_report_invariants():
    rng = np.random.default_rng(53)
    for _ in range(12):
        src, sys_ = _random_pair(rng)
        r = loss_rate_report(src, sys_, max_n=8)
        assert 0.0 <= r.loss_lower <= r.loss_upper <= r.preimage_bound_bits + 1e-12
        assert r.loss_bracket == (r.loss_lower, r.loss_upper)
        assert r.input_rate == pytest.approx(source_entropy_rate(src), abs=1e-12)
        assert (r.preimage_bound_bits == 0.0) == r.invertible
        if r.invertible:
            assert r.loss_lower <= 1e-12
        assert r.converged == r.output_bracket.converged


def test_xor_filter_loses_nothing():
    src = make_iid(mod_ring(2), (0.5, 0.5))
    r = loss_rate_report(src, xor_filter(), max_n=4)
    assert r.invertible
    assert r.preimage_bound_bits == 0.0
    assert r.loss_lower == 0.0
    assert r.loss_upper <= 1e-12
    assert r.output_bracket.lower == pytest.approx(1.0, abs=1e-12)
    assert r.output_bracket.upper == pytest.approx(1.0, abs=1e-12)


def test_squarer_loses_exactly_the_sign_rate():
    # H(X) = log2 3; Y is iid with P(0) = 1/3, so the loss rate is
    # log2 3 - H(1/3, 2/3) = 2/3 bit exactly.
    src = make_iid(plain_alphabet((-1, 0, 1)), (1 / 3, 1 / 3, 1 / 3))
    r = loss_rate_report(src, squarer(), max_n=6)
    assert r.preimage_bound_bits == 1.0
    assert not r.invertible
    assert r.loss_lower == pytest.approx(2 / 3, abs=1e-9)
    assert r.loss_upper == pytest.approx(2 / 3, abs=1e-9)


# Exhaustively derived before freezing: on uniform iid {1, 2} inputs the
# wrong seed stays consistent only while the input alternates, so
# H(X_1^K | Y_1^K) = 2^-K; on {-1, 1} the global sign flip always stays
# consistent and the conditional entropy is exactly 1 bit at every K.
MULT_12_CONDITIONALS = [0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625]


def test_multiplier_conditional_entropy_freezes():
    src = make_iid(plain_alphabet((1, 2)), (0.5, 0.5))
    sys_ = multiplier_system(plain_alphabet((1, 2)))
    for k, want in enumerate(MULT_12_CONDITIONALS, start=1):
        if k == 1:
            continue  # identity needs K > max(M, N) = 1
        got = finite_length_loss(src, sys_, k)
        assert got["lhs"] == pytest.approx(want, abs=1e-9)
        assert got["rhs"] == pytest.approx(want, abs=1e-9)
        w = oracle_block_entropies(src, sys_, k)
        assert w["xy"] - w["y"] == pytest.approx(want, abs=1e-9)
    w1 = oracle_block_entropies(src, sys_, 1)
    assert w1["xy"] - w1["y"] == pytest.approx(0.5, abs=1e-9)


def test_multiplier_sign_alphabet_stays_at_one_bit():
    alpha = plain_alphabet((-1, 1))
    src = make_iid(alpha, (0.5, 0.5))
    sys_ = multiplier_system(alpha)
    for k in (2, 3, 4, 5):
        got = finite_length_loss(src, sys_, k)
        assert got["lhs"] == pytest.approx(1.0, abs=1e-9)
        assert got["rhs"] == pytest.approx(1.0, abs=1e-9)


def test_finite_length_identity_on_random_invertible_systems():
    rng = np.random.default_rng(61)
    for _ in range(10):
        qx = int(rng.integers(2, 4))
        qy = int(rng.integers(qx, 4))
        alpha = plain_alphabet(tuple(range(qx)))
        beta = plain_alphabet(tuple(range(qy)))
        src = random_source(alpha, rng)
        sys_ = random_invertible_system(alpha, beta, int(rng.integers(0, 2)),
                                        int(rng.integers(0, 2)), rng)
        m = max(sys_.N, sys_.M)
        for K in (m + 1, m + 3):
            got = finite_length_loss(src, sys_, K)
            assert got["lhs"] == pytest.approx(got["rhs"], abs=1e-9)
            assert got["lhs"] >= -1e-12


def test_determinism_identity_holds_for_any_system():
    rng = np.random.default_rng(71)
    for _ in range(10):
        src, sys_ = _random_pair(rng)
        m = max(sys_.N, sys_.M)
        n = m + int(rng.integers(1, 4))
        got = determinism_identity(src, sys_, n)
        assert got["lhs"] == pytest.approx(got["rhs"], abs=1e-9)
    with pytest.raises(ValidationError):
        determinism_identity(src, sys_, max(sys_.N, sys_.M))


def test_block_entropy_validation_and_caps():
    src = make_iid(BITS, (0.5, 0.5))
    chain = build_joint_chain(src, xor_filter())
    with pytest.raises(ValidationError):
        exact_block_entropy(chain, 0)
    with pytest.raises(ValidationError):
        exact_block_entropy(chain, 2, which="z")
    with pytest.raises(ResourceLimitError):
        exact_block_entropy(chain, 40, path_cap=2**20)
    with pytest.raises(ResourceLimitError):
        build_joint_chain(src, xor_filter(), state_cap=3)
    with pytest.raises(ValidationError):
        build_joint_chain(make_iid(plain_alphabet((3, 4)), (0.5, 0.5)), xor_filter())


def test_bracket_respects_path_cap():
    alpha = plain_alphabet(tuple(range(3)))
    rng = np.random.default_rng(5)
    src = random_source(alpha, rng)
    sys_ = random_table_system(alpha, alpha, 2, 2, rng)
    chain = build_joint_chain(src, sys_)
    br = output_rate_bracket(chain, max_n=12, tolerance=0.0, path_cap=4000)
    assert br.block_length < 12
    assert not br.converged or br.upper - br.lower <= 0.0
    with pytest.raises(ResourceLimitError):
        output_rate_bracket(chain, max_n=12, tolerance=0.0, path_cap=1)


def test_plugin_estimate_tracks_exact_loss():
    src = make_iid(mod_ring(2), (0.5, 0.5))
    xs = sample_path(src, 30000, seed=9)
    ys = simulate(xor_filter(), xs)
    est = plugin_estimate(xs, ys, block=3)
    assert not est.low_coverage
    assert est.loss == pytest.approx(0.0, abs=0.02)
    sq_src = make_iid(plain_alphabet((-1, 0, 1)), (1 / 3, 1 / 3, 1 / 3))
    xs = sample_path(sq_src, 30000, seed=10)
    ys = simulate(squarer(), xs)
    est = plugin_estimate(xs, ys, block=2)
    assert est.loss == pytest.approx(2 / 3, abs=0.02)


def test_plugin_estimate_edges():
    with pytest.raises(ValidationError):
        plugin_estimate([0, 1], [0], block=1)
    with pytest.raises(ValidationError):
        plugin_estimate([0, 1], [0, 1], block=3)
    with pytest.raises(ValidationError):
        plugin_estimate([0, 2], [0, 0], block=1, x_alphabet=BITS)
    est = plugin_estimate([0, 1] * 4, [0, 0] * 4, block=2)
    assert est.low_coverage
    assert est.input_block_entropy > est.output_block_entropy
