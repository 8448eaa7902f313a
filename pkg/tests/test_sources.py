import numpy as np
import pytest

from infoloss import (
    MarkovSource,
    ValidationError,
    make_iid,
    make_markov,
    marginal_entropy,
    mod_ring,
    plain_alphabet,
    random_source,
    sample_path,
    source_entropy_rate,
    stationary_distribution,
)

BITS = plain_alphabet((0, 1))

# binary entropy at p = 0.1: -0.1 log2 0.1 - 0.9 log2 0.9
H2_01 = 0.46899559358928117
# and at p = 0.2
H2_02 = 0.7219280948873623


def test_iid_entropy_rate_closed_form():
    src = make_iid(BITS, [0.9, 0.1])
    assert src.is_iid
    assert source_entropy_rate(src) == pytest.approx(H2_01, abs=1e-15)
    assert marginal_entropy(src) == pytest.approx(H2_01, abs=1e-15)


def test_markov_rate_is_stationary_average_of_row_entropies():
    P = np.array([[0.9, 0.1], [0.2, 0.8]])
    src = make_markov(BITS, P)
    # pi solves pi P = pi: pi = (2/3, 1/3)
    assert np.allclose(src.stationary, [2 / 3, 1 / 3], atol=1e-12)
    want = 2 / 3 * H2_01 + 1 / 3 * H2_02
    assert source_entropy_rate(src) == pytest.approx(want, abs=1e-12)


def test_stationary_matches_linear_solve():
    rng = np.random.default_rng(11)
    for _ in range(25):
        q = int(rng.integers(2, 6))
        P = rng.dirichlet(np.ones(q), size=q)
        mu = stationary_distribution(P)
        # direct eigenvector solve as the independent route
        A = np.vstack([P.T - np.eye(q), np.ones(q)])
        b = np.concatenate([np.zeros(q), [1.0]])
        ref, *_ = np.linalg.lstsq(A, b, rcond=None)
        assert np.abs(mu - ref).max() < 1e-9
        assert np.abs(mu @ P - mu).sum() < 1e-10


def test_bad_rows_rejected():
    with pytest.raises(ValidationError):
        make_markov(BITS, np.array([[0.5, 0.6], [0.5, 0.5]]))
    with pytest.raises(ValidationError):
        make_iid(BITS, [0.7, 0.2])
    with pytest.raises(ValidationError):
        make_iid(BITS, [0.5])


def test_iid_zero_support_allowed_but_flagged():
    src = make_iid(plain_alphabet((0, 1, 2)), [0.5, 0.5, 0.0])
    assert not src.full_support


def test_irregular_chains_rejected_at_construction():
    with pytest.raises(ValidationError, match="reducible"):
        make_markov(BITS, np.eye(2))
    with pytest.raises(ValidationError, match="periodic"):
        make_markov(BITS, np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_sample_path_reproducible_and_pinnable():
    src = make_markov(BITS, np.array([[0.9, 0.1], [0.2, 0.8]]))
    a = sample_path(src, 500, seed=42)
    b = sample_path(src, 500, seed=42)
    assert a == b
    c = sample_path(src, 500, seed=43)
    assert a != c
    pinned = sample_path(src, 10, seed=0, init=1)
    assert pinned[0] == 1


def test_sample_path_frequencies_near_stationary():
    src = make_markov(BITS, np.array([[0.9, 0.1], [0.2, 0.8]]))
    xs = np.array(sample_path(src, 200000, seed=7))
    assert abs(xs.mean() - 1 / 3) < 0.01


def test_iid_path_uses_vector_draw():
    src = make_iid(mod_ring(4), [0.25] * 4)
    xs = sample_path(src, 100000, seed=5)
    counts = np.bincount(xs, minlength=4) / 100000
    assert np.abs(counts - 0.25).max() < 0.01


def test_random_source_is_stochastic_with_full_support():
    # construction itself enforces regularity, so success is the check
    rng = np.random.default_rng(3)
    for _ in range(20):
        src = random_source(plain_alphabet(tuple(range(3))), rng)
        assert np.allclose(src.transition.sum(axis=1), 1.0, atol=1e-12)
        assert src.full_support
        assert isinstance(src, MarkovSource)
