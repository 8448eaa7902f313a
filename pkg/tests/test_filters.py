import math

import numpy as np
import pytest

from infoloss import (
    IndeterminateError,
    NumericError,
    TransferFunction,
    ValidationError,
    is_minimum_phase,
    random_stable_filter,
    rate_change_integral,
    rate_change_roots,
)


def test_transfer_function_validation():
    with pytest.raises(ValidationError):
        TransferFunction(b=())
    with pytest.raises(ValidationError):
        TransferFunction(b=(0, 1))
    with pytest.raises(ValidationError, match="unstable"):
        TransferFunction(b=(1,), a=(2,))
    with pytest.raises(ValidationError, match="unstable"):
        TransferFunction(b=(1,), a=(1,))  # pole exactly on the circle


def test_roots_land_where_algebra_says():
    tf = TransferFunction(b=(1, -2), a=(0.5,))
    assert tf.order == (1, 1)
    assert tf.zeros() == pytest.approx([2.0 + 0j], abs=1e-12)
    assert tf.poles() == pytest.approx([0.5 + 0j], abs=1e-12)
    g = tf.gain(np.array([0.0]))
    assert g[0] == pytest.approx(abs(1 - 2) / abs(1 - 0.5), abs=1e-12)


def test_hand_rate_changes():
    # one zero at 2 outside: ln 2
    assert rate_change_roots(TransferFunction(b=(1, -2))) == pytest.approx(math.log(2), abs=1e-12)
    # pure gain 3: ln 3
    assert rate_change_roots(TransferFunction(b=(3,))) == pytest.approx(math.log(3), abs=1e-12)
    # zero inside: stable poles and inside zeros contribute nothing
    assert rate_change_roots(TransferFunction(b=(1, -0.5), a=(0.25,))) == pytest.approx(0.0, abs=1e-12)
    # 2 - z^-1 = 2 (1 - 0.5 z^-1): gain ln 2, zero inside
    assert rate_change_roots(TransferFunction(b=(2, -1))) == pytest.approx(math.log(2), abs=1e-12)
    # zeros at 2 and 3 outside, overall: ln 6
    tf = TransferFunction(b=tuple(np.poly([2.0, 3.0])))
    assert rate_change_roots(tf) == pytest.approx(math.log(6), abs=1e-10)


def test_integral_agrees_with_roots_on_hand_cases():
    for b, a in (((1, -2), ()), ((3,), ()), ((2, -1), (0.5,)), ((1, -0.5), ())):
        tf = TransferFunction(b=b, a=a)
        assert rate_change_integral(tf) == pytest.approx(rate_change_roots(tf), abs=1e-7)


def test_integral_agrees_with_roots_on_random_filters():
    rng = np.random.default_rng(43)
    for _ in range(25):
        tf = random_stable_filter(rng)
        assert rate_change_integral(tf) == pytest.approx(rate_change_roots(tf), abs=1e-6)


def test_minimum_phase_classification():
    assert is_minimum_phase(TransferFunction(b=(1, -0.5)))
    assert is_minimum_phase(TransferFunction(b=(5,), a=(0.3,)))
    assert not is_minimum_phase(TransferFunction(b=(1, -2)))
    with pytest.raises(IndeterminateError):
        is_minimum_phase(TransferFunction(b=(1, -1)))
    with pytest.raises(IndeterminateError):
        is_minimum_phase(TransferFunction(b=(1.0, -(1 + 1e-12))))


def test_circle_zero_refused_not_averaged():
    sing = TransferFunction(b=(1, 1))  # zero at -1
    with pytest.raises(NumericError):
        rate_change_roots(sing)
    with pytest.raises(NumericError):
        rate_change_integral(sing)


def test_integral_grid_floor():
    tf = TransferFunction(b=(1, -2))
    with pytest.raises(ValidationError):
        rate_change_integral(tf, grid=512)


def test_random_stable_filter_margins():
    rng = np.random.default_rng(47)
    for _ in range(40):
        tf = random_stable_filter(rng, margin=0.1)
        zmag = np.abs(tf.zeros())
        pmag = np.abs(tf.poles())
        assert np.all(np.abs(zmag - 1.0) >= 0.1 - 1e-9)
        if pmag.size:
            assert np.all(pmag <= 0.9 + 1e-9)
        assert len(tf.b) - 1 <= 6 and len(tf.a) <= 6
    with pytest.raises(ValidationError):
        random_stable_filter(rng, margin=1.5)
