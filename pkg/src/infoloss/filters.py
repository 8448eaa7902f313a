"""Real-coefficient linear filters and their entropy-rate change.

For a stable filter G(z) = (sum_k b_k z^-k) / (1 - sum_l a_l z^-l) driven
by a stationary real input with finite differential entropy rate, the
output rate differs from the input rate by the log-gain average
(1/2 pi) int ln|G(e^{j t})| dt, in nats per step.  The same number falls
out of the root layout as ln|b_0| plus the sum of ln|z_i| over zeros
outside the unit circle; poles never contribute because stability keeps
them inside.  The two routes are computed independently here so they can
check each other.

This quantity is a rate *change* of a real-valued signal, not the
conditional-entropy loss the rest of the package measures for finite
alphabets; it is negative exactly when the filter contracts the signal's
description, and zero iff the filter is minimum phase with unit b_0 gain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IndeterminateError, NumericError, ValidationError

CIRCLE_TOL = 1e-9
ROOT_RESIDUAL_TOL = 1e-10
INTEGRAL_TOL = 1e-8
MIN_GRID = 2**10
MAX_GRID = 2**22


def _polish_roots(coeffs: np.ndarray) -> np.ndarray:
    """np.roots plus a few Newton steps; rejects roots that will not settle."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size < 2:
        return np.zeros(0, dtype=complex)
    roots = np.roots(coeffs).astype(complex)
    deriv = np.polyder(coeffs)
    scale = np.sum(np.abs(coeffs))
    for _ in range(60):
        val = np.polyval(coeffs, roots)
        tol = ROOT_RESIDUAL_TOL * scale * np.maximum(1.0, np.abs(roots)) ** (coeffs.size - 1)
        if np.all(np.abs(val) <= tol):
            return roots
        dval = np.polyval(deriv, roots)
        safe = np.abs(dval) > 1e-300
        roots = np.where(safe, roots - val / np.where(safe, dval, 1.0), roots)
    val = np.polyval(coeffs, roots)
    tol = ROOT_RESIDUAL_TOL * scale * np.maximum(1.0, np.abs(roots)) ** (coeffs.size - 1)
    if np.all(np.abs(val) <= tol):
        return roots
    raise NumericError("polynomial roots did not converge to the requested residual")


@dataclass(frozen=True)
class TransferFunction:
    """G(z) = (b_0 + b_1 z^-1 + ...) / (1 - a_1 z^-1 - ...), stable."""

    b: tuple
    a: tuple = ()
    _zeros: np.ndarray = field(init=False, repr=False, compare=False)
    _poles: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        b = tuple(float(v) for v in self.b)
        a = tuple(float(v) for v in self.a)
        if not b:
            raise ValidationError("numerator needs at least b_0")
        if b[0] == 0.0:
            raise ValidationError("b_0 must be nonzero")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)
        # roots in z of z^N B(z) and z^M A(z)
        zeros = _polish_roots(np.array(b)) if len(b) > 1 else np.zeros(0, complex)
        den = np.concatenate(([1.0], -np.array(a))) if a else np.array([1.0])
        poles = _polish_roots(den) if len(den) > 1 else np.zeros(0, complex)
        if poles.size and np.any(np.abs(poles) >= 1.0 - 1e-12):
            worst = poles[np.argmax(np.abs(poles))]
            raise ValidationError(f"unstable filter: pole at |z| = {abs(worst):.6g}")
        object.__setattr__(self, "_zeros", zeros)
        object.__setattr__(self, "_poles", poles)

    @property
    def order(self) -> tuple[int, int]:
        return len(self.b) - 1, len(self.a)

    def zeros(self) -> np.ndarray:
        return self._zeros.copy()

    def poles(self) -> np.ndarray:
        return self._poles.copy()

    def gain(self, theta: np.ndarray) -> np.ndarray:
        """|G| on the unit circle at angles theta."""
        u = np.exp(-1j * np.asarray(theta, dtype=float))
        num = np.polyval(np.array(self.b)[::-1], u)
        den_c = np.concatenate(([1.0], -np.array(self.a))) if self.a else np.array([1.0])
        den = np.polyval(den_c[::-1], u)
        return np.abs(num) / np.abs(den)


def is_minimum_phase(tf: TransferFunction) -> bool:
    """True iff every zero is strictly inside the unit circle.

    A zero within CIRCLE_TOL of the circle is neither in nor out at this
    precision, so the question is refused instead of answered.
    """
    mags = np.abs(tf.zeros())
    if np.any(np.abs(mags - 1.0) < CIRCLE_TOL):
        raise IndeterminateError("zero too close to the unit circle to classify")
    return bool(np.all(mags < 1.0))


def rate_change_roots(tf: TransferFunction) -> float:
    """ln|b_0| + sum of ln|z_i| over zeros outside the unit circle (nats)."""
    mags = np.abs(tf.zeros())
    if np.any(np.abs(mags - 1.0) < CIRCLE_TOL):
        raise NumericError("zero on the unit circle: log-gain average diverges")
    outside = mags[mags > 1.0]
    return float(np.log(abs(tf.b[0])) + np.log(outside).sum())


def rate_change_integral(tf: TransferFunction, grid: int = 2**12) -> float:
    """Trapezoidal (1/2 pi) int ln|G| on a uniform grid, doubled to 1e-8.

    The integrand is 2 pi periodic, so the trapezoidal rule is just the
    grid mean and converges geometrically while no zero sits on the
    circle; a zero within CIRCLE_TOL of it is rejected up front.
    """
    if grid < MIN_GRID:
        raise ValidationError(f"grid must be at least {MIN_GRID}")
    mags = np.abs(tf.zeros())
    if np.any(np.abs(mags - 1.0) < CIRCLE_TOL):
        raise NumericError("zero on the unit circle: log-gain average diverges")

    def mean_log_gain(g: int) -> float:
        theta = -np.pi + 2.0 * np.pi * np.arange(g) / g
        return float(np.mean(np.log(tf.gain(theta))))

    est = mean_log_gain(grid)
    while True:
        grid *= 2
        if grid > MAX_GRID:
            raise NumericError("log-gain average did not settle before the grid cap")
        nxt = mean_log_gain(grid)
        if abs(nxt - est) <= INTEGRAL_TOL:
            return nxt
        est = nxt


def random_stable_filter(
    rng: np.random.Generator,
    max_degree: int = 6,
    margin: float = 0.05,
) -> TransferFunction:
    """Random real filter whose roots all keep `margin` away from the circle.

    Zeros land uniformly in (0, 1 - margin] or [1 + margin, 2], poles in
    (0, 1 - margin]; complex roots come in conjugate pairs so the
    coefficients stay real.
    """
    if not 0.0 < margin < 1.0:
        raise ValidationError("margin must sit in (0, 1)")

    def draw_roots(count: int, allow_outside: bool) -> list[complex]:
        roots: list[complex] = []
        while len(roots) < count:
            pair = count - len(roots) >= 2 and rng.random() < 0.5
            if allow_outside and rng.random() < 0.5:
                r = 1.0 + margin + rng.random() * (1.0 - margin)
            else:
                r = (1.0 - margin) * (0.05 + 0.95 * rng.random())
            if pair:
                ang = rng.random() * np.pi
                z = r * np.exp(1j * ang)
                roots += [z, np.conj(z)]
            else:
                roots.append(complex(r if rng.random() < 0.5 else -r))
        return roots

    n = int(rng.integers(0, max_degree + 1))
    m = int(rng.integers(0, max_degree + 1))
    b0 = (0.5 + 1.5 * rng.random()) * (1 if rng.random() < 0.5 else -1)
    b = b0 * np.real(np.poly(draw_roots(n, True))) if n else np.array([b0])
    den = np.real(np.poly(draw_roots(m, False))) if m else np.array([1.0])
    return TransferFunction(tuple(b), tuple(-den[1:]))
