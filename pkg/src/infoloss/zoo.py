"""Concrete system families: modular filters, quantized fixed-point
filters, the sample multiplier, and static-nonlinearity cascades.

The fixed-point families realize a hardware register model: symbols are the
residues 0..q-1, coefficient multiplication happens over exact rationals,
and a quantizer maps accumulator values back into the alphabet.  The
default quantizer truncates, Q(v) = floor(v) mod q, which for q = 2^k is
two's-complement truncation.  Truncation commutes with adding an alphabet
element,

    Q(a + x) = Q(a) (+) x        for every rational a and x in 0..q-1,

so filters whose leading coefficient is 1 take the form y_n = x_n (+) (a
function of the past) and are therefore partially invertible regardless of
the remaining coefficients, the placement of the quantizer, or the input
statistics.  Quantizing each product separately and quantizing once after
accumulation genuinely differ as soon as coefficients have fractional
parts; with integer coefficients both collapse to the plain modular filter.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .alphabet import Alphabet, mod_ring, plain_alphabet
from .errors import ValidationError
from .systems import CascadeSystem, System, TableSystem, cascade, static_system

PLACEMENTS = ("after-multiply", "after-accumulate")


@dataclass(frozen=True)
class FilterCoeffs:
    """Feedforward taps b_0..b_N and feedback taps a_1..a_M."""

    b: tuple
    a: tuple = ()

    def __post_init__(self):
        if len(self.b) < 1:
            raise ValidationError("need at least the b_0 tap")
        object.__setattr__(self, "b", tuple(self.b))
        object.__setattr__(self, "a", tuple(self.a))

    @property
    def N(self) -> int:
        return len(self.b) - 1

    @property
    def M(self) -> int:
        return len(self.a)


# -- modular (finite-ring) filters -------------------------------------


def ring_linear_filter(alphabet: Alphabet, coeffs: FilterCoeffs) -> TableSystem:
    """y_n = (+)_k b_k x_{n-k} (+) (+)_l a_l y_{n-l}, all in the ring.

    Coefficients are alphabet symbols; multiplication and accumulation both
    use the alphabet's tables, so input and output alphabets coincide.
    """
    ring = alphabet.require_ring()
    q = len(alphabet)
    b_idx = [alphabet.index(c) for c in coeffs.b]
    a_idx = [alphabet.index(c) for c in coeffs.a]
    N, M = coeffs.N, coeffs.M
    size = q ** (N + 1 + M)
    flat = np.arange(size, dtype=np.int64)
    acc = np.full(size, ring.zero, dtype=np.int64)
    digits = []
    rest = flat
    for _ in range(N + 1 + M):
        digits.append(rest % q)
        rest //= q
    digits.reverse()  # digits[0] is x_{n-N}, ..., digits[N] is x_n, then y's
    for k, c in enumerate(b_idx):  # b_k pairs with x_{n-k} = digits[N - k]
        acc = ring.add[acc, ring.mul[c, digits[N - k]]]
    for l, c in enumerate(a_idx, start=1):  # a_l pairs with y_{n-l} = digits[N + M + 1 - l]
        acc = ring.add[acc, ring.mul[c, digits[N + M + 1 - l]]]
    return TableSystem(alphabet, alphabet, N, M, acc)


def xor_filter() -> TableSystem:
    """Binary y_n = x_n xor x_{n-1}; the smallest invertible filter."""
    return ring_linear_filter(mod_ring(2), FilterCoeffs(b=(1, 1)))


# -- quantizers and fixed-point filters --------------------------------


@dataclass(frozen=True, eq=False)
class Quantizer:
    """Map from accumulator values back into a ring alphabet.

    domain is the finite set of values the map was declared (and checked)
    on; None means every rational, which only the by-construction
    truncating quantizer may claim.  Compatibility Q(a + x) = Q(a) (+) x is
    checked exhaustively for explicit domains, over every pair whose sum
    stays inside the domain.
    """

    codomain: Alphabet
    fn: object
    domain: tuple | None = None
    name: str = "custom"

    def __call__(self, value):
        return self.fn(value)

    def check_compat(self) -> None:
        if self.domain is None:
            return
        ring = self.codomain.require_ring()
        sym = self.codomain.symbols
        dom = set(self.domain)
        for a in self.domain:
            qa = self.codomain.index(self.fn(a))
            for x in sym:
                if a + x not in dom:
                    continue
                left = self.codomain.index(self.fn(a + x))
                if left != int(ring.add[qa, self.codomain.index(x)]):
                    raise ValidationError(
                        f"quantizer incompatible with the ring at (a={a!r}, x={x!r})"
                    )


def truncating_quantizer(alphabet: Alphabet) -> Quantizer:
    """floor-then-mod quantizer; for q = 2^k this is two's-complement truncation."""
    q = len(alphabet)
    if alphabet.symbols != tuple(range(q)) or not alphabet.has_ring:
        raise ValidationError("truncating quantizer needs the mod-q alphabet 0..q-1")

    def fn(value):
        return int(Fraction(value).__floor__()) % q

    return Quantizer(codomain=alphabet, fn=fn, domain=None, name="truncate")


def table_quantizer(domain, mapping, codomain: Alphabet) -> Quantizer:
    """Explicit finite quantizer; compatibility is checked at construction."""
    dom = tuple(domain)
    get = mapping.__getitem__ if isinstance(mapping, dict) else mapping
    table = {a: get(a) for a in dom}
    quant = Quantizer(codomain=codomain, fn=table.__getitem__, domain=dom)
    quant.check_compat()
    return quant


def _as_fraction(c) -> Fraction:
    if isinstance(c, (int, np.integer, Fraction)):
        return Fraction(c)
    raise ValidationError(f"coefficients must be exact rationals, got {type(c).__name__}")


def accumulator_domain(alphabet: Alphabet, coeffs: FilterCoeffs) -> tuple:
    """Every partial sum Sum c_i v_i a running accumulator can hold, exactly."""
    values = [Fraction(s) for s in alphabet.symbols]
    sums = {Fraction(0)}
    seen = set(sums)
    for c in list(coeffs.b) + list(coeffs.a):
        c = _as_fraction(c)
        sums = {s + c * v for s in sums for v in values}
        seen |= sums
        if len(seen) > 200_000:
            raise ValidationError("accumulator value set is too large to enumerate")
    return tuple(sorted(seen))


def _digit_planes(size: int, q: int, count: int) -> list:
    """Mixed-radix digits of 0..size-1, most significant first."""
    digits = []
    rest = np.arange(size, dtype=np.int64)
    for _ in range(count):
        digits.append(rest % q)
        rest //= q
    digits.reverse()
    return digits


def fixed_point_filter(alphabet: Alphabet, coeffs: FilterCoeffs, placement: str,
                       quantizer: Quantizer | None = None) -> TableSystem:
    """Quantized filter over the residues mod q, exact rational arithmetic.

    placement "after-multiply" quantizes each coefficient product before
    the modular accumulation; "after-accumulate" carries the full-precision
    sum and quantizes once.
    """
    if placement not in PLACEMENTS:
        raise ValidationError(f"placement must be one of {PLACEMENTS}, got {placement!r}")
    if quantizer is None:
        quantizer = truncating_quantizer(alphabet)
    if quantizer.codomain != alphabet:
        raise ValidationError("quantizer codomain must be the filter alphabet")
    ring = alphabet.require_ring()
    q = len(alphabet)
    N, M = coeffs.N, coeffs.M
    cs = [_as_fraction(c) for c in list(coeffs.b) + list(coeffs.a)]
    values = [Fraction(s) for s in alphabet.symbols]
    size = q ** (N + 1 + M)
    digits = _digit_planes(size, q, N + 1 + M)

    if placement == "after-multiply":
        # per-coefficient quantized product lookup, then ring accumulation
        luts = [
            np.array([alphabet.index(quantizer(c * v)) for v in values], dtype=np.int64)
            for c in cs
        ]
        acc = np.full(size, ring.zero, dtype=np.int64)
        for k in range(N + 1):
            acc = ring.add[acc, luts[k][digits[N - k]]]
        for l in range(1, M + 1):
            acc = ring.add[acc, luts[N + l][digits[N + M + 1 - l]]]
        return TableSystem(alphabet, alphabet, N, M, acc)

    if quantizer.name == "truncate":
        # integer arithmetic at the common denominator; // is the quantizer
        den = int(np.lcm.reduce([c.denominator for c in cs])) if cs else 1
        nums = [int(c * den) for c in cs]
        vals = np.array([int(v) for v in values], dtype=np.int64)
        total = np.zeros(size, dtype=np.int64)
        for k in range(N + 1):
            total += nums[k] * vals[digits[N - k]]
        for l in range(1, M + 1):
            total += nums[N + l] * vals[digits[N + M + 1 - l]]
        return TableSystem(alphabet, alphabet, N, M, (total // den) % q)

    dom = set(accumulator_domain(alphabet, coeffs))
    if quantizer.domain is not None and not dom <= set(quantizer.domain):
        missing = sorted(dom - set(quantizer.domain))[0]
        raise ValidationError(f"quantizer domain does not cover accumulator value {missing!r}")

    def fn(xw, yw):
        window = list(xw[::-1]) + list(yw[::-1])  # x_n, ..., x_{n-N}, y_{n-1}, ...
        return quantizer(sum(c * Fraction(v) for c, v in zip(cs, window)))

    return TableSystem.from_function(alphabet, alphabet, N, M, fn)


# -- multiplier and static-nonlinearity cascades -----------------------


def multiplier_system(alphabet: Alphabet) -> TableSystem:
    """y_n = x_n * x_{n-1} over numeric symbols; output is the product closure."""
    prods = {a * b for a in alphabet.symbols for b in alphabet.symbols}
    out = plain_alphabet(tuple(sorted(prods)))
    return TableSystem.from_function(
        alphabet, out, 1, 0, lambda xw, yw: xw[1] * xw[0]
    )


def squarer() -> TableSystem:
    """y_n = x_n^2 on {-1, 0, 1}; loses exactly the sign."""
    return static_system(plain_alphabet((-1, 0, 1)), lambda s: s * s)


def hammerstein_system(g, filt: TableSystem, input_alphabet: Alphabet | None = None) -> "System":
    """Static nonlinearity g followed by a filter.

    Returns the exact dense table when composition preserves the
    default-start transient, else the staged pair (same behavior either
    way).  g is a dict or callable from the input alphabet into the
    filter's input alphabet; when input_alphabet is omitted and g is a
    dict its keys are used (in sorted order when numeric).
    """
    if input_alphabet is None:
        if not isinstance(g, dict):
            raise ValidationError("need input_alphabet when g is not a dict")
        keys = list(g)
        try:
            keys = sorted(keys)
        except TypeError:
            pass
        input_alphabet = plain_alphabet(tuple(keys))
    stage = static_system(input_alphabet, g, output_alphabet=filt.input_alphabet)
    return cascade(stage, filt)


def rational_linear_filter(coeffs: FilterCoeffs) -> "System":
    """Eq-form filter over exact rationals; simulation only (infinite alphabet)."""
    from .systems import OpaqueSystem

    b = [_as_fraction(c) for c in coeffs.b]
    a = [_as_fraction(c) for c in coeffs.a]
    N, M = coeffs.N, coeffs.M

    def update(xwin, ywin):
        acc = sum((b[k] * Fraction(xwin[N - k]) for k in range(N + 1)), Fraction(0))
        acc += sum((a[l - 1] * Fraction(ywin[M - l]) for l in range(1, M + 1)), Fraction(0))
        return acc

    return OpaqueSystem(update, N, M)


def rational_filter_inverse(coeffs: FilterCoeffs) -> "System":
    """Exact inverse of a rational filter with b_0 != 0: recovers x from y."""
    from .systems import OpaqueSystem

    b = [_as_fraction(c) for c in coeffs.b]
    a = [_as_fraction(c) for c in coeffs.a]
    if b[0] == 0:
        raise ValidationError("inverse needs b_0 != 0")
    N, M = coeffs.N, coeffs.M

    # roles swap: the inverse consumes y (needs M of them plus current) and
    # feeds back its own outputs, which are the recovered x
    def update(ywin, xwin):
        acc = Fraction(ywin[-1])
        acc -= sum((a[l - 1] * Fraction(ywin[M - l]) for l in range(1, M + 1)), Fraction(0))
        acc -= sum((b[k] * Fraction(xwin[N - k]) for k in range(1, N + 1)), Fraction(0))
        return acc / b[0]

    return OpaqueSystem(update, M, N)
