"""Finite symbol alphabets, optionally carrying modular ring structure.

An alphabet is an ordered tuple of distinct symbols.  Systems that add or
multiply symbols (modular filters) need a ring: an addition table that forms
a commutative group with identity ``zero``, and a closed multiplication
table with identity ``one``.  Tables are stored as index-valued matrices;
``add[i, j]`` is the index of ``symbols[i] (+) symbols[j]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

# Exhaustive ring-axiom checks are quadratic in alphabet size; above this the
# constructor refuses rather than silently skipping the check.
MAX_RING_SIZE = 256


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=np.int64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class Ring:
    """Index-level add/mul tables over one alphabet."""

    add: np.ndarray
    mul: np.ndarray
    zero: int
    one: int


@dataclass(frozen=True, eq=False)
class Alphabet:
    """Ordered finite set of distinct hashable symbols, with optional ring."""

    symbols: tuple
    ring: Ring | None = None
    _index: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if not isinstance(self.symbols, tuple):
            object.__setattr__(self, "symbols", tuple(self.symbols))
        q = len(self.symbols)
        if q < 1:
            raise ValidationError("alphabet needs at least one symbol")
        index = {}
        for i, s in enumerate(self.symbols):
            if s in index:
                raise ValidationError(f"duplicate symbol {s!r}")
            index[s] = i
        object.__setattr__(self, "_index", index)
        if self.ring is not None:
            self._check_ring(q)

    def _check_ring(self, q: int) -> None:
        if q > MAX_RING_SIZE:
            raise ValidationError(
                f"ring checks are exhaustive and capped at {MAX_RING_SIZE} symbols, got {q}"
            )
        r = self.ring
        add = _readonly(r.add)
        mul = _readonly(r.mul)
        # rebuild with normalized read-only tables (dataclass is frozen)
        object.__setattr__(self, "ring", Ring(add, mul, int(r.zero), int(r.one)))
        r = self.ring
        for name, t in (("add", add), ("mul", mul)):
            if t.shape != (q, q):
                raise ValidationError(f"{name} table must be {q}x{q}, got {t.shape}")
            if t.min() < 0 or t.max() >= q:
                raise ValidationError(f"{name} table entries must be symbol indices in [0, {q})")
        if not (0 <= r.zero < q and 0 <= r.one < q):
            raise ValidationError("zero/one must be symbol indices")
        if not np.array_equal(add, add.T):
            raise ValidationError("addition table is not commutative")
        if not np.array_equal(add[r.zero], np.arange(q)):
            raise ValidationError("zero is not an additive identity")
        # every element needs an additive inverse: each row must hit zero
        if not np.all((add == r.zero).any(axis=1)):
            bad = int(np.flatnonzero(~(add == r.zero).any(axis=1))[0])
            raise ValidationError(f"symbol {self.symbols[bad]!r} has no additive inverse")
        if not np.array_equal(mul[r.one], np.arange(q)) or not np.array_equal(
            mul[:, r.one], np.arange(q)
        ):
            raise ValidationError("one is not a multiplicative identity")

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol) -> bool:
        return symbol in self._index

    def __eq__(self, other) -> bool:
        if not isinstance(other, Alphabet):
            return NotImplemented
        if self.symbols != other.symbols:
            return False
        a, b = self.ring, other.ring
        if (a is None) != (b is None):
            return False
        if a is None:
            return True
        return (
            a.zero == b.zero
            and a.one == b.one
            and np.array_equal(a.add, b.add)
            and np.array_equal(a.mul, b.mul)
        )

    def __hash__(self) -> int:
        return hash((self.symbols, self.ring is None))

    def index(self, symbol) -> int:
        """Index of a symbol; raises ValidationError on foreign symbols."""
        try:
            return self._index[symbol]
        except (KeyError, TypeError):
            raise ValidationError(f"symbol {symbol!r} is not in the alphabet") from None

    def indices(self, seq) -> np.ndarray:
        """Vector of indices for a symbol sequence."""
        return np.array([self.index(s) for s in seq], dtype=np.int64)

    def take(self, idx) -> list:
        """Symbols at the given indices."""
        return [self.symbols[int(i)] for i in np.atleast_1d(np.asarray(idx))]

    @property
    def has_ring(self) -> bool:
        return self.ring is not None

    def require_ring(self) -> Ring:
        if self.ring is None:
            raise ValidationError("operation needs an alphabet with ring structure")
        return self.ring

    def add_index(self, i: int, j: int) -> int:
        return int(self.require_ring().add[i, j])

    def mul_index(self, i: int, j: int) -> int:
        return int(self.require_ring().mul[i, j])

    @property
    def zero_index(self) -> int:
        return self.require_ring().zero


def mod_ring(q: int) -> Alphabet:
    """The ring Z_q: symbols 0..q-1 with addition and multiplication mod q."""
    if q < 1 or q > MAX_RING_SIZE:
        raise ValidationError(f"modulus must be in [1, {MAX_RING_SIZE}], got {q}")
    i = np.arange(q)
    add = (i[:, None] + i[None, :]) % q
    mul = (i[:, None] * i[None, :]) % q
    return Alphabet(tuple(range(q)), Ring(_readonly(add), _readonly(mul), 0, 1 % q))


def plain_alphabet(symbols) -> Alphabet:
    """Alphabet without ring structure."""
    return Alphabet(tuple(symbols), None)
