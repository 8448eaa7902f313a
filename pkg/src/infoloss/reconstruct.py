"""Input recovery for partially invertible systems.

When every parameterized static map f_theta is injective, x_n is a function
of (x_{n-N}^{n-1}, y_{n-M}^n): a reconstructor walks the output path once
it knows the first max(M, N) true inputs (the seed).  Recovery is bit-exact
or it fails loudly; an output pair that no input extends raises
InconsistentObservationError rather than guessing.

Cascades invert stage by stage, last stage first; the seed is pushed
forward through the leading stages to seed each inner reconstruction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InconsistentObservationError, ValidationError
from .systems import CascadeSystem, System, TableSystem, inverse_table


@dataclass(frozen=True, eq=False)
class PartialInverse:
    """Cached inverse lookup (theta, y) -> x for one table system."""

    system: TableSystem
    table: np.ndarray  # (n_theta, |Y|), -1 where y cannot occur

    @classmethod
    def from_system(cls, system: System) -> "PartialInverse | StagedInverse":
        if isinstance(system, CascadeSystem):
            return StagedInverse(system)
        inv = cls(system, inverse_table(system))
        inv._check_roundtrip()
        return inv

    def _check_roundtrip(self) -> None:
        F = self.system.theta_table()
        rows = np.arange(F.shape[0])[:, None]
        back = self.table[rows, F]
        if not np.array_equal(back, np.broadcast_to(np.arange(F.shape[1]), F.shape)):
            raise AssertionError("inverse table fails the exhaustive round trip")

    def reconstruct(self, outputs, seed, init=None) -> list:
        return _reconstruct_table(self, outputs, seed, init)


def _reconstruct_table(inv: PartialInverse, outputs, seed, init) -> list:
    system = inv.system
    s = system.seed_length
    seed = list(seed)
    if len(seed) != s:
        raise ValidationError(f"seed must hold the first {s} inputs, got {len(seed)}")
    for sym in seed:
        system.input_alphabet.index(sym)
    y_idx = system.output_alphabet.indices(outputs)
    L = len(y_idx)
    if init is not None:
        probe = system.simulate(seed[: min(s, L)], init)
        if system.output_alphabet.indices(probe).tolist() != y_idx[: min(s, L)].tolist():
            raise InconsistentObservationError(
                "output prefix does not match the seed under the given initial state"
            )
    x = seed[:L]
    x_idx = [system.input_alphabet.index(sym) for sym in x]
    qx, qy = len(system.input_alphabet), len(system.output_alphabet)
    ypow = qy**system.M
    for n in range(s, L):  # 0-based position n recovers x_{n+1}
        xcode = 0
        for j in range(n - system.N, n):
            xcode = xcode * qx + x_idx[j]
        ycode = 0
        for j in range(n - system.M, n):
            ycode = ycode * qy + int(y_idx[j])
        got = int(inv.table[xcode * ypow + ycode, y_idx[n]])
        if got < 0:
            raise InconsistentObservationError(
                f"no input can produce output {outputs[n]!r} at position {n + 1}"
            )
        x_idx.append(got)
        x.append(system.input_alphabet.symbols[got])
    return x


class StagedInverse:
    """Inverse of a cascade: last stage first, seeds simulated forward."""

    def __init__(self, system: CascadeSystem):
        self.system = system
        self.stages = system.stages()
        self.inverses = [PartialInverse.from_system(s) for s in self.stages]

    def reconstruct(self, outputs, seed, init=None) -> list:
        s = self.system.seed_length
        seed = list(seed)
        if len(seed) != s:
            raise ValidationError(f"seed must hold the first {s} inputs, got {len(seed)}")
        inits = _stage_inits(self.system, init)
        # forward: seed image at the entry of every stage
        stage_seeds = [seed]
        for stage, st_init in zip(self.stages[:-1], inits[:-1]):
            stage_seeds.append(stage.simulate(stage_seeds[-1], st_init))
        # backward: peel stages off the observed output
        path = list(outputs)
        for inv, stage_seed, st_init in zip(
            reversed(self.inverses), reversed(stage_seeds), reversed(inits)
        ):
            need = inv.system.seed_length
            path = inv.reconstruct(path, stage_seed[:need], st_init)
        return path


def _stage_inits(system: CascadeSystem, init) -> list:
    if init is None:
        return [None] * len(system.stages())
    out = []

    def walk(sys_part, part):
        if isinstance(sys_part, CascadeSystem):
            walk(sys_part.first, part[0])
            walk(sys_part.second, part[1])
        else:
            out.append(part)

    walk(system, init)
    return out


def reconstruct(inv, outputs, seed, init=None) -> list:
    """Recover the full input path from outputs plus the seed prefix.

    inv comes from PartialInverse.from_system; seed is the first
    max(M, N) true input symbols.  When init is given, the observed prefix
    is checked against a direct simulation of the seed.
    """
    return inv.reconstruct(outputs, seed, init)


def reconstruct_candidates(inv, outputs, init=None) -> list:
    """Diagnostic sweep: every seed whose reconstruction is consistent.

    Returns (seed, path) pairs in lexicographic seed order.  The true path
    is always among them; how many others appear measures how much the
    seed actually pins down.
    """
    system = inv.system
    out = []
    for seed in itertools.product(system.input_alphabet.symbols, repeat=system.seed_length):
        try:
            out.append((seed, inv.reconstruct(outputs, list(seed), init)))
        except InconsistentObservationError:
            continue
    return out


def multiplier_closed_form(outputs, x1) -> list:
    """Unrolled inverse of y_n = x_n x_{n-1} started from x_1.

    Position n is x_1 prod_{k<=(n-1)/2} y_{2k+1}/y_{2k} for odd n and
    (y_n/x_1) prod_{k<=n/2-1} y_{2k}/y_{2k+1} for even n; only y_2 onward
    is consumed.  Exact rational arithmetic; a wrong x_1 scales every odd
    position by the seed ratio and every even one by its reciprocal, so no
    position survives.
    """
    y = list(outputs)
    if x1 == 0 or any(v == 0 for v in y):
        raise ValidationError("closed form needs nonzero symbols throughout")
    x1 = Fraction(x1)
    ratio = Fraction(1)  # prod_{k=1}^{m} y_{2k+1} / y_{2k}
    out = []
    for n in range(1, len(y) + 1):
        if n == 1:
            out.append(x1)
            continue
        if n % 2:  # odd n = 2m + 1 extends the running product
            ratio *= Fraction(y[n - 1]) / Fraction(y[n - 2])
            out.append(x1 * ratio)
        else:  # even n = 2m uses the product up to m - 1
            out.append(Fraction(y[n - 1]) / (x1 * ratio))
    return [int(v) if v.denominator == 1 else v for v in out]
