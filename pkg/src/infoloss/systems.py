"""Finite-memory deterministic input-output systems.

A system computes y_n = f(x_{n-N}, ..., x_n, y_{n-M}, ..., y_{n-1}) with
finite input memory N and output memory M.  Three realizations:

* TableSystem: f stored as a dense lookup table, supports exact analysis.
* OpaqueSystem: f is an arbitrary callable, simulation only.
* CascadeSystem: two systems in series, second consuming first's output.

Table index convention (also the serialization format): the flat table is
row-major over the digit tuple

    (x_{n-N}, ..., x_n, y_{n-M}, ..., y_{n-1})

i.e. oldest input first, inputs before outputs, leftmost digit most
significant; input digits are indices into the input alphabet (radix |X|)
and output digits indices into the output alphabet (radix |Y|).  The stored
value is the index of y_n in the output alphabet.

The parameter view of a system freezes the history theta = (x_{n-N}^{n-1},
y_{n-M}^{n-1}) and reads f as a static map f_theta: X -> Y.  A system is
partially invertible when every f_theta is injective; then x_n can be read
back from (theta, y_n), which is what the reconstruction module does.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .alphabet import Alphabet
from .errors import AnalysisUnsupportedError, ResourceLimitError, ValidationError

TABLE_CAP = 2**22  # dense update-table entries
THETA_SCAN_CAP = 2**24  # (theta, x) pairs in invertibility/preimage scans


@dataclass(frozen=True)
class SystemState:
    """Buffers of the most recent N inputs and M outputs, oldest first."""

    recent_inputs: tuple
    recent_outputs: tuple


class System:
    """Common protocol; see TableSystem, OpaqueSystem, CascadeSystem."""

    input_alphabet: Alphabet | None
    output_alphabet: Alphabet | None
    N: int
    M: int

    @property
    def seed_length(self) -> int:
        """Input prefix length a reconstructor needs to get started."""
        return max(self.N, self.M)

    def default_state(self) -> SystemState:
        raise NotImplementedError

    def simulate(self, inputs, init: SystemState | None = None) -> list:
        raise NotImplementedError

    def _unsupported(self, op: str):
        raise AnalysisUnsupportedError(
            f"{op} needs a dense-table system; {type(self).__name__} only simulates"
        )


def _default_buffer(alphabet: Alphabet | None, n: int) -> tuple:
    if n == 0:
        return ()
    if alphabet is None:
        return (0,) * n
    if alphabet.ring is not None:
        sym = alphabet.symbols[alphabet.ring.zero]
    elif 0 in alphabet.symbols:
        sym = alphabet.symbols[alphabet.index(0)]
    else:
        sym = alphabet.symbols[0]
    return (sym,) * n


def _check_state(system: System, init: SystemState | None) -> SystemState:
    if init is None:
        return system.default_state()
    if len(init.recent_inputs) != system.N or len(init.recent_outputs) != system.M:
        raise ValidationError(
            f"init buffers must have lengths N={system.N}, M={system.M}; "
            f"got {len(init.recent_inputs)}, {len(init.recent_outputs)}"
        )
    if system.input_alphabet is not None:
        for s in init.recent_inputs:
            system.input_alphabet.index(s)
        for s in init.recent_outputs:
            system.output_alphabet.index(s)
    return init


@dataclass(frozen=True, eq=False)
class Transducer:
    """Dense one-step form: state s, input x -> (emit[s, x], step[s, x])."""

    n_states: int
    step: np.ndarray  # (n_states, |X|) next-state index
    emit: np.ndarray  # (n_states, |X|) output-symbol index
    default_state: int


class TableSystem(System):
    """System whose update rule is a dense lookup table."""

    def __init__(self, input_alphabet: Alphabet, output_alphabet: Alphabet,
                 N: int, M: int, table):
        if N < 0 or M < 0:
            raise ValidationError("memory lengths must be nonnegative")
        qx, qy = len(input_alphabet), len(output_alphabet)
        size = qx ** (N + 1) * qy**M
        if size > TABLE_CAP:
            raise ResourceLimitError(f"table would need {size} entries, cap {TABLE_CAP}")
        t = np.ascontiguousarray(table, dtype=np.int64).ravel()
        if t.shape != (size,):
            raise ValidationError(f"table must have {size} entries, got {t.size}")
        if t.size and (t.min() < 0 or t.max() >= qy):
            raise ValidationError("table values must be output-alphabet indices")
        t.flags.writeable = False
        self.input_alphabet = input_alphabet
        self.output_alphabet = output_alphabet
        self.N = int(N)
        self.M = int(M)
        self.table = t
        self._inverse: np.ndarray | None = None

    # -- index helpers -------------------------------------------------

    @property
    def n_theta(self) -> int:
        return len(self.input_alphabet) ** self.N * len(self.output_alphabet) ** self.M

    @property
    def n_sys_states(self) -> int:
        return self.n_theta  # state space and parameter space coincide

    def _encode_state(self, state: SystemState) -> int:
        qx, qy = len(self.input_alphabet), len(self.output_alphabet)
        xcode = 0
        for s in state.recent_inputs:
            xcode = xcode * qx + self.input_alphabet.index(s)
        ycode = 0
        for s in state.recent_outputs:
            ycode = ycode * qy + self.output_alphabet.index(s)
        return xcode * qy**self.M + ycode

    def _decode_state(self, code: int) -> SystemState:
        qx, qy = len(self.input_alphabet), len(self.output_alphabet)
        ycode = code % qy**self.M
        xcode = code // qy**self.M
        xs, ys = [], []
        for _ in range(self.N):
            xs.append(self.input_alphabet.symbols[xcode % qx])
            xcode //= qx
        for _ in range(self.M):
            ys.append(self.output_alphabet.symbols[ycode % qy])
            ycode //= qy
        return SystemState(tuple(reversed(xs)), tuple(reversed(ys)))

    @classmethod
    def from_function(cls, input_alphabet: Alphabet, output_alphabet: Alphabet,
                      N: int, M: int, fn) -> "TableSystem":
        """Tabulate fn(x_window, y_window) over all windows (symbol tuples)."""
        qx, qy = len(input_alphabet), len(output_alphabet)
        size = qx ** (N + 1) * qy**M
        if size > TABLE_CAP:
            raise ResourceLimitError(f"table would need {size} entries, cap {TABLE_CAP}")
        table = np.empty(size, dtype=np.int64)
        i = 0
        for xwin in itertools.product(input_alphabet.symbols, repeat=N + 1):
            for ywin in itertools.product(output_alphabet.symbols, repeat=M):
                table[i] = output_alphabet.index(fn(xwin, ywin))
                i += 1
        return cls(input_alphabet, output_alphabet, N, M, table)

    def update(self, x_window, y_window):
        """Apply f to one window pair (symbols, oldest first)."""
        if len(x_window) != self.N + 1 or len(y_window) != self.M:
            raise ValidationError(f"windows must have lengths {self.N + 1} and {self.M}")
        qx, qy = len(self.input_alphabet), len(self.output_alphabet)
        code = 0
        for s in x_window:
            code = code * qx + self.input_alphabet.index(s)
        for s in y_window:
            code = code * qy + self.output_alphabet.index(s)
        return self.output_alphabet.symbols[int(self.table[code])]

    def default_state(self) -> SystemState:
        return SystemState(
            _default_buffer(self.input_alphabet, self.N),
            _default_buffer(self.output_alphabet, self.M),
        )

    # -- simulation ----------------------------------------------------

    def simulate(self, inputs, init: SystemState | None = None) -> list:
        state = _check_state(self, init)
        idx = self.input_alphabet.indices(inputs)
        qx, qy = len(self.input_alphabet), len(self.output_alphabet)
        if self.M == 0:
            xfull = np.concatenate([self.input_alphabet.indices(state.recent_inputs), idx])
            codes = np.zeros(len(idx), dtype=np.int64)
            for j in range(self.N + 1):
                codes = codes * qx + xfull[j : j + len(idx)]
            out = self.table[codes]
            return [self.output_alphabet.symbols[int(i)] for i in out]
        xmod = qx ** max(self.N - 1, 0)
        ymod = qy ** (self.M - 1)
        ypow = qy**self.M
        code = self._encode_state(state)
        xcode, ycode = divmod(code, ypow)
        table = self.table
        out = np.empty(len(idx), dtype=np.int64)
        for t, x in enumerate(idx):
            y = table[(xcode * qx + x) * ypow + ycode]
            out[t] = y
            xcode = (xcode % xmod) * qx + x if self.N else 0
            ycode = (ycode % ymod) * qy + y
        return [self.output_alphabet.symbols[int(i)] for i in out]

    # -- exact analysis ------------------------------------------------

    def theta_table(self) -> np.ndarray:
        """f as a (n_theta, |X|) array: row theta, column x_n -> y index.

        Theta indices use the same mixed radix as system states.
        """
        qx, qy = len(self.input_alphabet), len(self.output_alphabet)
        if self.n_theta * qx > THETA_SCAN_CAP:
            raise ResourceLimitError(f"parameter scan over {self.n_theta} histories exceeds cap")
        shaped = self.table.reshape(qx**self.N, qx, qy**self.M)
        return np.ascontiguousarray(shaped.transpose(0, 2, 1).reshape(self.n_theta, qx))

    def decode_theta(self, theta: int) -> tuple:
        """(input-history symbols, output-history symbols) for a theta index."""
        st = self._decode_state(theta)
        return st.recent_inputs, st.recent_outputs

    def transducer(self) -> Transducer:
        qx, qy = len(self.input_alphabet), len(self.output_alphabet)
        n = self.n_sys_states
        s = np.arange(n, dtype=np.int64)[:, None]
        x = np.arange(qx, dtype=np.int64)[None, :]
        ypow = qy**self.M
        xcode, ycode = np.divmod(s, ypow)
        emit = self.table[(xcode * qx + x) * ypow + ycode]
        xmod = qx ** max(self.N - 1, 0)
        xnext = (xcode % xmod) * qx + x if self.N else np.zeros_like(emit)
        ymod = qy ** max(self.M - 1, 0)
        ynext = (ycode % ymod) * qy + emit if self.M else np.zeros_like(emit)
        step = xnext * ypow + ynext
        return Transducer(n, step, emit, self._encode_state(self.default_state()))


class OpaqueSystem(System):
    """Simulation-only system driven by an arbitrary update callable.

    Alphabets may be None (unconstrained numeric symbols), which is how
    infinite-alphabet rational filters are represented.
    """

    def __init__(self, update, N: int, M: int,
                 input_alphabet: Alphabet | None = None,
                 output_alphabet: Alphabet | None = None):
        if N < 0 or M < 0:
            raise ValidationError("memory lengths must be nonnegative")
        self.update = update
        self.N = int(N)
        self.M = int(M)
        self.input_alphabet = input_alphabet
        self.output_alphabet = output_alphabet

    def default_state(self) -> SystemState:
        return SystemState(
            _default_buffer(self.input_alphabet, self.N),
            _default_buffer(self.output_alphabet, self.M),
        )

    def simulate(self, inputs, init: SystemState | None = None) -> list:
        state = _check_state(self, init)
        if self.input_alphabet is not None:
            for s in inputs:
                self.input_alphabet.index(s)
        xbuf = list(state.recent_inputs)
        ybuf = list(state.recent_outputs)
        out = []
        for x in inputs:
            y = self.update(tuple(xbuf) + (x,), tuple(ybuf))
            out.append(y)
            if self.N:
                xbuf = (xbuf + [x])[-self.N:]
            if self.M:
                ybuf = (ybuf + [y])[-self.M:]
        return out


class CascadeSystem(System):
    """Two systems in series; carries both subsystem states internally.

    No single finite-window table over (input, final output) reproduces a
    general cascade when the first stage has output feedback (its internal
    signal is hidden from the final output), so the composition keeps the
    pair of stages and is defined by simulation equivalence.  When the first
    stage has M = 0 the composition does collapse to a dense table; use
    flatten() or cascade(), which flattens automatically.
    """

    def __init__(self, first: System, second: System):
        # Ring annotations are irrelevant to wiring; the ordered symbol
        # tuples must match so stage-2 tables index stage-1 outputs.
        if first.output_alphabet.symbols != second.input_alphabet.symbols:
            raise ValidationError("cascade stages must agree on the middle alphabet")
        self.first = first
        self.second = second
        self.input_alphabet = first.input_alphabet
        self.output_alphabet = second.output_alphabet
        self.N = first.N + second.N
        self.M = second.M

    @property
    def seed_length(self) -> int:
        return max(self.first.seed_length, self.second.seed_length)

    def default_state(self) -> tuple:
        return (self.first.default_state(), self.second.default_state())

    def simulate(self, inputs, init=None) -> list:
        if init is None:
            init = self.default_state()
        init1, init2 = init
        return self.second.simulate(self.first.simulate(inputs, init1), init2)

    def stages(self) -> list:
        """Flat list of table-system stages, left to right."""
        out = []
        for part in (self.first, self.second):
            if isinstance(part, CascadeSystem):
                out.extend(part.stages())
            else:
                out.append(part)
        return out

    def flatten(self) -> TableSystem:
        """Exact dense-table form; needs every stage but the last to have M=0."""
        stages = self.stages()
        if any(not isinstance(s, TableSystem) for s in stages):
            self._unsupported("flatten")
        if any(s.M > 0 for s in stages[:-1]):
            raise AnalysisUnsupportedError(
                "cascade with feedback in a non-final stage has no exact table form"
            )
        flat = stages[0]
        for nxt in stages[1:]:
            flat = _flatten_pair(flat, nxt)
        return flat

    def transducer(self) -> Transducer:
        t1 = _transducer_of(self.first)
        t2 = _transducer_of(self.second)
        n = t1.n_states * t2.n_states
        if n > TABLE_CAP:
            raise ResourceLimitError(f"product transducer has {n} states, cap {TABLE_CAP}")
        s1 = np.repeat(np.arange(t1.n_states), t2.n_states)
        s2 = np.tile(np.arange(t2.n_states), t1.n_states)
        mid = t1.emit[s1]  # (n, |X|)
        emit = t2.emit[s2[:, None], mid]
        step = t1.step[s1] * t2.n_states + t2.step[s2[:, None], mid]
        return Transducer(n, step, emit, t1.default_state * t2.n_states + t2.default_state)


def _transducer_of(system: System) -> Transducer:
    if isinstance(system, (TableSystem, CascadeSystem)):
        return system.transducer()
    system._unsupported("exact analysis")


def _flatten_pair(first: TableSystem, second: TableSystem) -> TableSystem:
    """Dense table of second ∘ first when first.M == 0."""
    if first.M != 0:
        raise AnalysisUnsupportedError("only feedback-free first stages flatten exactly")
    if second.N > 0:
        # The flat table derives pre-run values by pushing the composed
        # default window through stage 1; that only reproduces the staged
        # transient when the result matches stage 2's own default buffer.
        u0 = first.update(_default_buffer(first.input_alphabet, first.N + 1), ())
        if u0 != _default_buffer(second.input_alphabet, 1)[0]:
            raise AnalysisUnsupportedError(
                "flattening would change the default-start transient"
            )
    in_a, out_a = first.input_alphabet, second.output_alphabet
    N = first.N + second.N
    M = second.M

    def fn(xwin, ywin):
        vwin = tuple(
            first.update(xwin[j : j + first.N + 1], ()) for j in range(second.N + 1)
        )
        return second.update(vwin, ywin)

    return TableSystem.from_function(in_a, out_a, N, M, fn)


# -- module-level operations ------------------------------------------


def simulate(system: System, inputs, init=None) -> list:
    """Run the system over an input path; returns same-length output path."""
    return system.simulate(inputs, init)


@dataclass(frozen=True)
class InvertibilityVerdict:
    """Outcome of the partial-invertibility check.

    witness is None when invertible, else the lexicographically smallest
    (input history, output history, x, x') with f_theta(x) == f_theta(x').
    For cascades the histories are per-stage tuples.
    """

    invertible: bool
    witness: tuple | None


def _composed_theta_table(system: CascadeSystem):
    """(rows, |X|) composed map over all per-stage history combinations.

    Scanning the full product of stage histories (not only jointly reachable
    ones) is conservative: it can only enlarge the preimage maximum.
    """
    stages = system.stages()
    if any(not isinstance(s, TableSystem) for s in stages):
        system._unsupported("parameter scan")
    rows = 1
    for s in stages:
        rows *= s.n_theta
    qx = len(system.input_alphabet)
    if rows * qx > THETA_SCAN_CAP:
        raise ResourceLimitError(f"cascade parameter scan over {rows} rows exceeds cap")
    F = None
    for s in stages:
        Fs = s.theta_table()
        if F is None:
            F = Fs
        else:
            # every (accumulated rows) x (stage rows) combination
            F = Fs[np.repeat(np.arange(Fs.shape[0]), F.shape[0])[:, None],
                   np.tile(F.T, Fs.shape[0]).T]
    return F, stages


def _theta_rows(system: System):
    if isinstance(system, TableSystem):
        return system.theta_table(), None
    if isinstance(system, CascadeSystem):
        F, stages = _composed_theta_table(system)
        return F, stages
    system._unsupported("parameter scan")


def preimage_bound(system: System) -> float:
    """max over (x, theta) of log2 |f_theta^{-1}[f_theta(x)]|, in bits.

    Zero exactly when every parameterized static map is injective.
    """
    F, _ = _theta_rows(system)
    qy = len(system.output_alphabet)
    rows = F.shape[0]
    counts = np.bincount(
        (np.arange(rows, dtype=np.int64)[:, None] * qy + F).ravel(),
        minlength=rows * qy,
    )
    return float(np.log2(counts.max()))


def check_partial_invertibility(system: System) -> InvertibilityVerdict:
    """Decide whether x_n is always recoverable from (theta, y_n).

    On a dense-table system a positive verdict also materializes and caches
    the inverse lookup used by the reconstruction module.
    """
    F, stages = _theta_rows(system)
    qx = F.shape[1]
    qy = len(system.output_alphabet)
    rows = F.shape[0]
    offs = np.arange(rows, dtype=np.int64)[:, None] * qy + F
    counts = np.bincount(offs.ravel(), minlength=rows * qy)
    if counts.max() <= 1:
        if isinstance(system, TableSystem) and system._inverse is None:
            inv = np.full(rows * qy, -1, dtype=np.int64)
            inv[offs.ravel()] = np.tile(np.arange(qx), rows)
            system._inverse = inv.reshape(rows, qy)
            system._inverse.flags.writeable = False
        return InvertibilityVerdict(True, None)
    collided = counts.reshape(rows, qy).max(axis=1) > 1
    theta = int(np.flatnonzero(collided)[0])
    row = F[theta]
    for x in range(qx):
        dup = np.flatnonzero(row[x + 1 :] == row[x])
        if dup.size:
            xp = int(x + 1 + dup[0])
            witness = _decode_witness(system, stages, theta, x, xp)
            return InvertibilityVerdict(False, witness)
    raise AssertionError("collision vanished during witness search")


def _decode_witness(system, stages, theta: int, x: int, xp: int) -> tuple:
    xs = system.input_alphabet.symbols
    if stages is None:
        hx, hy = system.decode_theta(theta)
        return (hx, hy, xs[x], xs[xp])
    parts = []
    for s in stages:  # theta index ran fastest over the first stage
        parts.append(s.decode_theta(theta % s.n_theta))
        theta //= s.n_theta
    return (tuple(parts), xs[x], xs[xp])


def inverse_table(system: TableSystem) -> np.ndarray:
    """(n_theta, |Y|) map (theta, y) -> x, -1 where y is unreachable."""
    if not isinstance(system, TableSystem):
        system._unsupported("inverse table")
    if system._inverse is None:
        verdict = check_partial_invertibility(system)
        if not verdict.invertible:
            raise ValidationError(f"system is not partially invertible: {verdict.witness}")
    return system._inverse


def cascade(first: System, second: System) -> System:
    """Series composition; returns an exact dense table when possible."""
    composed = CascadeSystem(first, second)
    try:
        return composed.flatten()
    except (AnalysisUnsupportedError, ResourceLimitError):
        return composed


# -- constructors used across tests and the zoo -----------------------


def static_system(input_alphabet: Alphabet, mapping, output_alphabet: Alphabet | None = None) -> TableSystem:
    """Memoryless system y_n = g(x_n); mapping is a dict or callable.

    When no output alphabet is given, the range of g is used (sorted when
    numeric, else in input-symbol order).
    """
    g = mapping.__getitem__ if isinstance(mapping, dict) else mapping
    values = [g(s) for s in input_alphabet.symbols]
    if output_alphabet is None:
        seen = list(dict.fromkeys(values))
        try:
            seen = sorted(seen)
        except TypeError:
            pass
        output_alphabet = Alphabet(tuple(seen))
    table = [output_alphabet.index(v) for v in values]
    return TableSystem(input_alphabet, output_alphabet, 0, 0, table)


def identity_system(alphabet: Alphabet) -> TableSystem:
    return TableSystem(alphabet, alphabet, 0, 0, np.arange(len(alphabet)))


def random_table_system(input_alphabet: Alphabet, output_alphabet: Alphabet,
                        N: int, M: int, rng: np.random.Generator) -> TableSystem:
    """Update table drawn uniformly over all maps."""
    size = len(input_alphabet) ** (N + 1) * len(output_alphabet) ** M
    return TableSystem(input_alphabet, output_alphabet, N, M,
                       rng.integers(0, len(output_alphabet), size=size))


def random_invertible_system(input_alphabet: Alphabet, output_alphabet: Alphabet,
                             N: int, M: int, rng: np.random.Generator) -> TableSystem:
    """Every f_theta drawn as a uniformly random injection X -> Y."""
    qx, qy = len(input_alphabet), len(output_alphabet)
    if qy < qx:
        raise ValidationError("injections need |Y| >= |X|")
    n_theta = qx**N * qy**M
    F = np.empty((n_theta, qx), dtype=np.int64)
    for t in range(n_theta):
        F[t] = rng.permutation(qy)[:qx]
    # theta-major back to table order: digits (x-history, x_n, y-history)
    table = F.reshape(qx**N, qy**M, qx).transpose(0, 2, 1)
    return TableSystem(input_alphabet, output_alphabet, N, M, table)
