"""Exact entropy analysis of a source-system pair.

The pair (Markov source, finite-memory system) is lifted to a joint chain
over states (previous input symbol, system buffers).  Emissions (x_n, y_n)
are deterministic per transition, so every block entropy reduces to a finite
sum over input paths weighted by source probabilities.  Paths that agree on
the tracked marginal and the current chain state are merged as the
enumeration advances one step at a time, which keeps the frontier far below
|X|^n whenever the system forgets its past.

Initial conditions: the chain starts from (x ~ stationary source law,
default system buffers) and is then marginalized over its long-run law,
computed as the limit of lazy power iteration.  That law is invariant, so
the enumerated process is stationary; states the initialization cannot
reach carry no mass.

Output entropy rates are bracketed by the classic sandwich for functions of
Markov chains:

    H(Y_n | Y_1^{n-1}, S_0)  <=  rate  <=  H(Y_n | Y_1^{n-1})

with the lower side conditioning on the initial chain state.  Both sides
are monotone in n; the bracket is reported with a convergence flag.

All entropies are in bits.  0 log 0 = 0 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import (
    AnalysisUnsupportedError,
    NumericError,
    ResourceLimitError,
    ValidationError,
)
from .sources import MarkovSource, source_entropy_rate
from .systems import System, _transducer_of, check_partial_invertibility, preimage_bound

DEFAULT_STATE_CAP = 10**6
DEFAULT_PATH_CAP = 2**24
PRUNE_EPS = 1e-300
PRUNED_MASS_TOL = 1e-12  # identities asserted only below this
_MONOTONE_SLACK = 1e-12
_STATIONARY_TOL = 1e-12
_DENSE_LIMIT = 512  # chains this small use exact matrix squaring


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


@dataclass(eq=False)
class JointChain:
    """Markov chain over (previous input, system state) with deterministic emissions."""

    source: MarkovSource
    system: System
    n_states: int
    state_codes: np.ndarray  # raw code = x_prev * n_sys_states + sys_state
    kernel: np.ndarray       # (n_states, |X|) input probability per transition
    step: np.ndarray         # (n_states, |X|) next chain state (compact id)
    emit: np.ndarray         # (n_states, |X|) emitted output index
    stationary: np.ndarray   # (n_states,)
    n_sys_states: int

    @property
    def transition(self) -> sp.csr_matrix:
        """Sparse row-stochastic transition matrix."""
        rows = np.repeat(np.arange(self.n_states), self.kernel.shape[1])
        return sp.csr_matrix(
            (self.kernel.ravel(), (rows, self.step.ravel())),
            shape=(self.n_states, self.n_states),
        )

    def state(self, i: int) -> tuple:
        """(previous input symbol, system init) for compact state i."""
        code = int(self.state_codes[i])
        xprev, sys_code = divmod(code, self.n_sys_states)
        return self.source.alphabet.symbols[xprev], _decode_sys(self.system, sys_code)

    def validate(self) -> None:
        """Check every transition's emission against a direct simulation step."""
        out_a = self.system.output_alphabet
        for i in range(self.n_states):
            _, init = self.state(i)
            for x in range(self.kernel.shape[1]):
                sym = self.source.alphabet.symbols[x]
                y = self.system.simulate([sym], init)[0]
                if out_a.index(y) != int(self.emit[i, x]):
                    raise AssertionError(f"emission mismatch at state {i}, input {sym!r}")


def _decode_sys(system: System, code: int):
    from .systems import CascadeSystem, TableSystem

    if isinstance(system, TableSystem):
        return system._decode_state(code)
    if isinstance(system, CascadeSystem):
        n2 = _transducer_of(system.second).n_states
        return (_decode_sys(system.first, code // n2), _decode_sys(system.second, code % n2))
    raise AnalysisUnsupportedError("no dense state decoding for this system")


def _stationary_law(kernel, step, n_states, start) -> np.ndarray:
    """Long-run law from the start distribution, via the lazy chain."""
    rows = np.repeat(np.arange(n_states), kernel.shape[1])
    P = sp.csr_matrix(
        (kernel.ravel(), (rows, step.ravel())), shape=(n_states, n_states)
    )
    mu = start.copy()
    if n_states <= _DENSE_LIMIT:
        B = 0.5 * (np.eye(n_states) + P.toarray())
        for _ in range(64):
            Bn = B @ B
            Bn /= Bn.sum(axis=1, keepdims=True)
            if np.abs(Bn - B).max() < 1e-15:
                break
            B = Bn
        mu = start @ B
    else:
        for _ in range(200_000):
            nxt = 0.5 * (mu + P.T @ mu)
            nxt /= nxt.sum()
            delta = np.abs(nxt - mu).sum()
            mu = nxt
            if delta < 0.25 * _STATIONARY_TOL:
                break
    resid = np.abs(P.T @ mu - mu).sum()
    if resid > _STATIONARY_TOL:
        raise NumericError(f"chain stationary law residual {resid:.3e}")
    mu[mu < 1e-15] = 0.0
    return mu / mu.sum()


def build_joint_chain(source: MarkovSource, system: System,
                      state_cap: int = DEFAULT_STATE_CAP) -> JointChain:
    """Lift (source, system) to the joint chain used by all exact analyses."""
    if system.input_alphabet.symbols != source.alphabet.symbols:
        raise ValidationError("source alphabet must equal the system input alphabet")
    t = _transducer_of(system)
    qx = len(source.alphabet)
    full = qx * t.n_states
    if full > state_cap:
        raise ResourceLimitError(f"joint chain needs {full} raw states, cap {state_cap}")
    P = source.transition

    # breadth-first reachability from (x ~ stationary, default buffers)
    visited = np.zeros(full, dtype=bool)
    start_x = np.flatnonzero(source.stationary > 0)
    frontier = start_x * t.n_states + t.default_state
    visited[frontier] = True
    while frontier.size:
        xprev, s = np.divmod(frontier, t.n_states)
        nxt = []
        for x in range(qx):
            live = P[xprev, x] > 0
            if not live.any():
                continue
            codes = x * t.n_states + t.step[s[live], x]
            codes = codes[~visited[codes]]
            if codes.size:
                codes = np.unique(codes)
                visited[codes] = True
                nxt.append(codes)
        frontier = np.concatenate(nxt) if nxt else np.empty(0, dtype=np.int64)

    codes = np.flatnonzero(visited).astype(np.int64)
    compact = np.full(full, -1, dtype=np.int64)
    compact[codes] = np.arange(codes.size)
    xprev, s = np.divmod(codes, t.n_states)
    kernel = P[xprev]                       # (R, qx)
    nxt_raw = np.arange(qx)[None, :] * t.n_states + t.step[s]
    step = compact[nxt_raw]
    step[kernel == 0.0] = 0                 # dead transitions carry zero mass
    emit = t.emit[s]
    if (step < 0).any():
        raise AssertionError("reachable set is not transition-closed")

    start = np.zeros(codes.size)
    start_ids = compact[start_x * t.n_states + t.default_state]
    start[start_ids] = source.stationary[start_x]
    mu = _stationary_law(kernel, step, codes.size, start)

    rows = kernel.sum(axis=1)
    if np.abs(rows - 1.0).max() > 1e-12:
        raise AssertionError("chain rows are not stochastic")
    return JointChain(
        source=source,
        system=system,
        n_states=codes.size,
        state_codes=codes,
        kernel=kernel,
        step=step,
        emit=emit,
        stationary=mu,
        n_sys_states=t.n_states,
    )


# -- path enumeration --------------------------------------------------


class _PathEnumerator:
    """Level-synchronous enumeration of input paths with frontier merging.

    Tracks the joint distribution of (chain state, key) where the key
    accumulates the first x_upto input digits, the first y_upto output
    digits, and optionally the initial state.  step() advances one symbol
    and returns the entropy of the key marginal, or None once a cap stops
    the expansion.
    """

    def __init__(self, chain: JointChain, x_upto: int = 0, y_upto: int = 0,
                 with_s0: bool = False, path_cap: int = DEFAULT_PATH_CAP):
        self.chain = chain
        self.qx = chain.kernel.shape[1]
        self.qy = int(chain.emit.max()) + 1 if chain.emit.size else 1
        self.x_upto = x_upto
        self.y_upto = y_upto
        self.path_cap = path_cap
        # Keys and states pack into one int64 code; expansion stops (it
        # never wraps) when the next level would not fit.  Checked per
        # step so short converged runs are unaffected by a large max_n.
        self._state_bits = float(np.log2(max(chain.n_states, 2)))
        self._key_bits = self._state_bits if with_s0 else 0.0
        live = chain.stationary > 0
        self.states = np.flatnonzero(live).astype(np.int64)
        self.probs = chain.stationary[live].copy()
        self.keys = self.states.copy() if with_s0 else np.zeros_like(self.states)
        self.level = 0
        self.pruned_mass = 0.0
        self.max_nodes = int(self.states.size)
        self.truncated = False
        self.stop_reason = None

    def step(self) -> float | None:
        if self.truncated:
            return None
        if self.states.size * self.qx > self.path_cap:
            self.truncated = True
            self.stop_reason = f"path cap {self.path_cap}"
            return None
        nxt_bits = self._key_bits
        if self.level < self.x_upto:
            nxt_bits += np.log2(self.qx)
        if self.level < self.y_upto:
            nxt_bits += np.log2(max(self.qy, 2))
        if nxt_bits + self._state_bits > 62:
            self.truncated = True
            self.stop_reason = "63-bit key code width"
            return None
        self._key_bits = nxt_bits
        self.level += 1
        ch = self.chain
        probs = (self.probs[:, None] * ch.kernel[self.states]).ravel()
        keys = np.broadcast_to(self.keys[:, None], (self.keys.size, self.qx))
        if self.level <= self.x_upto:
            keys = keys * self.qx + np.arange(self.qx, dtype=np.int64)[None, :]
        if self.level <= self.y_upto:
            keys = keys * self.qy + ch.emit[self.states]
        keys = np.ascontiguousarray(keys).ravel()
        states = ch.step[self.states].ravel()

        mask = probs > PRUNE_EPS
        if not mask.all():
            self.pruned_mass += float(probs[~mask].sum())
            probs, keys, states = probs[mask], keys[mask], states[mask]

        code = keys * ch.n_states + states
        uniq, inv = np.unique(code, return_inverse=True)
        self.probs = np.bincount(inv, weights=probs)
        self.keys = uniq // ch.n_states
        self.states = (uniq % ch.n_states).astype(np.int64)
        self.max_nodes = max(self.max_nodes, int(self.states.size))

        kuniq, kinv = np.unique(self.keys, return_inverse=True)
        return _entropy_bits(np.bincount(kinv, weights=self.probs))


def _profile(chain: JointChain, n: int, x_upto: int, y_upto: int,
             with_s0: bool = False, path_cap: int = DEFAULT_PATH_CAP):
    """Entropies of the tracked tuple at block lengths 1..n."""
    en = _PathEnumerator(chain, x_upto, y_upto, with_s0, path_cap)
    out = []
    for _ in range(n):
        h = en.step()
        if h is None:
            break
        out.append(h)
    return np.array(out), en


def exact_block_entropy(chain: JointChain, n: int, which: str = "xy",
                        path_cap: int = DEFAULT_PATH_CAP) -> float:
    """H of the first n input symbols, output symbols, or both jointly.

    which is one of "x", "y", "xy".  Fails rather than degrades: if the
    path cap stops the enumeration early a ResourceLimitError is raised.
    """
    if n < 1:
        raise ValidationError(f"block length must be >= 1, got {n}")
    qx = chain.kernel.shape[1]
    if qx**n > path_cap:
        raise ResourceLimitError(f"|X|^{n} = {qx ** n} input paths exceed cap {path_cap}")
    which = which.lower()
    if which not in ("x", "y", "xy"):
        raise ValidationError(f"which must be x, y or xy, got {which!r}")
    x_upto = n if "x" in which else 0
    y_upto = n if "y" in which else 0
    hs, en = _profile(chain, n, x_upto, y_upto, path_cap=path_cap)
    if hs.size < n:
        raise ResourceLimitError(f"{en.stop_reason} hit at block length {en.level}")
    return float(hs[-1])


@dataclass(frozen=True)
class RateBracket:
    """Certified sandwich around the output entropy rate (bits/symbol)."""

    lower: float
    upper: float
    block_length: int
    converged: bool
    lower_history: tuple = field(default=(), repr=False)
    upper_history: tuple = field(default=(), repr=False)
    pruned_mass: float = 0.0
    max_nodes: int = 0

    @property
    def width(self) -> float:
        return self.upper - self.lower


def output_rate_bracket(chain: JointChain, max_n: int = 12,
                        tolerance: float = 1e-3,
                        path_cap: int = DEFAULT_PATH_CAP) -> RateBracket:
    """Tighten the sandwich until its width reaches tolerance or a cap bites.

    Monotonicity of both sides is asserted; a violation beyond rounding
    slack means a defect, not a wide bracket, and raises NumericError.
    """
    if max_n < 1:
        raise ValidationError("max_n must be >= 1")
    plain = _PathEnumerator(chain, y_upto=max_n, path_cap=path_cap)
    tagged = _PathEnumerator(chain, y_upto=max_n, with_s0=True, path_cap=path_cap)
    h_mu = _entropy_bits(chain.stationary)
    hy_prev, hys_prev = 0.0, h_mu
    uppers, lowers = [], []
    for t in range(1, max_n + 1):
        hy = plain.step()
        hys = tagged.step()
        if hy is None or hys is None:
            break
        upper = hy - hy_prev
        lower = hys - hys_prev
        if uppers and (upper > uppers[-1] + _MONOTONE_SLACK or lower < lowers[-1] - _MONOTONE_SLACK):
            raise NumericError(f"sandwich lost monotonicity at block length {t}")
        uppers.append(upper)
        lowers.append(lower)
        hy_prev, hys_prev = hy, hys
        if upper - lower <= tolerance:
            break
    if not uppers:
        raise ResourceLimitError("path cap too small for even one block length")
    # The two sides can cross by a few ulps when the true gap is zero;
    # widening the lower side keeps the enclosure valid (history stays raw).
    final_lower = lowers[-1]
    if final_lower > uppers[-1]:
        if final_lower - uppers[-1] > _MONOTONE_SLACK:
            raise NumericError("sandwich sides crossed beyond rounding slack")
        final_lower = uppers[-1]
    return RateBracket(
        lower=final_lower,
        upper=uppers[-1],
        block_length=len(uppers),
        converged=(uppers[-1] - lowers[-1]) <= tolerance,
        lower_history=tuple(lowers),
        upper_history=tuple(uppers),
        pruned_mass=plain.pruned_mass + tagged.pruned_mass,
        max_nodes=max(plain.max_nodes, tagged.max_nodes),
    )


@dataclass(frozen=True)
class LossReport:
    """Everything the analysis pins down about one source-system pair.

    loss_bracket is the output bracket subtracted from the input rate and
    then intersected with the a-priori range [0, preimage bound]; both
    endpoints of that range hold unconditionally, so the intersection is
    still a certified enclosure of the true loss rate.  output_bracket is
    raw.
    """

    input_rate: float
    output_bracket: RateBracket
    loss_lower: float
    loss_upper: float
    preimage_bound_bits: float
    invertible: bool
    tolerance: float

    @property
    def loss_bracket(self) -> tuple:
        return (self.loss_lower, self.loss_upper)

    @property
    def converged(self) -> bool:
        return self.output_bracket.converged


def loss_rate_report(source: MarkovSource, system: System, max_n: int = 12,
                     tolerance: float = 1e-3, path_cap: int = DEFAULT_PATH_CAP,
                     state_cap: int = DEFAULT_STATE_CAP) -> LossReport:
    """Loss-rate enclosure plus the structural bound and invertibility verdict."""
    chain = build_joint_chain(source, system, state_cap)
    bracket = output_rate_bracket(chain, max_n, tolerance, path_cap)
    bound = preimage_bound(system)
    verdict = check_partial_invertibility(system)
    rate = source_entropy_rate(source)
    lo = min(max(rate - bracket.upper, 0.0), bound)
    hi = min(max(rate - bracket.lower, 0.0), bound)
    report = LossReport(
        input_rate=rate,
        output_bracket=bracket,
        loss_lower=lo,
        loss_upper=hi,
        preimage_bound_bits=bound,
        invertible=verdict.invertible,
        tolerance=tolerance,
    )
    _assert_report_sane(report)
    return report


def _assert_report_sane(r: LossReport) -> None:
    if not (r.loss_lower >= -1e-12 and r.loss_lower <= r.loss_upper + 1e-12):
        raise AssertionError("loss bracket is not an interval above 0")
    if r.loss_upper > r.preimage_bound_bits + 1e-12:
        raise AssertionError("loss bracket exceeds the preimage bound")
    if r.invertible and not (r.loss_lower <= 1e-12):
        raise AssertionError("invertible system with loss bracket excluding 0")
    if (r.preimage_bound_bits == 0.0) != r.invertible:
        raise AssertionError("zero preimage bound must coincide with invertibility")


def finite_length_loss(source: MarkovSource, system: System, K: int,
                       path_cap: int = DEFAULT_PATH_CAP,
                       state_cap: int = DEFAULT_STATE_CAP) -> dict:
    """Both sides of the finite-block identity for invertible systems.

    lhs = H(X_1^K | Y_1^K); rhs = H(X_1^m | Y_1^K) with m = max(M, N).
    The two agree (to rounding) exactly when the system is partially
    invertible and K > m.
    """
    m = max(system.M, system.N)
    if K <= m:
        raise ValidationError(f"K must exceed max(M, N) = {m}, got {K}")
    chain = build_joint_chain(source, system, state_cap)
    h_y, en = _profile(chain, K, 0, K, path_cap=path_cap)
    h_xy, en2 = _profile(chain, K, K, K, path_cap=path_cap)
    h_my, en3 = _profile(chain, K, m, K, path_cap=path_cap)
    if min(h_y.size, h_xy.size, h_my.size) < K:
        reasons = {e.stop_reason for e in (en, en2, en3) if e.stop_reason}
        raise ResourceLimitError(f"{' / '.join(sorted(reasons))} hit before block length {K}")
    pruned = en.pruned_mass + en2.pruned_mass + en3.pruned_mass
    if pruned > PRUNED_MASS_TOL:
        raise NumericError(f"pruned mass {pruned:.3e} too large for exact identities")
    return {
        "lhs": float(h_xy[-1] - h_y[-1]),
        "rhs": float(h_my[-1] - h_y[-1]),
        "joint_entropy": float(h_xy[-1]),
        "output_entropy": float(h_y[-1]),
    }


def determinism_identity(source: MarkovSource, system: System, n: int,
                         path_cap: int = DEFAULT_PATH_CAP,
                         state_cap: int = DEFAULT_STATE_CAP) -> dict:
    """Both sides of H(X_1^n, Y_1^n) = H(X_1^n, Y_1^m), m = max(M, N).

    Outputs beyond position m are functions of the tracked variables, so
    the two sides agree for every system and every initial law once
    n > m.  This is the mechanism that reduces the loss rate to a
    difference of marginal rates.
    """
    m = max(system.M, system.N)
    if n <= m:
        raise ValidationError(f"n must exceed max(M, N) = {m}, got {n}")
    chain = build_joint_chain(source, system, state_cap)
    h_xy, en = _profile(chain, n, n, n, path_cap=path_cap)
    h_xm, en2 = _profile(chain, n, n, m, path_cap=path_cap)
    if min(h_xy.size, h_xm.size) < n:
        reasons = {e.stop_reason for e in (en, en2) if e.stop_reason}
        raise ResourceLimitError(f"{' / '.join(sorted(reasons))} hit before block length {n}")
    pruned = en.pruned_mass + en2.pruned_mass
    if pruned > PRUNED_MASS_TOL:
        raise NumericError(f"pruned mass {pruned:.3e} too large for exact identities")
    return {"lhs": float(h_xy[-1]), "rhs": float(h_xm[-1])}


# -- empirical estimator ----------------------------------------------


@dataclass(frozen=True)
class PluginEstimate:
    """Biased plug-in loss estimate from one joint path; exploratory only."""

    input_block_entropy: float   # per-symbol, bits
    output_block_entropy: float
    loss: float
    block: int
    low_coverage: bool


def _ngram_entropy(path, block: int, alphabet=None) -> tuple:
    symbols = sorted(set(path), key=repr) if alphabet is None else list(alphabet.symbols)
    lut = {s: i for i, s in enumerate(symbols)}
    try:
        idx = np.array([lut[s] for s in path], dtype=np.int64)
    except KeyError as e:
        raise ValidationError(f"path symbol {e.args[0]!r} outside the declared alphabet")
    q = max(len(symbols), 1)
    n = idx.size - block + 1
    if n < 1:
        raise ValidationError(f"path shorter than one block of {block}")
    codes = np.zeros(n, dtype=np.int64)
    for j in range(block):
        codes = codes * q + idx[j : j + n]
    counts = np.unique(codes, return_counts=True)[1]
    p = counts / n
    return _entropy_bits(p) / block, len(path) >= 100 * q**block


def plugin_estimate(x_path, y_path, block: int,
                    x_alphabet=None, y_alphabet=None) -> PluginEstimate:
    """Plug-in (empirical n-gram) loss estimate loss = Hx - Hy at one block size.

    Undercoverage (fewer than 100 |alphabet|^block samples on either side)
    sets low_coverage instead of failing; the estimate is biased and meant
    for sanity checks, not certification.
    """
    if block < 1:
        raise ValidationError("block must be >= 1")
    if len(x_path) != len(y_path):
        raise ValidationError("paths must have equal length")
    hx, ok_x = _ngram_entropy(x_path, block, x_alphabet)
    hy, ok_y = _ngram_entropy(y_path, block, y_alphabet)
    return PluginEstimate(
        input_block_entropy=hx,
        output_block_entropy=hy,
        loss=hx - hy,
        block=block,
        low_coverage=not (ok_x and ok_y),
    )
