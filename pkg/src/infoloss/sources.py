"""Stationary first-order Markov input sources over finite alphabets.

A source is a row-stochastic transition matrix together with its stationary
distribution.  Independent symbols are the special case of identical rows.
Entropy rates are in bits:

    rate = -sum_i pi_i sum_j P_ij log2 P_ij        (0 log 0 = 0)

Chains must be regular on the support of their stationary law: states the
stationary process actually visits must form one aperiodic communicating
class.  Symbols outside that support are allowed but flagged, since the
stationary process never emits them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .alphabet import Alphabet
from .errors import ValidationError

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-10
_POWER_ITER_CAP = 10**6
_SUPPORT_EPS = 1e-15


def _xlog2(p: np.ndarray) -> np.ndarray:
    """p * log2(p) with the 0 log 0 = 0 convention."""
    out = np.zeros_like(p, dtype=float)
    nz = p > 0
    out[nz] = p[nz] * np.log2(p[nz])
    return out


def stationary_distribution(transition: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Fixed point of mu = mu P by power iteration on the lazy chain.

    The lazy chain (P + I)/2 has the same fixed points and is aperiodic, so
    the iteration converges for any finite chain.  Starts from uniform.
    """
    P = np.asarray(transition, dtype=float)
    n = P.shape[0]
    mu = np.full(n, 1.0 / n)
    for _ in range(_POWER_ITER_CAP):
        nxt = 0.5 * (mu + mu @ P)
        nxt /= nxt.sum()
        if np.abs(nxt - mu).sum() < tol and np.abs(nxt @ P - nxt).sum() < tol:
            return nxt
        mu = nxt
    raise ValidationError("stationary distribution did not converge")


@dataclass(frozen=True, eq=False)
class MarkovSource:
    """First-order stationary source; build via make_iid / make_markov."""

    alphabet: Alphabet
    transition: np.ndarray
    stationary: np.ndarray = field(default=None)

    def __post_init__(self):
        P = np.ascontiguousarray(self.transition, dtype=float)
        q = len(self.alphabet)
        if P.shape != (q, q):
            raise ValidationError(f"transition must be {q}x{q}, got {P.shape}")
        if P.min() < 0:
            raise ValidationError("transition probabilities must be nonnegative")
        rows = P.sum(axis=1)
        if np.abs(rows - 1.0).max() > ROW_SUM_TOL:
            bad = int(np.abs(rows - 1.0).argmax())
            raise ValidationError(f"row {bad} sums to {rows[bad]!r}, not 1")
        pi = self.stationary
        if pi is None:
            pi = stationary_distribution(P)
        else:
            pi = np.asarray(pi, dtype=float)
            if np.abs(pi @ P - pi).sum() > STATIONARY_TOL:
                raise ValidationError("claimed stationary vector is not a fixed point")
        self._check_regular(P, pi)
        P.flags.writeable = False
        pi = np.ascontiguousarray(pi)
        pi.flags.writeable = False
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "stationary", pi)

    @staticmethod
    def _check_regular(P: np.ndarray, pi: np.ndarray) -> None:
        support = np.flatnonzero(pi > _SUPPORT_EPS)
        if support.size == 0:
            raise ValidationError("stationary distribution has empty support")
        sub = P[np.ix_(support, support)]
        g = nx.DiGraph(((i, j) for i in range(len(support)) for j in range(len(support)) if sub[i, j] > 0))
        g.add_nodes_from(range(len(support)))
        if not nx.is_strongly_connected(g):
            raise ValidationError("chain is reducible on its stationary support")
        if not nx.is_aperiodic(g):
            raise ValidationError("chain is periodic on its stationary support")

    @property
    def full_support(self) -> bool:
        """False when some symbols have zero stationary probability."""
        return bool(np.all(self.stationary > _SUPPORT_EPS))

    @property
    def is_iid(self) -> bool:
        return bool(np.abs(self.transition - self.transition[0]).max() == 0.0)


def make_iid(alphabet: Alphabet, pmf) -> MarkovSource:
    """Source emitting independent symbols with the given probabilities."""
    p = np.asarray(pmf, dtype=float)
    if p.shape != (len(alphabet),):
        raise ValidationError(f"pmf must have length {len(alphabet)}")
    if p.min() < 0 or abs(p.sum() - 1.0) > ROW_SUM_TOL:
        raise ValidationError("pmf must be nonnegative and sum to 1")
    P = np.tile(p, (len(alphabet), 1))
    return MarkovSource(alphabet, P, stationary=p.copy())


def make_markov(alphabet: Alphabet, transition) -> MarkovSource:
    """Source with an explicit transition matrix; stationary law is computed."""
    return MarkovSource(alphabet, np.asarray(transition, dtype=float))


def source_entropy_rate(source: MarkovSource) -> float:
    """Entropy rate in bits per symbol, exact closed form."""
    per_row = -_xlog2(source.transition).sum(axis=1)
    return float(source.stationary @ per_row)


def marginal_entropy(source: MarkovSource) -> float:
    """Entropy of a single stationary symbol, in bits."""
    return float(-_xlog2(source.stationary).sum())


def sample_path(source: MarkovSource, length: int, seed, init="stationary") -> list:
    """Sample a length-n symbol path, reproducible for a given seed.

    init="stationary" draws the first symbol from the stationary law, so the
    path is a stationary realization; passing a symbol pins the first symbol.
    """
    if length < 1:
        raise ValidationError(f"path length must be >= 1, got {length}")
    rng = np.random.default_rng(seed)
    q = len(source.alphabet)
    u = rng.random(length)
    idx = np.empty(length, dtype=np.int64)
    if init == "stationary":
        idx[0] = min(np.searchsorted(np.cumsum(source.stationary), u[0], side="right"), q - 1)
    else:
        idx[0] = source.alphabet.index(init)
    if length > 1:
        if source.is_iid:
            cum = np.cumsum(source.transition[0])
            idx[1:] = np.minimum(np.searchsorted(cum, u[1:], side="right"), q - 1)
        else:
            cum = np.cumsum(source.transition, axis=1)
            prev = idx[0]
            for t in range(1, length):
                prev = min(int(np.searchsorted(cum[prev], u[t], side="right")), q - 1)
                idx[t] = prev
    return [source.alphabet.symbols[int(i)] for i in idx]


def random_source(alphabet: Alphabet, rng: np.random.Generator) -> MarkovSource:
    """Random regular chain: transition rows drawn Dirichlet(1,...,1)."""
    q = len(alphabet)
    while True:
        P = rng.dirichlet(np.ones(q), size=q)
        try:
            return MarkovSource(alphabet, P)
        except ValidationError:  # pragma: no cover - Dirichlet rows are a.s. regular
            continue
