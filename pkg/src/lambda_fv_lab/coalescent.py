"""Exchangeable coalescent rates, partitions, and an exact path sampler.

Merge rates come from a driving measure on [0, 1]: a group of k blocks out
of b merges at rate

    rate(b, k) = integral of x^(k-2) (1-x)^(b-k) over the measure.

Named measure families use closed forms; anything else is integrated to a
requested tolerance.  Partitions of {1..n} keep their blocks ordered by
least element throughout.
"""

from __future__ import annotations

import bisect
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import betaln, gammaln

from .errors import DegenerateRatesWarning, OutOfRange
from .measures import DEFAULT_TOL, Family, LambdaMeasure, moment_integral


def log_binom(n, k):
    """log C(n, k), vectorized; safe for large n."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


# --------------------------------------------------------------------------
# partitions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderedPartition:
    """Partition of {1..n} with blocks ordered by their least elements."""

    blocks: tuple[frozenset[int], ...]
    n: int

    def __post_init__(self):
        seen: set[int] = set()
        prev_min = 0
        for blk in self.blocks:
            if not blk:
                raise OutOfRange("empty block")
            m = min(blk)
            if m <= prev_min:
                raise OutOfRange("blocks not ordered by least elements")
            prev_min = m
            if seen & blk:
                raise OutOfRange("blocks overlap")
            seen |= blk
        if seen != set(range(1, self.n + 1)):
            raise OutOfRange(f"blocks do not partition 1..{self.n}")

    @staticmethod
    def singletons(n: int) -> "OrderedPartition":
        return OrderedPartition(tuple(frozenset([i]) for i in range(1, n + 1)), n)

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    def merge(self, indices: Iterable[int]) -> "OrderedPartition":
        """Merge the blocks at the given positions (0-based)."""
        idx = sorted(set(indices))
        if len(idx) < 2:
            raise OutOfRange("need at least two blocks to merge")
        if idx[0] < 0 or idx[-1] >= len(self.blocks):
            raise OutOfRange("block index out of range")
        merged = frozenset().union(*(self.blocks[i] for i in idx))
        chosen = set(idx)
        out = []
        for pos, blk in enumerate(self.blocks):
            if pos == idx[0]:
                out.append(merged)       # keeps least-element order: the
            elif pos not in chosen:      # merged block inherits the smallest min
                out.append(blk)
        return OrderedPartition(tuple(out), self.n)

    def canonical(self) -> tuple[tuple[int, ...], ...]:
        """Hashable normal form, for counting partition frequencies."""
        return tuple(tuple(sorted(b)) for b in self.blocks)


def restrict(partition: OrderedPartition, m: int) -> OrderedPartition:
    """Restriction to {1..m}: intersect blocks, drop the empty ones."""
    if not 1 <= m <= partition.n:
        raise OutOfRange(f"m={m} outside 1..{partition.n}")
    blocks = []
    for blk in partition.blocks:
        cut = frozenset(x for x in blk if x <= m)
        if cut:
            blocks.append(cut)
    return OrderedPartition(tuple(blocks), m)


# --------------------------------------------------------------------------
# rate tables
# --------------------------------------------------------------------------

class RateTable:
    """Merge rates rate(b, k) for 2 <= k <= b <= max_blocks.

    The table also serves the lookdown construction: multi_rate(n, k) strips
    the atom-at-zero contribution, leaving the per-subset birth rate of the
    jump part of the measure.
    """

    def __init__(self, measure: LambdaMeasure, max_blocks: int, tol: float,
                 method: str, lam: np.ndarray):
        self.measure = measure
        self.max_blocks = max_blocks
        self.tol = tol
        self.method = method
        self.lam = lam                       # lam[b, k]; 0 outside the triangle
        self.max_consistency_residual = self._consistency_residual()
        self._totals: np.ndarray | None = None
        self._decreases: np.ndarray | None = None
        self._merge_cdfs: dict[int, np.ndarray] = {}

    def _consistency_residual(self) -> float:
        B = self.max_blocks
        if B < 3:
            return 0.0
        worst = 0.0
        for b in range(2, B):
            k = np.arange(2, b + 1)
            res = self.lam[b, k] - self.lam[b + 1, k] - self.lam[b + 1, k + 1]
            worst = max(worst, float(np.max(np.abs(res))))
        return worst

    def _check_n(self, n: int):
        if not 2 <= n <= self.max_blocks:
            raise OutOfRange(f"n={n} outside 2..{self.max_blocks}")

    def rate(self, b: int, k: int) -> float:
        self._check_n(b)
        if not 2 <= k <= b:
            raise OutOfRange(f"k={k} outside 2..{b}")
        return float(self.lam[b, k])

    def multi_rate(self, n: int, k: int) -> float:
        """Per-subset birth rate with the atom at 0 removed."""
        val = self.rate(n, k)
        if k == 2:
            val -= self.measure.atom0
        return max(val, 0.0)

    def _weights_row(self, b: int) -> np.ndarray:
        """w[k] = C(b, k) * rate(b, k) for k = 2..b, via logs."""
        k = np.arange(2, b + 1)
        lam = self.lam[b, 2:b + 1]
        out = np.zeros(b - 1)
        pos = lam > 0
        if np.any(pos):
            out[pos] = np.exp(log_binom(b, k[pos]) + np.log(lam[pos]))
        return out

    def _fill_sums(self):
        B = self.max_blocks
        totals = np.zeros(B + 1)
        decs = np.zeros(B + 1)
        for b in range(2, B + 1):
            w = self._weights_row(b)
            totals[b] = w.sum()
            decs[b] = ((np.arange(2, b + 1) - 1) * w).sum()
        self._totals = totals
        self._decreases = decs

    def total_rate(self, n: int) -> float:
        self._check_n(n)
        if self._totals is None:
            self._fill_sums()
        return float(self._totals[n])

    def decrease_rate(self, n: int) -> float:
        self._check_n(n)
        if self._decreases is None:
            self._fill_sums()
        return float(self._decreases[n])

    def merge_size_cdf(self, b: int) -> np.ndarray:
        """Unnormalized cumulative weights over merge sizes k = 2..b."""
        self._check_n(b)
        got = self._merge_cdfs.get(b)
        if got is None:
            got = np.cumsum(self._weights_row(b))
            self._merge_cdfs[b] = got
        return got


def _closed_form_lam(measure: LambdaMeasure, B: int) -> np.ndarray | None:
    lam = np.zeros((B + 2, B + 2))
    if measure.family is Family.KINGMAN:
        lam[2:B + 1, 2] = measure.atom0
        return lam[:B + 1, :B + 1]
    if measure.family is Family.UNIFORM:
        for b in range(2, B + 1):
            k = np.arange(2, b + 1)
            lam[b, 2:b + 1] = np.exp(gammaln(k - 1) + gammaln(b - k + 1)
                                     - gammaln(b))
        return lam[:B + 1, :B + 1]
    if measure.family is Family.BETA:
        beta = measure.beta
        norm = betaln(2.0 - beta, beta)
        for b in range(2, B + 1):
            k = np.arange(2, b + 1)
            lam[b, 2:b + 1] = np.exp(betaln(k - beta, b - k + beta) - norm)
        return lam[:B + 1, :B + 1]
    return None


def _sampling_integrand(b: int, k: int):
    def f(x):
        x = np.asarray(x, dtype=float)
        return np.power(x, k - 2) * np.power(1.0 - x, b - k)
    return f


def build_rate_table(measure: LambdaMeasure, max_blocks: int,
                     tol: float = DEFAULT_TOL,
                     method: str = "auto") -> RateTable:
    """Tabulate rate(b, k) for all 2 <= k <= b <= max_blocks.

    method: "auto" picks the closed form for named families and falls back
    to quadrature; "quadrature" forces numeric integration; "closed" demands
    a closed form and raises if none exists.
    """
    if max_blocks < 2:
        raise OutOfRange("max_blocks must be >= 2")
    if method not in ("auto", "closed", "quadrature"):
        raise OutOfRange(f"unknown method {method!r}")

    lam = None
    used = method
    if method in ("auto", "closed"):
        lam = _closed_form_lam(measure, max_blocks)
        if lam is None and method == "closed":
            raise OutOfRange(f"no closed form for family {measure.family}")
        used = "closed" if lam is not None else "quadrature"
    if lam is None:
        B = max_blocks
        lam = np.zeros((B + 1, B + 1))
        for b in range(2, B + 1):
            for k in range(2, b + 1):
                lam[b, k] = moment_integral(measure,
                                            _sampling_integrand(b, k), tol)
    return RateTable(measure, max_blocks, tol, used, lam)


def total_rate(table: RateTable, n: int) -> float:
    """Total jump rate of the coalescent started from n blocks."""
    return table.total_rate(n)


def decrease_rate(table: RateTable, n: int) -> float:
    """Expected instantaneous drop of the block count from n blocks."""
    return table.decrease_rate(n)


# --------------------------------------------------------------------------
# paths
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CoalescentEvent:
    time: float
    merged_positions: tuple[int, ...]    # 0-based positions of merged blocks
    partition: OrderedPartition          # state right after the merge


@dataclass
class CoalescentPath:
    """Right-continuous partition-valued path on [0, horizon]."""

    initial: OrderedPartition
    horizon: float
    events: list[CoalescentEvent] = field(default_factory=list)
    stalled_at: float | None = None      # set when all rates vanished early

    def state_at(self, t: float) -> OrderedPartition:
        if t < 0 or t > self.horizon:
            raise OutOfRange(f"t={t} outside [0, {self.horizon}]")
        times = [e.time for e in self.events]
        pos = bisect.bisect_right(times, t)
        return self.initial if pos == 0 else self.events[pos - 1].partition

    def block_count_at(self, t: float) -> int:
        return self.state_at(t).block_count


@dataclass(frozen=True)
class BlockCountPath:
    """Step function t -> number of blocks, right-continuous."""

    times: np.ndarray      # starts at 0.0
    counts: np.ndarray

    def __call__(self, t: float) -> int:
        pos = int(np.searchsorted(self.times, t, side="right")) - 1
        if pos < 0:
            raise OutOfRange("t before path start")
        return int(self.counts[pos])


def simulate_coalescent(table: RateTable, n: int, horizon: float,
                        rng: np.random.Generator | int) -> CoalescentPath:
    """Exact simulation from singletons of {1..n} up to the horizon.

    Holding times are exponential in the total rate; the merge size is drawn
    proportional to C(b, k) rate(b, k); the merging blocks are a uniform
    k-subset.  If every rate vanishes before the horizon the path stops
    early and a DegenerateRatesWarning is emitted.
    """
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    table._check_n(n)
    if horizon < 0:
        raise OutOfRange("horizon must be nonnegative")

    state = OrderedPartition.singletons(n)
    path = CoalescentPath(initial=state, horizon=horizon)
    t = 0.0
    while state.block_count >= 2:
        b = state.block_count
        rate = table.total_rate(b)
        if rate <= 0.0:
            warnings.warn(f"all merge rates vanished at {b} blocks",
                          DegenerateRatesWarning)
            path.stalled_at = t
            break
        t += rng.exponential(1.0 / rate)
        if t > horizon:
            break
        cdf = table.merge_size_cdf(b)
        k = 2 + int(np.searchsorted(cdf, rng.uniform(0.0, cdf[-1]),
                                    side="right"))
        k = min(k, b)
        chosen = rng.choice(b, size=k, replace=False)
        state = state.merge(chosen.tolist())
        path.events.append(CoalescentEvent(t, tuple(sorted(chosen.tolist())),
                                           state))
    return path


def block_count_path(path: CoalescentPath) -> BlockCountPath:
    times = [0.0] + [e.time for e in path.events]
    counts = [path.initial.block_count] + [e.partition.block_count
                                           for e in path.events]
    return BlockCountPath(np.asarray(times), np.asarray(counts, dtype=int))


def path_rows(path: CoalescentPath, replicate: int) -> list[tuple]:
    """CSV rows (replicate, event_index, time, block_count_after, merge_size)."""
    rows = []
    for i, ev in enumerate(path.events):
        rows.append((replicate, i, ev.time, ev.partition.block_count,
                     len(ev.merged_positions)))
    return rows
