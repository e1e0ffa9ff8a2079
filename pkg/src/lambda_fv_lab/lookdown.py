"""Event-driven simulation of the n-level lookdown particle system.

Levels 1..n carry particles moving as independent d-dimensional Brownian
motions between birth events.  A birth event copies the position of its
lowest participating level to the other participants and shifts the
remaining levels upward, discarding anything pushed past n.  Single births
(one ordered pair) come from the atom at 0 of the driving measure; multi
births are the restriction to [n] of the coin-thinned jump process, which
fires each specific k-subset of levels at the jump part of rate(n, k).

Genealogies, the recovered coalescent, and spatial diagnostics are all
replays of the immutable event log.  Positions are realized lazily in one
of two exact ways: a per-event motion record (small systems; supports
queries at arbitrary times and left limits), or a windowed streaming pass
that tracks each lineage's ancestor level and accumulated displacement
(large systems; positions at sorted snapshot grids).  The two realizations
agree in law; which one serves a query is a documented budget policy.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.special import betaln, gammaln

from .coalescent import OrderedPartition, log_binom
from .errors import OutOfRange, RateOverflow
from .harness_streams import stream_for
from .measures import Family, LambdaMeasure, moment_integral
from .support import PointCloud

DEFAULT_MAX_EVENTS = 5_000_000
# per-event motion record budget, in stored floats (2 arrays of E*n*d)
DEFAULT_MOTION_BUDGET = 20_000_000


def rate_row(measure: LambdaMeasure, n: int, tol: float = 1e-10) -> np.ndarray:
    """lambda_{n,k} for k = 0..n (entries below k=2 are zero)."""
    if n < 1:
        raise OutOfRange("n must be >= 1")
    row = np.zeros(n + 1)
    if n < 2:
        return row
    k = np.arange(2, n + 1)
    if measure.family is Family.KINGMAN:
        row[2] = measure.atom0
    elif measure.family is Family.UNIFORM:
        row[2:] = np.exp(gammaln(k - 1) + gammaln(n - k + 1) - gammaln(n))
    elif measure.family is Family.BETA:
        b = measure.beta
        row[2:] = np.exp(betaln(k - b, n - k + b) - betaln(2.0 - b, b))
    else:
        for kk in range(2, n + 1):
            def f(x, _k=kk):
                x = np.asarray(x, dtype=float)
                return np.power(x, _k - 2) * np.power(1.0 - x, n - _k)
            row[kk] = moment_integral(measure, f, tol)
    return row


@dataclass(frozen=True)
class BirthEvent:
    """One reproduction event. participants are 1-based levels, sorted."""

    time: float
    participants: tuple[int, ...]
    single: bool

    def __post_init__(self):
        if len(self.participants) < 2:
            raise OutOfRange("a birth event involves at least two levels")
        if self.single and len(self.participants) != 2:
            raise OutOfRange("single births have exactly two levels")

    @property
    def kind(self) -> str:
        return "single" if self.single else "multi"

    @property
    def parent_level(self) -> int:
        return self.participants[0]


@dataclass(frozen=True)
class Lineage:
    """Ancestral level trace of one particle observed at time s.

    level_at(t) is nondecreasing and left-continuous in t with
    level_at(s) = i; jump_times are the times the trace changes.
    """

    level: int
    time: float
    jump_times: tuple[float, ...]      # ascending
    values: tuple[int, ...]            # values[j] on (jump_times[j-1], jump_times[j]]
    _traj: "LookdownTrajectory" = field(repr=False, compare=False)

    def level_at(self, t: float) -> int:
        if t < 0 or t > self.time:
            raise OutOfRange(f"t={t} outside [0, {self.time}]")
        return self.values[bisect.bisect_left(self.jump_times, t)]

    def position_at(self, t: float) -> np.ndarray:
        """Ancestor position X_{L(t)}(t-), from the motion record."""
        pos = self._traj._positions_eager(t, side="left")
        return pos[self.level_at(t) - 1].copy()


@dataclass
class RecoveredPartitionPath:
    """Partition path: levels share a block iff they share an ancestor."""

    n: int
    T: float
    jump_times: list[float]                 # ascending
    partitions: list[OrderedPartition]      # state at/after each jump

    def at(self, t: float) -> OrderedPartition:
        if t < 0 or t > self.T:
            raise OutOfRange(f"t={t} outside [0, {self.T}]")
        pos = bisect.bisect_right(self.jump_times, t)
        if pos == 0:
            return OrderedPartition.singletons(self.n)
        return self.partitions[pos - 1]

    def block_count_at(self, t: float) -> int:
        return self.at(t).block_count


class _MotionRecord:
    """Per-event positions with exact left limits and bridge refinement."""

    def __init__(self, times: list[float], left: list[np.ndarray],
                 post: list[np.ndarray], bridge_rng: np.random.Generator):
        self.times = times          # ascending, starts at 0.0, ends at T
        self.left = left            # left[i]: positions just before times[i]
        self.post = post            # post[i]: positions at times[i]
        self._rng = bridge_rng

    def positions_at(self, t: float, side: str) -> np.ndarray:
        idx = bisect.bisect_left(self.times, t)
        if idx < len(self.times) and self.times[idx] == t:
            return self.left[idx] if side == "left" else self.post[idx]
        # refine: conditional Gaussian bridge between the two breakpoints
        a, b = idx - 1, idx
        ta, tb = self.times[a], self.times[b]
        span = tb - ta
        frac = (t - ta) / span
        mean = self.post[a] + frac * (self.left[b] - self.post[a])
        sd = math.sqrt(frac * (tb - t))
        pos = mean + sd * self._rng.standard_normal(mean.shape)
        self.times.insert(idx, t)
        self.left.insert(idx, pos)
        self.post.insert(idx, pos)
        return pos


class LookdownTrajectory:
    """Immutable event log plus lazily realized Brownian motion."""

    def __init__(self, measure: LambdaMeasure, n: int, d: int, T: float,
                 init: np.ndarray, all_at_origin: bool, seed: int,
                 ev_times: np.ndarray, flat: np.ndarray, offs: np.ndarray,
                 is_single: np.ndarray, total_rate: float,
                 motion_budget: int = DEFAULT_MOTION_BUDGET):
        self.measure = measure
        self.n = n
        self.d = d
        self.horizon = T
        self.seed = seed
        self.initial_positions = init
        self.all_at_origin = all_at_origin
        self.total_event_rate = total_rate
        self.motion_budget = motion_budget
        self._ev_times = ev_times
        self._flat = flat                   # 0-based participant levels
        self._offs = offs
        self._is_single = is_single
        second = np.full(ev_times.size, n, dtype=np.int64)
        if ev_times.size:
            second = flat[offs[:-1] + 1].astype(np.int64)
        self._second = second
        self._motion: _MotionRecord | None = None
        self._snap_times: list[float] = [0.0]
        self._snap_pos: list[np.ndarray] = [init.copy()]
        self._snap_rng: np.random.Generator | None = None
        self._noise_counter = 0

    # -- event log ---------------------------------------------------------

    @property
    def event_count(self) -> int:
        return int(self._ev_times.size)

    def event(self, idx: int) -> BirthEvent:
        if not 0 <= idx < self.event_count:
            raise OutOfRange(f"event index {idx} out of range")
        parts = self._flat[self._offs[idx]:self._offs[idx + 1]]
        return BirthEvent(float(self._ev_times[idx]),
                          tuple(int(p) + 1 for p in parts),
                          bool(self._is_single[idx]))

    def iter_events(self) -> Iterator[BirthEvent]:
        for idx in range(self.event_count):
            yield self.event(idx)

    def _event_slice(self, t_lo: float, t_hi: float) -> tuple[int, int]:
        """Indices of events with time in (t_lo, t_hi]."""
        lo = int(np.searchsorted(self._ev_times, t_lo, side="right"))
        hi = int(np.searchsorted(self._ev_times, t_hi, side="right"))
        return lo, hi

    # -- backward window pass ------------------------------------------------

    def _walk_window(self, t_lo: float, t_hi: float,
                     rng: np.random.Generator | None
                     ) -> tuple[np.ndarray, np.ndarray | None, int]:
        """Trace all n lineages from t_hi back to t_lo.

        Returns (anc, disp, N): anc[v] is the 0-based ancestor level at t_lo
        of the particle at level v at t_hi; disp[v] = X_v(t_hi) -
        X_{anc[v]}(t_lo-) when rng is given (None skips the noise); N is the
        number of distinct ancestor levels (always the initial run 0..N-1).

        Only events whose second-lowest participant is currently an ancestor
        level can change the trace; everything else is skipped.  Brownian
        displacement is accumulated per ancestor level over the stretches
        between such events, so the cost scales with coalescences, not with
        the raw event count.
        """
        n, d = self.n, self.d
        e_lo, e_hi = self._event_slice(t_lo, t_hi)
        A = np.arange(n, dtype=np.int64)
        D = np.zeros((n, d)) if rng is not None else None
        N = n
        sec = self._second
        times = self._ev_times
        flat, offs = self._flat, self._offs
        stretch = np.full(n, t_hi) if rng is not None else None
        buf = np.zeros((n, d)) if rng is not None else None
        for e in range(e_hi - 1, e_lo - 1, -1):
            j2 = sec[e]
            if j2 >= N:
                continue
            parts = flat[offs[e]:offs[e + 1]].astype(np.int64)
            lo = int(parts[0])
            if rng is not None:
                u = times[e]
                vals = np.concatenate((np.array([lo], dtype=np.int64),
                                       np.arange(j2, N, dtype=np.int64)))
                draws = rng.standard_normal((vals.size, d))
                draws *= np.sqrt(stretch[vals] - u)[:, None]
                buf[vals] = draws
                D += buf[A]
                buf[vals] = 0.0
                stretch[vals] = u
            occ = parts[parts < N]
            src = np.arange(N, dtype=np.int64)
            if j2 < N:
                hi_vals = np.arange(j2, N, dtype=np.int64)
                shift = np.searchsorted(occ, hi_vals, side="left") - 1
                src[j2:] = hi_vals - shift
            src[occ] = lo
            A = src[A]
            N -= int(occ.size) - 1
        if rng is not None:
            draws = rng.standard_normal((N, d))
            draws *= np.sqrt(stretch[:N] - t_lo)[:, None]
            buf[:N] = draws
            D += buf[A]
            buf[:N] = 0.0
        return A, D, N

    def ancestor_levels(self, r: float, s: float) -> np.ndarray:
        """1-based ancestor level at r for each level at s (events in (r, s])."""
        self._check_time(r)
        self._check_time(s)
        if r > s:
            raise OutOfRange("need r <= s")
        A, _, _ = self._walk_window(r, s, None)
        return A + 1

    def dyadic_base_maps(self, depth: int
                         ) -> list[tuple[np.ndarray, np.ndarray]]:
        """(ancestor map, displacement) over each window of width 2^-depth.

        Windows are independent realizations of the motion conditional on
        the event log; each call consumes fresh noise from the trajectory's
        keyed stream (reproducible for a fixed call sequence).
        """
        width = 2.0 ** (-depth)
        count = int(math.floor(self.horizon / width + 1e-9))
        if count < 1:
            raise OutOfRange("horizon shorter than one dyadic window")
        rng = self._grid_rng()
        out: list[tuple[np.ndarray, np.ndarray]] = [None] * count  # type: ignore
        for w in range(count - 1, -1, -1):
            A, D, _ = self._walk_window(w * width, (w + 1) * width, rng)
            out[w] = (A, D)
        return out

    def _grid_rng(self) -> np.random.Generator:
        rng = stream_for(self.seed, self._noise_counter, "envelope")
        self._noise_counter += 1
        return rng

    # -- positions -----------------------------------------------------------

    def _check_time(self, t: float):
        if t < 0 or t > self.horizon + 1e-12:
            raise OutOfRange(f"t={t} outside [0, {self.horizon}]")

    def eager_motion_cost(self) -> int:
        return 2 * (self.event_count + 2) * self.n * self.d

    def motion(self) -> _MotionRecord:
        """Per-event motion record; raises RateOverflow beyond the budget."""
        if self._motion is None:
            cost = self.eager_motion_cost()
            if cost > self.motion_budget:
                raise RateOverflow(
                    f"motion record needs {cost} floats, budget is "
                    f"{self.motion_budget}; use the grid diagnostics "
                    f"(snapshots, envelopes) at this scale")
            self._build_motion()
        return self._motion

    def _build_motion(self):
        n, d = self.n, self.d
        rng = stream_for(self.seed, 0, "brownian")
        bridge = stream_for(self.seed, 0, "bridge")
        times = [0.0]
        left = [self.initial_positions.copy()]
        post = [self.initial_positions.copy()]
        pos = self.initial_positions.copy()
        t_prev = 0.0
        check = self.event_count <= 10_000
        for idx in range(self.event_count):
            t = float(self._ev_times[idx])
            pos = pos + math.sqrt(t - t_prev) * rng.standard_normal((n, d))
            parts = self._flat[self._offs[idx]:self._offs[idx + 1]]
            src = _forward_source_map(parts.astype(np.int64), n)
            new_pos = pos[src]
            if check:
                lo = int(parts[0])
                assert np.array_equal(new_pos[parts],
                                      np.broadcast_to(pos[lo],
                                                      (parts.size, d)))
            times.append(t)
            left.append(pos)
            post.append(new_pos)
            pos = new_pos
            t_prev = t
        pos = pos + math.sqrt(self.horizon - t_prev) \
            * rng.standard_normal((n, d))
        times.append(self.horizon)
        left.append(pos)
        post.append(pos.copy())
        self._motion = _MotionRecord(times, left, post, bridge)

    def _positions_eager(self, t: float, side: str = "right") -> np.ndarray:
        self._check_time(t)
        return self.motion().positions_at(t, side)

    def positions_at(self, t: float) -> np.ndarray:
        """All n level positions at time t (one exact realization).

        Small systems use the per-event motion record (any t, any order).
        Beyond the motion budget, positions come from the streaming pass,
        which realizes snapshots left to right: queries must then arrive in
        nondecreasing time order (grid diagnostics always do).
        """
        self._check_time(t)
        if self._motion is not None \
                or self.eager_motion_cost() <= self.motion_budget:
            return self._positions_eager(t).copy()
        pos = np.searchsorted(self._snap_times, t)
        if pos < len(self._snap_times) and self._snap_times[pos] == t:
            return self._snap_pos[pos].copy()
        if t < self._snap_times[-1]:
            raise OutOfRange(
                f"snapshot at t={t} precedes the realized frontier "
                f"{self._snap_times[-1]}; at this scale snapshots must be "
                f"queried in nondecreasing time order")
        if self._snap_rng is None:
            self._snap_rng = stream_for(self.seed, 0, "snapshots")
        A, D, _ = self._walk_window(self._snap_times[-1], t, self._snap_rng)
        new = self._snap_pos[-1][A] + D
        self._snap_times.append(t)
        self._snap_pos.append(new)
        return new.copy()

    def snapshot_positions(self, ts: Sequence[float]) -> list[np.ndarray]:
        return [self.positions_at(t) for t in sorted(ts)]


def _forward_source_map(parts: np.ndarray, n: int) -> np.ndarray:
    """src[v] = pre-event level whose position lands at level v."""
    lo = int(parts[0])
    j2 = int(parts[1])
    src = np.arange(n, dtype=np.int64)
    hi_vals = np.arange(j2, n, dtype=np.int64)
    occ = parts[parts < n]
    shift = np.searchsorted(occ, hi_vals, side="left") - 1
    src[j2:] = hi_vals - shift
    src[occ] = lo
    return src


# --------------------------------------------------------------------------
# simulation
# --------------------------------------------------------------------------

def simulate_lookdown(measure: LambdaMeasure, n: int, d: int, T: float,
                      init="all-at-origin", rng_seed: int = 0,
                      max_events: int = DEFAULT_MAX_EVENTS,
                      motion_budget: int = DEFAULT_MOTION_BUDGET,
                      tol: float = 1e-10) -> LookdownTrajectory:
    """Simulate the n-level lookdown system on [0, T].

    Event times form a Poisson process whose rate is the total merge rate
    of n blocks; each event is a single birth (a uniform ordered pair, from
    the atom at 0) or a multi birth (a k-subset with k drawn proportional
    to C(n,k) times the jump part of rate(n,k), then a uniform subset).
    init may be "all-at-origin" or an (n, d) array, which should be
    exchangeable for the law-level guarantees to apply.
    """
    if n < 1 or d < 1:
        raise OutOfRange("need n >= 1 and d >= 1")
    if T <= 0:
        raise OutOfRange("T must be positive")

    if isinstance(init, str):
        if init != "all-at-origin":
            raise OutOfRange(f"unknown init {init!r}")
        init_pos = np.zeros((n, d))
        at_origin = True
    else:
        init_pos = np.array(init, dtype=float)
        if init_pos.shape != (n, d):
            raise OutOfRange(f"init must have shape ({n}, {d})")
        at_origin = bool(np.all(init_pos == 0.0))

    row = rate_row(measure, n, tol)
    single_total = measure.atom0 * n * (n - 1) / 2.0
    k_vals = np.arange(2, n + 1)
    multi_w = np.zeros(max(n - 1, 0))
    if n >= 2:
        jump = row[2:].copy()
        jump[0] = max(jump[0] - measure.atom0, 0.0)
        pos = jump > 0
        if np.any(pos):
            multi_w[pos] = np.exp(log_binom(n, k_vals[pos])
                                  + np.log(jump[pos]))
    multi_total = float(multi_w.sum())
    total = single_total + multi_total

    expected = total * T
    if expected > max_events:
        raise RateOverflow(
            f"expected event count {expected:.3g} exceeds the budget "
            f"{max_events}; lower n, T, or the measure's intensity")

    rng_times = stream_for(rng_seed, 0, "event_times")
    rng_subset = stream_for(rng_seed, 0, "subset_choice")

    count = int(rng_times.poisson(expected)) if expected > 0 else 0
    if count > max_events * 1.25 + 16:
        raise RateOverflow(f"drew {count} events against budget {max_events}")
    times = np.sort(rng_times.uniform(0.0, T, size=count))

    if count and total > 0:
        is_single = rng_subset.random(count) < (single_total / total)
    else:
        is_single = np.zeros(count, dtype=bool)
    sizes = np.full(count, 2, dtype=np.int64)
    midx = np.nonzero(~is_single)[0]
    if midx.size:
        probs = multi_w / multi_total
        sizes[midx] = rng_subset.choice(k_vals, size=midx.size, p=probs)

    offs = np.zeros(count + 1, dtype=np.int64)
    np.cumsum(sizes, out=offs[1:])
    flat = np.zeros(int(offs[-1]), dtype=np.int32)

    pair_idx = np.nonzero(sizes == 2)[0]
    if pair_idx.size:
        i = rng_subset.integers(0, n, size=pair_idx.size)
        j = rng_subset.integers(0, n - 1, size=pair_idx.size)
        j = j + (j >= i)
        lo = np.minimum(i, j)
        hi = np.maximum(i, j)
        flat[offs[pair_idx]] = lo
        flat[offs[pair_idx] + 1] = hi
    for e in np.nonzero(sizes > 2)[0]:
        parts = np.sort(rng_subset.choice(n, size=int(sizes[e]),
                                          replace=False))
        flat[offs[e]:offs[e + 1]] = parts

    return LookdownTrajectory(measure, n, d, T, init_pos, at_origin,
                              rng_seed, times, flat, offs, is_single, total,
                              motion_budget=motion_budget)


# --------------------------------------------------------------------------
# genealogy and the recovered coalescent
# --------------------------------------------------------------------------

def genealogy(traj: LookdownTrajectory, i: int, s: float) -> Lineage:
    """Ancestral level trace of the level-i particle observed at time s.

    Replaying the event log backwards: a participant drops to the lowest
    participating level, and a level above two or more participants shifts
    down by one less than that count.  The trace applies the event at its
    own time (left continuity fixes the value at the jump instant).
    """
    if not 1 <= i <= traj.n:
        raise OutOfRange(f"level {i} outside 1..{traj.n}")
    traj._check_time(s)
    e_hi = int(np.searchsorted(traj._ev_times, s, side="right"))
    cur = i - 1
    jumps: list[float] = []
    vals: list[int] = [i]
    flat, offs = traj._flat, traj._offs
    sec = traj._second
    for e in range(e_hi - 1, -1, -1):
        if sec[e] > cur:
            continue                    # cannot move a level below it
        parts = flat[offs[e]:offs[e + 1]]
        lo = int(parts[0])
        if cur > lo:
            pos = int(np.searchsorted(parts, cur))
            if pos < parts.size and parts[pos] == cur:
                nxt = lo
            else:
                nxt = cur - (pos - 1) if pos >= 2 else cur
            if nxt != cur:
                jumps.append(float(traj._ev_times[e]))
                vals.append(nxt + 1)
                cur = nxt
    jumps.reverse()
    vals.reverse()
    return Lineage(i, s, tuple(jumps), tuple(vals), traj)


def recovered_coalescent(traj: LookdownTrajectory) -> RecoveredPartitionPath:
    """Partition path grouping levels by their common ancestor level.

    Built in one backward sweep from the horizon; the partition at
    coalescent time t groups i and j iff the levels observed at the horizon
    share an ancestor level at forward time T - t.  Blocks arrive ordered
    by ancestor level, which matches the least-element order.
    """
    n, T = traj.n, traj.horizon
    A = np.arange(n, dtype=np.int64)
    N = n
    jump_times: list[float] = []
    partitions: list[OrderedPartition] = []
    flat, offs = traj._flat, traj._offs
    sec = traj._second
    for e in range(traj.event_count - 1, -1, -1):
        if sec[e] >= N:
            continue
        parts = flat[offs[e]:offs[e + 1]].astype(np.int64)
        occ = parts[parts < N]
        lo = int(parts[0])
        j2 = int(occ[1])
        src = np.arange(N, dtype=np.int64)
        hi_vals = np.arange(j2, N, dtype=np.int64)
        shift = np.searchsorted(occ, hi_vals, side="left") - 1
        src[j2:] = hi_vals - shift
        src[occ] = lo
        A = src[A]
        N -= int(occ.size) - 1
        blocks: list[list[int]] = [[] for _ in range(N)]
        for lvl in range(n):
            blocks[A[lvl]].append(lvl + 1)
        part = OrderedPartition(tuple(frozenset(b) for b in blocks), n)
        # ancestor level order must agree with least-element order
        assert all(min(b) < min(c)
                   for b, c in zip(part.blocks[:-1], part.blocks[1:]))
        jump_times.append(T - float(traj._ev_times[e]))
        partitions.append(part)
    return RecoveredPartitionPath(n, T, jump_times, partitions)


# --------------------------------------------------------------------------
# spatial diagnostics
# --------------------------------------------------------------------------

def dislocation(traj: LookdownTrajectory, r: float, s: float) -> float:
    """Maximal distance between a time-s particle and its time-r ancestor.

    H(r, s) = max over levels v of |X_v(s) - X_a(r-)| with a the ancestor
    level of v; H(r, r) = 0 by convention.  Requires the per-event motion
    record, so all H evaluations on one trajectory share one realization
    (the subadditivity H(r,s) <= H(r,t) + H(t,s) then holds pathwise).
    """
    traj._check_time(r)
    traj._check_time(s)
    if r > s:
        raise OutOfRange("need r <= s")
    if r == s:
        return 0.0
    pos_s = traj._positions_eager(s, side="right")
    pos_r = traj._positions_eager(r, side="left")
    A, _, _ = traj._walk_window(r, s, None)
    gaps = pos_s - pos_r[A]
    return float(np.max(np.linalg.norm(gaps, axis=1)))


def empirical_support(traj: LookdownTrajectory, t: float) -> PointCloud:
    """The n level positions at time t, as a point cloud."""
    traj._check_time(t)
    pts = traj.positions_at(t)
    return PointCloud(points=pts, d=traj.d, label=(traj.seed, float(t)))


def range_union(traj_set: Sequence[LookdownTrajectory],
                window: tuple[float, float],
                snapshot_count: int) -> PointCloud:
    """Union of level positions over equally spaced snapshot times.

    Snapshots cover [t0, t1): times t0 + k*(t1-t0)/snapshot_count.  A
    zero-length window with one snapshot reduces to empirical_support(t0).
    """
    t0, t1 = float(window[0]), float(window[1])
    if snapshot_count < 1:
        raise OutOfRange("snapshot_count must be >= 1")
    if not traj_set:
        raise OutOfRange("empty trajectory set")
    if t0 > t1:
        raise OutOfRange("window must satisfy t0 <= t1")
    times = [t0 + (t1 - t0) * k / snapshot_count
             for k in range(snapshot_count)]
    chunks = []
    d = traj_set[0].d
    for traj in traj_set:
        traj._check_time(t1)
        for pos in traj.snapshot_positions(times):
            chunks.append(pos)
    return PointCloud(points=np.vstack(chunks), d=d,
                      label=("range", t0, t1))


# --------------------------------------------------------------------------
# CSV helpers
# --------------------------------------------------------------------------

def snapshot_rows(traj: LookdownTrajectory, replicate: int,
                  ts: Sequence[float]) -> list[tuple]:
    """Rows (replicate, t, level, x_1..x_d) at the given times."""
    rows = []
    for t in sorted(ts):
        pos = traj.positions_at(t)
        for lvl in range(traj.n):
            rows.append((replicate, float(t), lvl + 1,
                         *(float(x) for x in pos[lvl])))
    return rows


def event_rows(traj: LookdownTrajectory) -> list[tuple]:
    """Rows (time, kind, levels, parent) for the whole event log."""
    rows = []
    for ev in traj.iter_events():
        rows.append((ev.time, ev.kind,
                     "|".join(str(p) for p in ev.participants),
                     ev.parent_level))
    return rows
