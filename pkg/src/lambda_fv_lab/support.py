"""Geometric diagnostics on simulated supports.

Everything here is a pure function of immutable trajectories or point
clouds: the modulus function h, dyadic modulus-of-continuity envelopes,
support growth containment, box-counting dimension, radius profiles from a
point start, local mass scaling, and the Gaussian tail bound used by the
envelope theory.  Envelope statistics are computed from windowed ancestor
maps (trajectory.dyadic_base_maps) composed exactly across scales, so the
cost per replicate is one backward sweep of the event log.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (DegenerateCloud, DomainError, GridTooCoarse, OutOfRange,
                     WrongInitialization)
from .harness_streams import stream_for


# --------------------------------------------------------------------------
# basic types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PointCloud:
    """Finite multiset of d-vectors standing in for a support at one time."""

    points: np.ndarray
    d: int
    label: tuple = ()

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.d:
            raise DomainError(f"points must be (N, {self.d})")
        if pts.shape[0] == 0:
            raise DegenerateCloud("empty point cloud")
        if not np.all(np.isfinite(pts)):
            raise DomainError("point cloud contains non-finite coordinates")
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class DimensionEstimate:
    """Box-counting regression: slope of log N(eps) against log(1/eps)."""

    scales: np.ndarray          # decreasing box sizes
    counts: np.ndarray          # occupied boxes per scale
    slope: float
    ci: tuple[float, float]
    d: int

    def rows(self) -> list[tuple]:
        return [(float(s), int(c), self.slope, self.ci[0], self.ci[1])
                for s, c in zip(self.scales, self.counts)]


@dataclass(frozen=True)
class ModulusReport:
    """Per-scale envelope constants c_hat(delta) with the theory constant.

    ratios[rep, scale] is that replicate's max of H(r, s)/h(delta) over all
    dyadic windows (r, s] of width delta; c_hat is the max over replicates.
    """

    scales: np.ndarray              # decreasing window widths delta
    c_hat: np.ndarray               # max ratio per scale
    c_theory: float
    pass_fraction: np.ndarray       # per scale: replicates with ratio <= C
    ratios: np.ndarray              # (replicates, scales)
    pair_counts: np.ndarray         # dyadic windows examined per scale
    below_theory: bool              # c_hat <= c_theory at every scale
    bounded_trend: bool             # no growth of c_hat as delta halves
    alpha: float
    d: int

    def rows(self) -> list[tuple]:
        return [(float(s), float(c), self.c_theory,
                 int(p >= 0.95))
                for s, c, p in zip(self.scales, self.c_hat,
                                   self.pass_fraction)]


@dataclass(frozen=True)
class GrowthReport:
    """Smallest containment constants for support growth over [t, t+dt]."""

    t: float
    dt_grid: np.ndarray                  # decreasing
    c_required: np.ndarray               # (replicates, len(dt_grid))
    c_per_replicate: np.ndarray          # max over the grid
    c_theory: float
    within_theory_fraction: float
    bounded_fraction: float
    alpha: float


@dataclass(frozen=True)
class RadiusReport:
    """sup_{u <= t} r_hat(u) / h(t) per replicate on a grid shrinking to 0."""

    t_grid: np.ndarray                   # decreasing
    r_hat: np.ndarray                    # (replicates, len(t_grid))
    ratios: np.ndarray                   # (replicates, len(t_grid))
    bounded_fraction: float

    def rows(self) -> list[tuple]:
        out = []
        for rep in range(self.ratios.shape[0]):
            for t, ratio in zip(self.t_grid, self.ratios[rep]):
                out.append((float(t), float(ratio)))
        return out


@dataclass(frozen=True)
class MassReport:
    """Local mass scaling proxies at sampled atoms of one snapshot."""

    radii: np.ndarray                    # decreasing
    exponent: float
    sample_indices: np.ndarray
    ratios: np.ndarray                   # (samples, radii): fraction / r^exp
    proxy: np.ndarray                    # per-point max over radii
    positive_fraction: float
    increasing_fraction: float           # ratio nondecreasing as r shrinks


# --------------------------------------------------------------------------
# modulus function and the envelope constant
# --------------------------------------------------------------------------

def modulus_h(t: float) -> float:
    """h(t) = sqrt(t log(1/t)), the modulus scale on (0, 1)."""
    if not 0.0 < t < 1.0:
        raise DomainError(f"h is defined on (0, 1), got {t}")
    return math.sqrt(t * math.log(1.0 / t))


def theory_constant(d: int, alpha: float) -> float:
    """Envelope constant C(d, alpha) with C1 pinned just above its infimum.

    C = 2 C1 (1 + sum_l sqrt(2^{1-2l} l)) (1 + sum_k sqrt(2^{1-k} k)),
    C1 = sqrt(2d(3/alpha + 1)) + 1e-6; both series summed until the tail
    is below 1e-12.
    """
    if d < 1:
        raise DomainError("d must be >= 1")
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    c1 = math.sqrt(2.0 * d * (3.0 / alpha + 1.0)) + 1e-6

    def tail_sum(log2_ratio: float) -> float:
        # terms sqrt(2^{1 - m*log2_ratio} * m): ratio of consecutive terms
        # tends to 2^{-log2_ratio/2} < 1, so a term below cutoff bounds the
        # remaining tail by term / (1 - ratio)
        total, m = 0.0, 1
        while True:
            term = math.sqrt(2.0 ** (1.0 - log2_ratio * m) * m)
            total += term
            if term < 2e-13 and m > 4:
                return total
            m += 1

    s_l = tail_sum(2.0)
    s_k = tail_sum(1.0)
    return 2.0 * c1 * (1.0 + s_l) * (1.0 + s_k)


def brownian_tail_bound(d: int, t: float, x: float) -> float:
    """Upper bound for P(sup_{s<=t} |B(s)| > x), clamped to [0, 1]."""
    if d < 1:
        raise DomainError("d must be >= 1")
    if t <= 0 or x <= 0:
        raise DomainError("need t > 0 and x > 0")
    val = math.sqrt(8.0 * d ** 3 * t / math.pi) / x \
        * math.exp(-x * x / (2.0 * d * t))
    return min(max(val, 0.0), 1.0)


def brownian_sup_tail_mc(d: int, t: float, x: float, paths: int,
                         steps: int, rng: np.random.Generator,
                         band: float = 0.85,
                         refine: int = 32) -> tuple[float, float]:
    """Monte Carlo estimate of P(sup_{s<=t} |B(s)| > x).

    d = 1 uses the exact barrier-crossing probability per step (summing the
    two one-sided bridge crossings, a slight overcount that keeps the
    estimate conservative).  d >= 2 refines steps whose endpoints come
    within band*x of the threshold with a sampled bridge of `refine`
    substeps.  Returns (estimate, standard error).
    """
    if d < 1 or t <= 0 or x <= 0 or paths < 1 or steps < 1:
        raise DomainError("bad Monte Carlo parameters")
    dt = t / steps
    hits = 0
    chunk = max(1, min(paths, 8_000_000 // (steps * d)))
    done = 0
    while done < paths:
        m = min(chunk, paths - done)
        inc = rng.standard_normal((m, steps, d)) * math.sqrt(dt)
        pos = np.cumsum(inc, axis=1)
        if d == 1:
            w = pos[:, :, 0]
            crossed = np.max(np.abs(w), axis=1) >= x
            alive = ~crossed
            if np.any(alive):
                a = np.concatenate([np.zeros((m, 1)), w[:, :-1]], axis=1)
                b = w
                # bridge crossing of +x or -x within a step, both ends inside
                e_up = np.clip(-2.0 * (x - a) * (x - b) / dt, None, 0.0)
                e_dn = np.clip(-2.0 * (x + a) * (x + b) / dt, None, 0.0)
                p = np.clip(np.exp(e_up) + np.exp(e_dn), 0.0, 1.0)
                u = rng.random((m, steps))
                bridge_hit = np.any(u < p, axis=1)
                crossed = crossed | (alive & bridge_hit)
            hits += int(np.count_nonzero(crossed))
        else:
            norms = np.linalg.norm(pos, axis=2)
            crossed = np.max(norms, axis=1) >= x
            alive_idx = np.nonzero(~crossed)[0]
            if alive_idx.size:
                prev = np.concatenate(
                    [np.zeros((m, 1)), norms[:, :-1]], axis=1)
                near = np.maximum(norms, prev) >= band * x
                cand_path, cand_step = np.nonzero(near[alive_idx])
                cand_path = alive_idx[cand_path]
                if cand_path.size:
                    start = np.where(
                        cand_step[:, None] == 0, 0.0,
                        pos[cand_path, np.maximum(cand_step - 1, 0)])
                    end = pos[cand_path, cand_step]
                    hit = _bridge_exceeds(start, end, dt, x, refine, rng)
                    flag = np.zeros(m, dtype=bool)
                    np.logical_or.at(flag, cand_path, hit)
                    crossed = crossed | flag
            hits += int(np.count_nonzero(crossed))
        done += m
    p_hat = hits / paths
    se = math.sqrt(max(p_hat * (1.0 - p_hat), 1e-12) / paths)
    return p_hat, se


def _bridge_exceeds(start: np.ndarray, end: np.ndarray, dt: float,
                    x: float, refine: int,
                    rng: np.random.Generator) -> np.ndarray:
    """Whether |bridge| >= x at any of `refine` interior points."""
    m = start.shape[0]
    cur = start.copy()
    out = np.zeros(m, dtype=bool)
    sub = dt / refine
    for j in range(1, refine):
        remain = refine - j + 1
        mean = cur + (end - cur) / remain
        var = sub * (remain - 1) / remain
        cur = mean + math.sqrt(var) * rng.standard_normal(cur.shape)
        out |= np.linalg.norm(cur, axis=1) >= x
    return out


# --------------------------------------------------------------------------
# modulus envelope over dyadic windows
# --------------------------------------------------------------------------

def _compose(early: tuple[np.ndarray, np.ndarray],
             late: tuple[np.ndarray, np.ndarray]
             ) -> tuple[np.ndarray, np.ndarray]:
    """Chain two adjacent windows: (a,b] then (b,c] into (a,c]."""
    a_e, d_e = early
    a_l, d_l = late
    return a_e[a_l], d_l + d_e[a_l]


def modulus_envelope(traj_set, grid_depth: int, alpha: float,
                     min_depth: int = 2) -> ModulusReport:
    """Envelope constants over sliding dyadic windows of widths 2^-m.

    For every m in [min_depth, grid_depth] the pass examines all windows
    (q 2^-grid_depth, q 2^-grid_depth + 2^-m], computes the maximal
    ancestor displacement H over the window, and normalizes by h(2^-m).
    The per-scale maxima are built by exact composition of the base-window
    ancestor maps, so each replicate costs a single backward sweep.
    traj_set may be any iterable (a generator keeps memory flat).
    """
    if min_depth < 2:
        raise OutOfRange("min_depth must be >= 2 so windows stay <= 1/4")
    if grid_depth - min_depth + 1 < 3:
        raise GridTooCoarse("need at least 3 distinct window scales")
    trajs = iter(traj_set)
    try:
        first = next(trajs)
    except StopIteration:
        raise OutOfRange("empty trajectory set") from None
    d = first.d
    T = first.horizon
    width = 2.0 ** (-grid_depth)
    base_count = int(math.floor(T / width + 1e-9))
    levels = grid_depth - min_depth
    if base_count < 2 ** levels:
        raise GridTooCoarse(
            f"horizon {T} holds no window of width 2^-{min_depth}")
    c_theory = theory_constant(d, alpha)
    n_scales = levels + 1
    scales = 2.0 ** (-np.arange(grid_depth, min_depth - 1, -1.0))
    h_vals = np.array([modulus_h(s) for s in scales])
    pair_counts = np.array([base_count - 2 ** j + 1
                            for j in range(n_scales)], dtype=np.int64)

    rows = []
    for traj in itertools.chain([first], trajs):
        if traj.d != d or traj.horizon != T:
            raise OutOfRange("trajectories must share dimension and horizon")
        maps = traj.dyadic_base_maps(grid_depth)
        row = np.zeros(n_scales)
        for j in range(n_scales):
            worst = 0.0
            for _a_map, disp in maps:
                h_max = float(np.max(np.linalg.norm(disp, axis=1)))
                if h_max > worst:
                    worst = h_max
            row[j] = worst / h_vals[j]
            if j < levels:
                step = 2 ** j
                maps = [_compose(maps[q], maps[q + step])
                        for q in range(len(maps) - step)]
        rows.append(row)
    ratios = np.vstack(rows)

    c_hat = ratios.max(axis=0)
    pass_fraction = (ratios <= c_theory).mean(axis=0)
    below = bool(np.all(c_hat <= c_theory))
    # regression of log c_hat on log(1/delta); bounded means no real growth
    xs = np.log(1.0 / scales)
    slope = np.polyfit(xs, np.log(np.maximum(c_hat, 1e-300)), 1)[0]
    bounded = bool(np.isfinite(c_hat).all() and slope <= 0.15)
    # report with the widest window first
    rev = slice(None, None, -1)
    return ModulusReport(scales=scales[rev], c_hat=c_hat[rev],
                         c_theory=c_theory,
                         pass_fraction=pass_fraction[rev],
                         ratios=ratios[:, rev],
                         pair_counts=pair_counts[rev], below_theory=below,
                         bounded_trend=bounded, alpha=alpha, d=d)


# --------------------------------------------------------------------------
# support growth, radius, dimension, mass
# --------------------------------------------------------------------------

def support_growth_check(traj_set, t: float, dt_grid: Sequence[float],
                         alpha: float) -> GrowthReport:
    """Smallest c with supp X(t+dt) inside the c h(dt) halo of supp X(t)."""
    dts = np.sort(np.asarray(list(dt_grid), dtype=float))[::-1]
    if dts.size == 0:
        raise OutOfRange("empty dt grid")
    if np.any(dts < 0):
        raise OutOfRange("dt values must be nonnegative")
    if np.any(dts >= 1):
        raise OutOfRange("dt values must stay below 1 for the modulus h")
    rows = []
    d = None
    c_theory = math.nan
    for traj in traj_set:
        if d is None:
            d = traj.d
            c_theory = theory_constant(d, alpha)
            if t < 0 or t + dts[0] > traj.horizon + 1e-12:
                raise OutOfRange(
                    f"window [t, t+max dt] leaves [0, {traj.horizon}]")
        times = [t] + [t + dt for dt in dts[dts > 0][::-1]]
        snaps = traj.snapshot_positions(times)
        base = snaps[0]
        later = {round(float(u), 15): p
                 for u, p in zip(sorted(times), snaps)}
        row = np.zeros(dts.size)
        for col, dt in enumerate(dts):
            if dt == 0.0:
                continue
            pts = later[round(float(t + dt), 15)]
            nn = cdist(pts, base).min(axis=1)
            row[col] = float(nn.max()) / modulus_h(float(dt))
        rows.append(row)
    if not rows:
        raise OutOfRange("empty trajectory set")
    c_req = np.vstack(rows)
    c_rep = c_req.max(axis=1)
    within = float(np.mean(c_rep <= c_theory))
    pos = dts > 0
    bounded = np.ones(c_req.shape[0], dtype=bool)
    if pos.sum() >= 2:
        xs = np.log(1.0 / dts[pos])
        for rep in range(c_req.shape[0]):
            ys = np.log(np.maximum(c_req[rep, pos], 1e-300))
            bounded[rep] = np.polyfit(xs, ys, 1)[0] <= 0.10
    return GrowthReport(t=float(t), dt_grid=dts, c_required=c_req,
                        c_per_replicate=c_rep, c_theory=c_theory,
                        within_theory_fraction=within,
                        bounded_fraction=float(bounded.mean()), alpha=alpha)


def radius_profile(traj_set, t_grid: Sequence[float]) -> RadiusReport:
    """Running max distance from the origin, normalized by h(t)."""
    ts = np.sort(np.asarray(list(t_grid), dtype=float))[::-1]
    if ts.size == 0:
        raise OutOfRange("empty time grid")
    if np.any(ts <= 0) or np.any(ts >= 1):
        raise OutOfRange("grid times must lie in (0, 1) for the modulus h")
    asc = ts[::-1]
    h_vals = np.array([modulus_h(float(u)) for u in asc])
    r_rows = []
    ratio_rows = []
    for traj in traj_set:
        if not traj.all_at_origin:
            raise WrongInitialization(
                "radius profile needs the all-at-origin start")
        if ts[0] > traj.horizon + 1e-12:
            raise OutOfRange("grid exceeds the trajectory horizon")
        snaps = traj.snapshot_positions(list(asc))
        r_asc = np.array([float(np.linalg.norm(p, axis=1).max())
                          for p in snaps])
        run = np.maximum.accumulate(r_asc)
        ratio_asc = run / h_vals
        r_rows.append(r_asc[::-1])
        ratio_rows.append(ratio_asc[::-1])
    if not r_rows:
        raise OutOfRange("empty trajectory set")
    r_hat = np.vstack(r_rows)
    ratios = np.vstack(ratio_rows)
    bounded = np.ones(ratios.shape[0], dtype=bool)
    if ts.size >= 2:
        xs = np.log(1.0 / ts)           # increasing as t shrinks
        for rep in range(ratios.shape[0]):
            ys = np.log(np.maximum(ratios[rep], 1e-300))
            bounded[rep] = np.polyfit(xs, ys, 1)[0] <= 0.10
    return RadiusReport(t_grid=ts, r_hat=r_hat, ratios=ratios,
                        bounded_fraction=float(bounded.mean()))


def box_counting_dimension(cloud: PointCloud,
                           scales: Sequence[float]) -> DimensionEstimate:
    """Occupied-box regression estimate of the cloud's dimension.

    Boxes are axis-aligned, anchored at the cloud's coordinate minimum.
    With scales forming integer ratios (dyadic grids) the boxes nest, so
    counts are nonincreasing in the scale.  Coincident points give slope 0
    with a zero-width interval.
    """
    eps = np.sort(np.asarray(list(scales), dtype=float))[::-1]
    if eps.size < 4:
        raise GridTooCoarse("need at least 4 box scales")
    if np.any(eps <= 0):
        raise OutOfRange("box scales must be positive")
    if eps[0] / eps[-1] < 4.0:
        raise GridTooCoarse("scales must span at least two octaves")
    pts = cloud.points
    mins = pts.min(axis=0)
    counts = np.zeros(eps.size, dtype=np.int64)
    for i, e in enumerate(eps):
        idx = np.floor((pts - mins) / e).astype(np.int64)
        counts[i] = np.unique(idx, axis=0).shape[0]
    ys = np.log(counts.astype(float))
    xs = np.log(1.0 / eps)
    m = eps.size
    sxx = float(np.sum((xs - xs.mean()) ** 2))
    slope = float(np.sum((xs - xs.mean()) * (ys - ys.mean())) / sxx)
    resid = ys - (ys.mean() + slope * (xs - xs.mean()))
    sigma2 = float(np.sum(resid ** 2)) / (m - 2)
    se = math.sqrt(sigma2 / sxx)
    lo = min(max(slope - 1.96 * se, 0.0), cloud.d)
    hi = min(max(slope + 1.96 * se, 0.0), cloud.d)
    slope = min(max(slope, 0.0), cloud.d)
    return DimensionEstimate(scales=eps, counts=counts, slope=slope,
                             ci=(lo, hi), d=cloud.d)


def local_mass_profile(cloud: PointCloud, radii: Sequence[float],
                       exponent: float, sample_limit: int = 256,
                       rng_seed: int = 0) -> MassReport:
    """Empirical mass of shrinking balls at sampled atoms, over r^exponent."""
    rs = np.sort(np.asarray(list(radii), dtype=float))[::-1]
    if rs.size < 2:
        raise OutOfRange("need at least two radii")
    if np.any(rs <= 0):
        raise OutOfRange("radii must be positive")
    if sample_limit < 1:
        raise OutOfRange("sample_limit must be >= 1")
    pts = cloud.points
    n = pts.shape[0]
    if n <= sample_limit:
        idx = np.arange(n)
    else:
        rng = stream_for(rng_seed, 0, "mass_sample")
        idx = np.sort(rng.choice(n, size=sample_limit, replace=False))
    dist = cdist(pts[idx], pts)
    ratios = np.zeros((idx.size, rs.size))
    for col, r in enumerate(rs):
        frac = np.count_nonzero(dist <= r, axis=1) / n
        ratios[:, col] = frac / r ** exponent
    proxy = ratios.max(axis=1)
    increasing = np.all(np.diff(ratios, axis=1) >= -1e-12, axis=1)
    return MassReport(radii=rs, exponent=float(exponent),
                      sample_indices=idx, ratios=ratios, proxy=proxy,
                      positive_fraction=float(np.mean(proxy > 0)),
                      increasing_fraction=float(np.mean(increasing)))
