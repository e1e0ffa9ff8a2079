"""Coming-down-from-infinity diagnostics.

Two finite-truncation criteria are implemented: partial sums of 1/gamma_n
(the decrease-rate series) and integrals of 1/psi(q) over growing windows.
Both classify the observed tail trend; neither can prove convergence from
finitely many terms, so verdicts carry their evidence and an Inconclusive
escape hatch.  The module also covers the m-absorbed block-counting chain,
Monte Carlo absorption times with analytic bounds, the m^alpha summability
checks, and the urn-coupling dominance test.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .coalescent import RateTable, log_binom
from .errors import (AllCensored, AtomAtOne, DivisionNearZero, OutOfRange,
                     ToolkitError)
from .harness_streams import stream_for
from .measures import LambdaMeasure, moment_integral

# Trend thresholds on s = successive log-ratios of tail increments.
# Geometric decay keeps s pinned at log(ratio) < 0; divergent-series cases
# drive s toward 0 (or above it).  proj extrapolates s one grid-span ahead
# using the recent drift, which separates slowly-converging series from
# slowly-diverging ones (both can sit near s = -0.1 at any finite depth).
_S_DECAY = -0.08
_S_PROJ = -0.05
_S_FLAT = -0.02
_P_BOUNDARY = 1.02


class Verdict(str, enum.Enum):
    COMES_DOWN = "ComesDown"
    STAYS_INFINITE = "StaysInfinite"
    INCONCLUSIVE = "Inconclusive"


class CdiMethod(str, enum.Enum):
    GAMMA_SERIES = "GammaSeries"
    PSI_INTEGRAL = "PsiIntegral"


@dataclass(frozen=True)
class CdiVerdict:
    verdict: Verdict
    method: CdiMethod
    evidence: dict

    def __post_init__(self):
        levels = self.evidence.get("levels", ())
        if len(levels) < 3:
            raise OutOfRange("evidence needs >= 3 truncation levels")


def _power_limit(xs, ys) -> float:
    """Extrapolated log-log slope of ys against xs as xs -> infinity.

    Window slopes are regressed against 1/log(x); the intercept removes the
    1/log(x) correction exactly for y ~ c x^p (log x)^r families.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if np.any(ys <= 0):
        return math.nan
    slopes = np.diff(np.log(ys)) / np.diff(np.log(xs))
    if slopes.size == 1:
        return float(slopes[0])
    mid = np.sqrt(xs[:-1] * xs[1:])
    z = 1.0 / np.log(mid)
    zbar = z.mean()
    sbar = slopes.mean()
    denom = np.sum((z - zbar) ** 2)
    if denom < 1e-30:
        return float(sbar)
    slope = np.sum((z - zbar) * (slopes - sbar)) / denom
    return float(sbar - slope * zbar)


def _classify_trend(increments: np.ndarray, p_inf: float) -> tuple[Verdict, dict]:
    """Classify whether tail increments of a partial-sum sequence die out."""
    incs = np.asarray(increments, dtype=float)
    if np.any(incs <= 0):
        # a vanished increment means the tail already stopped growing
        return Verdict.COMES_DOWN, {"log_ratios": [], "note": "zero increment"}
    s = np.diff(np.log(incs))
    if s.size == 0:
        return Verdict.INCONCLUSIVE, {"log_ratios": []}
    s_last = float(s[-1])
    drift = float(np.median(np.diff(s)[-3:])) if s.size >= 2 else 0.0
    proj = s_last + drift * len(incs)
    detail = {"log_ratios": s.tolist(), "s_last": s_last, "drift": drift,
              "s_projected": proj, "p_extrapolated": p_inf}
    if s_last <= _S_DECAY and proj <= _S_PROJ:
        return Verdict.COMES_DOWN, detail
    if s_last >= _S_FLAT:
        return Verdict.STAYS_INFINITE, detail
    if proj >= _S_PROJ and (math.isnan(p_inf) or p_inf <= _P_BOUNDARY):
        return Verdict.STAYS_INFINITE, detail
    return Verdict.INCONCLUSIVE, detail


# --------------------------------------------------------------------------
# gamma series
# --------------------------------------------------------------------------

def default_gamma_levels(max_blocks: int) -> list[int]:
    """Dyadic truncation levels 16, 32, ... capped by the table size."""
    levels = []
    n = 16
    while n <= max_blocks:
        levels.append(n)
        n *= 2
    if len(levels) < 3:
        raise OutOfRange("table too small for a trend (need max_blocks >= 64)")
    return levels


def cdi_gamma_series(table: RateTable, levels: list[int]) -> CdiVerdict:
    """Trend of the partial sums of 1/gamma_n at the given truncations.

    gamma_n is the expected instantaneous block-count decrease from n
    blocks; summability of 1/gamma_n is the coming-down criterion.
    """
    if table.measure.atom1 > 0:
        raise AtomAtOne("criterion undefined with an atom at 1")
    levels = sorted(set(int(v) for v in levels))
    if len(levels) < 3:
        raise OutOfRange("need at least 3 truncation levels")
    if levels[0] < 4 or levels[-1] > table.max_blocks:
        raise OutOfRange("levels must lie in [4, max_blocks]")

    top = levels[-1]
    gammas = np.array([table.decrease_rate(n) for n in range(2, top + 1)])
    if np.any(gammas <= 0):
        raise DivisionNearZero("gamma_n vanished below the top level")
    csum = np.cumsum(1.0 / gammas)           # csum[j] = sum over n = 2..j+2
    partial = np.array([csum[n - 2] for n in levels], dtype=float)
    increments = np.diff(partial)
    gamma_at = np.array([gammas[n - 2] for n in levels], dtype=float)
    p_inf = _power_limit(levels, gamma_at)

    verdict, detail = _classify_trend(increments, p_inf)
    evidence = {"levels": levels, "partial_sums": partial.tolist(),
                "increments": increments.tolist(),
                "gamma_at_levels": gamma_at.tolist(), **detail}
    return CdiVerdict(verdict, CdiMethod.GAMMA_SERIES, evidence)


# --------------------------------------------------------------------------
# psi and its integral
# --------------------------------------------------------------------------

def _psi_integrand(q: float):
    def f(x):
        x = np.asarray(x, dtype=float)
        u = q * x
        small = u < 1e-3
        us = np.where(small, u, 1.0)
        series = (q * q) * (0.5 - us / 6.0 + us * us / 24.0
                            - us ** 3 / 120.0 + us ** 4 / 720.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            direct = (np.expm1(-u) + u) / (x * x)
        return np.where(small, series, direct)
    return f


def psi(measure: LambdaMeasure, q: float, tol: float = 1e-10) -> float:
    """psi(q) = integral of (e^{-qx} - 1 + qx) x^{-2} against the measure.

    The atom at 0 contributes q^2/2 times its mass (the x -> 0 limit); an
    atom at 1 is fine here since the integrand is finite at x = 1.  The
    integrand peaks at q^2/2 per unit mass, so the quadrature tolerance is
    scaled by max(1, q^2/2): tol acts as an absolute target for q <= 1 and
    a relative one beyond (an unscaled 1e-10 at q = 1e6 would demand more
    digits than a double holds).
    """
    if q <= 0:
        raise OutOfRange("q must be positive")
    scaled = tol * max(1.0, 0.5 * q * q)
    return moment_integral(measure, _psi_integrand(q), scaled)


def default_psi_grid(decades: float = 6.0) -> list[float]:
    """Half-decade grid 10^0.5 .. 10^decades."""
    return [10.0 ** (0.5 * j) for j in range(1, int(2 * decades) + 1)]


def cdi_psi_integral(measure: LambdaMeasure, a: float,
                     q_max_grid: list[float], tol: float = 1e-9) -> CdiVerdict:
    """Trend of integral_a^Q dq/psi(q) over the increasing Q grid."""
    if measure.atom1 > 0:
        raise AtomAtOne("criterion undefined with an atom at 1")
    if a <= 0:
        raise OutOfRange("a must be positive")
    grid = sorted(set(float(q) for q in q_max_grid))
    if len(grid) < 3:
        raise OutOfRange("need at least 3 grid points")
    if grid[0] <= a:
        raise OutOfRange("grid must lie above a")

    psi_cache: dict[float, float] = {}

    def inv_psi(q: float) -> float:
        val = psi_cache.get(q)
        if val is None:
            val = psi(measure, q, tol)
            psi_cache[q] = val
        if val < 1e-300:
            raise DivisionNearZero(f"psi({q:g}) = 0")
        return 1.0 / val

    edges = [a] + grid
    windows = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(inv_psi, lo, hi, epsabs=1e-12, epsrel=1e-8,
                                limit=200)
        windows.append(val)
    windows = np.asarray(windows)
    partial = np.cumsum(windows)
    psi_at = np.array([psi(measure, q, tol) for q in grid])
    p_inf = _power_limit(grid, psi_at)

    verdict, detail = _classify_trend(windows, p_inf)
    evidence = {"levels": grid, "partial_integrals": partial.tolist(),
                "increments": windows.tolist(), "a": a,
                "psi_at_levels": psi_at.tolist(), **detail}
    return CdiVerdict(verdict, CdiMethod.PSI_INTEGRAL, evidence)


# --------------------------------------------------------------------------
# the m-absorbed block counting chain
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockChainRates:
    """Transition rates of the block-counting chain absorbed at level m.

    mu[b] is indexed by target k = m..b-1 (entry j holds the rate to m+j);
    gamma_bm[b] is the expected instantaneous decrease with drops through m
    truncated at m.
    """

    m: int
    max_blocks: int
    mu: dict[int, np.ndarray]
    gamma_bm: np.ndarray          # indexed by b; zero below m+1
    total_residual: float         # worst |sum(mu[b]) - lambda_b|

    def rate(self, b: int, k: int) -> float:
        if not (self.m <= k < b <= self.max_blocks):
            raise OutOfRange(f"need m <= k < b, got k={k}, b={b}")
        return float(self.mu[b][k - self.m])


def block_chain_rates(table: RateTable, m: int) -> BlockChainRates:
    """Tabulate the absorbed chain's rates for all m < b <= max_blocks.

    From b blocks, a merge of k blocks moves the count to b-k+1; any merge
    large enough to land at or below m is folded into the absorbing state.
    """
    B = table.max_blocks
    if not 2 <= m < B:
        raise OutOfRange(f"m={m} outside 2..{B - 1}")
    mu: dict[int, np.ndarray] = {}
    gamma = np.zeros(B + 1)
    worst = 0.0
    for b in range(m + 1, B + 1):
        k = np.arange(2, b + 1)
        w = np.zeros(b - 1)
        lam = table.lam[b, 2:b + 1]
        pos = lam > 0
        if np.any(pos):
            w[pos] = np.exp(log_binom(b, k[pos]) + np.log(lam[pos]))
        # w[k-2] = C(b,k) lambda_{b,k}; merge of k blocks: b -> b-k+1
        row = np.zeros(b - m)
        small = k <= b - m                      # lands strictly above m
        row[b - k[small] + 1 - m] = w[small]
        row[0] += w[~small].sum()               # folded into m
        mu[b] = row
        lam_b = w.sum()
        worst = max(worst, abs(row.sum() - lam_b))
        if b == m + 1:
            gamma[b] = lam_b
        else:
            drops = np.minimum(k - 1, b - m)
            gamma[b] = (drops * w).sum()
        if gamma[b] < lam_b - 3.0 * table.tol - 1e-12 * max(1.0, lam_b):
            raise ToolkitError(f"gamma_bm[{b}] fell below lambda_{b}")
    if worst > 3.0 * table.tol + 1e-9:
        raise ToolkitError(f"mu rows do not sum to lambda_b (worst {worst:g})")
    return BlockChainRates(m, B, mu, gamma, worst)


# --------------------------------------------------------------------------
# absorption times
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TmEstimate:
    mean: float
    stderr: float
    censored_fraction: float
    bound_gamma: float            # sum of 1/gamma_{b,m}
    bound_lambda: float           # sum of 1/lambda_b
    m: int
    n: int
    replicates: int
    horizon: float

    def __iter__(self):
        return iter((self.mean, self.stderr, self.censored_fraction))


def _is_pairwise_only(table: RateTable) -> bool:
    B = table.max_blocks
    return B < 3 or not np.any(table.lam[3:B + 1, 3:B + 1] > 0)


def _simulate_chain_times(table: RateTable, m: int, n: int, horizon: float,
                          replicates: int, rng: np.random.Generator
                          ) -> np.ndarray:
    """Absorption times of the block chain; censored entries exceed horizon."""
    lam_b = np.array([table.total_rate(b) for b in range(2, n + 1)])
    if np.any(lam_b <= 0):
        raise DivisionNearZero("total rate vanished below n")
    if _is_pairwise_only(table):
        # pairwise mergers: the descent b -> b-1 is deterministic
        waits = rng.exponential(1.0, size=(replicates, n - m))
        return waits @ (1.0 / lam_b[m - 2 + 1:])

    # grouped synchronous simulation; per-b merge-size tables are shared
    cdfs = {b: table.merge_size_cdf(b) for b in range(2, n + 1)}
    state = np.full(replicates, n, dtype=np.int64)
    t = np.zeros(replicates)
    active = np.ones(replicates, dtype=bool)
    while True:
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        rates = lam_b[state[idx] - 2]
        t[idx] += rng.exponential(1.0, size=idx.size) / rates
        over = t[idx] > horizon
        if np.any(over):
            active[idx[over]] = False
            idx = idx[~over]
        if idx.size == 0:
            continue
        u = rng.random(idx.size)
        for b in np.unique(state[idx]):
            sel = idx[state[idx] == b]
            cdf = cdfs[int(b)]
            pick = u[np.searchsorted(idx, sel)]
            k = 2 + np.searchsorted(cdf, pick * cdf[-1], side="right")
            k = np.minimum(k, b)
            nxt = np.maximum(b - k + 1, m)
            state[sel] = nxt
            done = sel[nxt <= m]
            active[done] = False
    return t


def estimate_Tm(table: RateTable, m: int, n: int,
                horizon: float | None = None, replicates: int = 1000,
                rng_seed: int = 0) -> TmEstimate:
    """Monte Carlo time for the block count to fall from n to m.

    Censored replicates (still above m at the horizon) are excluded from
    the mean and reported as a fraction.  The two analytic upper bounds on
    the expectation ride along for comparison.
    """
    if not 2 <= m <= n <= table.max_blocks:
        raise OutOfRange(f"need 2 <= m <= n <= {table.max_blocks}")
    if replicates < 2:
        raise OutOfRange("replicates must be >= 2")
    if m == n:
        return TmEstimate(0.0, 0.0, 0.0, 0.0, 0.0, m, n, replicates,
                          horizon or 0.0)

    chain = block_chain_rates(table, m)
    bound_gamma = float(np.sum(1.0 / chain.gamma_bm[m + 1:n + 1]))
    lam_b = np.array([table.total_rate(b) for b in range(m + 1, n + 1)])
    bound_lambda = float(np.sum(1.0 / lam_b))
    if horizon is None:
        horizon = 10.0 * bound_gamma
    if horizon <= 0:
        raise OutOfRange("horizon must be positive")

    rng = stream_for(rng_seed, 0, "tm_chain")
    times = _simulate_chain_times(table, m, n, horizon, replicates, rng)
    kept = times[times <= horizon]
    censored = 1.0 - kept.size / replicates
    if kept.size == 0:
        raise AllCensored(f"all {replicates} replicates exceeded "
                          f"horizon={horizon:g}")
    mean = float(kept.mean())
    stderr = float(kept.std(ddof=1) / math.sqrt(kept.size)) if kept.size > 1 \
        else 0.0
    return TmEstimate(mean, stderr, censored, bound_gamma, bound_lambda,
                      m, n, replicates, horizon)


# --------------------------------------------------------------------------
# Condition A / Condition B
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionReport:
    alpha: float
    m_grid: list[int]
    s_values: list[float]         # m^alpha * (partial sum + tail bound)
    partial_sums: list[float]
    tail_bounds: list[float]
    variant: str                  # "lambda" (Condition A) or "gamma" (B)
    verdict: str                  # Bounded / Unbounded / Inconclusive


def check_condition_A(table: RateTable, alpha: float, m_grid: list[int],
                      variant: str = "lambda") -> ConditionReport:
    """Boundedness of s(m) = m^alpha * sum_{b>m} 1/rate_b across the grid.

    variant "lambda" uses the total rates (Condition A); "gamma" uses the
    absorbed-chain decrease rates gamma_{b,m} (Condition B).  The sum is
    truncated at the table edge; a power-law tail estimate is added so a
    plateau is not an artifact of truncation.
    """
    if alpha <= 0:
        raise OutOfRange("alpha must be positive")
    if variant not in ("lambda", "gamma"):
        raise OutOfRange(f"unknown variant {variant!r}")
    B = table.max_blocks
    grid = sorted(set(int(v) for v in m_grid))
    if len(grid) < 3:
        raise OutOfRange("need at least 3 grid points")
    if grid[0] < 2 or grid[-1] >= B:
        raise OutOfRange("m_grid must lie in [2, max_blocks)")

    lam = np.array([table.total_rate(b) for b in range(2, B + 1)])
    if np.any(lam <= 0):
        raise DivisionNearZero("lambda_b vanished inside the table")
    # local power of lambda_b over the top octave, for the tail estimate
    top = np.arange(max(2, B // 2), B + 1)
    p_hat = _power_limit(top, lam[top - 2])

    s_vals, partials, tails = [], [], []
    for m in grid:
        if variant == "lambda":
            inv = 1.0 / lam[m - 1:]
        else:
            chain = block_chain_rates(table, m)
            gam = chain.gamma_bm[m + 1:B + 1]
            if np.any(gam <= 0):
                raise DivisionNearZero("gamma_{b,m} vanished")
            inv = 1.0 / gam
        part = float(np.sum(inv))
        if not math.isnan(p_hat) and p_hat > 1.05:
            tail = (B / lam[B - 2]) / (p_hat - 1.0)
        else:
            tail = math.inf
        partials.append(part)
        tails.append(tail)
        s_vals.append(m ** alpha * (part + (tail if math.isfinite(tail)
                                            else 0.0)))
    finite_tail = all(math.isfinite(t) for t in tails)
    ratios = np.array(s_vals[1:]) / np.array(s_vals[:-1])
    if not finite_tail:
        verdict = "Unbounded" if float(ratios.min()) >= 1.25 else "Inconclusive"
    elif float(ratios.max()) <= 1.05:
        verdict = "Bounded"
    elif float(ratios.min()) >= 1.25:
        verdict = "Unbounded"
    else:
        verdict = "Inconclusive"
    return ConditionReport(alpha, grid, s_vals, partials, tails, variant,
                           verdict)


# --------------------------------------------------------------------------
# urn coupling dominance
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class UrnReport:
    n: int
    m: int
    replicates: int
    t_grid: list[float]
    survival_chain: list[float]   # P(T^n_m >= t)
    survival_sum: list[float]     # P(sum of exponentials >= t)
    margins: list[float]          # 3 * binomial stderr of the difference
    dominated: bool

    def worst_violation(self) -> float:
        gaps = [c - s - g for c, s, g in zip(self.survival_chain,
                                             self.survival_sum, self.margins)]
        return max(gaps)


def urn_dominance_check(table: RateTable, n: int, m: int, replicates: int,
                        t_grid: list[float], rng_seed: int) -> UrnReport:
    """Empirical check that T^n_m is stochastically below sum Exp(lambda_i).

    The comparison sum draws one exponential per level i = m+1..n at rate
    lambda_i.  Survival probabilities are compared pointwise on t_grid with
    a three-sigma binomial allowance.
    """
    if not 2 <= m < n <= table.max_blocks:
        raise OutOfRange(f"need 2 <= m < n <= {table.max_blocks}")
    if replicates < 100:
        raise OutOfRange("too few replicates for a survival comparison")
    grid = [float(t) for t in t_grid]
    if not grid or any(t < 0 for t in grid):
        raise OutOfRange("t_grid must be nonnegative")

    lam_b = np.array([table.total_rate(b) for b in range(m + 1, n + 1)])
    horizon = max(grid) + 1.0
    rng_chain = stream_for(rng_seed, 0, "urn_chain")
    rng_sum = stream_for(rng_seed, 0, "urn_exponentials")
    t_chain = _simulate_chain_times(table, m, n, math.inf, replicates,
                                    rng_chain)
    del horizon
    t_sum = rng_sum.exponential(1.0, size=(replicates, n - m)) @ (1.0 / lam_b)

    surv_c, surv_s, margins = [], [], []
    ok = True
    for t in grid:
        p1 = float(np.mean(t_chain >= t))
        p2 = float(np.mean(t_sum >= t))
        se = math.sqrt(max(p1 * (1 - p1), 1e-12) / replicates
                       + max(p2 * (1 - p2), 1e-12) / replicates)
        surv_c.append(p1)
        surv_s.append(p2)
        margins.append(3.0 * se)
        if p1 > p2 + 3.0 * se:
            ok = False
    return UrnReport(n, m, replicates, grid, surv_c, surv_s, margins, ok)
