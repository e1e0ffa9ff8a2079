"""End-to-end acceptance checks, one printed verdict line per criterion.

Every test times itself, prints a single [PASS]/[FAIL] line with the key
numbers, and then asserts.  Statistical checks use frozen seeds so the
suite is deterministic; tolerances come from independent closed-form
oracles where one exists.
"""

import math
import time
from collections import Counter

import numpy as np
from scipy import stats

from lambda_fv_lab import (
    ExperimentConfig,
    KINDS,
    PointCloud,
    Verdict,
    beta_measure,
    box_counting_dimension,
    brownian_sup_tail_mc,
    brownian_tail_bound,
    build_rate_table,
    cdi_gamma_series,
    cdi_psi_integral,
    default_gamma_levels,
    default_psi_grid,
    empirical_support,
    estimate_Tm,
    kingman,
    modulus_envelope,
    range_union,
    recovered_coalescent,
    restrict,
    run_experiment,
    simulate_coalescent,
    simulate_lookdown,
    stream_for,
    theory_constant,
    uniform,
    urn_dominance_check,
)


def _verdict(capsys, ok, label, detail):
    with capsys.disabled():
        print(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    return ok


def test_closed_form_rates_match_quadrature(capsys):
    t0 = time.time()
    closed = build_rate_table(uniform(), 30)
    quad = build_rate_table(uniform(), 30, method="quadrature")
    worst = 0.0
    for b in range(2, 31):
        for k in range(2, b + 1):
            oracle = (math.factorial(k - 2) * math.factorial(b - k)
                      / math.factorial(b - 1))
            worst = max(worst, abs(closed.rate(b, k) - oracle),
                        abs(quad.rate(b, k) - oracle))
    king = build_rate_table(kingman(), 30)
    exact = all(king.rate(b, 2) == 1.0 for b in range(2, 31)) \
        and all(king.rate(b, k) == 0.0
                for b in range(3, 31) for k in range(3, b + 1))
    elapsed = time.time() - t0
    ok = worst <= 1e-8 and exact and elapsed < 1.0
    assert _verdict(capsys, ok, "closed-form rates",
                    f"worst |closed-oracle| and |quad-oracle| = {worst:.2e} "
                    f"(tol 1e-08), pairwise table exact: {exact}, "
                    f"{elapsed:.2f}s")


def test_rate_tables_satisfy_the_consistency_relation(capsys):
    t0 = time.time()
    residuals = {}
    for name, meas in [("kingman", kingman()), ("uniform", uniform()),
                       ("beta05", beta_measure(0.5)),
                       ("beta15", beta_measure(1.5))]:
        table = build_rate_table(meas, 51)
        residuals[name] = (table.max_consistency_residual, 3.0 * table.tol)
    elapsed = time.time() - t0
    ok = all(r <= cap for r, cap in residuals.values()) and elapsed < 5.0
    worst = max(r / cap for r, cap in residuals.values())
    assert _verdict(capsys, ok, "consistency",
                    f"max residual/cap over four measures, b<=50: "
                    f"{worst:.3f} (needs <=1), {elapsed:.2f}s")


def test_restriction_preserves_the_partition_law(capsys):
    t0 = time.time()
    table = build_rate_table(kingman(), 6)
    lhs, rhs = Counter(), Counter()
    for r in range(20_000):
        path = simulate_coalescent(table, 6, 0.5, 1_000_000 + r)
        lhs[restrict(path.state_at(0.5), 3).canonical()] += 1
    for r in range(20_000):
        path = simulate_coalescent(table, 3, 0.5, 2_000_000 + r)
        rhs[path.state_at(0.5).canonical()] += 1
    cells = sorted(set(lhs) | set(rhs))
    obs = np.array([[lhs[c] for c in cells], [rhs[c] for c in cells]])
    _, p, _, _ = stats.chi2_contingency(obs)
    elapsed = time.time() - t0
    ok = p >= 0.01 and elapsed < 30.0
    assert _verdict(capsys, ok, "restriction law",
                    f"chi2 over {len(cells)} partitions of a 3-set, "
                    f"p={p:.4f} (needs >=0.01), 20k reps each side, "
                    f"{elapsed:.1f}s")


def test_recovered_partition_matches_direct_simulation(capsys):
    t0 = time.time()
    table = build_rate_table(kingman(), 6)
    look, direct = Counter(), Counter()
    for r in range(10_000):
        traj = simulate_lookdown(kingman(), 6, 1, 1.0,
                                 rng_seed=3_000_000 + r)
        look[recovered_coalescent(traj).block_count_at(0.3)] += 1
    for r in range(10_000):
        path = simulate_coalescent(table, 6, 0.3, 4_000_000 + r)
        direct[path.block_count_at(0.3)] += 1
    ks = sorted(set(look) | set(direct))
    obs = np.array([[look[k] for k in ks], [direct[k] for k in ks]])
    _, p, _, _ = stats.chi2_contingency(obs)
    elapsed = time.time() - t0
    ok = p >= 0.01 and elapsed < 120.0
    assert _verdict(capsys, ok, "recovered coalescent",
                    f"block-count law at t=0.3, n=6, chi2 p={p:.4f} "
                    f"(needs >=0.01), 10k reps each route, {elapsed:.1f}s")


def test_absorption_time_matches_the_telescoping_mean(capsys):
    t0 = time.time()
    table = build_rate_table(kingman(), 1000)
    est = estimate_Tm(table, m=10, n=1000, replicates=10_000, rng_seed=5)
    oracle = 2.0 / 10 - 2.0 / 1000
    bound = sum(1.0 / table.total_rate(b) for b in range(11, 1001))
    elapsed = time.time() - t0
    ok = (abs(est.mean - oracle) <= 3.0 * est.stderr
          and est.mean <= est.bound_lambda + 3.0 * est.stderr
          and abs(est.bound_lambda - bound) <= 1e-12
          and elapsed < 120.0)
    assert _verdict(capsys, ok, "absorption time",
                    f"mean={est.mean:.5f} vs oracle {oracle} "
                    f"(z={(est.mean - oracle) / est.stderr:.2f}, needs "
                    f"|z|<=3), mean <= rate-sum bound {bound:.5f} + 3se, "
                    f"10k reps, {elapsed:.1f}s")


def test_cdi_verdicts_match_the_known_classification(capsys):
    t0 = time.time()
    expected = {"kingman": Verdict.COMES_DOWN,
                "beta15": Verdict.COMES_DOWN,
                "beta05": Verdict.STAYS_INFINITE,
                "uniform": Verdict.STAYS_INFINITE}
    measures = {"kingman": kingman(), "beta15": beta_measure(1.5),
                "beta05": beta_measure(0.5), "uniform": uniform()}
    got = {}
    agree = True
    for name, meas in measures.items():
        table = build_rate_table(meas, 2048)
        g = cdi_gamma_series(table, default_gamma_levels(2048))
        p = cdi_psi_integral(meas, 1.0, default_psi_grid())
        got[name] = (g.verdict, p.verdict)
        agree = agree and g.verdict == p.verdict == expected[name]
    elapsed = time.time() - t0
    ok = agree and elapsed < 60.0
    summary = ", ".join(f"{n}={v[0].value}" for n, v in got.items())
    assert _verdict(capsys, ok, "cdi classification",
                    f"both routes agree on all four: {agree} "
                    f"({summary}), {elapsed:.1f}s")


def test_chain_survival_is_dominated_by_the_exponential_sum(capsys):
    t0 = time.time()
    grid = list(np.linspace(0.0, 2.0, 20))
    results = {}
    for name, meas in [("kingman", kingman()),
                       ("beta15", beta_measure(1.5))]:
        table = build_rate_table(meas, 50)
        rep = urn_dominance_check(table, n=50, m=5, replicates=50_000,
                                  t_grid=grid, rng_seed=23)
        results[name] = (rep.dominated, rep.worst_violation())
    elapsed = time.time() - t0
    ok = all(d for d, _ in results.values()) and elapsed < 120.0
    detail = ", ".join(f"{n}: worst gap {w:+.2e}" for n, (_, w)
                       in results.items())
    assert _verdict(capsys, ok, "urn dominance",
                    f"survival never exceeds the sum by >3 binomial se on "
                    f"a 20-point grid ({detail}), 50k reps, {elapsed:.1f}s")


def test_brownian_sup_tails_fall_below_the_bound(capsys):
    t0 = time.time()
    cases = [(1, 1.0, 3.0), (2, 1.0, 3.0), (3, 0.5, 2.0)]
    lines = []
    ok = True
    for rep, (d, t, x) in enumerate(cases):
        est, se = brownian_sup_tail_mc(d, t, x, paths=50_000, steps=256,
                                       rng=stream_for(11, rep,
                                                      "tail_paths"))
        bound = brownian_tail_bound(d, t, x)
        ok = ok and est < bound
        lines.append(f"(d={d},t={t},x={x}): {est:.4f} < {bound:.4f}")
    elapsed = time.time() - t0
    ok = ok and elapsed < 120.0
    assert _verdict(capsys, ok, "brownian tail",
                    f"{'; '.join(lines)}; 50k paths each, {elapsed:.1f}s")


def test_dislocation_envelope_stays_below_the_theory_constant(capsys):
    t0 = time.time()
    trajs = (simulate_lookdown(kingman(), 500, 2, 1.0, rng_seed=9_000 + r)
             for r in range(200))
    rep = modulus_envelope(trajs, grid_depth=8, alpha=1.0, min_depth=4)
    per_scale_ok = bool(np.all(rep.pass_fraction >= 0.95))
    all_scale = float(np.mean(np.all(rep.ratios <= rep.c_theory, axis=1)))
    elapsed = time.time() - t0
    ok = (per_scale_ok and all_scale >= 0.95
          and rep.c_theory == theory_constant(2, 1)
          and elapsed < 600.0)
    scale_marks = ", ".join(
        f"2^-{int(round(-math.log2(s)))}:{'pass' if p >= 0.95 else 'fail'}"
        for s, p in zip(rep.scales, rep.pass_fraction))
    assert _verdict(capsys, ok, "modulus envelope",
                    f"per-scale [{scale_marks}], all-scale fraction "
                    f"{all_scale:.3f} (needs >=0.95), max c_hat "
                    f"{rep.c_hat.max():.2f} vs C={rep.c_theory:.1f}, "
                    f"200 reps, {elapsed:.0f}s")


def test_box_dimension_upper_bounds_and_oracles(capsys):
    t0 = time.time()
    traj = simulate_lookdown(kingman(), 2000, 3, 1.0, rng_seed=4_100)
    scales = [2.0 ** -k for k in range(3, 7)]
    # streaming snapshots: the window sweep must precede the t=1 query
    est_range = box_counting_dimension(
        range_union([traj], (0.5, 1.0), 64), scales)
    est_sup = box_counting_dimension(empirical_support(traj, 1.0), scales)

    oracle_scales = [2.0 ** -4, 2.0 ** -5, 2.0 ** -6, 2.0 ** -7]
    point = box_counting_dimension(PointCloud(np.zeros((10, 3)), 3),
                                   oracle_scales)
    side = np.linspace(0.0, 1.0, 256)
    square = np.stack(np.meshgrid(side, side), axis=-1).reshape(-1, 2)
    grid = box_counting_dimension(PointCloud(square, 2), oracle_scales)
    seg = np.zeros((4096, 3))
    seg[:, 0] = np.linspace(0.0, 1.0, 4096)
    line = box_counting_dimension(PointCloud(seg, 3), oracle_scales)
    oracles = (point.slope == 0.0 and point.ci == (0.0, 0.0)
               and abs(grid.slope - 2.0) < 0.1
               and abs(line.slope - 1.0) < 0.15)
    elapsed = time.time() - t0
    ok = (est_sup.slope <= 2.5 and est_range.slope <= 4.5 and oracles
          and elapsed < 600.0)
    assert _verdict(capsys, ok, "dimension bounds",
                    f"support slope {est_sup.slope:.2f} <= 2.5, range "
                    f"slope {est_range.slope:.2f} <= 4.5, oracles "
                    f"(point {point.slope:.1f}, square {grid.slope:.2f}, "
                    f"segment {line.slope:.2f}): {oracles}, {elapsed:.0f}s")


def test_reruns_reproduce_byte_identical_csvs(capsys, tmp_path):
    t0 = time.time()
    shapes = {
        "rates": {"analysis": {"max_blocks": 12}},
        "simulate-coalescent": {"simulation": {"n": 10, "T": 2.0},
                                "analysis": {"replicates": 3}},
        "simulate-lookdown": {"simulation": {"n": 8, "d": 2, "T": 1.0,
                                             "snapshot_times": [0.5, 1.0]},
                              "analysis": {"replicates": 2}},
        "cdi": {"analysis": {"max_blocks": 256}},
        "modulus": {"simulation": {"n": 20, "d": 2, "T": 1.0},
                    "analysis": {"replicates": 4, "grid_depth": 5,
                                 "min_depth": 3}},
        "dimension": {"simulation": {"n": 120, "d": 2, "T": 1.0}},
        "radius": {"simulation": {"n": 10, "d": 2, "T": 1.0},
                   "analysis": {"replicates": 2}},
        "range": {"simulation": {"n": 30, "d": 2, "T": 1.0},
                  "analysis": {"replicates": 2, "snapshot_count": 8}},
        "report": {"simulation": {"n": 40},
                   "analysis": {"replicates": 60, "m_grid": [4, 8],
                                "max_blocks": 256}},
    }
    assert set(shapes) == set(KINDS)
    identical = True
    compared = 0
    for kind, extra in shapes.items():
        outs = []
        for sub in ("a", "b"):
            raw = {"kind": kind, "measure": {"family": "kingman"},
                   "seed": 7,
                   "output_dir": str(tmp_path / kind / sub)}
            raw.update(extra)
            run_experiment(ExperimentConfig.from_dict(raw))
            outs.append(tmp_path / kind / sub)
        names = sorted(p.name for p in outs[0].glob("*.csv"))
        assert names, f"{kind} wrote no CSV"
        for name in names:
            compared += 1
            if (outs[0] / name).read_bytes() != (outs[1] / name).read_bytes():
                identical = False
    elapsed = time.time() - t0
    ok = identical and elapsed < 120.0
    assert _verdict(capsys, ok, "determinism",
                    f"{compared} CSVs across all {len(KINDS)} kinds "
                    f"byte-identical on rerun: {identical}, {elapsed:.1f}s")
