"""Experiment orchestration.

A single JSON config fully determines a pipeline run: measure block,
simulation block, analysis block, seed, output directory.  Every random
draw comes from a stream keyed by (seed, replicate, role), so replicate
scheduling (including the optional process pool) cannot change results,
and rerunning a config reproduces its CSV outputs byte for byte.  Floats
are written with shortest round-trip formatting.  The manifest is written
atomically at the very end; a crashed run leaves no manifest.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cdi import (check_condition_A, cdi_gamma_series, cdi_psi_integral,
                  default_gamma_levels, default_psi_grid, estimate_Tm)
from .coalescent import build_rate_table, path_rows, simulate_coalescent
from .errors import ConfigError, IoError
from .harness_streams import stream_for
from .lookdown import (empirical_support, event_rows, range_union,
                       simulate_lookdown, snapshot_rows)
from .measures import (LambdaMeasure, beta_measure, from_table, kingman,
                       uniform)
from .support import (box_counting_dimension, modulus_envelope,
                      radius_profile)

TOOLKIT_VERSION = "0.1.0"

KINDS = ("rates", "simulate-coalescent", "simulate-lookdown", "cdi",
         "modulus", "dimension", "radius", "range", "report")

_MEASURE_KEYS = {"family", "mass", "beta", "atom0", "atom1", "xs", "ys",
                 "label"}
_SIMULATION_KEYS = {"n", "d", "T", "init", "snapshot_times"}
_ANALYSIS_KEYS = {"replicates", "grid_depth", "min_depth", "alpha", "m_grid",
                  "max_blocks", "tol", "method", "scales", "t", "dt_grid",
                  "t_grid", "window", "snapshot_count", "a", "decades",
                  "levels", "workers", "horizon", "radii", "exponent",
                  "sample_limit"}
_TOP_KEYS = {"kind", "measure", "simulation", "analysis", "seed",
             "output_dir"}


def _fail(fld: str, msg: str):
    raise ConfigError(f"{fld}: {msg}")


def _as_int(value, fld: str, lo=None, hi=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(fld, f"expected an integer, got {value!r}")
    if lo is not None and value < lo:
        _fail(fld, f"must be >= {lo}")
    if hi is not None and value > hi:
        _fail(fld, f"must be <= {hi}")
    return value


def _as_num(value, fld: str, lo=None, strict_lo=None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(fld, f"expected a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        _fail(fld, "must be finite")
    if lo is not None and v < lo:
        _fail(fld, f"must be >= {lo}")
    if strict_lo is not None and v <= strict_lo:
        _fail(fld, f"must be > {strict_lo}")
    return v


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment; JSON round-trippable."""

    kind: str
    measure: dict
    simulation: dict = field(default_factory=dict)
    analysis: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "out"

    @staticmethod
    def from_dict(raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config: expected a JSON object")
        unknown = set(raw) - _TOP_KEYS
        if unknown:
            _fail(sorted(unknown)[0], "unknown top-level field")
        if "measure" not in raw:
            _fail("measure", "missing")
        # kind may be omitted when the CLI subcommand supplies it
        return ExperimentConfig(
            kind=raw.get("kind", ""), measure=raw["measure"],
            simulation=raw.get("simulation", {}),
            analysis=raw.get("analysis", {}),
            seed=raw.get("seed", 0),
            output_dir=raw.get("output_dir", "out"))

    @staticmethod
    def from_json(text: str) -> "ExperimentConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON ({exc})") from exc
        return ExperimentConfig.from_dict(raw)

    @staticmethod
    def from_file(path: str) -> "ExperimentConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise IoError(f"cannot read config {path}: {exc}") from exc
        return ExperimentConfig.from_json(text)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "measure": self.measure,
                "simulation": self.simulation, "analysis": self.analysis,
                "seed": self.seed, "output_dir": self.output_dir}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def content_hash(self) -> str:
        """Hash of the scientific content (output_dir excluded)."""
        payload = self.to_dict()
        payload.pop("output_dir")
        canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    # -- validation ---------------------------------------------------------

    def validate(self):
        if self.kind not in KINDS:
            _fail("kind", f"must be one of {', '.join(KINDS)}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            _fail("seed", "expected an integer")
        if not 0 <= self.seed < 2 ** 64:
            _fail("seed", "must fit in an unsigned 64-bit integer")
        if not isinstance(self.output_dir, str) or not self.output_dir:
            _fail("output_dir", "expected a nonempty path")
        self._validate_measure()
        self._validate_simulation()
        self._validate_analysis()

    def _validate_measure(self):
        block = self.measure
        if not isinstance(block, dict):
            _fail("measure", "expected an object")
        unknown = set(block) - _MEASURE_KEYS
        if unknown:
            _fail(f"measure.{sorted(unknown)[0]}", "unknown field")
        family = block.get("family")
        if family not in ("kingman", "uniform", "beta", "table"):
            _fail("measure.family",
                  "must be kingman, uniform, beta, or table")
        if family == "kingman":
            _as_num(block.get("mass", 1.0), "measure.mass", lo=0.0)
        elif family == "beta":
            b = _as_num(block.get("beta"), "measure.beta")
            if not 0.0 < b < 2.0:
                _fail("measure.beta", "must lie in (0, 2)")
        elif family == "table":
            xs = block.get("xs")
            ys = block.get("ys")
            if not isinstance(xs, list) or not isinstance(ys, list) \
                    or len(xs) != len(ys) or len(xs) < 2:
                _fail("measure.xs", "xs and ys must be equal-length lists "
                      "of at least 2 points")
            _as_num(block.get("atom0", 0.0), "measure.atom0", lo=0.0)
            _as_num(block.get("atom1", 0.0), "measure.atom1", lo=0.0)

    def _validate_simulation(self):
        block = self.simulation
        if not isinstance(block, dict):
            _fail("simulation", "expected an object")
        unknown = set(block) - _SIMULATION_KEYS
        if unknown:
            _fail(f"simulation.{sorted(unknown)[0]}", "unknown field")
        n = _as_int(block.get("n", 50), "simulation.n", lo=1)
        d = _as_int(block.get("d", 2), "simulation.d", lo=1)
        T = _as_num(block.get("T", 1.0), "simulation.T", strict_lo=0.0)
        init = block.get("init", "all-at-origin")
        if isinstance(init, str):
            if init != "all-at-origin":
                _fail("simulation.init",
                      "must be 'all-at-origin' or an n x d array")
        elif isinstance(init, list):
            arr = np.asarray(init, dtype=float)
            if arr.shape != (n, d):
                _fail("simulation.init", f"array must have shape ({n}, {d})")
        else:
            _fail("simulation.init", "must be a string or an array")
        for i, t in enumerate(block.get("snapshot_times", [])):
            v = _as_num(t, f"simulation.snapshot_times[{i}]", lo=0.0)
            if v > T:
                _fail(f"simulation.snapshot_times[{i}]",
                      f"exceeds the horizon {T}")

    def _validate_analysis(self):
        block = self.analysis
        if not isinstance(block, dict):
            _fail("analysis", "expected an object")
        unknown = set(block) - _ANALYSIS_KEYS
        if unknown:
            _fail(f"analysis.{sorted(unknown)[0]}", "unknown field")
        if "replicates" in block:
            _as_int(block["replicates"], "analysis.replicates", lo=1)
        if "workers" in block:
            _as_int(block["workers"], "analysis.workers", lo=1)
        if "grid_depth" in block:
            _as_int(block["grid_depth"], "analysis.grid_depth", lo=2, hi=24)
        if "min_depth" in block:
            _as_int(block["min_depth"], "analysis.min_depth", lo=2)
        if "alpha" in block:
            _as_num(block["alpha"], "analysis.alpha", strict_lo=0.0)
        if "max_blocks" in block:
            _as_int(block["max_blocks"], "analysis.max_blocks", lo=2)
        if "tol" in block:
            _as_num(block["tol"], "analysis.tol", strict_lo=0.0)
        if "method" in block and block["method"] not in ("auto", "closed",
                                                         "quadrature"):
            _fail("analysis.method", "must be auto, closed, or quadrature")
        if "m_grid" in block:
            grid = block["m_grid"]
            if not isinstance(grid, list) or not grid:
                _fail("analysis.m_grid", "expected a nonempty list")
            for i, m in enumerate(grid):
                _as_int(m, f"analysis.m_grid[{i}]", lo=1)
        if "scales" in block:
            scales = block["scales"]
            if not isinstance(scales, list) or not scales:
                _fail("analysis.scales", "expected a nonempty list")
            for i, s in enumerate(scales):
                _as_num(s, f"analysis.scales[{i}]", strict_lo=0.0)
        if "snapshot_count" in block:
            _as_int(block["snapshot_count"], "analysis.snapshot_count", lo=1)
        if "window" in block:
            win = block["window"]
            if not isinstance(win, list) or len(win) != 2:
                _fail("analysis.window", "expected [t0, t1]")
            t0 = _as_num(win[0], "analysis.window[0]", lo=0.0)
            t1 = _as_num(win[1], "analysis.window[1]", lo=0.0)
            if t0 > t1:
                _fail("analysis.window", "needs t0 <= t1")
        if "t" in block:
            _as_num(block["t"], "analysis.t", lo=0.0)
        if "t_grid" in block:
            grid = block["t_grid"]
            if not isinstance(grid, list) or not grid:
                _fail("analysis.t_grid", "expected a nonempty list")
            for i, t in enumerate(grid):
                _as_num(t, f"analysis.t_grid[{i}]", strict_lo=0.0)
        if "a" in block:
            _as_num(block["a"], "analysis.a", strict_lo=0.0)
        if "decades" in block:
            _as_num(block["decades"], "analysis.decades", strict_lo=0.0)

    # -- resolved accessors --------------------------------------------------

    def build_measure(self) -> LambdaMeasure:
        block = self.measure
        family = block["family"]
        if family == "kingman":
            return kingman(float(block.get("mass", 1.0)))
        if family == "uniform":
            return uniform()
        if family == "beta":
            return beta_measure(float(block["beta"]))
        return from_table(np.asarray(block["xs"], dtype=float),
                          np.asarray(block["ys"], dtype=float),
                          atom0=float(block.get("atom0", 0.0)),
                          atom1=float(block.get("atom1", 0.0)))

    @property
    def sim_n(self) -> int:
        return int(self.simulation.get("n", 50))

    @property
    def sim_d(self) -> int:
        return int(self.simulation.get("d", 2))

    @property
    def sim_T(self) -> float:
        return float(self.simulation.get("T", 1.0))

    @property
    def sim_init(self):
        init = self.simulation.get("init", "all-at-origin")
        if isinstance(init, list):
            return np.asarray(init, dtype=float)
        return init

    @property
    def replicates(self) -> int:
        return int(self.analysis.get("replicates", 1))

    @property
    def workers(self) -> int:
        return int(self.analysis.get("workers", 1))

    def default_max_blocks(self) -> int:
        if "max_blocks" in self.analysis:
            return int(self.analysis["max_blocks"])
        # quadrature families get a smaller default table
        return 2048 if self.measure["family"] in ("kingman", "uniform",
                                                  "beta") else 128


def replicate_seed(master_seed: int, replicate: int) -> int:
    """Derived 64-bit seed for one replicate's own keyed streams."""
    ss = np.random.SeedSequence(master_seed & (2 ** 64 - 1),
                                spawn_key=(int(replicate),))
    return int(ss.generate_state(1, np.uint64)[0])


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: str, header: list[str], rows) -> None:
    """Atomic CSV write with shortest round-trip float formatting."""
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _write_json(path: str, obj) -> None:
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    """Provenance record written atomically after a successful run."""

    kind: str
    config_hash: str
    toolkit_version: str
    seed: int
    replicate_seeds: list[int]
    wall_times: dict
    files: dict
    path: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind, "config_hash": self.config_hash,
                "toolkit_version": self.toolkit_version, "seed": self.seed,
                "replicate_seeds": self.replicate_seeds,
                "wall_times": self.wall_times, "files": self.files}


# --------------------------------------------------------------------------
# worker-pool replicate chunks (module level so they pickle)
# --------------------------------------------------------------------------

def _coalescent_chunk(config_json: str, reps: list[int]) -> list[list]:
    cfg = ExperimentConfig.from_json(config_json)
    measure = cfg.build_measure()
    table = build_rate_table(measure, cfg.sim_n,
                             float(cfg.analysis.get("tol", 1e-10)))
    out = []
    for r in reps:
        rng = stream_for(cfg.seed, r, "coalescent_clocks")
        path = simulate_coalescent(table, cfg.sim_n, cfg.sim_T, rng)
        out.append(path_rows(path, r))
    return out


def _lookdown_chunk(config_json: str, reps: list[int],
                    snapshot_times: list[float]) -> list[tuple]:
    cfg = ExperimentConfig.from_json(config_json)
    measure = cfg.build_measure()
    out = []
    for r in reps:
        traj = simulate_lookdown(measure, cfg.sim_n, cfg.sim_d, cfg.sim_T,
                                 init=cfg.sim_init,
                                 rng_seed=replicate_seed(cfg.seed, r))
        snaps = snapshot_rows(traj, r, snapshot_times)
        events = event_rows(traj) if r == 0 else None
        out.append((snaps, events))
    return out


def _chunked(reps: int, workers: int) -> list[list[int]]:
    if workers <= 1 or reps <= 1:
        return [list(range(reps))]
    size = math.ceil(reps / workers)
    return [list(range(lo, min(lo + size, reps)))
            for lo in range(0, reps, size)]


def _run_chunks(fn, config_json: str, reps: int, workers: int, *extra):
    chunks = _chunked(reps, workers)
    if len(chunks) == 1:
        return [fn(config_json, chunks[0], *extra)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, config_json, chunk, *extra)
                   for chunk in chunks]
        return [f.result() for f in futures]


# --------------------------------------------------------------------------
# pipelines
# --------------------------------------------------------------------------

def _auto_box_scales(points: np.ndarray) -> list[float]:
    """Four dyadic scales anchored at a quarter of the cloud extent."""
    extent = float(np.max(points.max(axis=0) - points.min(axis=0)))
    base = extent / 4.0 if extent > 0 else 1.0
    return [base / 2 ** j for j in range(4)]


def _pipeline_rates(cfg, measure):
    table = build_rate_table(measure, cfg.default_max_blocks(),
                             float(cfg.analysis.get("tol", 1e-10)),
                             cfg.analysis.get("method", "auto"))
    rows = [(b, k, table.rate(b, k))
            for b in range(2, table.max_blocks + 1)
            for k in range(2, b + 1)]
    summary = {"max_blocks": table.max_blocks, "method": table.method,
               "consistency_residual": table.max_consistency_residual,
               "total_rates": [table.total_rate(n)
                               for n in range(2, table.max_blocks + 1)],
               "decrease_rates": [table.decrease_rate(n)
                                  for n in range(2, table.max_blocks + 1)]}
    return ([("rates.csv", ["b", "k", "rate"], rows)],
            [("rates_summary.json", summary)], 0)


def _pipeline_simulate_coalescent(cfg, measure):
    reps = cfg.replicates
    chunks = _run_chunks(_coalescent_chunk, cfg.to_json(), reps, cfg.workers)
    rows = []
    for chunk in chunks:
        for rep_rows in chunk:
            rows.extend(rep_rows)
    header = ["replicate", "event_index", "time", "block_count_after",
              "merge_size"]
    return ([("paths.csv", header, rows)], [], reps)


def _pipeline_simulate_lookdown(cfg, measure):
    reps = cfg.replicates
    ts = [float(t) for t in
          cfg.simulation.get("snapshot_times", [cfg.sim_T])]
    chunks = _run_chunks(_lookdown_chunk, cfg.to_json(), reps, cfg.workers,
                         ts)
    snap_rows, events = [], []
    for chunk in chunks:
        for snaps, ev in chunk:
            snap_rows.extend(snaps)
            if ev is not None:
                events = ev
    header = ["replicate", "t", "level"] + [f"x_{i + 1}"
                                            for i in range(cfg.sim_d)]
    files = [("snapshots.csv", header, snap_rows),
             ("events.csv", ["time", "kind", "levels", "parent"], events)]
    return (files, [], reps)


def _pipeline_cdi(cfg, measure):
    table = build_rate_table(measure, cfg.default_max_blocks(),
                             float(cfg.analysis.get("tol", 1e-10)))
    levels = cfg.analysis.get("levels")
    levels = [int(v) for v in levels] if levels \
        else default_gamma_levels(table.max_blocks)
    g = cdi_gamma_series(table, levels)
    a = float(cfg.analysis.get("a", 1.0))
    grid = default_psi_grid(float(cfg.analysis.get("decades", 6.0)))
    p = cdi_psi_integral(measure, a, grid)
    rows = []
    for lvl, val in zip(g.evidence["levels"], g.evidence["partial_sums"]):
        rows.append(("gamma_series", lvl, val, g.verdict.value))
    for q, val in zip(p.evidence["levels"], p.evidence["partial_integrals"]):
        rows.append(("psi_integral", q, val, p.verdict.value))
    payload = {"gamma_series": {"verdict": g.verdict.value,
                                "evidence": g.evidence},
               "psi_integral": {"verdict": p.verdict.value,
                                "evidence": p.evidence},
               "agree": g.verdict == p.verdict}
    return ([("cdi.csv", ["method", "level", "value", "verdict"], rows)],
            [("cdi.json", payload)], 0)


def _traj_stream(cfg, measure, reps):
    for r in range(reps):
        yield simulate_lookdown(measure, cfg.sim_n, cfg.sim_d, cfg.sim_T,
                                init=cfg.sim_init,
                                rng_seed=replicate_seed(cfg.seed, r))


def _pipeline_modulus(cfg, measure):
    reps = cfg.replicates
    report = modulus_envelope(
        _traj_stream(cfg, measure, reps),
        int(cfg.analysis.get("grid_depth", 8)),
        float(cfg.analysis.get("alpha", 1.0)),
        min_depth=int(cfg.analysis.get("min_depth", 2)))
    payload = {"c_theory": report.c_theory,
               "below_theory": report.below_theory,
               "bounded_trend": report.bounded_trend,
               "scales": report.scales.tolist(),
               "c_hat": report.c_hat.tolist(),
               "pass_fraction": report.pass_fraction.tolist(),
               "alpha": report.alpha, "d": report.d,
               "replicates": reps}
    return ([("modulus.csv", ["scale", "c_hat", "c_theory", "pass"],
              report.rows())],
            [("modulus.json", payload)], reps)


def _dimension_estimate(cfg, measure, n, t):
    traj = simulate_lookdown(measure, n, cfg.sim_d, cfg.sim_T,
                             init="all-at-origin",
                             rng_seed=replicate_seed(cfg.seed, 0))
    cloud = empirical_support(traj, t)
    scales = cfg.analysis.get("scales")
    scales = [float(s) for s in scales] if scales \
        else _auto_box_scales(cloud.points)
    return box_counting_dimension(cloud, scales), cloud


def _pipeline_dimension(cfg, measure):
    t = float(cfg.analysis.get("t", cfg.sim_T))
    est, cloud = _dimension_estimate(cfg, measure, cfg.sim_n, t)
    # sensitivity: same estimate at half the particle count
    half_est, _ = _dimension_estimate(cfg, measure,
                                      max(cfg.sim_n // 2, 2), t)
    payload = {"t": t, "n": cfg.sim_n, "slope": est.slope,
               "ci": list(est.ci), "points": cloud.size,
               "half_n": max(cfg.sim_n // 2, 2),
               "half_n_slope": half_est.slope}
    return ([("dimension.csv",
              ["scale", "count", "slope", "ci_lo", "ci_hi"], est.rows())],
            [("dimension.json", payload)], 1)


def _pipeline_radius(cfg, measure):
    reps = cfg.replicates
    t_grid = cfg.analysis.get("t_grid",
                              [2.0 ** (-k) for k in range(3, 11)])
    report = radius_profile(_traj_stream(cfg, measure, reps),
                            [float(t) for t in t_grid])
    payload = {"bounded_fraction": report.bounded_fraction,
               "t_grid": report.t_grid.tolist(), "replicates": reps}
    return ([("radius.csv", ["t", "ratio"], report.rows())],
            [("radius.json", payload)], reps)


def _pipeline_range(cfg, measure):
    reps = cfg.replicates
    window = cfg.analysis.get("window", [cfg.sim_T / 2.0, cfg.sim_T])
    count = int(cfg.analysis.get("snapshot_count", 64))
    trajs = list(_traj_stream(cfg, measure, reps))
    cloud = range_union(trajs, (float(window[0]), float(window[1])), count)
    scales = cfg.analysis.get("scales")
    scales = [float(s) for s in scales] if scales \
        else _auto_box_scales(cloud.points)
    est = box_counting_dimension(cloud, scales)
    payload = {"window": [float(window[0]), float(window[1])],
               "snapshot_count": count, "points": cloud.size,
               "slope": est.slope, "ci": list(est.ci)}
    return ([("range.csv", ["scale", "count", "slope", "ci_lo", "ci_hi"],
              est.rows())],
            [("range.json", payload)], reps)


def _pipeline_report(cfg, measure):
    table = build_rate_table(measure, cfg.default_max_blocks(),
                             float(cfg.analysis.get("tol", 1e-10)))
    alpha = float(cfg.analysis.get("alpha", 1.0))
    reps = cfg.replicates
    payload = {"measure": repr(measure), "max_blocks": table.max_blocks}
    if measure.atom1 == 0:
        g = cdi_gamma_series(table, default_gamma_levels(table.max_blocks))
        p = cdi_psi_integral(measure, float(cfg.analysis.get("a", 1.0)),
                             default_psi_grid(
                                 float(cfg.analysis.get("decades", 6.0))))
        payload["cdi"] = {"gamma_series": g.verdict.value,
                          "psi_integral": p.verdict.value,
                          "agree": g.verdict == p.verdict}
    m_grid = [int(m) for m in cfg.analysis.get("m_grid", [5, 10, 20])]
    n = cfg.sim_n
    tm_rows = []
    for m in m_grid:
        est = estimate_Tm(table, m, n, replicates=reps, rng_seed=cfg.seed)
        tm_rows.append((m, est.mean, est.stderr, est.censored_fraction,
                        est.bound_gamma, est.bound_lambda))
    # the boundedness scan needs several octaves of m regardless of which
    # levels the absorption-time table reports, so it gets its own ladder
    cond_grid = [4]
    while cond_grid[-1] * 2 < table.max_blocks:
        cond_grid.append(cond_grid[-1] * 2)
    cond = check_condition_A(table, alpha, cond_grid)
    payload["condition_A"] = {"verdict": cond.verdict,
                              "m_grid": cond_grid,
                              "s_values": list(cond.s_values),
                              "partial_sums": list(cond.partial_sums)}
    payload["tm"] = {"n": n, "m_grid": m_grid, "replicates": reps}
    header = ["m", "mean", "stderr", "censored_fraction", "bound_gamma",
              "bound_lambda"]
    return ([("tm.csv", header, tm_rows)], [("report.json", payload)], reps)


_PIPELINES = {
    "rates": _pipeline_rates,
    "simulate-coalescent": _pipeline_simulate_coalescent,
    "simulate-lookdown": _pipeline_simulate_lookdown,
    "cdi": _pipeline_cdi,
    "modulus": _pipeline_modulus,
    "dimension": _pipeline_dimension,
    "radius": _pipeline_radius,
    "range": _pipeline_range,
    "report": _pipeline_report,
}


def run_experiment(config: ExperimentConfig) -> RunManifest:
    """Validate, execute, persist.  Same config + seed => same CSV bytes."""
    config.validate()
    measure = config.build_measure()
    outdir = config.output_dir
    try:
        os.makedirs(outdir, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {outdir}: {exc}") from exc

    walls = {}
    t0 = time.perf_counter()
    files, jsons, reps_used = _PIPELINES[config.kind](config, measure)
    walls["compute"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    inventory = {}
    for name, header, rows in files:
        path = os.path.join(outdir, name)
        write_csv(path, header, rows)
        inventory[name] = {"sha256": _sha256(path),
                           "bytes": os.path.getsize(path)}
    config_path = os.path.join(outdir, "config.json")
    _write_json(config_path, config.to_dict())
    inventory["config.json"] = {"sha256": _sha256(config_path),
                                "bytes": os.path.getsize(config_path)}
    for name, obj in jsons:
        path = os.path.join(outdir, name)
        _write_json(path, obj)
        inventory[name] = {"sha256": _sha256(path),
                           "bytes": os.path.getsize(path)}
    walls["write"] = time.perf_counter() - t1

    manifest = RunManifest(
        kind=config.kind, config_hash=config.content_hash(),
        toolkit_version=TOOLKIT_VERSION, seed=config.seed,
        replicate_seeds=[replicate_seed(config.seed, r)
                         for r in range(reps_used)],
        wall_times=walls, files=inventory,
        path=os.path.join(outdir, "manifest.json"))
    _write_json(manifest.path, manifest.to_dict())
    return manifest
