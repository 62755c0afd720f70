"""End-to-end workflow: build a scenario from a config, solve, sweep, export.

Randomness comes from numpy's PCG64 generator seeded through a
``SeedSequence``.  User positions of region ``r`` use the child stream
``spawn_key=(0, r)`` and channel gains use ``spawn_key=(1,)``, so changing
the gain mode never moves the users.
"""

from __future__ import annotations

import csv
import io
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .channel import ArrayConfig, LinkParams, sample_complex_gain
from .config import ScenarioConfig
from .errors import UavPlacementError
from .geometry import (AltitudeBand, RestrictedZone, filter_candidates, lattice_grid, offset_grid,
                       place_users, tile_regions)
from .radio import (GainTables, Network, build_sinr_matrix, db_to_linear, dbm_to_mw, equal_power,
                    precompute_gain_tables)
from .selection import CombinationSpace, PlacementResult, enumerate_combinations, place

PRNG = f"numpy.random.PCG64 via SeedSequence (numpy {np.__version__})"
OUTDIR_ENV = "UAVPLACE_OUTDIR"


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass
class Scenario:
    config: ScenarioConfig
    regions: list
    zone: RestrictedZone
    band: AltitudeBand
    raw_grids: list
    grids: list
    net: Network

    @property
    def space(self) -> CombinationSpace:
        return CombinationSpace.from_grids(self.grids)

    @property
    def raw_space(self) -> CombinationSpace:
        return CombinationSpace.from_grids(self.raw_grids)


def build_scenario(config: ScenarioConfig) -> Scenario:
    """Sub-regions, users, candidate grids (raw and filtered) and the radio network."""
    seed = config.effective_seed
    regions = tile_regions(config.area_side_m, config.region_rows, config.region_cols)
    center = config.area_side_m / 2
    zone = RestrictedZone(center, center, config.zone_a_m, config.zone_b_m, config.zone_mode)
    band = AltitudeBand(config.h_min_m, config.h_max_m)

    offsets = config.candidate_offsets()
    raw_grids = []
    for j, region in enumerate(regions):
        if offsets:
            raw_grids.append(offset_grid(region, j, offsets))
        else:
            raw_grids.append(lattice_grid(region, j, config.grid_nx, config.grid_ny, config.grid_nz, band))
    grids = [filter_candidates(g, zone, band) for g in raw_grids]

    users, serving = [], []
    for j, region in enumerate(regions):
        pts = place_users(region, config.users_per_region, np.random.SeedSequence(seed, spawn_key=(0, j)))
        users.extend(pts)
        serving.extend([j] * len(pts))
    n_users = len(users)

    if config.gain_mode == "gaussian":
        alphas = sample_complex_gain(_rng(seed, 1), size=n_users)
    else:
        alphas = np.ones(n_users, dtype=complex)

    if config.power_mode == "per_uav":
        per_user = equal_power(config.uav_power_mw, config.users_per_region).per_user[0]
    else:
        per_user = config.uav_power_mw
    net = Network(
        users=np.array(users),
        serving=np.array(serving),
        alphas=alphas,
        powers=np.full(n_users, per_user),
        n0_mw=float(dbm_to_mw(config.n0_dbm)),
        params=LinkParams(config.path_loss_exponent),
        cfg=ArrayConfig(config.num_antennas, config.spacing_ratio),
    )
    return Scenario(config, regions, zone, band, raw_grids, grids, net)


@dataclass
class Solved:
    """A scenario with its gain tables and SINR matrix, reusable across thresholds."""

    scenario: Scenario
    tables: GainTables
    S: np.ndarray
    timing: dict


def prepare(config: ScenarioConfig) -> Solved:
    timing = {}
    t0 = time.perf_counter()
    sc = build_scenario(config)
    enumerate_combinations(sc.space)
    t1 = time.perf_counter()
    tables = precompute_gain_tables(sc.grids, sc.net)
    t2 = time.perf_counter()
    S = build_sinr_matrix(sc.space, tables, sc.net)
    t3 = time.perf_counter()
    timing.update(setup_s=t1 - t0, precompute_s=t2 - t1, sinr_build_s=t3 - t2)
    return Solved(sc, tables, S, timing)


def solve_prepared(solved: Solved, gamma_th_db: float, method: str = "lp") -> PlacementResult:
    sc = solved.scenario
    res = place(solved.S, float(db_to_linear(gamma_th_db)), sc.space, sc.grids, sc.zone, sc.band, method)
    res.threshold_db = float(gamma_th_db)
    return res


@dataclass
class RunArtifacts:
    """Everything persisted for one run; round-trips through ``run-<kind>.json``."""

    kind: str
    config_text: str
    config_hash: str
    seed: int
    prng: str
    placement: Optional[dict] = None
    sweep: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "version": self.version,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "prng": self.prng,
            "config": self.config_text,
            "placement": self.placement,
            "sweep": self.sweep,
            "timing": self.timing,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunArtifacts":
        return cls(d["kind"], d["config"], d["config_hash"], d["seed"], d["prng"],
                   d.get("placement"), d.get("sweep", []), d.get("timing", {}), d.get("version", ""))

    @property
    def feasible(self) -> bool:
        if self.placement is not None:
            return bool(self.placement["feasible"])
        return all(row["feasible"] for row in self.sweep)


def placement_record(res: PlacementResult) -> dict:
    return {
        "method": res.method,
        "combination": res.index,
        "lp_index": res.lp_index,
        "threshold_db": res.threshold_db,
        "feasible": res.feasible,
        "relaxation_gap": res.relaxation_gap,
        "globally_infeasible": res.globally_infeasible,
        "feasible_count": res.feasible_count,
        "min_sinr_db": res.min_sinr_db,
        "positions": [[float(v) for v in p] for p in res.positions],
        "sinr_db": [float(v) for v in res.sinr_db],
    }


def _artifacts(kind: str, config: ScenarioConfig, seed: Optional[int] = None) -> RunArtifacts:
    return RunArtifacts(kind, config.to_text(), config.hash(),
                        config.effective_seed if seed is None else seed, PRNG)


def run_solve(config: ScenarioConfig, method: str = "lp", solved: Optional[Solved] = None) -> RunArtifacts:
    """Run the whole placement pipeline once at ``config.gamma_th_db``.

    Pass ``solved`` to reuse tables and S already built from ``config``.
    """
    if solved is None:
        solved = prepare(config)
    t0 = time.perf_counter()
    res = solve_prepared(solved, config.gamma_th_db, method)
    solved.timing["solve_s"] = time.perf_counter() - t0
    art = _artifacts("solve", config)
    art.placement = placement_record(res)
    art.timing = dict(solved.timing)
    return art


def run_sweep(config: ScenarioConfig, thresholds_db: Sequence[float], method: str = "lp") -> RunArtifacts:
    """Solve one scenario at each threshold; channels and S are computed once."""
    if len(thresholds_db) == 0:
        raise ValueError("threshold list is empty")
    solved = prepare(config)
    t0 = time.perf_counter()
    art = _artifacts("sweep", config)
    for th in thresholds_db:
        rec = placement_record(solve_prepared(solved, float(th), method))
        rec["seed"] = config.effective_seed
        art.sweep.append(rec)
    solved.timing["solve_s"] = time.perf_counter() - t0
    art.timing = dict(solved.timing)
    return art


def run_seed_sweep(config: ScenarioConfig, seeds: Sequence[int], method: str = "lp") -> RunArtifacts:
    """One solve per seed (fresh user drop each time) at ``config.gamma_th_db``."""
    art = _artifacts("scatter", config)
    timing = {}
    for s in seeds:
        cfg = config.replace(seed=int(s))
        solved = prepare(cfg)
        t0 = time.perf_counter()
        rec = placement_record(solve_prepared(solved, cfg.gamma_th_db, method))
        solved.timing["solve_s"] = time.perf_counter() - t0
        rec["seed"] = int(s)
        art.sweep.append(rec)
        for k, v in solved.timing.items():
            timing[k] = timing.get(k, 0.0) + v
    art.timing = timing
    return art


def default_outdir() -> Path:
    return Path(os.environ.get(OUTDIR_ENV, "uavplace-out"))


def save_run(art: RunArtifacts, outdir) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / f"run-{art.kind}.json"
    path.write_text(json.dumps(art.to_dict(), indent=2) + "\n", encoding="utf-8")
    return path


def load_run(path) -> RunArtifacts:
    return RunArtifacts.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


EXPORT_COLUMNS = {
    "placement": ("uav_index", "x", "y", "z"),
    "sinr": ("user_index", "sinr_db"),
    "sweep": ("threshold_db", "uav_index", "x", "y", "z", "feasible_count"),
    "scatter": ("seed", "threshold_db", "uav_index", "x", "y", "z", "feasible_count"),
}


def export_rows(art: RunArtifacts, what: str) -> list[tuple]:
    """Plain table rows for ``what``; indices are 1-based as in plotted figures."""
    if what not in EXPORT_COLUMNS:
        raise ValueError(f"unknown export {what!r}")
    rows = []
    if what in ("placement", "sinr"):
        p = art.placement
        if p is None:
            raise UavPlacementError(f"a {art.kind} run has no single placement to export")
        if what == "placement":
            rows = [(j + 1, *pos) for j, pos in enumerate(p["positions"])]
        else:
            rows = [(k + 1, v) for k, v in enumerate(p["sinr_db"])]
    else:
        if not art.sweep:
            raise UavPlacementError(f"a {art.kind} run has no sweep table")
        for rec in art.sweep:
            for j, pos in enumerate(rec["positions"]):
                row = (rec["threshold_db"], j + 1, *pos, rec["feasible_count"])
                rows.append((rec["seed"], *row) if what == "scatter" else row)
    return rows


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def render_export(art: RunArtifacts, fmt: str, what: str) -> str:
    cols = EXPORT_COLUMNS[what]
    rows = export_rows(art, what)
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# seed={art.seed} config_hash={art.config_hash}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        w.writerows([[_fmt(v) for v in r] for r in rows])
        return buf.getvalue()
    if fmt == "json":
        doc = {"seed": art.seed, "config_hash": art.config_hash, "columns": list(cols),
               "rows": [dict(zip(cols, r)) for r in rows]}
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def export(art: RunArtifacts, fmt: str, what: str, outdir) -> Path:
    outdir = Path(outdir)
    text = render_export(art, fmt, what)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / f"{what}.{fmt}"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def scenario_record(sc: Scenario) -> dict:
    """JSON-ready snapshot of a generated scenario."""
    def pts(a):
        return [[float(v) for v in p] for p in np.asarray(a)]

    return {
        "config_hash": sc.config.hash(),
        "seed": sc.config.effective_seed,
        "prng": PRNG,
        "config": sc.config.to_text(),
        "regions": [[r.x_min, r.x_max, r.y_min, r.y_max] for r in sc.regions],
        "zone": {"mode": sc.zone.mode, "center_x": sc.zone.center_x, "center_y": sc.zone.center_y,
                 "a": sc.zone.a, "b": sc.zone.b},
        "users": pts(sc.net.users),
        "serving": [int(j) for j in sc.net.serving],
        "alphas": [[float(a.real), float(a.imag)] for a in sc.net.alphas],
        "candidates": [pts(g.points) for g in sc.raw_grids],
        "kept_candidates": [[int(i) for i in g.indices] for g in sc.grids],
        "combinations": sc.space.size,
        "combinations_unfiltered": sc.raw_space.size,
    }
