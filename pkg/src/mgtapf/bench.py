"""Benchmark harness: run a sweep of solver configurations and emit CSV rows.

A sweep is a JSON object::

    {
      "maps": ["dense20"],            # built-in names or map file paths
      "agents": [10],
      "bands": [[2, 2]],              # goal-count bands [k_min, k_max]
      "configs": [{"algo": "ecbs-ta", "omega": 1.3},
                  {"algo": "cbsh-ta", "heuristic": "wdg"}],
      "time_limit": 60,
      "seeds": 20                     # int n -> seeds 0..n-1, or an explicit list
    }

Every (map, agents, band, seed) instance is solved by every config.  Aggregate
rows average over the instances of a group that *every* config solved.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .formats import parse_map
from .highlevel import SolverConfig, solve
from .instances import BUILTIN_MAPS, builtin_map, generate_instance

HEADER = ("instance", "algo", "heuristic", "omega", "status", "flowtime", "makespan",
          "ct_expanded", "roots", "ll_expanded", "runtime_s", "lower_bound")
MEAN_FIELDS = ("flowtime", "makespan", "ct_expanded", "roots", "ll_expanded",
               "runtime_s", "lower_bound")


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class RunSpec:
    map_name: str
    agents: int
    k_min: int
    k_max: int
    seed: int
    algo: str
    heuristic: str
    omega: float
    time_limit: float

    @property
    def group(self) -> str:
        return f"{self.map_name}-m{self.agents}-k{self.k_min}-{self.k_max}"

    @property
    def instance_id(self) -> str:
        return f"{self.group}-s{self.seed}"


def load_map(ref: str):
    if ref in BUILTIN_MAPS:
        return builtin_map(ref)
    with open(ref) as fh:
        return parse_map(fh.read())


def _map_name(ref: str) -> str:
    return ref if ref in BUILTIN_MAPS else os.path.splitext(os.path.basename(ref))[0]


def expand_sweep(sweep: dict) -> list:
    """Flatten a sweep into run specs, ordered map, agents, band, seed, config."""
    try:
        maps = list(sweep["maps"])
        agents = [int(a) for a in sweep["agents"]]
        bands = [(int(lo), int(hi)) for lo, hi in sweep["bands"]]
        configs = list(sweep["configs"])
        time_limit = float(sweep.get("time_limit", 60))
        seeds = sweep["seeds"]
    except (KeyError, TypeError, ValueError) as e:
        raise SweepError(f"malformed sweep: {e}") from None
    seeds = list(range(seeds)) if isinstance(seeds, int) else [int(s) for s in seeds]
    specs = []
    for ref, m, (lo, hi), seed in itertools.product(maps, agents, bands, seeds):
        for cfg in configs:
            algo = cfg.get("algo")
            heuristic = cfg.get("heuristic", "none")
            omega = float(cfg.get("omega", 1.0))
            SolverConfig.for_algorithm(algo, heuristic, omega=omega)  # validates
            specs.append(RunSpec(ref, m, lo, hi, seed, algo, heuristic, omega,
                                 float(cfg.get("time_limit", time_limit))))
    return specs


def _fmt(x) -> str:
    return "" if x is None else f"{x:.6f}" if isinstance(x, float) else str(x)


def run_one(spec: RunSpec) -> dict:
    grid = load_map(spec.map_name)
    inst = generate_instance(spec.seed, grid, spec.agents, spec.k_min, spec.k_max)
    cfg = SolverConfig.for_algorithm(spec.algo, spec.heuristic, omega=spec.omega,
                                     time_limit=spec.time_limit, seed=spec.seed)
    res = solve(inst, cfg)
    st = res.stats
    lb = float(st.lower_bound) if st.lower_bound is not None else None
    return {
        "instance": f"{_map_name(spec.map_name)}-m{spec.agents}-k{spec.k_min}-{spec.k_max}-s{spec.seed}",
        "algo": spec.algo,
        "heuristic": spec.heuristic,
        "omega": f"{spec.omega:g}",
        "status": res.status,
        "flowtime": _fmt(res.plan.flowtime if res.plan else None),
        "makespan": _fmt(res.plan.makespan if res.plan else None),
        "ct_expanded": str(st.ct_expanded),
        "roots": str(st.roots),
        "ll_expanded": str(st.ll_expanded),
        "runtime_s": _fmt(float(st.runtime_s)),
        "lower_bound": _fmt(lb),
    }


def _config_key(row) -> tuple:
    return row["algo"], row["heuristic"], row["omega"]


def _group_of(instance_id: str) -> str:
    return instance_id.rsplit("-s", 1)[0]


def aggregate(rows) -> list:
    """Aggregate rows from raw rows (string-valued dicts, as written to CSV)."""
    groups = {}
    for row in rows:
        g = groups.setdefault(_group_of(row["instance"]), {})
        g.setdefault(_config_key(row), []).append(row)
    out = []
    for group, by_cfg in groups.items():
        solved_by = [{r["instance"] for r in rs if r["status"] == "solved"} for rs in by_cfg.values()]
        common = set.intersection(*solved_by) if solved_by else set()
        for (algo, heuristic, omega), rs in by_cfg.items():
            solved = sum(r["status"] == "solved" for r in rs)
            agg = {"instance": f"agg:{group}", "algo": algo, "heuristic": heuristic,
                   "omega": omega, "status": f"success {solved}/{len(rs)}"}
            picked = [r for r in rs if r["instance"] in common]
            for f in MEAN_FIELDS:
                vals = [float(r[f]) for r in picked if r[f] != ""]
                agg[f] = f"{sum(vals) / len(vals):.6f}" if vals else ""
            out.append(agg)
    return out


def run_benchmark(sweep: dict, workers: int = 1) -> list:
    """Raw rows in sweep order followed by aggregate rows."""
    specs = expand_sweep(sweep)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(run_one, specs))
    else:
        raw = [run_one(s) for s in specs]
    return raw + aggregate(raw)


def write_csv(rows, stream) -> None:
    writer = csv.DictWriter(stream, fieldnames=HEADER, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)


def read_csv(text: str) -> list:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != HEADER:
        raise SweepError("unexpected CSV header")
    return list(reader)


def load_sweep(path: str) -> dict:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as e:
            raise SweepError(f"sweep is not valid JSON: {e}") from None


def split_rows(rows) -> tuple:
    raw = [r for r in rows if not r["instance"].startswith("agg:")]
    agg = [r for r in rows if r["instance"].startswith("agg:")]
    return raw, agg


def benchmark_to_csv(sweep: dict, workers: int = 1) -> str:
    buf = io.StringIO()
    write_csv(run_benchmark(sweep, workers), buf)
    return buf.getvalue()


__all__ = ["HEADER", "RunSpec", "SweepError", "aggregate", "expand_sweep", "load_map",
           "load_sweep", "read_csv", "run_benchmark", "run_one", "split_rows", "write_csv",
           "benchmark_to_csv"]

