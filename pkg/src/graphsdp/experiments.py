"""Experiment harness: seeded parameter sweeps with CSV + JSON persistence.

Each experiment iterates a parameter grid times a replicate count, runs the
generate -> solve -> round -> evaluate pipeline for its problem, and writes

* ``<out>.csv``       one row per (grid point, replicate) result,
* ``<out>.agg.csv``   mean / std / count per grid point (ok rows only),
* ``<out>.json``      the full configuration echo plus summary fields.

Per-cell seeds derive from (master seed, flat grid index, replicate), so
grids can be extended without perturbing existing cells, and rows are
emitted sorted by (grid point, replicate) so a worker pool never changes
the output bytes.  Solver failures are recorded in the row's status column
and never abort a sweep.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import _rng
from .fileio import GsetGraph, write_csv, write_json
from .linalg import InvalidInputError
from .metrics import ari, cut_value, estimate_fixed_point, signed_error_rate, sync_mse
from .models import (
    MaxCutInstance,
    SsbmParams,
    SyncParams,
    apply_mask,
    gen_bipartite_perturbed,
    gen_ssbm,
    gen_sync,
    membership_matrix,
)
from .rounding import extract_phases, gw_round, spectral_sync
from .signed import SPECTRAL_VARIANTS, bnc_cluster, spectral_cluster
from .solvers import BmConfig, PierraConfig, bm_solve, pierra_signed, unit_diag_atoms

__all__ = [
    "ExperimentConfig",
    "EXPERIMENTS",
    "run_experiment",
    "gset_sweep",
    "signed_ground_truth_matrix",
]

SCHEMA_VERSION = 1

SIGNED_ALGORITHMS = SPECTRAL_VARIANTS + ("bnc",)


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: experiment id, parameter overrides, replicates, master seed."""

    experiment: str
    params: dict = field(default_factory=dict)
    replicates: int = 20
    seed: int = 0
    full_scale: bool = False
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidInputError(
                f"unknown experiment '{self.experiment}'; have {sorted(EXPERIMENTS)}"
            )
        if self.replicates < 1:
            raise InvalidInputError("replicates must be >= 1")
        if self.schema_version != SCHEMA_VERSION:
            raise InvalidInputError(f"unsupported schema_version {self.schema_version}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {"experiment", "params", "replicates", "seed", "full_scale", "schema_version"}
        unknown = set(data) - known
        if unknown:
            raise InvalidInputError(f"unknown config fields {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "params": self.params,
            "replicates": self.replicates,
            "seed": self.seed,
            "full_scale": self.full_scale,
            "schema_version": self.schema_version,
        }

    def resolved_params(self) -> dict:
        spec = EXPERIMENTS[self.experiment]
        out = dict(spec.full_defaults if self.full_scale else spec.desk_defaults)
        out.update(self.params)
        return out


@dataclass(frozen=True)
class _ExperimentSpec:
    grid_axes: tuple          # parameter names iterated as a cartesian grid
    group_cols: tuple         # aggregation keys
    value_cols: tuple         # numeric outputs to aggregate
    header: tuple
    cell_fn: object           # (params, axis_values, replicate, seed_seq) -> [rows]
    desk_defaults: dict
    full_defaults: dict


def signed_ground_truth_matrix(labels: np.ndarray) -> np.ndarray:
    """Complete +-1 ground truth: +1 on diagonal blocks, -1 elsewhere."""
    Z = membership_matrix(labels)
    return 2.0 * Z - 1.0


def _cluster_signed(matrix, algo, K, seed):
    if algo == "bnc":
        return bnc_cluster(matrix, K, seed=seed)
    return spectral_cluster(matrix, algo, K, seed=seed)


def _cell_signed_before_after(params, axes, replicate, seed_seq):
    seed = int(seed_seq.generate_state(1)[0])
    ssbm = SsbmParams(
        n=params["n"], n_clusters=params["K"], p=params["p"], q=params["q"],
        delta=params["delta"],
    )
    inst = gen_ssbm(ssbm, seed=seed)
    truth = signed_ground_truth_matrix(inst.ground_truth)
    K = params["K"]
    rows = []
    before = {}
    for algo in SIGNED_ALGORITHMS:
        labels = _cluster_signed(inst.observed, algo, K, seed)
        before[algo] = signed_error_rate(labels, truth)
    status = "ok"
    after = {}
    try:
        # denoising needs only a moderately accurate solve; a larger step
        # weight and looser feasibility cut the iteration count ~3x with
        # identical downstream error rates
        J = np.ones((params["n"], params["n"]))
        scale = np.linalg.norm(inst.observed - inst.params["alpha"] * J)
        eps = params.get("eps_scale", 4.0) * np.sqrt(params["n"]) / max(scale, 1e-12)
        Z_hat, report = pierra_signed(
            inst.observed, inst.params["alpha"],
            PierraConfig(epsilon=eps,
                         max_iters=params.get("max_iters", 20000),
                         feas_tol=params.get("feas_tol", 1e-5),
                         obj_tol=params.get("obj_tol", 1e-7)),
        )
        if not report.converged:
            status = "solver_max_iters"
        for algo in SIGNED_ALGORITHMS:
            labels = _cluster_signed(Z_hat, algo, K, seed)
            after[algo] = signed_error_rate(labels, truth)
    except Exception as exc:  # never abort the sweep
        status = f"error:{type(exc).__name__}"
    for algo in SIGNED_ALGORITHMS:
        row = {"replicate": replicate, "seed": seed, "algorithm": algo,
               "gamma_before": before[algo], "status": status}
        if algo in after:
            row["gamma_after"] = after[algo]
            row["gamma_delta"] = before[algo] - after[algo]
        rows.append(row)
    return rows


def _solve_maxcut(instance: MaxCutInstance, params, seed):
    config = BmConfig(max_iters=params.get("max_iters", 20000),
                      restarts=params.get("restarts", 2), seed=seed)
    _, Z_hat, report = bm_solve(instance.rescaled, "max", config)
    return Z_hat, report


def _cell_maxcut_bipartite(params, axes, replicate, seed_seq):
    eta, delta = axes
    seed = int(seed_seq.generate_state(1)[0])
    try:
        inst = gen_bipartite_perturbed(params["n"], eta, delta, seed=seed)
        Z_hat, report = _solve_maxcut(inst, params, seed)
        x, mean_cut = gw_round(Z_hat, inst.full_adjacency,
                               params.get("gw_samples", 100), seed=seed)
        labels = (np.asarray(x) > 0).astype(int)
        row = {
            "eta": eta, "delta": delta, "replicate": replicate, "seed": seed,
            "ari": ari(labels, inst.ground_truth_partition),
            "best_cut": cut_value(inst.full_adjacency, x),
            "mean_cut": mean_cut,
            "status": "ok" if report.converged else "solver_max_iters",
        }
    except Exception as exc:
        row = {"eta": eta, "delta": delta, "replicate": replicate, "seed": seed,
               "status": f"error:{type(exc).__name__}"}
    return [row]


def _synthetic_benchmark_graph(n: int, avg_degree: float, seed: int) -> np.ndarray:
    """Stand-in benchmark graph when no Gset file is supplied."""
    rng = _rng.stream(seed, _rng.STREAM_EDGES)
    prob = min(1.0, avg_degree / max(n - 1, 1))
    draw = (rng.random((n, n)) < prob).astype(float)
    upper = np.triu(draw, 1)
    return upper + upper.T


def _cell_gset_sweep(params, axes, replicate, seed_seq):
    (delta,) = axes
    seed = int(seed_seq.generate_state(1)[0])
    A0 = params["_adjacency"]
    try:
        inst = apply_mask(A0, delta, seed=seed)
        Z_hat, report = _solve_maxcut(inst, params, seed)
        x, _ = gw_round(Z_hat, inst.full_adjacency, params.get("gw_samples", 100), seed=seed)
        row = {"delta": delta, "replicate": replicate, "seed": seed,
               "cut_full": cut_value(A0, x),
               "status": "ok" if report.converged else "solver_max_iters"}
    except Exception as exc:
        row = {"delta": delta, "replicate": replicate, "seed": seed,
               "status": f"error:{type(exc).__name__}"}
    return [row]


def _cell_sync(noise_model):
    def cell(params, axes, replicate, seed_seq):
        level, sample_prob = axes
        seed = int(seed_seq.generate_state(1)[0])
        kwargs = {"sigma": level} if noise_model == "gaussian" else {"sigma": 0.0, "gamma": level}
        try:
            inst = gen_sync(
                SyncParams(n=params["n"], noise_model=noise_model,
                           sample_prob=sample_prob, **kwargs),
                seed=seed,
            )
            config = BmConfig(max_iters=params.get("max_iters", 20000),
                              restarts=params.get("restarts", 2), seed=seed)
            _, Z_hat, report = bm_solve(inst.observed, "max", config)
            phases_sdp = np.angle(extract_phases(Z_hat))
            phases_spec = np.angle(spectral_sync(inst.observed))
            row = {
                "level": level, "sample_prob": sample_prob,
                "replicate": replicate, "seed": seed,
                "mse_sdp": sync_mse(phases_sdp, inst.ground_truth),
                "mse_spectral": sync_mse(phases_spec, inst.ground_truth),
                "status": "ok" if report.converged else "solver_max_iters",
            }
        except Exception as exc:
            row = {"level": level, "sample_prob": sample_prob,
                   "replicate": replicate, "seed": seed,
                   "status": f"error:{type(exc).__name__}"}
        return [row]
    return cell


EXPERIMENTS = {
    "signed_before_after": _ExperimentSpec(
        grid_axes=(),
        group_cols=("algorithm",),
        value_cols=("gamma_before", "gamma_after", "gamma_delta"),
        header=("replicate", "seed", "algorithm", "gamma_before", "gamma_after",
                "gamma_delta", "status"),
        cell_fn=_cell_signed_before_after,
        desk_defaults={"n": 200, "K": 5, "p": 0.8, "q": 0.2, "delta": 0.3},
        full_defaults={"n": 200, "K": 5, "p": 0.8, "q": 0.2, "delta": 0.3},
    ),
    "maxcut_bipartite_heatmap": _ExperimentSpec(
        grid_axes=("eta_grid", "delta_grid"),
        group_cols=("eta", "delta"),
        value_cols=("ari", "best_cut", "mean_cut"),
        header=("eta", "delta", "replicate", "seed", "ari", "best_cut",
                "mean_cut", "status"),
        cell_fn=_cell_maxcut_bipartite,
        desk_defaults={"n": 100, "eta_grid": [0.0, 0.05, 0.1],
                       "delta_grid": [0.3, 0.6, 1.0], "gw_samples": 100},
        full_defaults={"n": 500, "eta_grid": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
                       "delta_grid": [0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 1.0],
                       "gw_samples": 200},
    ),
    "maxcut_gset_sweep": _ExperimentSpec(
        grid_axes=("delta_grid",),
        group_cols=("delta",),
        value_cols=("cut_full",),
        header=("delta", "replicate", "seed", "cut_full", "status"),
        cell_fn=_cell_gset_sweep,
        desk_defaults={"n": 150, "avg_degree": 12.0, "graph_seed": 53,
                       "delta_grid": [0.2, 0.5, 0.8, 1.0], "gw_samples": 100},
        full_defaults={"n": 1000, "avg_degree": 12.0, "graph_seed": 53,
                       "delta_grid": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
                       "gw_samples": 200},
    ),
    "sync_heatmap_gaussian": _ExperimentSpec(
        grid_axes=("level_grid", "prob_grid"),
        group_cols=("level", "sample_prob"),
        value_cols=("mse_sdp", "mse_spectral"),
        header=("level", "sample_prob", "replicate", "seed", "mse_sdp",
                "mse_spectral", "status"),
        cell_fn=_cell_sync("gaussian"),
        desk_defaults={"n": 100, "level_grid": [0.0, 0.25, 0.5, 1.0],
                       "prob_grid": [0.3, 0.6, 1.0]},
        full_defaults={"n": 500, "level_grid": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2],
                       "prob_grid": [0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 1.0]},
    ),
    "sync_heatmap_outlier": _ExperimentSpec(
        grid_axes=("level_grid", "prob_grid"),
        group_cols=("level", "sample_prob"),
        value_cols=("mse_sdp", "mse_spectral"),
        header=("level", "sample_prob", "replicate", "seed", "mse_sdp",
                "mse_spectral", "status"),
        cell_fn=_cell_sync("outlier"),
        desk_defaults={"n": 100, "level_grid": [0.0, 0.2, 0.4, 0.6],
                       "prob_grid": [0.3, 0.6, 1.0]},
        full_defaults={"n": 500, "level_grid": [0.0, 0.15, 0.3, 0.45, 0.6, 0.75, 0.9],
                       "prob_grid": [0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 1.0]},
    ),
    "fixed_point_curve": None,  # special-cased: emits the quantile curve directly
}


def _aggregate(spec: _ExperimentSpec, rows):
    groups = {}
    order = []
    for row in rows:
        if row.get("status") != "ok":
            continue
        key = tuple(row[c] for c in spec.group_cols)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)
    header = list(spec.group_cols) + ["count"]
    for col in spec.value_cols:
        header += [f"mean_{col}", f"std_{col}"]
    out = []
    for key in order:
        members = groups[key]
        row = dict(zip(spec.group_cols, key))
        row["count"] = len(members)
        for col in spec.value_cols:
            vals = np.asarray([float(m[col]) for m in members if col in m])
            row[f"mean_{col}"] = float(vals.mean()) if vals.size else None
            row[f"std_{col}"] = float(vals.std()) if vals.size else None
        out.append(row)
    return header, out


def _run_grid(config: ExperimentConfig, threads: int = 1):
    spec = EXPERIMENTS[config.experiment]
    params = config.resolved_params()
    if config.experiment == "maxcut_gset_sweep" and "_adjacency" not in params:
        if params.get("gset_path"):
            from .fileio import parse_gset
            from pathlib import Path
            graph = parse_gset(Path(params["gset_path"]).read_text())
            params["_adjacency"] = graph.adjacency()
        else:
            params["_adjacency"] = _synthetic_benchmark_graph(
                params["n"], params["avg_degree"], params["graph_seed"]
            )
    grids = [list(params[axis]) for axis in spec.grid_axes]
    for axis, grid in zip(spec.grid_axes, grids):
        if not grid:
            raise InvalidInputError(f"grid '{axis}' must be non-empty")
    cells = list(product(*grids)) if grids else [()]

    tasks = []
    for gi, axes in enumerate(cells):
        for rep in range(config.replicates):
            tasks.append((gi, axes, rep))

    def run_task(task):
        gi, axes, rep = task
        seed_seq = _rng.cell_seed_sequence(config.seed, gi, rep)
        return spec.cell_fn(params, axes, rep, seed_seq)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_task, tasks))
    else:
        results = [run_task(t) for t in tasks]
    rows = [row for chunk in results for row in chunk]
    return spec, params, rows


def _problem_generator_for_fixed_point(params):
    """Build (generator, atoms) for the fixed-point curve experiment."""
    problem = params.get("problem", "maxcut")
    n = params.get("n", 20)
    if problem == "maxcut":
        p = params.get("p", 0.8)
        A0 = _synthetic_benchmark_graph(n, params.get("avg_degree", 0.5 * (n - 1)),
                                        params.get("graph_seed", 7))
        _, Z_star, _ = bm_solve(-A0, "max", BmConfig(seed=params.get("graph_seed", 7)))

        def generator(rng):
            seed = int(rng.integers(0, 2**32))
            inst = apply_mask(A0, p, seed=seed)
            return inst.rescaled, -A0, Z_star

        return generator, unit_diag_atoms()
    if problem == "signed":
        ssbm = SsbmParams(n=n, n_clusters=params.get("K", 2), p=params.get("p", 0.9),
                          q=params.get("q", 0.1), delta=params.get("delta", 1.0))

        def generator(rng):
            seed = int(rng.integers(0, 2**32))
            inst = gen_ssbm(ssbm, seed=seed)
            alpha = inst.params["alpha"]
            J = np.ones((n, n))
            return inst.observed - alpha * J, inst.expected - alpha * J, inst.oracle

        from .solvers import signed_atoms
        return generator, signed_atoms()
    raise InvalidInputError(f"fixed_point_curve does not support problem '{problem}'")


_FIXED_POINT_DESK = {
    "problem": "maxcut", "n": 20, "p": 0.8, "localization": "excess_risk",
    "delta_prob": 0.005, "r_grid": [2.0 * k for k in range(1, 41)],
}


def run_experiment(config: ExperimentConfig, out_prefix, threads: int = 1) -> dict:
    """Run a sweep and persist CSV results plus a JSON sidecar.

    Returns a summary dict (also written into the sidecar).
    """
    out_prefix = str(out_prefix)
    sidecar = {"config": config.to_dict(), "schema_version": SCHEMA_VERSION}
    if config.experiment == "fixed_point_curve":
        params = dict(_FIXED_POINT_DESK)
        params.update(config.params)
        generator, atoms = _problem_generator_for_fixed_point(params)
        estimate = estimate_fixed_point(
            generator, atoms, params["localization"], params["delta_prob"],
            n_mc=config.replicates, r_grid=params["r_grid"], seed=config.seed,
        )
        header = ("r", "quantile", "n_effective")
        rows = [{"r": r, "quantile": q, "n_effective": estimate.n_effective}
                for r, q in estimate.quantile_curve]
        write_csv(out_prefix + ".csv", header, rows)
        write_csv(out_prefix + ".agg.csv", header, rows)
        public_params = {k: v for k, v in params.items() if not k.startswith("_")}
        sidecar.update({"resolved_params": public_params,
                        "estimate": estimate.to_dict()})
        write_json(sidecar, out_prefix + ".json")
        return sidecar

    spec, params, rows = _run_grid(config, threads=threads)
    sort_cols = list(spec.group_cols) + ["replicate"]
    if spec.group_cols == ("algorithm",):
        sort_cols = ["replicate", "algorithm"]
    rows.sort(key=lambda row: tuple(row.get(c) for c in sort_cols))
    write_csv(out_prefix + ".csv", spec.header, rows)
    agg_header, agg_rows = _aggregate(spec, rows)
    write_csv(out_prefix + ".agg.csv", agg_header, agg_rows)
    public_params = {k: v for k, v in params.items() if not k.startswith("_")}
    n_ok = sum(1 for r in rows if r.get("status") == "ok")
    sidecar.update({"resolved_params": public_params,
                    "rows": len(rows), "rows_ok": n_ok})
    write_json(sidecar, out_prefix + ".json")
    return sidecar


def gset_sweep(adjacency, delta_grid, replicates: int, seed: int = 0,
               gw_samples: int = 100, max_iters: int = 20000, restarts: int = 2):
    """Mask / solve / round / evaluate sweep on one benchmark graph.

    For each sparsity delta the graph is masked, the cut program is solved on
    the masked observation (low-rank solver), rounded by Gaussian hyperplanes,
    and the resulting partition scored by its cut value on the FULL graph.
    Returns (per-row results, aggregated results).
    """
    if isinstance(adjacency, GsetGraph):
        adjacency = adjacency.adjacency()
    adjacency = np.asarray(adjacency, dtype=float)
    params = {"_adjacency": adjacency, "gw_samples": gw_samples,
              "max_iters": max_iters, "restarts": restarts}
    rows = []
    for gi, delta in enumerate(delta_grid):
        for rep in range(replicates):
            seed_seq = _rng.cell_seed_sequence(seed, gi, rep)
            rows.extend(_cell_gset_sweep(params, (float(delta),), rep, seed_seq))
    spec = EXPERIMENTS["maxcut_gset_sweep"]
    rows.sort(key=lambda row: (row["delta"], row["replicate"]))
    agg_header, agg_rows = _aggregate(spec, rows)
    return rows, agg_rows
