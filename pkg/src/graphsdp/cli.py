"""Command line interface.

Subcommands: generate, solve, round, cluster, evaluate, fixed-point,
experiment, gset.  Exit codes: 0 success, 2 invalid input, 3 solver
non-convergence on a single-solve command.  All outputs are deterministic
given the seed and configuration.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .experiments import ExperimentConfig, gset_sweep, run_experiment
from .fileio import (
    dump_matrix,
    load_matrix,
    parse_gset,
    read_json,
    write_csv,
    write_json,
)
from .linalg import InvalidInputError
from .metrics import (
    ari,
    bound_report,
    cut_value,
    estimate_fixed_point,
    phase_aligned_l2,
    signed_error_rate,
    sync_mse,
)
from .models import (
    SsbmParams,
    SyncParams,
    gen_bipartite_perturbed,
    gen_sbm,
    gen_ssbm,
    gen_sync,
    membership_matrix,
)
from .rounding import extract_communities, extract_phases, gw_round
from .signed import bnc_cluster, spectral_cluster
from .solvers import (
    BmConfig,
    PierraConfig,
    bm_solve,
    pierra_community,
    pierra_signed,
    pierra_solve,
    unit_diag_atoms,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NO_CONVERGENCE = 3


def _float_list(text: str):
    return [float(tok) for tok in text.replace(",", " ").split()]


def _load_instance(prefix: str):
    meta = read_json(prefix + ".json")
    observed = load_matrix(prefix + ".coo")
    full = None
    if meta["problem"] == "maxcut":
        full = load_matrix(prefix + ".full.coo")
    return meta, observed, full


def _cmd_generate(args) -> int:
    seed = args.seed
    out = args.out or "instance"
    if args.problem == "community":
        inst = gen_sbm(args.n, args.k, args.p, args.q, seed=seed)
        meta = {"problem": "community", "params": inst.params, "seed": seed,
                "ground_truth": inst.ground_truth}
        dump_matrix(inst.observed, out + ".coo")
    elif args.problem == "signed":
        params = SsbmParams(n=args.n, n_clusters=args.k, p=args.p, q=args.q,
                            delta=args.delta)
        inst = gen_ssbm(params, seed=seed)
        meta = {"problem": "signed", "params": inst.params, "seed": seed,
                "ground_truth": inst.ground_truth}
        dump_matrix(inst.observed, out + ".coo")
    elif args.problem == "sync":
        params = SyncParams(n=args.n, sigma=args.sigma, noise_model=args.noise_model,
                            gamma=args.gamma, sample_prob=args.sample_prob)
        inst = gen_sync(params, seed=seed)
        meta = {"problem": "sync", "params": inst.params, "seed": seed,
                "ground_truth": inst.ground_truth}
        dump_matrix(inst.observed, out + ".coo")
    elif args.problem == "maxcut":
        inst = gen_bipartite_perturbed(args.n, args.eta, args.delta, seed=seed)
        meta = {"problem": "maxcut",
                "params": {"n": args.n, "eta": args.eta, "mask_prob": args.delta},
                "seed": seed,
                "ground_truth": inst.ground_truth_partition}
        dump_matrix(inst.observed, out + ".coo")
        dump_matrix(inst.full_adjacency, out + ".full.coo")
    else:  # pragma: no cover - argparse restricts choices
        raise InvalidInputError(f"unknown problem {args.problem}")
    write_json(meta, out + ".json")
    return EXIT_OK


def _solver_configs(args):
    overrides = read_json(args.config) if args.config else {}
    pierra_keys = {"epsilon", "max_iters", "feas_tol", "obj_tol"}
    bm_keys = {"rank", "max_iters", "grad_tol", "restarts", "seed"}
    pc = PierraConfig(**{k: v for k, v in overrides.items() if k in pierra_keys})
    bm_over = {k: v for k, v in overrides.items() if k in bm_keys}
    bm_over.setdefault("seed", args.seed)
    return pc, BmConfig(**bm_over)


def _cmd_solve(args) -> int:
    meta, observed, full = _load_instance(args.infile)
    pc, bc = _solver_configs(args)
    problem = meta["problem"]
    if args.problem is not None and args.problem != problem:
        raise InvalidInputError(
            f"--problem {args.problem} does not match the instance ({problem})"
        )
    if args.solver == "pierra":
        if problem == "community":
            Z, report = pierra_community(observed, meta["params"]["lam"], pc)
        elif problem == "signed":
            Z, report = pierra_signed(observed, meta["params"]["alpha"], pc)
        elif problem == "sync":
            Z, report = pierra_solve(observed, unit_diag_atoms(), pc)
        else:  # maxcut: maximize the rescaled objective B = -(1/p) A
            B = -observed / meta["params"]["mask_prob"]
            Z, report = pierra_solve(B, unit_diag_atoms(), pc)
    else:
        if problem in ("community", "signed"):
            raise InvalidInputError(
                "the low-rank solver only handles the unit-diagonal constraint set"
            )
        if problem == "sync":
            _, Z, report = bm_solve(observed, "max", bc)
        else:
            B = -observed / meta["params"]["mask_prob"]
            _, Z, report = bm_solve(B, "max", bc)
    out = args.out or "result"
    dump_matrix(Z, out + ".coo")
    write_json({"problem": problem, "solver": args.solver,
                "instance": Path(args.infile).name,
                "report": report.to_dict()}, out + ".json")
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


def _cmd_round(args) -> int:
    Z = load_matrix(args.infile + ".coo")
    out = args.out or "rounded.json"
    if args.mode == "cut":
        if args.instance:
            _, observed, full = _load_instance(args.instance)
            graph = full if full is not None else observed
        elif args.graph:
            graph = load_matrix(args.graph)
        else:
            raise InvalidInputError("cut rounding needs --instance or --graph")
        x, mean_cut = gw_round(Z, graph, args.samples, seed=args.seed)
        write_json({"mode": "cut", "cut_vector": x, "best_cut": cut_value(graph, x),
                    "mean_cut": mean_cut}, out)
    elif args.mode == "communities":
        assignment = extract_communities(Z, args.k, seed=args.seed)
        write_json({"mode": "communities", "labels": assignment.labels}, out)
    else:  # phases
        x = extract_phases(Z)
        write_json({"mode": "phases", "phases": np.angle(x),
                    "estimate_re": np.real(x), "estimate_im": np.imag(x)}, out)
    return EXIT_OK


def _cmd_cluster(args) -> int:
    meta, observed, _ = _load_instance(args.infile)
    if meta["problem"] != "signed":
        raise InvalidInputError("cluster works on signed instances")
    if args.input == "raw":
        matrix = observed
    else:
        if args.solution:
            matrix = load_matrix(args.solution + ".coo")
        else:
            matrix, _ = pierra_signed(observed, meta["params"]["alpha"],
                                      PierraConfig())
    K = args.k or meta["params"]["K"]
    if args.algo == "bnc":
        assignment = bnc_cluster(matrix, K, seed=args.seed)
    else:
        assignment = spectral_cluster(matrix, args.algo, K, seed=args.seed)
    result = {"labels": assignment.labels, "algorithm": args.algo, "input": args.input}
    truth = meta.get("ground_truth")
    if truth is not None:
        truth = np.asarray(truth, dtype=int)
        result["ari"] = ari(assignment.labels, truth)
        com = 2.0 * membership_matrix(truth) - 1.0
        result["gamma"] = signed_error_rate(assignment.labels, com)
    write_json(result, args.out or "clusters.json")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    out = args.out or "evaluation.json"
    if args.bound:
        inputs = dict(n=args.n, p=args.p, delta_prob=args.delta_prob,
                      sigma=args.sigma, eps=args.eps)
        needed = {"maxcut_rstar": ("n", "p"), "gv_rstar": ("n", "delta_prob"),
                  "sync_excess": ("n", "sigma", "eps")}[args.bound]
        missing = [k for k in needed if inputs.get(k) is None]
        if missing:
            raise InvalidInputError(f"bound {args.bound} needs {missing}")
        report = bound_report(args.bound, **{k: inputs[k] for k in needed})
        write_json(report.to_dict(), out)
        return EXIT_OK
    meta, observed, full = _load_instance(args.instance)
    payload = read_json(args.infile)
    problem = meta["problem"]
    result = {"problem": problem}
    truth = meta.get("ground_truth")
    if problem in ("community", "signed"):
        labels = np.asarray(payload["labels"], dtype=int)
        truth = np.asarray(truth, dtype=int)
        result["ari"] = ari(labels, truth)
        if problem == "signed":
            com = 2.0 * membership_matrix(truth) - 1.0
            result["gamma"] = signed_error_rate(labels, com)
    elif problem == "sync":
        phases = np.asarray(payload["phases"], dtype=float)
        truth = np.asarray(truth, dtype=float)
        result["mse"] = sync_mse(phases, truth)
        result["aligned_l2"] = phase_aligned_l2(np.exp(1j * phases), np.exp(1j * truth))
    else:
        x = np.asarray(payload["cut_vector"], dtype=float)
        graph = full if full is not None else observed
        result["cut_full"] = cut_value(graph, x)
        if truth is not None:
            labels = (x > 0).astype(int)
            result["ari"] = ari(labels, np.asarray(truth, dtype=int))
    write_json(result, out)
    return EXIT_OK


def _cmd_fixed_point(args) -> int:
    from .experiments import _problem_generator_for_fixed_point

    params = {"problem": args.problem, "n": args.n, "p": args.p, "K": args.k,
              "q": args.q, "delta": args.delta_param, "graph_seed": args.graph_seed}
    params = {k: v for k, v in params.items() if v is not None}
    generator, atoms = _problem_generator_for_fixed_point(params)
    estimate = estimate_fixed_point(
        generator, atoms, args.localization, args.delta_prob,
        n_mc=args.n_mc, r_grid=_float_list(args.r_grid), seed=args.seed,
    )
    out = args.out or "fixed_point"
    rows = [{"r": r, "quantile": q, "n_effective": estimate.n_effective}
            for r, q in estimate.quantile_curve]
    write_csv(out + ".csv", ("r", "quantile", "n_effective"), rows)
    write_json(estimate.to_dict(), out + ".json")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    config = ExperimentConfig.from_dict(read_json(args.config))
    if args.seed is not None:
        config = ExperimentConfig.from_dict({**config.to_dict(), "seed": args.seed})
    if args.full:
        config = ExperimentConfig.from_dict({**config.to_dict(), "full_scale": True})
    run_experiment(config, args.out or config.experiment, threads=args.threads)
    return EXIT_OK


def _cmd_gset(args) -> int:
    graph = parse_gset(Path(args.infile).read_text())
    if args.sweep:
        rows, agg = gset_sweep(graph, _float_list(args.delta_grid),
                               replicates=args.replicates, seed=args.seed,
                               gw_samples=args.samples)
        out = args.out or "gset_sweep"
        write_csv(out + ".csv", ("delta", "replicate", "seed", "cut_full", "status"), rows)
        write_csv(out + ".agg.csv",
                  ("delta", "count", "mean_cut_full", "std_cut_full"), agg)
        return EXIT_OK
    info = {"n": graph.n, "m": graph.m, "average_degree": graph.average_degree}
    if args.out:
        write_json(info, args.out)
    else:
        print(f"n={graph.n} m={graph.m} average_degree={graph.average_degree!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphsdp",
        description="SDP estimators for graph learning: generate, solve, round, evaluate.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    common.add_argument("--out", help="output path or prefix")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    g = add_parser("generate", help="generate a synthetic instance")
    g.add_argument("--problem", required=True,
                   choices=["community", "signed", "sync", "maxcut"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--p", type=float, default=0.9)
    g.add_argument("--q", type=float, default=0.1)
    g.add_argument("--delta", type=float, default=1.0)
    g.add_argument("--eta", type=float, default=0.0)
    g.add_argument("--sigma", type=float, default=0.0)
    g.add_argument("--gamma", type=float, default=0.0)
    g.add_argument("--noise-model", default="gaussian", choices=["gaussian", "outlier"])
    g.add_argument("--sample-prob", type=float, default=1.0)
    g.set_defaults(func=_cmd_generate)

    s = add_parser("solve", help="solve the SDP for a generated instance")
    s.add_argument("--in", dest="infile", required=True, help="instance prefix")
    s.add_argument("--problem", choices=["community", "signed", "sync", "maxcut"],
                   help="sanity check against the instance sidecar")
    s.add_argument("--solver", default="pierra", choices=["pierra", "bm"])
    s.add_argument("--config", help="JSON file with solver overrides")
    s.set_defaults(func=_cmd_solve)

    r = add_parser("round", help="round a solved matrix")
    r.add_argument("--in", dest="infile", required=True, help="result prefix")
    r.add_argument("--mode", required=True, choices=["cut", "communities", "phases"])
    r.add_argument("--instance", help="instance prefix (for cut evaluation)")
    r.add_argument("--graph", help="explicit graph .coo (for cut evaluation)")
    r.add_argument("--samples", type=int, default=200)
    r.add_argument("--k", type=int, default=2)
    r.set_defaults(func=_cmd_round)

    c = add_parser("cluster", help="signed clustering baselines, before/after")
    c.add_argument("--in", dest="infile", required=True, help="instance prefix")
    c.add_argument("--input", default="raw", choices=["raw", "sdp"])
    c.add_argument("--solution", help="solved result prefix (skips in-process solve)")
    c.add_argument("--algo", default="adjacency",
                   choices=["adjacency", "lbar", "lbar_rw", "lbar_sym", "bnc"])
    c.add_argument("--k", type=int)
    c.set_defaults(func=_cmd_cluster)

    e = add_parser("evaluate", help="metrics for rounded outputs or bounds")
    e.add_argument("--in", dest="infile", help="rounded output JSON")
    e.add_argument("--instance", help="instance prefix")
    e.add_argument("--bound", choices=["maxcut_rstar", "gv_rstar", "sync_excess"])
    e.add_argument("--n", type=int)
    e.add_argument("--p", type=float)
    e.add_argument("--delta-prob", type=float)
    e.add_argument("--sigma", type=float)
    e.add_argument("--eps", type=float)
    e.set_defaults(func=_cmd_evaluate)

    f = add_parser("fixed-point", help="empirical fixed-point radius")
    f.add_argument("--problem", default="maxcut", choices=["maxcut", "signed"])
    f.add_argument("--n", type=int, default=20)
    f.add_argument("--p", type=float)
    f.add_argument("--q", type=float)
    f.add_argument("--k", type=int)
    f.add_argument("--delta-param", type=float)
    f.add_argument("--graph-seed", type=int)
    f.add_argument("--localization", default="excess_risk",
                   choices=["excess_risk", "l1", "l2"])
    f.add_argument("--delta-prob", type=float, default=0.05)
    f.add_argument("--n-mc", type=int, default=50)
    f.add_argument("--r-grid", required=True, help="comma-separated radii")
    f.set_defaults(func=_cmd_fixed_point)

    x = add_parser("experiment", help="run a configured sweep")
    x.add_argument("--config", required=True, help="experiment config JSON")
    x.add_argument("--full", action="store_true", help="paper-scale parameters")
    x.set_defaults(func=_cmd_experiment)

    gs = add_parser("gset", help="benchmark graph utilities")
    gs.add_argument("--in", dest="infile", required=True, help="edge-list file")
    gs.add_argument("--sweep", action="store_true")
    gs.add_argument("--delta-grid", default="0.2,0.5,0.8,1.0")
    gs.add_argument("--replicates", type=int, default=5)
    gs.add_argument("--samples", type=int, default=100)
    gs.set_defaults(func=_cmd_gset)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "experiment" and args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
