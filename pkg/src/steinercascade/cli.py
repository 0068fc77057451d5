"""Command-line interface.

Every command reads and writes plain files (TSV edge lists, JSON records,
CSV tables) and drops a ``<output>.manifest.json`` next to its main output
recording the resolved configuration, seed, version and input digests.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cascade import (DEFAULT_BETA, assign_constant_probs, assign_uniform_probs, dump_record,
                      observe, parse_record, random_source, record, simulate_ic, simulate_si)
from .evaluation import METHODS, ExperimentSpec, average_precision, run_experiment, spec_to_dict
from .graph import (complete_graph, cycle_graph, from_undirected, grid_graph, load_graph, path_graph,
                    serialize_graph)
from .inference import ReconConfig, reconstruct

log = logging.getLogger("steinercascade")


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _manifest(out: str, command: str, config: dict, inputs: list[str], seed=None) -> None:
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": __version__,
        "inputs": {Path(p).name: _digest(p) for p in inputs},
    }
    _write(out + ".manifest.json", json.dumps(manifest, indent=1, sort_keys=True) + "\n")


def _read_graph(path: str):
    with open(path, encoding="utf-8") as fh:
        return load_graph(fh)


def _read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def cmd_gen_graph(args) -> None:
    kind, params = args.kind, args.params
    need = {"grid": 2, "path": 1, "cycle": 1, "complete": 1, "undirected": 1}
    if len(params) != need[kind]:
        raise SystemExit(_usage_error(f"gen-graph {kind} takes {need[kind]} argument(s)"))
    inputs = []
    if kind == "undirected":
        with open(params[0], encoding="utf-8") as fh:
            g = from_undirected(fh, args.p)
        inputs = [params[0]]
    else:
        try:
            sizes = [int(x) for x in params]
        except ValueError:
            raise SystemExit(_usage_error("graph sizes must be integers")) from None
        g = {"grid": grid_graph, "path": path_graph, "cycle": cycle_graph,
             "complete": complete_graph}[kind](*sizes, p=args.p)
    _write(args.output, serialize_graph(g))
    _manifest(args.output, "gen-graph", {"kind": kind, "params": params, "p": args.p}, inputs)


def cmd_assign_probs(args) -> None:
    g = _read_graph(args.graph)
    if args.uniform:
        g = assign_uniform_probs(g, np.random.default_rng(args.seed))
        cfg = {"mode": "uniform"}
    else:
        g = assign_constant_probs(g, args.beta)
        cfg = {"mode": "constant", "beta": args.beta}
    _write(args.output, serialize_graph(g))
    _manifest(args.output, "assign-probs", cfg, [args.graph], args.seed)


def cmd_simulate(args) -> None:
    g = _read_graph(args.graph)
    rng = np.random.default_rng(args.seed)
    source = g.index(args.source) if args.source is not None else random_source(g, rng)
    if args.model == "si":
        c = simulate_si(g, args.beta, source, args.cascade_fraction, rng, retries=args.retries)
    else:
        c = simulate_ic(g, source, args.cascade_fraction, rng, retries=args.retries)
    _write(args.output, dump_record(record(g, c)))
    log.info("realized cascade fraction %.4f", len(c.infected) / g.n)
    _manifest(args.output, "simulate",
              {"model": args.model, "beta": args.beta if args.model == "si" else None,
               "cascade_fraction": args.cascade_fraction, "source": g.labels[source],
               "retries": args.retries, "realized_fraction": len(c.infected) / g.n},
              [args.graph], args.seed)


def cmd_observe(args) -> None:
    g = _read_graph(args.graph)
    cascade, _ = parse_record(g, _read_json(args.cascade))
    if cascade is None:
        raise ValueError(f"{args.cascade} holds no cascade")
    obs = observe(cascade, args.obs_fraction, np.random.default_rng(args.seed), g.n,
                  args.uninfected_fraction)
    _write(args.output, dump_record(record(g, cascade, obs)))
    _manifest(args.output, "observe",
              {"obs_fraction": args.obs_fraction, "uninfected_fraction": args.uninfected_fraction},
              [args.graph, args.cascade], args.seed)


def _parse_root(value: str) -> tuple[str, str | None]:
    if value in ("min-dist", "pagerank", "true"):
        return {"min-dist": "min_dist", "pagerank": "pagerank", "true": "true_root"}[value], None
    if value.startswith("given:") and len(value) > 6:
        return "given", value[6:]
    raise argparse.ArgumentTypeError(f"invalid root choice {value!r}")


def cmd_reconstruct(args) -> None:
    g = _read_graph(args.graph)
    cascade, obs = parse_record(g, _read_json(args.observation))
    if obs is None:
        raise ValueError(f"{args.observation} holds no observation")
    strategy, label = args.root
    root = g.index(label) if label is not None else None
    true_root = None
    if strategy == "true_root":
        if cascade is None:
            raise ValueError("--root true needs the cascade source in the observation file")
        true_root = cascade.source
    cfg = ReconConfig(sampler=args.sampler, n_samples=args.samples, resample=args.resample,
                      root_strategy=strategy, root=root, seed=args.seed, workers=args.workers,
                      estimator=args.estimator, lerw_weights=args.lerw_weights)
    est = reconstruct(g, obs, cfg, true_root=true_root)
    _write(args.output + ".nodes.csv", est.node_csv(g))
    _write(args.output + ".edges.csv", est.edge_csv(g))
    _manifest(args.output, "reconstruct",
              {"sampler": cfg.sampler, "samples": cfg.n_samples, "resample": cfg.resample,
               "root": strategy, "root_node": g.labels[est.root], "estimator": cfg.estimator,
               "lerw_weights": cfg.lerw_weights,
               "workers": cfg.workers},
              [args.graph, args.observation], args.seed)


def _read_scores(path: str, g, level: str) -> dict:
    scores = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            if level == "node":
                scores[g.index(row["node"])] = float(row["probability"])
            else:
                scores[g.index(row["src"]), g.index(row["dst"])] = float(row["probability"])
    return scores


def cmd_evaluate(args) -> None:
    g = _read_graph(args.graph)
    cascade, obs = parse_record(g, _read_json(args.truth))
    if cascade is None:
        raise ValueError(f"{args.truth} holds no ground-truth cascade")
    observed = set(obs.infected) | set(obs.uninfected) if obs else set()
    lines = ["level,ap"]
    inputs = [args.graph, args.truth]
    if args.nodes:
        scores = {u: s for u, s in _read_scores(args.nodes, g, "node").items() if u not in observed}
        ap = average_precision(scores, cascade.infected - observed)
        lines.append(f"node,{ap!r}")
        inputs.append(args.nodes)
    if args.edges:
        ap = average_precision(_read_scores(args.edges, g, "edge"), cascade.edges())
        lines.append(f"edge,{ap!r}")
        inputs.append(args.edges)
    if len(lines) == 1:
        raise ValueError("give --nodes and/or --edges")
    _write(args.output, "\n".join(lines) + "\n")
    _manifest(args.output, "evaluate", {}, inputs)


def _spec_graph(entry, base: Path):
    if isinstance(entry, str):
        return _read_graph(str(base / entry)), [str(base / entry)]
    kind = entry["generator"]
    g = {"grid": grid_graph, "path": path_graph, "cycle": cycle_graph,
         "complete": complete_graph}[kind](*entry["args"])
    return g, []


def cmd_experiment(args) -> None:
    raw = _read_json(args.spec)
    g, inputs = _spec_graph(raw["graph"], Path(args.spec).parent)
    seed = args.seed if args.seed is not None else raw.get("seed", 0)
    spec = ExperimentSpec(
        graph=g, graph_name=raw.get("graph_name", "graph"), model=raw.get("model", "si"),
        beta=raw.get("beta", DEFAULT_BETA),
        cascade_fractions=tuple(raw.get("cascade_fractions", (0.1,))),
        obs_fractions=tuple(raw.get("obs_fractions", (0.5,))),
        methods=tuple(raw.get("methods", METHODS)), reps=raw.get("reps", 1),
        n_samples=raw.get("samples", 1000), sampler=raw.get("sampler", "lerw"),
        resample=raw.get("resample", "sir"), lerw_weights=raw.get("lerw_weights", "determinant"),
        seed=seed, workers=args.workers)
    res = run_experiment(spec)
    _write(args.output, res.to_csv())
    stem = args.output[:-4] if args.output.endswith(".csv") else args.output
    _write(stem + ".agg.csv", res.aggregate_csv())
    cfg = spec_to_dict(spec)
    cfg.pop("workers")
    cfg["excluded_runs"] = res.failures
    _manifest(args.output, "experiment", cfg, [args.spec, *inputs], seed)


def cmd_oracle_check(args) -> None:
    from .checks import oracle_report

    report = oracle_report(args.samples, args.seed)
    _write(args.output, json.dumps(report, indent=1, sort_keys=True) + "\n")
    _manifest(args.output, "oracle-check", {"samples": args.samples}, [], args.seed)
    if not report["passed"]:
        raise RuntimeError("oracle check failed; see report")


def _usage_error(msg: str) -> int:
    print(f"usage error: {msg}", file=sys.stderr)
    return 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="steinercascade",
                                 description="Cascade reconstruction by Steiner-tree sampling.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="write a reciprocal graph as a TSV edge list")
    p.add_argument("kind", choices=["grid", "path", "cycle", "complete", "undirected"],
                   help="generator, or 'undirected' to import an undirected edge list")
    p.add_argument("params", nargs="+", help="sizes (grid: ROWS COLS) or the undirected file")
    p.add_argument("--p", type=float, default=1.0, help="edge probability (default 1.0)")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("assign-probs", help="set edge probabilities")
    p.add_argument("graph")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--uniform", action="store_true", help="independent U(0,1] per directed edge")
    mode.add_argument("--beta", type=float, help="the same probability on every edge")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_assign_probs)

    p = sub.add_parser("simulate", help="simulate a ground-truth cascade")
    p.add_argument("graph")
    p.add_argument("--model", choices=["si", "ic"], required=True)
    p.add_argument("--beta", type=float, default=DEFAULT_BETA, help="SI infection probability (default 0.1)")
    p.add_argument("--cascade-fraction", type=float, required=True)
    p.add_argument("--source", help="source node label (default: uniform random)")
    p.add_argument("--retries", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("observe", help="partially observe a cascade")
    p.add_argument("graph")
    p.add_argument("cascade")
    p.add_argument("--obs-fraction", type=float, required=True)
    p.add_argument("--uninfected-fraction", type=float, default=0.0,
                   help="fraction of healthy nodes reported uninfected (default 0)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_observe)

    p = sub.add_parser("reconstruct", help="estimate infection probabilities")
    p.add_argument("graph")
    p.add_argument("observation")
    p.add_argument("--sampler", choices=["lerw", "trim"], default="lerw")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--resample", choices=["sir", "none"], default="sir")
    p.add_argument("--root", type=_parse_root, default=("min_dist", None),
                   help="min-dist | pagerank | true | given:<label> (default min-dist)")
    p.add_argument("--estimator", choices=["resampled", "weighted"], default="resampled")
    p.add_argument("--lerw-weights", choices=["determinant", "degree"], default="determinant",
                   help="SIR proposal for LERW: w(T)*det (exact, default) or w(T) alone")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True,
                   help="prefix; writes PREFIX.nodes.csv and PREFIX.edges.csv")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("evaluate", help="average precision of predictions against a cascade")
    p.add_argument("graph")
    p.add_argument("truth", help="cascade/observation JSON record")
    p.add_argument("--nodes", help="node,probability CSV")
    p.add_argument("--edges", help="src,dst,probability CSV")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", help="run a sweep described by a JSON spec file")
    p.add_argument("spec")
    p.add_argument("--seed", type=int, help="override the spec's seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-o", "--output", required=True, help="per-run CSV; aggregate goes to *.agg.csv")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("oracle-check", help="verify samplers and determinants against enumeration")
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_oracle_check)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ValueError, RuntimeError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
