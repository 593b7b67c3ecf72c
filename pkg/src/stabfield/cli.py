"""Command-line front end.

Every subcommand writes plain CSV/JSON data; ``--plot`` additionally renders
a PNG next to it.  Errors are reported as a JSON object on stderr with a
nonzero exit status.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    PerturbationBoundInput,
    condition_number,
    depolarizing_sensitivity,
    perturbation_bound,
    resilient_vertices,
)
from .channel import FieldConfig, delta_p_general, delta_p_rotated
from .errors import StabfieldError
from .graphs import Axis, Graph, generate, promise_matrix
from .multibasis import (
    MinimizerSettings,
    MultiBasisDataset,
    estimate_fields,
    random_basis,
    repeat_estimation,
    simulate_dataset,
)
from .reconstruct import reconstruct_fields
from .simulator import (
    SyndromeStats,
    closed_form_is_exact,
    make_rng,
    sample_joint_syndromes,
    sample_syndromes,
    statevector_delta_p,
)
from .spectra import fig0_grid, solvability_report
from .sweeps import REFERENCE, SAMPLED_REAL_TOL, run_sweep

EXIT_ERROR = 2
EXIT_CHECK_FAILED = 1


# --- helpers ------------------------------------------------------------------

def load_graph(text: str) -> Graph:
    """A graph JSON file path or a descriptor such as ``open_chain:5``."""
    path = Path(text)
    if path.suffix == ".json" or path.is_file():
        with open(path) as fh:
            return Graph.from_dict(json.load(fh))
    return generate(text)


def load_fields(path: str) -> FieldConfig:
    with open(path) as fh:
        return FieldConfig.from_dict(json.load(fh))


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(args, name: str, obj):
    """Write JSON to ``--out/name`` when an output directory is given, else to stdout."""
    text = _dump(obj)
    if args.out:
        _write(_out_dir(args) / name, text)
    else:
        sys.stdout.write(text)


def _random_fields(g: Graph, axis, rng) -> FieldConfig:
    if axis is None:
        return FieldConfig.random(g.n, rng)
    return FieldConfig.aligned(rng.uniform(0.0, np.pi, g.n), axis)


# --- commands -----------------------------------------------------------------

def cmd_gen_graph(args):
    g = load_graph(args.graph)
    _emit(args, "graph.json", g.to_dict())


def cmd_solvability(args):
    g = load_graph(args.graph)
    axes = [Axis.parse(args.axis)] if args.axis else list(Axis)
    reports = {ax.value: solvability_report(g, ax).to_dict() for ax in axes}
    for rep in reports.values():
        rep["det"] = rep["determinant"]
    _emit(args, "solvability.json", reports[axes[0].value] if args.axis else reports)


def cmd_fig0(args):
    out = _out_dir(args)
    rows = fig0_grid(args.max_size)
    lines = ["m1,m2,panel,singular"] + [f"{m1},{m2},{p},{s}" for m1, m2, p, s in rows]
    _write(out / "fig0.csv", "\n".join(lines) + "\n")
    for panel in sorted({r[2] for r in rows}):
        grid = np.zeros((args.max_size, args.max_size), dtype=int)
        for m1, m2, p, s in rows:
            if p == panel:
                grid[m1 - 1, m2 - 1] = s
        header = "m1\\m2," + ",".join(str(k) for k in range(1, args.max_size + 1))
        body = [f"{i + 1}," + ",".join(str(x) for x in row) for i, row in enumerate(grid)]
        _write(out / f"fig0_{panel}.csv", "\n".join([header] + body) + "\n")
    if args.plot:
        from .plotting import plot_fig0

        plot_fig0(rows, out / "fig0.png", args.max_size)


def cmd_simulate(args):
    g = load_graph(args.graph)
    rng = make_rng(args.seed)
    cfg = load_fields(args.fields) if args.fields else _random_fields(g, args.axis, rng)
    if args.joint:
        stats = sample_joint_syndromes(g, cfg, args.M, rng)
    else:
        stats = sample_syndromes(np.clip((1.0 - args.q) * delta_p_general(cfg, g), -1, 1), args.M, rng)
    out = _out_dir(args)
    _write(out / "syndromes.csv", stats.to_csv())
    _write(out / "fields.json", _dump(cfg.to_dict()))


def cmd_reconstruct(args):
    g = load_graph(args.graph)
    with open(args.syndromes) as fh:
        stats = SyndromeStats.from_csv(fh.read())
    if len(stats.count0) != g.n:
        raise ValueError(f"syndrome table has {len(stats.count0)} vertices, graph has {g.n}")
    res = reconstruct_fields(g, args.axis, stats.delta_r, tol=args.real_tol, clamp=args.clamp_rates, strict=not args.no_strict)
    _emit(args, "reconstruction.json", res.to_dict())


def _parse_values(param, text):
    vals = [v.strip() for v in text.split(",") if v.strip()]
    return [int(float(v)) for v in vals] if param == "M" else [float(v) for v in vals]


_DEFAULT_VALUES = {
    "q": "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9",
    "eps": "0,0.01,0.02,0.05,0.1,0.2",
    "M": "10,100,1000,10000,100000",
}


def cmd_sweep(args):
    g = load_graph(args.graph)
    out = _out_dir(args)
    values = _parse_values(args.param, args.values or _DEFAULT_VALUES[args.param])
    res = run_sweep(
        g, args.axis, args.param, values, reps=args.reps, seed=args.seed,
        q=args.q, eps=args.eps, M=args.M, clamp=args.clamp_rates, workers=args.workers,
    )
    stem = f"sweep_{res.axis.value}_{args.param}"
    _write(out / f"{stem}.csv", res.to_csv())
    _write(out / f"{stem}.json", _dump(res.metadata()))
    if args.plot:
        from .plotting import plot_sweep

        plot_sweep(res, out / f"{stem}.png")


def cmd_multibasis(args):
    g = load_graph(args.graph)
    out = _out_dir(args)
    settings = MinimizerSettings(restarts=args.restarts)
    if args.measured:
        with open(args.measured) as fh:
            data = MultiBasisDataset.from_csv(fh.read())
        est = estimate_fields(g, data, settings, seed=args.seed)
        _write(out / "estimate.json", _dump(est.to_dict()))
        return
    if not args.fields:
        raise ValueError("multibasis needs --fields (simulate mode) or --measured")
    truth = load_fields(args.fields)
    rng = make_rng(args.seed)
    bases = [random_basis(rng) for _ in range(args.bases)]
    estimates, dist = repeat_estimation(truth, g, bases, args.M, args.reps, args.seed, settings)
    rows = ["rep,vertex,sq_distance,cost,converged"]
    for j, (est, row) in enumerate(zip(estimates, dist)):
        rows.extend(f"{j},{a},{d!r},{est.cost_value!r},{int(est.converged)}" for a, d in enumerate(row, start=1))
    _write(out / "distances.csv", "\n".join(rows) + "\n")
    _write(out / "dataset_exact.csv", simulate_dataset(truth, g, bases).to_csv())
    summary = {
        "bases": [b.to_list() for b in bases],
        "truth": truth.to_dict(),
        "first_estimate": estimates[0].to_dict(),
        "median_sq_distance": float(np.median(dist)),
        "reps": args.reps,
        "M": args.M,
    }
    _write(out / "estimate.json", _dump(summary))
    if args.plot:
        from .plotting import plot_distance_histogram

        plot_distance_histogram(dist.ravel(), out / "distances.png")


def oracle_battery(kind: str = "all") -> list:
    specs = [
        "open_chain:2", "open_chain:3", "open_chain:4", "open_chain:5",
        "closed_chain:3", "closed_chain:4", "closed_chain:5", "closed_chain:6",
        "ghz_complete:3", "ghz_complete:4", "ghz_star:3", "ghz_star:4",
        "steane5plus1", "lattice:2x3", "lattice:3x3", "lattice:3x4",
    ]
    graphs = [(s, generate(s)) for s in specs]
    if kind == "exact":
        graphs = [(s, g) for s, g in graphs if closed_form_is_exact(g)]
    return graphs


def cmd_oracle_check(args):
    rng = make_rng(args.seed)
    rows = []
    worst = 0.0
    for spec, g in oracle_battery(args.battery):
        dev = 0.0
        for _ in range(args.configs):
            cfg = FieldConfig.random(g.n, rng)
            basis = random_basis(rng) if args.rotated else None
            closed = delta_p_general(cfg, g) if basis is None else delta_p_rotated(cfg, g, basis)
            dev = max(dev, float(np.max(np.abs(closed - statevector_delta_p(g, cfg, basis=basis)))))
        worst = max(worst, dev)
        rows.append({"graph": spec, "n": g.n, "max_deviation": dev, "closed_form_exact": closed_form_is_exact(g)})
    report = {"battery": args.battery, "configs_per_graph": args.configs, "tolerance": args.tol,
              "max_deviation": worst, "passed": worst < args.tol, "graphs": rows}
    _emit(args, "oracle_check.json", report)
    for r in rows:
        print(f"{r['graph']:<16} exact={str(r['closed_form_exact']):<5} max_dev={r['max_deviation']:.3e}", file=sys.stderr)
    print(f"max deviation {worst:.3e} (tolerance {args.tol:.0e})", file=sys.stderr)
    return 0 if worst < args.tol else EXIT_CHECK_FAILED


def cmd_analyze(args):
    g = load_graph(args.graph)
    axes = [Axis.parse(args.axis)] if args.axis else [Axis.X, Axis.Y, Axis.Z]
    report = {"graph": g.to_dict(), "axes": {}}
    for ax in axes:
        a_s = promise_matrix(g, ax)
        entry = {"solvability": solvability_report(g, ax).to_dict()}
        if entry["solvability"]["determinant"] != 0:
            ainv_norm = float(np.linalg.norm(np.linalg.inv(a_s.astype(float)), np.inf))
            entry.update({
                "condition_number": {str(k): condition_number(a_s, k) for k in (1, 2, "inf")},
                "volume_ratio": 1.0 / abs(entry["solvability"]["determinant"]),
                "depolarizing_sensitivity": depolarizing_sensitivity(a_s).tolist(),
                "resilient_vertices": resilient_vertices(a_s),
                "ainv_norm_inf": ainv_norm,
            })
            if args.eps is not None:
                inp = PerturbationBoundInput(args.r, args.R, args.eps, g.max_degree, ainv_norm, args.dw)
                entry["perturbation_bound"] = perturbation_bound(inp).to_dict()
        report["axes"][ax.value] = entry
    _emit(args, "analysis.json", report)


# --- parser -------------------------------------------------------------------

def _positive_int(text):
    v = int(float(text))
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _unit_interval(text):
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError("must lie in [0, 1]")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stabfield", description="Stray-field reconstruction from graph-state syndrome statistics.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, graph=True, axis=False, out_required=False):
        sp = sub.add_parser(name, help=help_text)
        if graph:
            sp.add_argument("--graph", required=True, help="graph JSON file or descriptor such as open_chain:5")
        if axis:
            sp.add_argument("--axis", type=Axis.parse, required=axis == "required", help="promise axis x, y or z")
        sp.add_argument("--out", required=out_required, help="output directory")
        sp.add_argument("--seed", type=int, default=0)
        sp.set_defaults(func=func)
        return sp

    add("gen-graph", cmd_gen_graph, "write a graph as JSON")
    add("solvability", cmd_solvability, "determinant, rank defect and solution counts", axis=True)

    sp = add("fig0", cmd_fig0, "singularity grids of square lattices", graph=False, out_required=True)
    sp.add_argument("--max-size", type=_positive_int, default=20)
    sp.add_argument("--plot", action="store_true")

    sp = add("simulate", cmd_simulate, "sample syndrome counts", axis=True, out_required=True)
    sp.add_argument("--fields", help="FieldConfig JSON; random angles along --axis otherwise")
    sp.add_argument("--M", type=_positive_int, default=REFERENCE["M"])
    sp.add_argument("--q", type=_unit_interval, default=0.0)
    sp.add_argument("--joint", action="store_true", help="sample full syndrome strings from the state vector")

    sp = add("reconstruct", cmd_reconstruct, "recover cosines from syndrome counts", axis="required")
    sp.add_argument("--syndromes", required=True)
    sp.add_argument("--clamp-rates", type=float, default=None, metavar="DELTA")
    sp.add_argument("--no-strict", action="store_true", help="fall back to the best real candidate")
    sp.add_argument("--real-tol", type=float, default=SAMPLED_REAL_TOL, help="distance of Im(v) from 0 or pi accepted as real")

    sp = add("sweep", cmd_sweep, "reconstruction-error sweep over q, eps or M", axis="required", out_required=True)
    sp.add_argument("--param", choices=("q", "eps", "M"), required=True)
    sp.add_argument("--values", help="comma-separated sweep values")
    sp.add_argument("--q", type=_unit_interval, default=REFERENCE["q"])
    sp.add_argument("--eps", type=_unit_interval, default=REFERENCE["eps"])
    sp.add_argument("--M", type=_positive_int, default=REFERENCE["M"])
    sp.add_argument("--reps", type=_positive_int, default=10_000)
    sp.add_argument("--clamp-rates", type=float, default=None, metavar="DELTA")
    sp.add_argument("--workers", type=_positive_int, default=1)
    sp.add_argument("--plot", action="store_true")

    sp = add("multibasis", cmd_multibasis, "promise-free estimation from several bases", out_required=True)
    sp.add_argument("--fields", help="true FieldConfig JSON (simulate mode)")
    sp.add_argument("--measured", help="measured CSV (fit mode)")
    sp.add_argument("--bases", type=_positive_int, default=4)
    sp.add_argument("--M", type=_positive_int, default=REFERENCE["M"])
    sp.add_argument("--reps", type=_positive_int, default=10)
    sp.add_argument("--restarts", type=_positive_int, default=MinimizerSettings.restarts)
    sp.add_argument("--plot", action="store_true")

    sp = add("oracle-check", cmd_oracle_check, "closed-form statistics against the state-vector simulator", graph=False)
    sp.add_argument("--battery", choices=("all", "exact"), default="all")
    sp.add_argument("--configs", type=_positive_int, default=5)
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--rotated", action="store_true", help="use a random logical basis per configuration")

    sp = add("analyze", cmd_analyze, "conditioning, sensitivity and perturbation diagnostics", axis=True)
    sp.add_argument("--eps", type=float, default=None, help="misalignment scale for the perturbation bound")
    sp.add_argument("--r", type=float, default=0.1, help="lower bound on ||v||_inf")
    sp.add_argument("--R", type=float, default=1.0, help="upper bound on ||v||_inf")
    sp.add_argument("--dw", type=float, default=0.0, help="||dw||_inf")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            code = args.func(args)
        return int(code or 0)
    except StabfieldError as exc:
        err = exc.to_dict()
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        err = {"error": "invalid_input", "message": str(exc)}
    sys.stderr.write(json.dumps(err) + "\n")
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
