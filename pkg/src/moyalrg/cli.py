"""Command-line front end.

Subcommands: classify, rosette, powercount, amplitude, scan, fit.
Exit codes: 0 success, 1 runtime or numeric failure, 2 input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .amplitude import AmplitudeSample, CutoffSpec, MonteCarloError
from .catalog import catalog_get, catalog_names
from .graph import GraphError, RibbonGraph, parse_graph
from .multiscale import DomainError, ModelParams, high_subgraphs, parse_attribution, power_counting_bound
from .quadrature import QuadratureError
from .renorm_fit import (FitError, ScanSeries, evaluator_for, finite_a_shift, fit_ir_structure,
                         fit_uv_divergence, uv_cutoff)
from .rosette import all_spanning_trees, contract_to_rosette, intersection_matrix, spanning_tree
from .topology import divergence_class, superficial_degree_bound, topology_report

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INPUT = 2

CSV_COLUMNS = ("axis", "re", "im", "abs_err", "status")
DEFAULT_SEED = 42
DEFAULT_SAMPLES = 200_000
U64_MAX = 2 ** 64 - 1

NUMERIC_ERRORS = (QuadratureError, MonteCarloError, DomainError, FloatingPointError, ArithmeticError)


class InputError(Exception):
    """Bad user input; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    graph: str | None = None
    params: ModelParams = field(default_factory=ModelParams)
    grid_min: float | None = None
    grid_max: float | None = None
    points: int = 2
    log: bool = False
    axis: str = "k"
    cutoff: str = "slice"
    k: float = 1.0
    lam: float | None = None
    seed: int = DEFAULT_SEED
    n_samples: int = DEFAULT_SAMPLES
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        if not 0 <= self.seed <= U64_MAX:
            raise InputError("seed must be an unsigned 64-bit integer")
        if self.grid_min is not None and self.grid_max is not None:
            if not self.grid_min < self.grid_max:
                raise InputError("grid needs min < max")
            if self.log and self.grid_min <= 0:
                raise InputError("log spacing needs min > 0")
        if self.points < 2:
            raise InputError("grid needs at least 2 points")
        if self.workers < 1:
            raise InputError("workers must be >= 1")

    def grid(self) -> np.ndarray:
        if self.log:
            return np.logspace(math.log10(self.grid_min), math.log10(self.grid_max), self.points)
        return np.linspace(self.grid_min, self.grid_max, self.points)


# ---------------------------------------------------------------- helpers

def load_graph(source: str) -> tuple[str, RibbonGraph]:
    """A catalog name or a path to a graph file."""
    if source in catalog_names():
        return source, catalog_get(source)
    path = Path(source)
    if not path.is_file():
        raise InputError(f"{source!r} is neither a catalog graph nor a readable file")
    try:
        return path.stem, parse_graph(path.read_text())
    except GraphError as exc:
        raise InputError(f"{source}: {exc}") from exc


def _fmt(x: float) -> str:
    # repr is the shortest round-tripping form and never locale dependent
    return repr(float(x))


def _minus(n: int) -> str:
    return f"{n}".replace("-", "−")


def cutoff_for(cfg: RunConfig, name: str, x: float) -> tuple[float, CutoffSpec]:
    """(k, cutoff) for grid value ``x``."""
    if cfg.axis == "uv":
        return cfg.k, uv_cutoff(name, x)
    hi = math.inf
    if cfg.cutoff == "slice":
        return x, CutoffSpec.slice_window(x)
    if cfg.cutoff == "ir":
        hi = 1.0 / (x * x)
    lo = 0.0 if cfg.lam is None else 1.0 / (cfg.lam * cfg.lam)
    return x, CutoffSpec(lo, hi)


def _evaluate_point(cfg: RunConfig, x: float) -> tuple[float, AmplitudeSample | None, str]:
    name, g = load_graph(cfg.graph)
    ev = evaluator_for(name, g, cfg.params, seed=cfg.seed, n_samples=cfg.n_samples)
    if ev is None:
        raise InputError(f"no evaluator for graph {name!r}")
    try:
        k, cut = cutoff_for(cfg, name, x)
        return x, ev[1](k, cut), "ok"
    except MonteCarloError as exc:
        if exc.sample is not None:
            return x, exc.sample, f"error: {exc}"
        return x, None, f"error: {exc}"
    except (*NUMERIC_ERRORS, ValueError) as exc:
        return x, None, f"error: {exc}"


def render_rows(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for x, s, status in rows:
        if s is None:
            w.writerow([_fmt(x), "nan", "nan", "nan", status])
        else:
            w.writerow([_fmt(x), _fmt(s.value.real), _fmt(s.value.imag), _fmt(s.abs_err), status])
    return buf.getvalue()


def read_rows(path: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(x, values, errors) of the rows with status ok."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
                raise InputError(f"{path}: expected columns {','.join(CSV_COLUMNS)}")
            x, v, e = [], [], []
            for i, row in enumerate(reader, start=2):
                if row["status"] != "ok":
                    continue
                try:
                    x.append(float(row["axis"]))
                    v.append(complex(float(row["re"]), float(row["im"])))
                    e.append(float(row["abs_err"]))
                except (TypeError, ValueError) as exc:
                    raise InputError(f"{path}: line {i}: {exc}") from exc
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    return np.array(x), np.array(v, dtype=complex), np.array(e)


# ---------------------------------------------------------------- commands

def cmd_classify(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    name, g = load_graph(cfg.graph)
    rep = topology_report(g)
    omega = superficial_degree_bound(rep)
    print(f"graph {name}", file=out)
    print(f"n={rep.n} N={rep.N} L={rep.L} F={rep.F}", file=out)
    print(f"g={rep.g} B={rep.B} {rep.klass.value} ω≥{_minus(omega)} "
          f"{divergence_class(rep).value}", file=out)
    return EXIT_OK


def cmd_rosette(cfg: RunConfig, out=None, all_trees: bool = False) -> int:
    out = out or sys.stdout
    name, g = load_graph(cfg.graph)
    if g.n == 0:
        raise InputError("graph has no vertices")
    trees = all_spanning_trees(g) if all_trees else [spanning_tree(g)]
    for t in trees:
        r = contract_to_rosette(g, t)
        rep = topology_report(r.as_ribbon_graph())
        im = intersection_matrix(r)
        print(f"tree {' '.join(t.tree_lines) or '-'}: rosette {r}", file=out)
        print(f"  F={rep.F} g={rep.g} B={rep.B} {rep.klass.value}", file=out)
        print("  lines " + " ".join(im.lines), file=out)
        for lab, row in zip(im.lines, im.I):
            print(f"  {lab:>6s} " + " ".join(f"{int(v):2d}" for v in row), file=out)
    return EXIT_OK


def cmd_powercount(cfg: RunConfig, attribution: str, out=None) -> int:
    out = out or sys.stdout
    name, g = load_graph(cfg.graph)
    try:
        att = parse_attribution(Path(attribution).read_text())
        subs = high_subgraphs(g, att)
        bound = power_counting_bound(g, att)
    except OSError as exc:
        raise InputError(f"{attribution}: {exc.strerror}") from exc
    except ValueError as exc:
        raise InputError(f"{attribution}: {exc}") from exc
    for h in subs:
        print(f"G^{h.scale_i}_{h.r}: lines {' '.join(h.edges)} N={h.N_ext} g={h.genus}", file=out)
    print(f"bound M^{bound}", file=out)
    return EXIT_OK


def cmd_amplitude(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    name, g = load_graph(cfg.graph)
    ev = evaluator_for(name, g, cfg.params, seed=cfg.seed, n_samples=cfg.n_samples)
    if ev is None:
        raise InputError(f"no evaluator for graph {name!r}")
    x = cfg.lam if cfg.axis == "uv" else cfg.k
    if x is None:
        raise InputError("--axis uv needs --lambda")
    k, cut = cutoff_for(cfg, name, x)
    s = ev[1](k, cut)
    print(f"{name} k={_fmt(k)} method={s.method}", file=out)
    print(f"value {_fmt(s.value.real)} {_fmt(s.value.imag)}i +- {_fmt(s.abs_err)}", file=out)
    return EXIT_OK


def cmd_scan(cfg: RunConfig, out=None) -> int:
    """Evaluate the grid; rows stay in grid order, failures go to the status column."""
    out = out or sys.stdout
    load_graph(cfg.graph)
    grid = [float(x) for x in cfg.grid()]
    if cfg.workers == 1:
        rows = [_evaluate_point(cfg, x) for x in grid]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_evaluate_point, [cfg] * len(grid), grid))
    text = render_rows(rows)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    failed = sum(status != "ok" for _, _, status in rows)
    if failed:
        print(f"{failed} of {len(rows)} points failed", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_fit(cfg: RunConfig, path: str, model: str = "auto", out=None) -> int:
    out = out or sys.stdout
    x, v, e = read_rows(path)
    axis = "lambda_uv" if cfg.axis == "uv" else "k_ir"
    try:
        s = ScanSeries(axis, x, v, e, cfg.params)
    except FitError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if model == "shift":
        fs = finite_a_shift(s)
        print(f"finite_shift F0 = {fs.value:.6g} ± {fs.abs_err:.2g} "
              f"(tail variation {fs.tail_variation:.3g})", file=out)
        return EXIT_OK
    if axis == "lambda_uv":
        fit = fit_uv_divergence(s)
        if fit.model == "power_law":
            head = f"exponent {fit.coefficients['rho']:.3g} ± {fit.stderr['rho']:.2g}"
        else:
            head = f"slope {fit.coefficients['slope']:.6g} ± {fit.stderr['slope']:.2g}"
        print(f"{fit.outcome} {head}", file=out)
    else:
        fit = fit_ir_structure(s)
    print(fit.report().replace("+-", "±"), file=out)
    print(f"r2 {fit.r_squared:.6f}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------- argument parsing

def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}")
    if not 0 <= v <= U64_MAX:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--M", type=float, default=2.0, help="slice base (default 2)")
    p.add_argument("--theta", type=float, default=1.0, help="noncommutativity (default 1)")
    p.add_argument("--mu2", type=float, default=1.0, help="mass squared (default 1)")
    p.add_argument("--a", type=float, default=1.0, help="coefficient of 1/p^2 (default 1)")


def _add_eval(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cutoff", choices=("slice", "ir", "none"), default="slice",
                   help="k-axis regulator: slice window, alpha <= 1/k^2, or none")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="UV cutoff (alpha >= 1/Lambda^2)")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="MC seed, u64 (default 42)")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="MC samples per point")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="moyalrg", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("classify", help="topology and divergence class")
    p.add_argument("graph", help="catalog name or graph file")

    p = sub.add_parser("rosette", help="contract a spanning tree to a rosette")
    p.add_argument("graph")
    p.add_argument("--all", action="store_true", help="every spanning tree")

    p = sub.add_parser("powercount", help="multiscale power counting for an attribution")
    p.add_argument("graph")
    p.add_argument("attribution", help="file of 'scale <eid>: <i>' lines")

    p = sub.add_parser("amplitude", help="evaluate one amplitude")
    p.add_argument("graph")
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--axis", choices=("k", "uv"), default="k")
    _add_params(p)
    _add_eval(p)

    p = sub.add_parser("scan", help="amplitude scan to CSV")
    p.add_argument("--graph", required=True)
    p.add_argument("--axis", choices=("k", "uv"), default="k")
    p.add_argument("--min", dest="grid_min", type=float, required=True)
    p.add_argument("--max", dest="grid_max", type=float, required=True)
    p.add_argument("--points", type=int, default=16)
    p.add_argument("--log", action="store_true", help="logarithmic spacing")
    p.add_argument("--k", type=float, default=1.0, help="external momentum on the uv axis")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    _add_params(p)
    _add_eval(p)

    p = sub.add_parser("fit", help="fit a scan CSV")
    p.add_argument("csv")
    p.add_argument("--axis", choices=("k", "uv"), default="k")
    p.add_argument("--model", choices=("auto", "shift"), default="auto",
                   help="auto: IR structure or UV law by axis; shift: k -> 0 limit of k^2 A")
    _add_params(p)
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    kw = {"subcommand": ns.subcommand, "graph": getattr(ns, "graph", None)}
    if hasattr(ns, "mu2"):
        try:
            kw["params"] = ModelParams(a=ns.a, mu2=ns.mu2, theta=ns.theta, M=ns.M)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    for key in ("grid_min", "grid_max", "points", "log", "axis", "cutoff", "k", "lam", "seed",
                "workers", "out"):
        if hasattr(ns, key):
            kw[key] = getattr(ns, key)
    if hasattr(ns, "samples"):
        kw["n_samples"] = ns.samples
    return RunConfig(**kw)


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        if ns.subcommand == "classify":
            return cmd_classify(cfg)
        if ns.subcommand == "rosette":
            return cmd_rosette(cfg, all_trees=ns.all)
        if ns.subcommand == "powercount":
            return cmd_powercount(cfg, ns.attribution)
        if ns.subcommand == "amplitude":
            return cmd_amplitude(cfg)
        if ns.subcommand == "scan":
            return cmd_scan(cfg)
        return cmd_fit(cfg, ns.csv, ns.model)
    except InputError as exc:
        print(f"moyalrg: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (*NUMERIC_ERRORS, FitError) as exc:
        print(f"moyalrg: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
