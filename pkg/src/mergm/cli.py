"""Command-line interface: fit, simulate, aic, compare, gof.

Every randomized command requires --seed and records its fully resolved
configuration (including defaulted decay values and derived seeds) in the
output, so runs replay byte-identically. Exit codes: 0 success, 2 parse
error, 3 degenerate fit, 4 non-convergence under --strict.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from types import SimpleNamespace

import numpy as np

from . import __version__
from .datasets import zachary_karate_club
from .driver import fit_ergm, fit_mergm
from .errors import (
    ConfigError,
    DegeneracyError,
    EdgeListParseError,
    MergmError,
    ModelSpecError,
)
from .gof import gof_run
from .graph import UndirectedNetwork
from .sampler import SamplerConfig, sample
from .selection import aic_ergm, aic_mergm, compare_aic
from .stats import ModelSpec, statistics

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DEGENERATE = 3
EXIT_NOT_CONVERGED = 4


# ---------------------------------------------------------------- file I/O

def read_edge_list(path: str, n_nodes: int | None = None, one_based: bool = False) -> UndirectedNetwork:
    """Plain-text edge list: one edge per line, two whitespace-separated
    nonnegative integer ids; blank lines and #-comments are skipped."""
    edges = []
    max_id = -1
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise EdgeListParseError(
                    f"{path}:{lineno}: expected two node ids, got {line!r}",
                    line_number=lineno,
                )
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListParseError(
                    f"{path}:{lineno}: node ids must be integers, got {line!r}",
                    line_number=lineno,
                ) from None
            if one_based:
                i, j = i - 1, j - 1
            if i < 0 or j < 0:
                raise EdgeListParseError(
                    f"{path}:{lineno}: negative node id after indexing adjustment",
                    line_number=lineno,
                )
            if i == j:
                raise EdgeListParseError(
                    f"{path}:{lineno}: self-loop {i}", line_number=lineno
                )
            edges.append((i, j))
            max_id = max(max_id, i, j)
    n = (max_id + 1) if n_nodes is None else n_nodes
    if n <= max_id:
        raise EdgeListParseError(
            f"{path}: --nodes {n} too small for max node id {max_id}"
        )
    if n < 1:
        raise EdgeListParseError(f"{path}: empty edge list needs --nodes")
    return UndirectedNetwork.from_edges(n, edges)


def write_edge_list(net: UndirectedNetwork, path: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        for i, j in net.edges():
            fh.write(f"{i} {j}\n")
    os.replace(tmp, path)


def _write_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        tmp = out + ".tmp"
        with open(tmp, "w") as fh:
            fh.write(text)
        os.replace(tmp, out)


def _load_network(args) -> UndirectedNetwork:
    if args.data == "zachary":
        return zachary_karate_club()
    return read_edge_list(args.data, n_nodes=args.nodes, one_based=args.one_based)


def _spec_config(spec: ModelSpec) -> list[dict]:
    return spec.to_config()


def _sampler_echo(cfg: SamplerConfig, n: int) -> dict:
    burn, thin = cfg.resolve(n)
    return {"n_samples": cfg.n_samples, "burn_in": burn, "thin": thin}


# ---------------------------------------------------------------- commands

def _cmd_fit(args) -> int:
    net = _load_network(args)
    spec = ModelSpec.from_string(args.terms)
    common = dict(
        max_iter=args.max_iter,
        tol=args.tol,
        seed=args.seed,
        n_sim=args.nsim,
        burn_in=args.burnin,
        thin=args.thin,
    )
    config = {
        "command": "fit",
        "data": args.data,
        "model": args.model,
        "terms": _spec_config(spec),
        "nodes": net.n,
        "seed": args.seed,
        "n_sim": args.nsim,
        "burn_in": args.burnin,
        "thin": args.thin,
        "max_iter": args.max_iter,
        "tol": args.tol,
    }
    try:
        if args.model == "mergm":
            fit = fit_mergm(net, spec, **common)
        else:
            fit = fit_ergm(net, spec, **common)
    except DegeneracyError as exc:
        _write_json(
            {
                "version": __version__,
                "config": config,
                "error": "degenerate",
                "message": str(exc),
                "last_theta": None if exc.theta is None else list(exc.theta),
            },
            args.out,
        )
        return EXIT_DEGENERATE
    payload = {
        "version": __version__,
        "config": config,
        "result": {
            "model_kind": fit.model_kind,
            "term_labels": spec.labels,
            "theta": fit.theta.tolist(),
            "theta_se": fit.theta_se.tolist(),
            "u": fit.u.tolist(),
            "sigma2": fit.sigma2,
            "converged": fit.converged,
            "iterations": fit.iterations,
            "trace": fit.trace,
        },
    }
    _write_json(payload, args.out)
    if args.strict and not fit.converged:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _cmd_simulate(args) -> int:
    spec = ModelSpec.from_string(args.terms)
    theta = np.array([float(x) for x in args.theta.split(",")])
    if theta.shape != (spec.p,):
        raise ConfigError(
            f"--theta needs {spec.p} values for terms {spec.labels}, got {len(theta)}"
        )
    n = args.nodes
    if args.u_file is not None:
        u_fixed = np.loadtxt(args.u_file).reshape(-1)
        if u_fixed.shape != (n,):
            raise ConfigError(f"--u-file must hold {n} values")
    else:
        u_fixed = None
        if args.sigma2 < 0:
            raise ConfigError("--sigma2 must be >= 0")
    os.makedirs(args.out_dir, exist_ok=True)
    master = np.random.SeedSequence(args.seed)
    start = UndirectedNetwork(n)
    scfg_echo = None
    replicates = []
    stats_rows = []
    for r in range(args.replicates):
        if u_fixed is not None:
            u = u_fixed
        else:
            rng = np.random.Generator(
                np.random.PCG64(
                    np.random.SeedSequence(entropy=master.entropy, spawn_key=(r, 0))
                )
            )
            u = rng.normal(0.0, np.sqrt(args.sigma2), size=n)
        scfg = SamplerConfig(
            n_samples=1,
            seed=np.random.SeedSequence(entropy=master.entropy, spawn_key=(r, 1)),
            burn_in=args.burnin,
            thin=1,
        )
        scfg_echo = _sampler_echo(scfg, n)
        batch = sample(start, spec, theta, u, scfg, keep_networks=True)
        net = batch.networks[0]
        fname = f"rep{r:03d}.edges"
        write_edge_list(net, os.path.join(args.out_dir, fname))
        replicates.append({"file": fname, "u": u.tolist()})
        stats_rows.append([r] + statistics(net, spec).tolist())

    manifest = {
        "version": __version__,
        "config": {
            "command": "simulate",
            "terms": _spec_config(spec),
            "theta": theta.tolist(),
            "sigma2": None if u_fixed is not None else args.sigma2,
            "u_file": args.u_file,
            "nodes": n,
            "replicates": args.replicates,
            "seed": args.seed,
            "sampler": scfg_echo,
        },
        "replicates": replicates,
    }
    _write_json(manifest, os.path.join(args.out_dir, "manifest.json"))
    stats_path = os.path.join(args.out_dir, "statistics.csv")
    tmp = stats_path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["replicate"] + spec.labels)
        writer.writerows(stats_rows)
    os.replace(tmp, stats_path)
    return EXIT_OK


def _load_fit(path: str) -> tuple[ModelSpec, dict]:
    with open(path) as fh:
        doc = json.load(fh)
    if "result" not in doc or "config" not in doc:
        raise ConfigError(f"{path}: not a fit artifact (missing result/config)")
    terms = doc["config"]["terms"]
    spec = ModelSpec.from_string(
        ",".join(
            t["kind"] if t["decay"] is None else f"{t['kind']}:{t['decay']}"
            for t in terms
        )
    )
    return spec, doc["result"]


def _cmd_aic(args) -> int:
    spec, result = _load_fit(args.fit)
    net = _load_network(args)
    cfg = SamplerConfig(
        n_samples=args.nsim, seed=args.seed, burn_in=args.burnin, thin=args.thin
    )
    if result["model_kind"] == "mERGM":
        fit = SimpleNamespace(
            theta=np.array(result["theta"]),
            u=np.array(result["u"]),
            sigma2=result["sigma2"],
        )
        report = aic_mergm(fit, net, spec, cfg, n_bridges=args.bridges)
    else:
        report = aic_ergm(np.array(result["theta"]), net, spec, cfg,
                          n_bridges=args.bridges)
    payload = {
        "version": __version__,
        "config": {
            "command": "aic",
            "fit": args.fit,
            "data": args.data,
            "terms": _spec_config(spec),
            "seed": args.seed,
            "n_sim": args.nsim,
            "bridges": args.bridges,
            "sampler": _sampler_echo(cfg, net.n),
        },
        "result": report.to_dict(),
    }
    _write_json(payload, args.out)
    return EXIT_OK


def _cmd_compare(args) -> int:
    net = _load_network(args)
    spec = ModelSpec.from_string(args.terms)
    fit_kwargs = dict(
        max_iter=args.max_iter,
        tol=args.tol,
        n_sim=args.nsim,
        burn_in=args.burnin,
        thin=args.thin,
    )
    warnings = []
    try:
        mixed_fit = fit_mergm(net, spec, seed=args.seed, **fit_kwargs)
    except DegeneracyError as exc:
        _write_json(
            {
                "version": __version__,
                "error": "degenerate",
                "message": f"mixed-model fit degenerate: {exc}",
            },
            args.out,
        )
        return EXIT_DEGENERATE
    ergm_degenerate = False
    try:
        plain_fit = fit_ergm(net, spec, seed=args.seed + 1, **fit_kwargs)
        theta_ergm = plain_fit.theta
    except DegeneracyError as exc:
        # still score the homogeneous model at its last parameter value so
        # the comparison remains available for degenerate fits
        ergm_degenerate = True
        theta_ergm = np.asarray(exc.theta)
        warnings.append("homogeneous fit degenerate; AIC computed at last theta")

    acfg = SamplerConfig(
        n_samples=args.aic_nsim, seed=args.seed + 2, burn_in=args.burnin,
        thin=args.thin,
    )
    mixed_report = aic_mergm(mixed_fit, net, spec, acfg, n_bridges=args.bridges)
    plain_report = aic_ergm(theta_ergm, net, spec, acfg, n_bridges=args.bridges)
    comparison = compare_aic(mixed_report, plain_report)
    comparison["warnings"] = comparison.get("warnings", []) + warnings
    payload = {
        "version": __version__,
        "config": {
            "command": "compare",
            "data": args.data,
            "terms": _spec_config(spec),
            "seed": args.seed,
            "n_sim": args.nsim,
            "aic_n_sim": args.aic_nsim,
            "bridges": args.bridges,
            "max_iter": args.max_iter,
            "tol": args.tol,
        },
        "result": {
            "log_aic_ratio": comparison["log_ratio"],
            "mc_se": comparison["mc_se"],
            "inconclusive": comparison["inconclusive"],
            "warnings": comparison["warnings"],
            "ergm_degenerate": ergm_degenerate,
            "mergm": mixed_report.to_dict(),
            "ergm": plain_report.to_dict(),
            "mergm_theta": mixed_fit.theta.tolist(),
            "ergm_theta": np.asarray(theta_ergm).tolist(),
        },
    }
    _write_json(payload, args.out)
    return EXIT_OK


def _cmd_gof(args) -> int:
    spec, result = _load_fit(args.fit)
    net = _load_network(args)
    theta = np.array(result["theta"])
    u = np.array(result["u"]) if result["model_kind"] == "mERGM" else np.zeros(net.n)
    cfg = SamplerConfig(
        n_samples=args.nsim, seed=args.seed, burn_in=args.burnin, thin=args.thin
    )
    report = gof_run(net, spec, theta, u, cfg)
    payload = {
        "version": __version__,
        "config": {
            "command": "gof",
            "fit": args.fit,
            "data": args.data,
            "terms": _spec_config(spec),
            "seed": args.seed,
            "sampler": _sampler_echo(cfg, net.n),
        },
        "result": report.to_dict(),
    }
    _write_json(payload, args.out)
    return EXIT_OK


# ---------------------------------------------------------------- argparse

def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="edge-list path or 'zachary'")
    p.add_argument("--nodes", type=int, default=None,
                   help="node count (default: max id + 1)")
    p.add_argument("--one-based", action="store_true",
                   help="input node ids start at 1")


def _add_sampler_args(p: argparse.ArgumentParser, nsim_default: int) -> None:
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--nsim", type=int, default=nsim_default)
    p.add_argument("--burnin", type=int, default=None,
                   help="burn-in proposals (default 10*n^2)")
    p.add_argument("--thin", type=int, default=None,
                   help="proposals between samples (default n^2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mergm",
        description="Network models with nodal random effects: estimation, "
        "simulation, AIC model selection, goodness of fit.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model to a network")
    _add_data_args(p)
    _add_sampler_args(p, 5000)
    p.add_argument("--terms", required=True,
                   help="comma-separated terms, e.g. edges,gwesp:0.5")
    p.add_argument("--model", choices=["ergm", "mergm"], required=True)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--out", default=None)
    p.add_argument("--strict", action="store_true",
                   help="exit 4 when the fit did not converge")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("simulate", help="simulate networks from a model")
    p.add_argument("--terms", required=True)
    p.add_argument("--theta", required=True, help="comma-separated coefficients")
    p.add_argument("--sigma2", type=float, default=0.0,
                   help="node-effect variance (0: homogeneous)")
    p.add_argument("--u-file", default=None,
                   help="fixed node effects, one value per line")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--burnin", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("aic", help="AIC of a stored fit")
    _add_data_args(p)
    _add_sampler_args(p, 1000)
    p.add_argument("--fit", required=True, help="fit JSON artifact")
    p.add_argument("--bridges", type=int, default=20)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_aic)

    p = sub.add_parser("compare", help="fit both models and compare AICs")
    _add_data_args(p)
    _add_sampler_args(p, 2000)
    p.add_argument("--terms", required=True)
    p.add_argument("--aic-nsim", type=int, default=1000)
    p.add_argument("--bridges", type=int, default=20)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("gof", help="goodness-of-fit diagnostics for a stored fit")
    _add_data_args(p)
    _add_sampler_args(p, 1000)
    p.add_argument("--fit", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_gof)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (EdgeListParseError, ModelSpecError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DegeneracyError as exc:
        print(f"degenerate fit: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except MergmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
