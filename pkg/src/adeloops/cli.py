"""Command-line front end.

Parameter resolution, lowest to highest priority: built-in defaults, the
``[common]`` section of ``--config``, the subcommand's own section, then
flags given on the command line. Every report is one JSON document with its
manifest embedded.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys
import time

import numpy as np

from . import io
from .domains import (BoundaryCondition, DomainError, build_annulus, build_dobrushin_patch,
                      build_square_patch, build_triangular_patch, build_wired_patch, change_points,
                      parse_bc)
from .spectra import GraphError, parse_graph, spectrum

THREADS_ENV = "ADELOOPS_THREADS"


def _ints(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    return tuple(int(v) for v in str(text).replace(" ", "").split(",") if v)


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text):
    return None if text in (None, "", "none", "None") else float(text)


# name -> (type, default, help)
COMMON = {
    "threads": (int, None, f"worker threads (default ${THREADS_ENV} or 1)"),
    "timing": (_bool, False, "record wall time in the manifest"),
}
PATCH = {
    "rows": (int, 3, "patch rows"),
    "cols": (int, 3, "patch columns"),
    "shape": (str, "parallelogram", "triangular patch shape: parallelogram, rect, symrect"),
    "cap": (int, 16, "maximum number of free sites to enumerate"),
}
OPTIONS = {
    "spectra": {
        "graph": (str, None, "graph, e.g. A3, D5, E6, Star4, ExtA5"),
        "eigen_index": (int, 0, "selected eigenpair (0 = Perron)"),
    },
    "enumerate": {
        "model": (str, "dilute", "dilute or dense"),
        "graph": (str, None, "graph"),
        "eigen_index": (int, 0, "selected eigenpair"),
        "bc": (str, "homogeneous:1", "boundary condition, e.g. chordal:1,2"),
        "x": (_opt_float, None, "dilute fugacity per marked triangle (default x_c)"),
        "lattice": (str, "wired", "dense patch: rect, wired or dobrushin"),
        **PATCH,
    },
    "oracle": {
        "model": (str, "dilute", "dilute (O(n) loops) or dense (random cluster)"),
        "n": (_opt_float, None, "loop weight (dilute)"),
        "Q": (_opt_float, None, "cluster weight (dense)"),
        "x": (_opt_float, None, "fugacity (dilute, default x_c(n))"),
        "bc": (str, "homogeneous:1", "chordal:a,b draws an open arc between the change points"),
        "lattice": (str, "wired", "dense patch: wired or dobrushin"),
        **PATCH,
    },
    "sample": {
        "model": (str, "dilute", "dilute or dense"),
        "graph": (str, None, "graph"),
        "bc": (str, "homogeneous:1", "boundary condition"),
        "x": (_opt_float, None, "dilute fugacity (default x_c)"),
        "lattice": (str, "wired", "dense patch"),
        "sweeps": (int, 1000, "recorded sweeps"),
        "thermalization": (int, 100, "discarded sweeps"),
        "stride": (int, 1, "sweeps between records"),
        "seed": (int, 0, "PCG64 seed"),
        "csv": (str, None, "also write the observable stream to this CSV file"),
        **PATCH,
    },
    "sle": {
        "brownian": (_opt_float, None, "fit synthetic Brownian drivers of this kappa instead"),
        "graph": (str, "A2", "graph"),
        "x": (_opt_float, None, "dilute fugacity (default x_c)"),
        "count": (int, 100, "number of curves"),
        "sweeps_between": (int, 100, "sweeps between curves"),
        "thermalization": (int, 1000, "discarded sweeps"),
        "seed": (int, 0, "seed"),
        "depth": (float, 0.75, "capacity cut-off: fraction of the height"),
        "curves_out": (str, None, "write the curves as NDJSON"),
        "curves": (str, None, "read curves from an NDJSON file instead of sampling"),
        "estimate_kappa": (_bool, True, "fit kappa from the driving functions"),
        "parafermion": (_opt_float, None, "also report the winding observable with this spin"),
        "rows": (int, 40, "patch rows"),
        "cols": (int, 40, "patch columns"),
        "shape": (str, "rect", "patch shape"),
    },
    "clusters": {
        "graph": (str, "A3", "A_m graph"),
        "bc": (str, "wired:1", "boundary condition"),
        "lattice": (str, "wired", "dense patch"),
        "rows": (int, 8, "U"),
        "cols": (int, 8, "V"),
        "sweeps": (int, 200, "sweeps before the snapshot"),
        "seed": (int, 0, "seed"),
        "convention": (str, "split-left", "split-left, split-right or random"),
    },
    "annulus": {
        "graph": (str, None, "graph"),
        "bc": (str, None, "annulus:a,b,c"),
        "breaks": (_ints, (), "outer boundary edges where a meets b"),
        "x": (_opt_float, None, "fugacity (default x_c)"),
        "outer_rows": (int, 5, "outer rows"),
        "outer_cols": (int, 6, "outer columns"),
        "hole": (_ints, (3, 2, 1, 1), "hole rectangle i0,j0,w,h"),
        "avoid_hole": (_bool, False, "drop configurations whose curve touches the hole"),
        "cap": (int, 16, "free-site cap"),
    },
    "arch": {
        "graph": (str, None, "graph"),
        "heights": (_ints, None, "arc heights in boundary order, e.g. 1,2,1,2"),
        "breaks": (_ints, (), "boundary edges between arcs"),
        "x": (_opt_float, None, "fugacity (default x_c)"),
        "kappa": (_opt_float, None, "also report fusion exponents at this kappa"),
        "rows": (int, 4, "patch rows"),
        "cols": (int, 5, "patch columns"),
        "shape": (str, "symrect", "patch shape"),
        "cap": (int, 16, "free-site cap"),
    },
    "selftest": {},
}


class CliError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adeloops", description="ADE height models and their loop gases.")
    p.add_argument("--config", help="INI file with [common] and per-subcommand sections")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    for name, opts in OPTIONS.items():
        sp = sub.add_parser(name, argument_default=argparse.SUPPRESS)
        sp.add_argument("--config", help=argparse.SUPPRESS)
        for key, (typ, default, help_) in {**opts, **COMMON}.items():
            flag = "--" + key.replace("_", "-")
            if "(default" not in help_:
                help_ = f"{help_} (default {default})"
            if typ is _bool:
                sp.add_argument(flag, dest=key, type=_bool, nargs="?", const=True, metavar="BOOL", help=help_)
            else:
                sp.add_argument(flag, dest=key, type=typ, help=help_)
    return p


def resolve(command: str, flags: dict, config: dict | None) -> dict:
    """Defaults < [common] < [command] < flags."""
    table = {**OPTIONS[command], **COMMON}
    out = {k: d for k, (_, d, _) in table.items()}
    for section in ("common", command):
        for k, v in (config or {}).get(section, {}).items():
            if k not in table:
                if section == "common":
                    continue
                raise CliError(f"unknown key {k!r} in config section [{section}]")
            try:
                out[k] = table[k][0](v)
            except ValueError as err:
                raise CliError(f"config [{section}] {k}: {err}") from None
    for k, v in flags.items():
        if k in table:
            out[k] = v
    return out


def _set_threads(n):
    if n is None:
        n = int(os.environ.get(THREADS_ENV, "1"))
    import numba

    # no TBB probing: the installed TBB may be too old and numba warns
    numba.config.THREADING_LAYER = "workqueue"
    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
    return n


def _need(params, *keys):
    for k in keys:
        if params.get(k) is None:
            raise CliError(f"--{k.replace('_', '-')} is required")


def _spec(params, model="dilute"):
    return spectrum(parse_graph(params["graph"]), params.get("eigen_index", 0), for_model=True)


def _x(params, spec):
    from .spectra import o_n_critical_point

    return params["x"] if params.get("x") is not None else o_n_critical_point(spec.Lambda)


def _tri_patch(params):
    return build_triangular_patch(params["rows"], params["cols"], shape=params["shape"])


def _square_patch(params):
    lat = params["lattice"]
    if lat == "rect":
        return build_square_patch(params["rows"], params["cols"])
    if lat == "wired":
        return build_wired_patch(params["rows"], params["cols"])
    if lat == "dobrushin":
        return build_dobrushin_patch(params["rows"], params["cols"])
    raise CliError(f"unknown lattice {lat!r}")


def _rel(a, b):
    return float(abs(a - b) / max(abs(a), abs(b), 1e-300))


# --------------------------------------------------------------------------
# subcommands; each returns (body, seed, graph metadata)


def cmd_spectra(params):
    _need(params, "graph")
    sd = spectrum(parse_graph(params["graph"]), params["eigen_index"])
    return sd.to_dict(), None, None


def cmd_enumerate(params):
    _need(params, "graph")
    spec = _spec(params)
    bc = parse_bc(params["bc"])
    if params["model"] == "dilute":
        from .dilute import enumerate_heights, enumerate_loops, open_curve_factor

        patch = _tri_patch(params)
        x = _x(params, spec)
        en = enumerate_heights(patch, bc, spec, cap=params["cap"])
        loops = enumerate_loops(patch, bc, cap=params["cap"])
        zh, zl = en.Z(x), loops.Z(spec.Lambda, x)
        if bc.mode == "chordal":
            zl *= open_curve_factor(patch, bc, spec)
        body = {"x": x, "Z_height": zh, "Z_loop": zl, "relative_error": _rel(zh, zl),
                "configurations": en.count,
                "loop_distribution": loops.loop_count_distribution(spec.Lambda, x)}
    elif params["model"] == "dense":
        from .dense import enumerate_heights_square, fk_loop_expansion

        patch = _square_patch(params)
        en = enumerate_heights_square(patch, bc, spec, cap=params["cap"])
        fk = fk_loop_expansion(patch)
        zl = fk.Z(spec.Lambda)
        body = {"Z_height": en.Z, "Z_loop": zl, "relative_error": _rel(en.Z, zl),
                "configurations": en.count, "loop_histogram": fk.histogram}
    else:
        raise CliError(f"model must be dilute or dense, not {params['model']!r}")
    return body, None, spec.to_dict()


def cmd_oracle(params):
    from .oracle import on_partition, potts_rc_partition
    from .spectra import o_n_critical_point

    bc = parse_bc(params["bc"])
    if params["model"] == "dilute":
        _need(params, "n")
        patch = _tri_patch(params)
        arc = change_points(patch, bc) if bc.mode == "chordal" else None
        res = on_partition(patch, arc, cap=params["cap"])
        x = params["x"] if params["x"] is not None else o_n_critical_point(params["n"])
        hist = {}
        for (m, l), c in res.counts.items():
            hist[str(l)] = hist.get(str(l), 0.0) + c * x**m * params["n"] ** l
        return {"x": x, "n": params["n"], "Z": res.Z(params["n"], x), "loop_histogram": hist}, None, None
    if params["model"] == "dense":
        _need(params, "Q")
        res = potts_rc_partition(_square_patch(params), params["Q"])
        return {"Q": params["Q"], "Z": res.Z_loop, "Z_rc": res.Z_rc, "norm_exponent": res.norm_exponent,
                "loop_histogram": {}, "interfaces": len(res.law)}, None, None
    raise CliError(f"model must be dilute or dense, not {params['model']!r}")


def cmd_sample(params, out=None):
    from .sampler import ChainConfig, run_chain

    _need(params, "graph")
    spec = _spec(params)
    bc = parse_bc(params["bc"])
    if params["model"] == "dilute":
        patch, x = _tri_patch(params), _x(params, spec)
    else:
        patch, x = _square_patch(params), None
    cfg = ChainConfig(params["model"], spec, patch, bc, x=x, sweeps=params["sweeps"],
                      thermalization=params["thermalization"], seed=params["seed"], stride=params["stride"])
    res = run_chain(cfg)
    if params.get("csv"):
        cols = ["sweep"] + [k for k in res.records[0] if k not in ("type", "sweep")] if res.records else ["sweep"]
        with open(params["csv"], "w") as fh:
            io.write_csv(fh, res.records, cols)
    return {"summary": res.summary}, params["seed"], spec.to_dict()


def cmd_sle(params):
    from .curves import brownian_drivers, curve_record, driving_ensemble, kappa_estimate, write_curves

    if params["brownian"] is not None:
        dfs = brownian_drivers(params["brownian"], params["count"], seed=params["seed"])
        k, err = kappa_estimate(dfs, min_curves=min(30, params["count"]))
        return {"kappa": k, "stderr": err, "curves": len(dfs), "t_max": 1.0, "source": "brownian"}, params["seed"], None
    from .curves import parafermion_observable, points_from_record, read_curves, site_cells
    from .sampler import ChainConfig, curve_points, sample_curve_ensemble

    spec = _spec(params)
    patch = _tri_patch(params)
    labels = spec.graph.labels
    bc = BoundaryCondition.chordal(labels[0], labels[1])
    if params.get("curves"):
        with open(params["curves"]) as fh:
            pts = [points_from_record(r) for r in read_curves(fh)]
        seed = None
    else:
        cfg = ChainConfig("dilute", spec, patch, bc, x=_x(params, spec), thermalization=params["thermalization"],
                          seed=params["seed"], stride=params["sweeps_between"])
        pts = [curve_points(patch, c) for c in sample_curve_ensemble(cfg, params["count"])]
        seed = params["seed"]
    if params.get("curves_out"):
        with open(params["curves_out"], "w") as fh:
            write_curves(fh, (curve_record(i, p, "tri") for i, p in enumerate(pts)))
    body = {"kappa": None, "stderr": None, "curves": len(pts), "t_max": None, "source": "lattice",
            "kappa_predicted": spec.kappa_dilute}
    if params["estimate_kappa"]:
        dfs, t_max = driving_ensemble(patch, pts, change_points(patch, bc)[0], depth=params["depth"])
        body["kappa"], body["stderr"] = kappa_estimate(dfs, t_max=t_max, min_curves=min(30, len(dfs)))
        body["t_max"] = t_max
    if params["parafermion"] is not None:
        est = parafermion_observable(pts, "tri", params["parafermion"], cells=site_cells(patch, "tri"))
        body["parafermion"] = {"s": est.s, "samples": est.samples, "points": len(est.values),
                               "cells": len(est.residuals), "median_residual": est.median_residual(),
                               "flagged": est.flagged}
    return body, seed, spec.to_dict()


def cmd_clusters(params):
    from .dense import height_cluster_boundaries
    from .sampler import ChainConfig, ChainState

    spec = _spec(params)
    patch = _square_patch(params)
    cfg = ChainConfig("dense", spec, patch, parse_bc(params["bc"]), seed=params["seed"])
    state = ChainState(cfg)
    state.sweep(params["sweeps"])
    labels = np.asarray(spec.graph.labels)[state.H]
    rng = np.random.Generator(np.random.PCG64(params["seed"]))
    cb = height_cluster_boundaries(patch, labels, spec.graph, params["convention"], rng=rng)
    return {"loops": cb.loops, "paths": cb.paths, "odd_vertices": cb.odd_vertices,
            "convention": cb.convention, "edges": len(cb.edges)}, params["seed"], spec.to_dict()


def cmd_annulus(params):
    from . import topology as T

    _need(params, "graph", "bc")
    spec = _spec(params)
    bc = parse_bc(params["bc"])
    if bc.mode != "annulus":
        raise CliError("--bc must be annulus:a,b,c")
    bc = BoundaryCondition.annulus(*bc.heights, breaks=params["breaks"])
    patch = build_annulus(params["outer_rows"], params["outer_cols"], tuple(params["hole"]))
    x = _x(params, spec)
    res = T.annulus_enumerate(patch, bc, spec, x, cap=params["cap"], avoid_hole=params["avoid_hole"])
    zf = T.annulus_factorized_Z(patch, bc, spec, x, cap=params["cap"]) if not params["avoid_hole"] else None
    return {"x": x, "Z": res.Z, "Z_factorized": zf,
            "relative_error": None if zf is None else _rel(res.Z, zf),
            "law_N": res.stats.law_N, "side_law": res.stats.side_law,
            "curves": len(res.stats.curve_law), "configurations": res.meta["configurations"]}, None, spec.to_dict()


def cmd_arch(params):
    from . import topology as T

    _need(params, "graph", "heights")
    spec = _spec(params)
    patch = _tri_patch(params)
    heights = params["heights"]
    breaks = params["breaks"] or change_points(patch, BoundaryCondition.arch(heights))
    ex = T.arch_enumerate(patch, spec, heights, breaks, _x(params, spec), cap=params["cap"])
    key = lambda p: "|".join(f"{i}-{j}" for i, j in p)
    body = {"heights": ex.heights, "breaks": ex.breaks, "eta": ex.eta,
            "probabilities": {key(p): v for p, v in ex.probabilities.items()},
            "topology_ratio": {key(p): v for p, v in T.topology_swap_ratio(ex).items()}}
    if params["kappa"] is not None:
        n = len(heights) // 2
        fe = T.zn_exponents(params["kappa"], n)
        body["exponents"] = {"h12": fe.h12, "h13": fe.h13, "h1N1": fe.h1N1, "fused": fe.fused,
                             "identity_channel": fe.identity_channel, "phi13_channel": fe.phi13_channel,
                             "minimal_model": fe.minimal_model}
    return body, None, spec.to_dict()


def cmd_selftest(params):
    from .selftest import run_all

    checks = run_all()
    return {"checks": checks, "passed": all(c["passed"] for c in checks)}, None, None


COMMANDS = {
    "spectra": cmd_spectra, "enumerate": cmd_enumerate, "oracle": cmd_oracle, "sample": cmd_sample,
    "sle": cmd_sle, "clusters": cmd_clusters, "annulus": cmd_annulus, "arch": cmd_arch,
    "selftest": cmd_selftest,
}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(stderr)
        return 2
    try:
        with contextlib.redirect_stderr(stderr), contextlib.redirect_stdout(stdout):
            ns = parser.parse_args(argv)
    except SystemExit as err:
        return int(err.code or 0)
    if ns.command is None:
        parser.print_usage(stderr)
        return 2
    flags = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    try:
        config = io.load_config(ns.config) if getattr(ns, "config", None) else None
        params = resolve(ns.command, flags, config)
        params["threads"] = _set_threads(params["threads"])
        t0 = time.perf_counter()
        body, seed, graph = COMMANDS[ns.command](params)
        elapsed = time.perf_counter() - t0
    except (CliError, io.ConfigError, DomainError, GraphError, ValueError, ArithmeticError) as err:
        print(f"adeloops {ns.command}: {err}", file=stderr)
        return 1
    man = io.RunManifest(ns.command, {k: v for k, v in params.items() if k != "timing"}, seed, graph,
                         {"seconds": elapsed} if params["timing"] else None)
    stdout.write(io.Report(ns.command, man, body).dumps() + "\n")
    if ns.command == "selftest" and not body["passed"]:
        return 1
    return 0
