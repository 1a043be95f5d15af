"""Command-line front end: coupling/temperature sweeps and exact-vs-perturbative
comparisons, emitted as CSV or JSON lines.

Configuration is a single JSON document (``--config``) with flag overrides;
precedence is flags > file > defaults.  The effective configuration is echoed
into the output header so every emitted table is self-describing, and results
are byte-identical across runs for a fixed seed.  ``INTDIST_THREADS`` caps the
worker pool; rows are always written in grid-major order.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .distance import OptimizerOptions, df_upper_bound, interaction_distance
from .models import (DIMER_SITE1_MODES, MAX_CHAIN_SITES, ChainParams, DimerParams,
                     dimer_sector_basis, hubbard_dimer, spinless_chain)
from .perturbation import (dimer_perturbative_dent, infer_free_labeling,
                           perturbative_dth, perturbative_free_decomposition)
from .spectra import exact_diagonalize, reduced_density_spectrum, thermal_probabilities

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_DEFAULT_CONFIG = {
    "model": {"type": "dimer", "t": 1.0, "delta1": 1.0, "delta2": -1.0},
    "quantity": "thermal",
    "coupling_grid": {"min": 0.0, "max": 6.0, "steps": 61},
    "beta": 1.0,
    "optimizer": {"seed": 1234, "restarts": 16, "max_iter": 5000},
    "output": {"path": None, "format": "csv"},
}

_KNOWN_TOP = {"model", "quantity", "coupling_grid", "beta", "temperature_grid",
              "optimizer", "output"}


class ConfigError(ValueError):
    """Invalid sweep configuration; the message names the offending field."""


def _require(condition: bool, message: str):
    if not condition:
        raise ConfigError(message)


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _merge_config(base: dict, override: dict) -> dict:
    # changing model.type replaces the model section; merging would leave
    # stale fields of the other model behind
    old_type = base.get("model", {}).get("type")
    new_type = override.get("model", {}).get("type")
    if new_type is not None and new_type != old_type:
        base = dict(base)
        base["model"] = {}
    return _merge(base, override)


def _grid_values(spec, name: str) -> np.ndarray:
    _require(isinstance(spec, dict), f"{name} must be an object with min/max/steps")
    unknown = set(spec) - {"min", "max", "steps"}
    _require(not unknown, f"{name} has unknown fields {sorted(unknown)}")
    try:
        lo, hi, steps = float(spec["min"]), float(spec["max"]), int(spec["steps"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{name} requires numeric min/max and integer steps") from exc
    _require(steps >= 1, f"{name}.steps must be >= 1")
    _require(lo <= hi, f"{name}.min must not exceed {name}.max")
    if steps == 1:
        return np.array([lo])
    return np.linspace(lo, hi, steps)


def validate_config(raw: dict) -> dict:
    """Normalize and validate a merged configuration dictionary."""
    unknown = set(raw) - _KNOWN_TOP
    _require(not unknown, f"unknown config fields {sorted(unknown)}")
    cfg = json.loads(json.dumps(raw))  # deep copy, JSON-typed

    model = cfg.get("model", {})
    _require(isinstance(model, dict), "model must be an object")
    mtype = model.get("type")
    _require(mtype in ("dimer", "chain"), "model.type must be 'dimer' or 'chain'")
    if mtype == "dimer":
        unknown = set(model) - {"type", "t", "delta1", "delta2"}
        _require(not unknown, f"model has unknown fields {sorted(unknown)}")
        for key in ("t", "delta1", "delta2"):
            model.setdefault(key, _DEFAULT_CONFIG["model"][key])
            _require(isinstance(model[key], (int, float)), f"model.{key} must be a number")
    else:
        unknown = set(model) - {"type", "n_sites", "hopping", "potential"}
        _require(not unknown, f"model has unknown fields {sorted(unknown)}")
        _require(isinstance(model.get("n_sites"), int) and 1 <= model["n_sites"] <= MAX_CHAIN_SITES,
                 f"model.n_sites must be an integer in [1, {MAX_CHAIN_SITES}]")
        model.setdefault("hopping", 1.0)
        model.setdefault("potential", 0.0)

    quantity = cfg.get("quantity")
    _require(quantity in ("thermal", "entanglement"),
             "quantity must be 'thermal' or 'entanglement'")

    _grid_values(cfg.get("coupling_grid", _DEFAULT_CONFIG["coupling_grid"]), "coupling_grid")
    cfg.setdefault("coupling_grid", dict(_DEFAULT_CONFIG["coupling_grid"]))

    has_tgrid = "temperature_grid" in cfg
    if quantity == "entanglement":
        _require(not has_tgrid, "temperature_grid is not applicable to quantity=entanglement")
        beta = cfg.get("beta", 1.0)
        _require(beta == 1.0, "beta must be 1 (or omitted) for quantity=entanglement")
        cfg["beta"] = 1.0
    elif has_tgrid:
        grid = _grid_values(cfg["temperature_grid"], "temperature_grid")
        _require(grid.min() > 0, "temperature_grid.min must be positive")
        _require("beta" not in cfg or cfg["beta"] is None,
                 "beta and temperature_grid are mutually exclusive")
        cfg.pop("beta", None)
    else:
        beta = cfg.get("beta", _DEFAULT_CONFIG["beta"])
        _require(isinstance(beta, (int, float)) and math.isfinite(beta) and beta > 0,
                 "beta must be a positive finite number")
        cfg["beta"] = float(beta)

    opt = cfg.get("optimizer", {})
    _require(isinstance(opt, dict), "optimizer must be an object")
    unknown = set(opt) - {"seed", "restarts", "max_iter"}
    _require(not unknown, f"optimizer has unknown fields {sorted(unknown)}")
    merged = _merge(_DEFAULT_CONFIG["optimizer"], opt)
    for key in ("seed", "restarts", "max_iter"):
        _require(isinstance(merged[key], int), f"optimizer.{key} must be an integer")
    _require(merged["restarts"] >= 1, "optimizer.restarts must be >= 1")
    _require(merged["max_iter"] >= 1, "optimizer.max_iter must be >= 1")
    cfg["optimizer"] = merged

    out = _merge(_DEFAULT_CONFIG["output"], cfg.get("output", {}))
    unknown = set(out) - {"path", "format"}
    _require(not unknown, f"output has unknown fields {sorted(unknown)}")
    _require(out["format"] in ("csv", "jsonl"), "output.format must be 'csv' or 'jsonl'")
    cfg["output"] = out
    cfg["model"] = model
    return cfg


# --------------------------------------------------------------- grid points

def _grid_points(cfg: dict):
    """(v, beta, temperature) tuples in grid-major order (coupling outer)."""
    couplings = _grid_values(cfg["coupling_grid"], "coupling_grid")
    if "temperature_grid" in cfg:
        temps = _grid_values(cfg["temperature_grid"], "temperature_grid")
        return [(float(v), 1.0 / float(t), float(t)) for v in couplings for t in temps]
    beta = cfg["beta"]
    return [(float(v), float(beta), 1.0 / float(beta)) for v in couplings]


def _spectrum_at(cfg: dict, v: float, beta: float):
    """Probability spectrum and free-mode count for one grid point."""
    model = cfg["model"]
    if model["type"] == "dimer":
        params = DimerParams(t=model["t"], delta1=model["delta1"],
                             delta2=model["delta2"], v=v)
        hamiltonian, _ = hubbard_dimer(params)
        if cfg["quantity"] == "thermal":
            eig = exact_diagonalize(hamiltonian, keep_vectors=False)
            return thermal_probabilities(eig.energies, beta), 2
        eig = exact_diagonalize(hamiltonian)
        ground = eig.vectors[:, 0]
        rho = reduced_density_spectrum(ground, dimer_sector_basis(), DIMER_SITE1_MODES)
        return rho, 2
    params = ChainParams(n_sites=model["n_sites"], hopping=model["hopping"],
                         potential=model["potential"], interaction=v)
    hamiltonian = spinless_chain(params)
    if cfg["quantity"] == "thermal":
        eig = exact_diagonalize(hamiltonian, keep_vectors=False)
        return thermal_probabilities(eig.energies, beta), model["n_sites"]
    eig = exact_diagonalize(hamiltonian)
    ground = eig.vectors[:, 0]
    half = max(1, model["n_sites"] // 2)
    region = tuple(range(half))
    return reduced_density_spectrum(ground, hamiltonian.basis, region), half


def _sweep_point(cfg: dict, point) -> dict:
    v, beta, temperature = point
    start = time.perf_counter()
    beta_fit = 1.0 if cfg["quantity"] == "entanglement" else beta
    rho, n_modes = _spectrum_at(cfg, v, beta_fit)
    opt = cfg["optimizer"]
    res = interaction_distance(rho, n_modes, beta_fit,
                               OptimizerOptions(seed=opt["seed"], restarts=opt["restarts"],
                                                max_iter=opt["max_iter"]))
    return {
        "model": cfg["model"]["type"],
        "params": {k: val for k, val in cfg["model"].items() if k != "type"},
        "quantity": cfg["quantity"],
        "v": v,
        "beta": beta,
        "temperature": temperature,
        "d_f": res.value,
        "epsilons": list(res.optimal_epsilons),
        "converged": bool(res.optimizer_info["converged"]),
        "wall_time_s": time.perf_counter() - start,
    }


def _perturbative_context(cfg: dict):
    """Reference eigensystem, labeling, and unit interaction for compare runs."""
    model = cfg["model"]
    if model["type"] == "dimer":
        params = DimerParams(t=model["t"], delta1=model["delta1"],
                             delta2=model["delta2"], v=0.0)
        h0, _ = hubbard_dimer(params)
        unit_v = hubbard_dimer(DimerParams(t=model["t"], delta1=model["delta1"],
                                           delta2=model["delta2"], v=1.0))[1]
    else:
        params = ChainParams(n_sites=model["n_sites"], hopping=model["hopping"],
                             potential=model["potential"], interaction=0.0)
        h0 = spinless_chain(params)
        unit_v = spinless_chain(ChainParams(n_sites=model["n_sites"], hopping=0.0,
                                            potential=0.0, interaction=1.0))
    eig = exact_diagonalize(h0)
    _, pattern = infer_free_labeling(eig.energies)
    return eig, pattern, unit_v


def _compare_point(cfg: dict, context, point) -> dict:
    row = _sweep_point(cfg, point)
    v = row["v"]
    if cfg["quantity"] == "entanglement":
        try:
            pert = dimer_perturbative_dent(v)
        except ValueError:
            pert = float("nan")
    else:
        eig, pattern, unit_v = context
        decomp = perturbative_free_decomposition(eig, pattern, unit_v, lam=v)
        pert = perturbative_dth(decomp, row["beta"])
    row["exact"] = row.pop("d_f")
    row["perturbative"] = pert
    row["abs_diff"] = abs(row["exact"] - pert)
    return row


# -------------------------------------------------------------------- output

def _worker_count() -> int:
    env = os.environ.get("INTDIST_THREADS")
    if env:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ConfigError("INTDIST_THREADS must be an integer") from exc
        _require(cap >= 1, "INTDIST_THREADS must be >= 1")
        return cap
    return min(4, os.cpu_count() or 1)


def _run_grid(cfg: dict, worker) -> list:
    points = _grid_points(cfg)
    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        return list(pool.map(worker, points))


def run_sweep(cfg: dict) -> list:
    """One interaction-distance row per grid point, in grid-major order."""
    return _run_grid(cfg, lambda point: _sweep_point(cfg, point))


def run_compare(cfg: dict) -> list:
    """Exact and first-order perturbative distances per grid point."""
    if cfg["quantity"] == "entanglement" and cfg["model"]["type"] != "dimer":
        raise ConfigError("compare with quantity=entanglement supports model.type=dimer only")
    context = None if cfg["quantity"] == "entanglement" else _perturbative_context(cfg)
    return _run_grid(cfg, lambda point: _compare_point(cfg, context, point))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


_CSV_COLUMNS = {
    "sweep": ["model", "params", "quantity", "v", "beta", "temperature", "d_f",
              "epsilons", "converged"],
    "compare": ["model", "params", "quantity", "v", "beta", "temperature", "exact",
                "perturbative", "abs_diff", "epsilons", "converged"],
}


def render_csv(cfg: dict, rows: list, kind: str) -> str:
    """CSV with the effective config echoed as a leading comment line.

    Per-row wall time is reported only in the jsonl format: its jitter would
    break the byte-identical reproducibility of CSV output.
    """
    buf = io.StringIO()
    buf.write(f"# config: {json.dumps(cfg, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    columns = _CSV_COLUMNS[kind]
    writer.writerow(columns)
    for row in rows:
        record = []
        for col in columns:
            value = row[col]
            if col == "epsilons":
                record.append(";".join(_fmt(e) for e in value))
            elif col == "params":
                record.append(json.dumps(value, sort_keys=True))
            else:
                record.append(_fmt(value))
        writer.writerow(record)
    return buf.getvalue()


def render_jsonl(cfg: dict, rows: list) -> str:
    lines = [json.dumps({"config": cfg}, sort_keys=True)]
    for row in rows:
        lines.append(json.dumps(row, sort_keys=True))
    return "\n".join(lines) + "\n"


def _emit(cfg: dict, rows: list, kind: str):
    if cfg["output"]["format"] == "csv":
        text = render_csv(cfg, rows, kind)
    else:
        text = render_jsonl(cfg, rows)
    path = cfg["output"]["path"]
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"output.path is not writable: {exc}") from exc


# ----------------------------------------------------------------- argparse

def _add_common_flags(sub):
    sub.add_argument("--config", help="path to a JSON configuration file")
    sub.add_argument("--model", choices=["dimer", "chain"])
    sub.add_argument("--n-sites", type=int, help="chain length (model=chain)")
    sub.add_argument("--quantity", choices=["thermal", "entanglement"])
    sub.add_argument("--v-min", type=float)
    sub.add_argument("--v-max", type=float)
    sub.add_argument("--v-steps", type=int)
    sub.add_argument("--beta", type=float)
    sub.add_argument("--t-min", type=float)
    sub.add_argument("--t-max", type=float)
    sub.add_argument("--t-steps", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--restarts", type=int)
    sub.add_argument("--max-iter", type=int)
    sub.add_argument("--out", help="output path (default: stdout)")
    sub.add_argument("--format", choices=["csv", "jsonl"])
    sub.add_argument("--strict", action="store_true",
                     help="exit 3 if any grid point fails to converge")


def _overrides_from_args(args) -> dict:
    over: dict = {}
    if args.model:
        over["model"] = {"type": args.model}
    if args.n_sites is not None:
        over.setdefault("model", {})["n_sites"] = args.n_sites
        over["model"].setdefault("type", "chain")
    if args.quantity:
        over["quantity"] = args.quantity
    grid = {}
    if args.v_min is not None:
        grid["min"] = args.v_min
    if args.v_max is not None:
        grid["max"] = args.v_max
    if args.v_steps is not None:
        grid["steps"] = args.v_steps
    if grid:
        over["coupling_grid"] = grid
    tgrid = {}
    if args.t_min is not None:
        tgrid["min"] = args.t_min
    if args.t_max is not None:
        tgrid["max"] = args.t_max
    if args.t_steps is not None:
        tgrid["steps"] = args.t_steps
    if tgrid:
        over["temperature_grid"] = tgrid
    if args.beta is not None:
        over["beta"] = args.beta
    opt = {}
    if args.seed is not None:
        opt["seed"] = args.seed
    if args.restarts is not None:
        opt["restarts"] = args.restarts
    if args.max_iter is not None:
        opt["max_iter"] = args.max_iter
    if opt:
        over["optimizer"] = opt
    out = {}
    if args.out is not None:
        out["path"] = args.out
    if args.format is not None:
        out["format"] = args.format
    if out:
        over["output"] = out
    return over


def _load_config(args) -> dict:
    cfg = dict(_DEFAULT_CONFIG)
    explicit_beta = args.beta is not None
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must contain a JSON object")
        explicit_beta = explicit_beta or "beta" in file_cfg
        cfg = _merge_config(cfg, file_cfg)
    cfg = _merge_config(cfg, _overrides_from_args(args))
    # the default beta yields to an explicitly requested temperature grid
    if "temperature_grid" in cfg and not explicit_beta:
        cfg.pop("beta", None)
    return validate_config(cfg)


def _grid_command(args, runner, kind: str) -> int:
    cfg = _load_config(args)
    rows = runner(cfg)
    _emit(cfg, rows, kind)
    if args.strict and any(not row["converged"] for row in rows):
        bad = sum(1 for row in rows if not row["converged"])
        print(f"error: {bad} grid point(s) did not converge", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="intdist",
        description="Interaction distance sweeps over coupling and temperature.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sweep = sub.add_parser("sweep", help="interaction distance over a parameter grid")
    _add_common_flags(sweep)
    compare = sub.add_parser("compare", help="exact vs first-order perturbative distance")
    _add_common_flags(compare)
    sub.add_parser("bound", help="print the universal upper bound 3 - 2*sqrt(2)")
    sub.add_parser("version", help="print the package version")

    args = parser.parse_args(argv)
    if args.command == "bound":
        print(f"{df_upper_bound():.12g}")
        return EXIT_OK
    if args.command == "version":
        print(__version__)
        return EXIT_OK
    try:
        if args.command == "sweep":
            return _grid_command(args, run_sweep, "sweep")
        return _grid_command(args, run_compare, "compare")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
