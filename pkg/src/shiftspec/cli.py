"""Command-line front end.

Jobs are described by a JSON config (--config FILE or --config-json STR)
holding the operator model plus numeric knobs; individual flags override
top-level knobs.  Commands:

    radii           forward/backward rates at one lambda (stdout JSON)
    membership      spectrum membership at one lambda (stdout JSON)
    scan            classify a lambda grid (csv/json/pgm artifact)
    boundary        scan + extract boundary polylines (json artifact)
    nshift          scan an n-shift as the union over residue classes
    verify-inverse  build the inverse series at one lambda and report residuals
    oracle          truncated-section eigenvalues (csv artifact)
    compare         scan vs truncated-section eigenvalues (json report)

Exit codes: 0 success, 2 configuration error, 3 refinement budget exceeded.
Outputs are written only after the computation finishes, so a failing run
leaves no partial artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import emit
from .errors import BudgetExceeded, ConfigError, DenominatorZero, SpecError, WeightZero
from .inverse import construct_resolvent, residual_identity, telescoping_residual
from .oracle import compare, eigenvalues, sigma_min_grid, truncate
from .radii import backward_rate, forward_rate
from .shifts import ShiftModel, model_from_obj
from .spectrum import decompose_union, default_box, extract_boundary, membership, scan

COMMANDS = ("radii", "membership", "scan", "boundary", "nshift",
            "verify-inverse", "oracle", "compare")

_EXT = {"csv": ".csv", "json": ".json", "pgm": ".pgm"}


@dataclass
class JobConfig:
    model: dict | None = None
    command: str | None = None
    lam: complex | None = None
    k_max: int = 64
    eps: float | None = None
    box: tuple | None = None
    resolution: tuple = (128, 128)
    max_depth: int = 3
    cell_budget: int = 250_000
    L: int = 64
    target_tail: float = 1e-8
    N: int = 128
    boundary_condition: str = "circulant"
    offset: int | None = None
    delta: float | None = None
    extract_mode: str = "auto"
    sigma_grid: bool = False
    sigma_resolution: tuple = (32, 32)
    out: str | None = None
    fmt: str = "csv"
    threads: int = 1


_CONFIG_KEYS = {
    "model": "model", "command": "command", "lambda": "lam", "k_max": "k_max",
    "eps": "eps", "box": "box", "resolution": "resolution",
    "max_depth": "max_depth", "cell_budget": "cell_budget", "L": "L",
    "target_tail": "target_tail", "N": "N",
    "boundary_condition": "boundary_condition", "offset": "offset",
    "delta": "delta", "extract_mode": "extract_mode",
    "sigma_grid": "sigma_grid", "sigma_resolution": "sigma_resolution",
    "out": "out", "format": "fmt", "threads": "threads",
}


def _parse_lambda(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        parts = v.split(",")
        try:
            if len(parts) == 2:
                return complex(float(parts[0]), float(parts[1]))
            if len(parts) == 1:
                return complex(parts[0].replace(" ", ""))
        except ValueError:
            pass
    raise ConfigError(f"cannot parse lambda from {v!r} (use 're,im')")


def _parse_pair(v, name) -> tuple[int, int]:
    if isinstance(v, int) and not isinstance(v, bool):
        return (v, v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return (int(v[0]), int(v[1]))
    if isinstance(v, str):
        parts = v.split(",")
        if len(parts) == 1:
            return (int(parts[0]), int(parts[0]))
        if len(parts) == 2:
            return (int(parts[0]), int(parts[1]))
    raise ConfigError(f"cannot parse {name} from {v!r} (use 'nx,ny' or a single int)")


def _parse_box(v):
    if isinstance(v, str):
        v = v.split(",")
    if isinstance(v, (list, tuple)) and len(v) == 4:
        return tuple(float(x) for x in v)
    raise ConfigError(f"cannot parse box from {v!r} (use 'x0,x1,y0,y1')")


def load_config(obj: dict) -> JobConfig:
    """Strict config parsing: unknown fields rejected, knobs bounds-checked."""
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(obj) - set(_CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    cfg = JobConfig()
    for key, attr in _CONFIG_KEYS.items():
        if key not in obj:
            continue
        v = obj[key]
        if attr == "lam":
            v = _parse_lambda(v)
        elif attr in ("resolution", "sigma_resolution"):
            v = _parse_pair(v, key)
        elif attr == "box":
            v = _parse_box(v)
        setattr(cfg, attr, v)
    validate_config(cfg)
    return cfg


def validate_config(cfg: JobConfig) -> None:
    if cfg.command is not None and cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if not isinstance(cfg.k_max, int) or cfg.k_max < 8:
        raise ConfigError(f"k_max must be an integer >= 8, got {cfg.k_max}")
    if cfg.eps is not None and not (0.0 <= float(cfg.eps) <= 0.5):
        raise ConfigError(f"eps must lie in [0, 0.5], got {cfg.eps}")
    nx, ny = cfg.resolution
    if not (1 <= nx <= 4096 and 1 <= ny <= 4096):
        raise ConfigError(f"resolution must be within 1..4096, got {cfg.resolution}")
    if not (0 <= cfg.max_depth <= 8):
        raise ConfigError(f"max_depth must be within 0..8, got {cfg.max_depth}")
    if cfg.cell_budget < 1:
        raise ConfigError("cell_budget must be positive")
    if not (0 <= cfg.L <= 1_000_000):
        raise ConfigError(f"L must be within 0..1000000, got {cfg.L}")
    if not (2 <= cfg.N <= 2048):
        raise ConfigError(f"N must be within 2..2048, got {cfg.N}")
    if cfg.boundary_condition not in ("zero", "circulant"):
        raise ConfigError(f"boundary_condition must be zero|circulant, got {cfg.boundary_condition!r}")
    if cfg.fmt not in _EXT:
        raise ConfigError(f"format must be one of {sorted(_EXT)}, got {cfg.fmt!r}")
    if not (1 <= cfg.threads <= 64):
        raise ConfigError(f"threads must be within 1..64, got {cfg.threads}")
    if cfg.extract_mode not in ("auto", "band", "centerline"):
        raise ConfigError(f"extract_mode must be auto|band|centerline, got {cfg.extract_mode!r}")
    if not (0.0 < cfg.target_tail < 1.0):
        raise ConfigError("target_tail must lie in (0, 1)")


def _require_model(cfg: JobConfig) -> ShiftModel:
    if cfg.model is None:
        raise ConfigError("config is missing the 'model' object")
    try:
        return model_from_obj(cfg.model)
    except SpecError as exc:
        raise ConfigError(str(exc)) from exc


def _require_lambda(cfg: JobConfig) -> complex:
    if cfg.lam is None:
        raise ConfigError("this command needs a lambda ('lambda' in config or --lambda)")
    return cfg.lam


def _scan_kwargs(cfg: JobConfig) -> dict:
    return dict(box=cfg.box, resolution=tuple(cfg.resolution), k_max=cfg.k_max,
                eps=cfg.eps, max_depth=cfg.max_depth, cell_budget=cfg.cell_budget,
                threads=cfg.threads)


def _write(path: str, data) -> None:
    p = Path(path)
    if isinstance(data, bytes):
        p.write_bytes(data)
    else:
        p.write_text(data)


def _emit_grid(grid, cfg: JobConfig, default_stem: str) -> list[str]:
    out = cfg.out or (default_stem + _EXT[cfg.fmt])
    if cfg.fmt == "csv":
        _write(out, emit.grid_to_csv(grid))
    elif cfg.fmt == "json":
        _write(out, emit.dump_json(emit.grid_to_obj(grid)))
    else:
        _write(out, emit.grid_to_pgm(grid))
    return [out]


def _grid_for(cfg: JobConfig, model: ShiftModel):
    if model.step == 1:
        return scan(model, **_scan_kwargs(cfg))
    return decompose_union(model, **_scan_kwargs(cfg))


def _cmd_radii(cfg: JobConfig) -> dict:
    model = _require_model(cfg)
    lam = _require_lambda(cfg)
    if model.step != 1:
        raise ConfigError("radii are defined per residue class; use step-1 models")
    fwd = forward_rate(model, lam, cfg.k_max)
    bwd = backward_rate(model, lam, cfg.k_max)
    return {
        "lambda": lam,
        "r_plus": fwd.value,
        "r_minus": bwd.value,
        "method": fwd.method,
        "method_minus": bwd.method,
        "uncertainty_plus": fwd.uncertainty,
        "uncertainty_minus": bwd.uncertainty,
        "k_max": cfg.k_max,
    }


def _cmd_membership(cfg: JobConfig) -> dict:
    model = _require_model(cfg)
    lam = _require_lambda(cfg)
    res = membership(model, lam, cfg.k_max, cfg.eps)
    return {
        "lambda": res.lam,
        "in_spectrum": res.in_spectrum,
        "margin": res.margin,
        "r_plus": res.forward.value,
        "r_minus": None if res.backward is None else res.backward.value,
        "eps": cfg.eps if cfg.eps is not None else 10.0 / cfg.k_max,
        "k_max": cfg.k_max,
    }


def _cmd_scan(cfg: JobConfig, union: bool) -> tuple[dict, list[str]]:
    model = _require_model(cfg)
    if not union and model.step != 1:
        raise ConfigError("scan requires step 1; use the nshift command")
    grid = decompose_union(model, **_scan_kwargs(cfg)) if union else scan(model, **_scan_kwargs(cfg))
    files = _emit_grid(grid, cfg, "nshift" if union else "scan")
    summary = {
        "box": [grid.x0, grid.x1, grid.y0, grid.y1],
        "resolution": [grid.nx, grid.ny],
        "eps": grid.eps,
        "class_counts": grid.class_counts(),
        "area_estimate": grid.area_estimate(),
        "outputs": files,
    }
    return summary, files


def _cmd_boundary(cfg: JobConfig) -> tuple[dict, list[str]]:
    model = _require_model(cfg)
    grid = _grid_for(cfg, model)
    poly = extract_boundary(grid, cfg.extract_mode)
    out = cfg.out or "boundary.json"
    _write(out, emit.dump_json(emit.boundary_to_obj(poly)))
    return {"components": len(poly.components), "outputs": [out]}, [out]


def _cmd_verify_inverse(cfg: JobConfig) -> dict:
    model = _require_model(cfg)
    lam = _require_lambda(cfg)
    if model.step != 1:
        raise ConfigError("verify-inverse needs a step-1 model")
    try:
        series, fwd, bwd = construct_resolvent(
            model, lam, cfg.k_max, target_tail=cfg.target_tail)
    except (DenominatorZero, WeightZero) as exc:
        return {"lambda": lam, "invertible": False, "reason": str(exc),
                "r_plus": None, "r_minus": None}
    result = {
        "lambda": lam,
        "r_plus": fwd.value,
        "r_minus": bwd.value,
        "k_max": cfg.k_max,
        "invertible": series is not None,
    }
    if series is None:
        result["direction"] = None
        return result
    result.update({
        "direction": series.direction,
        "L": series.L,
        "tail_bound": series.tail_bound,
        "residual": residual_identity(series, model),
        "telescoping": telescoping_residual(series, model),
    })
    return result


def _cmd_oracle(cfg: JobConfig) -> tuple[dict, list[str]]:
    model = _require_model(cfg)
    import numpy as np

    eigs = np.concatenate([
        eigenvalues(truncate(m, cfg.N, cfg.boundary_condition, cfg.offset))
        for m in model.submodels()
    ])
    order = np.lexsort((eigs.imag, eigs.real))
    eigs = eigs[order]
    out = cfg.out or "eigenvalues.csv"
    files = [out]
    _write(out, emit.eigenvalues_to_csv(eigs))
    summary = {"N": cfg.N, "boundary": cfg.boundary_condition,
               "n_eigenvalues": int(len(eigs)), "outputs": files}
    if cfg.sigma_grid:
        box = cfg.box if cfg.box is not None else default_box(model)
        xs, ys, smin = sigma_min_grid(model, cfg.N, cfg.boundary_condition, box,
                                      resolution=tuple(cfg.sigma_resolution),
                                      offset=cfg.offset, threads=cfg.threads)
        sig_out = str(Path(out).with_suffix("")) + "_sigma_min.csv"
        _write(sig_out, emit.sigma_grid_to_csv(xs, ys, smin))
        files.append(sig_out)
        summary["outputs"] = files
    return summary, files


def _cmd_compare(cfg: JobConfig) -> tuple[dict, list[str]]:
    model = _require_model(cfg)
    grid = _grid_for(cfg, model)
    report = compare(model, grid, cfg.N, cfg.boundary_condition, cfg.offset,
                     cfg.delta)
    obj = emit.report_to_obj(report)
    out = cfg.out or "compare.json"
    _write(out, emit.dump_json(obj))
    obj["outputs"] = [out]
    return obj, [out]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="shiftspec",
        description="Spectra of diagonally perturbed bilateral weighted shifts.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="path to a JSON job config")
        sp.add_argument("--config-json", help="inline JSON job config")
        sp.add_argument("--lambda", dest="lam", help="probe point 're,im'")
        sp.add_argument("--k-max", type=int, dest="k_max")
        sp.add_argument("--eps", type=float)
        sp.add_argument("--box", help="x0,x1,y0,y1")
        sp.add_argument("--resolution", help="nx,ny or a single int")
        sp.add_argument("--max-depth", type=int, dest="max_depth")
        sp.add_argument("--cell-budget", type=int, dest="cell_budget")
        sp.add_argument("--L", type=int, dest="L")
        sp.add_argument("--N", type=int, dest="N")
        sp.add_argument("--boundary-condition", dest="boundary_condition",
                        choices=("zero", "circulant"))
        sp.add_argument("--offset", type=int)
        sp.add_argument("--extract-mode", dest="extract_mode",
                        choices=("auto", "band", "centerline"))
        sp.add_argument("--sigma-grid", action="store_true", dest="sigma_grid",
                        default=None)
        sp.add_argument("--out")
        sp.add_argument("--format", dest="fmt", choices=tuple(_EXT))
        sp.add_argument("--threads", type=int)
    return p


def _merge_args(cfg: JobConfig, args: argparse.Namespace) -> JobConfig:
    for f in ("k_max", "eps", "max_depth", "cell_budget", "L", "N",
              "boundary_condition", "offset", "extract_mode", "sigma_grid",
              "out", "fmt", "threads"):
        v = getattr(args, f, None)
        if v is not None:
            setattr(cfg, f, v)
    if getattr(args, "lam", None) is not None:
        cfg.lam = _parse_lambda(args.lam)
    if getattr(args, "box", None) is not None:
        cfg.box = _parse_box(args.box)
    if getattr(args, "resolution", None) is not None:
        cfg.resolution = _parse_pair(args.resolution, "resolution")
    if cfg.command is not None and cfg.command != args.command:
        raise ConfigError(
            f"config command {cfg.command!r} conflicts with subcommand {args.command!r}")
    cfg.command = args.command
    validate_config(cfg)
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = {}
        if args.config and args.config_json:
            raise ConfigError("give either --config or --config-json, not both")
        if args.config:
            try:
                raw = json.loads(Path(args.config).read_text())
            except OSError as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"malformed JSON in {args.config}: {exc}") from exc
        elif args.config_json:
            try:
                raw = json.loads(args.config_json)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"malformed inline JSON: {exc}") from exc
        cfg = _merge_args(load_config(raw), args)

        if cfg.command == "radii":
            summary = _cmd_radii(cfg)
        elif cfg.command == "membership":
            summary = _cmd_membership(cfg)
        elif cfg.command == "scan":
            summary, _ = _cmd_scan(cfg, union=False)
        elif cfg.command == "nshift":
            summary, _ = _cmd_scan(cfg, union=True)
        elif cfg.command == "boundary":
            summary, _ = _cmd_boundary(cfg)
        elif cfg.command == "verify-inverse":
            summary = _cmd_verify_inverse(cfg)
        elif cfg.command == "oracle":
            summary, _ = _cmd_oracle(cfg)
        else:
            summary, _ = _cmd_compare(cfg)
        sys.stdout.write(emit.dump_json(summary))
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SpecError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
