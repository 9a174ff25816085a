"""Configuration, batch orchestration and report generation.

Subcommands: index, solve, scan, check.  A run is described by a TOML (or
JSON) config; every run writes summary.json, CSV tables and a manifest
recording the config hash, package versions and the random seed, so that
identical config + seed reproduces identical summaries byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:              # python < 3.11
    import tomli as tomllib

from . import __version__
from .hamiltonians import (QuadraticTerm, check_hypotheses, example_anisotropic,
                           with_quadratic_term, SamplingSpec)
from .index import check_iteration_bounds, index_pair_iterated, maslov_index
from .loopspace import save_loop_csv, samples as loop_samples
from .solver import (SolveOptions, distinctness_check, minimal_period_check,
                     solve_periodic, subharmonic_scan)
from .symplectic import MatrixPath

DEFAULT_SEED = 20240601


class ConfigError(ValueError):
    """Invalid run configuration; message carries field-level diagnostics."""


@dataclass
class RunConfig:
    mode: str
    seed: int = DEFAULT_SEED
    out: str = "runs/latest"
    model: dict = field(default_factory=dict)
    index: dict = field(default_factory=dict)
    solve: dict = field(default_factory=dict)
    scan: dict = field(default_factory=dict)
    check: dict = field(default_factory=dict)
    modes_schedule: tuple = ()
    verbose: bool = False
    raw: dict = field(default_factory=dict)


def load_config(path) -> dict:
    p = Path(path)
    text = p.read_bytes()
    if p.suffix == ".json":
        return json.loads(text)
    try:
        return tomllib.loads(text.decode())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from exc


def validate_config(data: dict, source: str = "<config>") -> RunConfig:
    errors = []
    mode = data.get("mode")
    if mode not in ("index", "solve", "scan", "check"):
        errors.append(f"mode: must be one of index/solve/scan/check, got {mode!r}")
    seed = data.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int):
        errors.append("seed: must be an integer")
    cfg = RunConfig(mode=mode or "index", seed=seed if isinstance(seed, int) else DEFAULT_SEED,
                    out=data.get("out", "runs/latest"),
                    model=data.get("model", {}), index=data.get("index", {}),
                    solve=data.get("solve", {}), scan=data.get("scan", {}),
                    check=data.get("check", {}), raw=data)
    if mode == "index":
        sec = cfg.index
        if not sec.get("path"):
            errors.append("index.path: required (matrix-series file)")
        if not isinstance(sec.get("period", 1.0), (int, float)) or sec.get("period", 1.0) <= 0:
            errors.append("index.period: must be a positive number")
        its = sec.get("iterates", 1)
        if isinstance(its, int):
            if its < 1:
                errors.append("index.iterates: must be >= 1")
        elif not (isinstance(its, list) and its and all(isinstance(k, int) and k >= 1 for k in its)):
            errors.append("index.iterates: must be a positive integer or nonempty list")
    if mode in ("solve", "scan", "check"):
        merrs = _validate_model(cfg.model)
        errors.extend(merrs)
    if mode == "scan":
        ks = cfg.scan.get("k_list")
        if not (isinstance(ks, list) and ks and all(isinstance(k, int) and k >= 1 for k in ks)):
            errors.append("scan.k_list: must be a nonempty list of positive integers")
    for name in ("newton_tol", "nonconst_tol"):
        val = cfg.solve.get(name)
        if val is not None and (not isinstance(val, (int, float)) or val <= 0):
            errors.append(f"solve.{name}: must be positive")
    if errors:
        raise ConfigError(f"{source}: invalid configuration:\n  " + "\n  ".join(errors))
    return cfg


def _validate_model(model: dict) -> list:
    errors = []
    family = model.get("family")
    if family not in ("example_anisotropic", "quadratic_plus"):
        errors.append(f"model.family: must be example_anisotropic or quadratic_plus, "
                      f"got {family!r}")
    n = model.get("n")
    if not (isinstance(n, int) and n >= 1):
        errors.append("model.n: must be a positive integer")
    for key in ("sigma", "tau_exp"):
        v = model.get(key, 1.0)
        ok = isinstance(v, (int, float)) or (isinstance(v, list)
                                             and all(isinstance(x, (int, float)) for x in v))
        if not ok:
            errors.append(f"model.{key}: must be a number or list of numbers")
    if family == "quadratic_plus" and not model.get("bhat_path"):
        errors.append("model.bhat_path: required for quadratic_plus")
    return errors


def build_model(model_cfg: dict):
    n = model_cfg["n"]
    base = example_anisotropic(n, model_cfg.get("sigma", 1.0),
                               model_cfg.get("tau_exp", 1.0),
                               period=model_cfg.get("period", 2 * np.pi))
    if model_cfg["family"] == "quadratic_plus":
        path = MatrixPath.from_file(model_cfg["bhat_path"])
        return with_quadratic_term(base, QuadraticTerm(path))
    return base


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_manifest(outdir: Path, cfg: RunConfig, artifacts: list, status: str):
    manifest = {
        "config_sha256": hashlib.sha256(
            _canonical_json(cfg.raw).encode()).hexdigest(),
        "linkorbit_version": __version__,
        "numpy_version": np.__version__,
        "python_version": sys.version.split()[0],
        "seed": cfg.seed,
        "status": status,
        "artifacts": sorted(artifacts),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    (outdir / "manifest.json").write_text(_canonical_json(manifest))


def _maslov_row(B: MatrixPath, k: int, schedule):
    stab = index_pair_iterated(B, k, schedule=schedule) if k > 1 else \
        maslov_index(B, schedule=schedule)
    return stab.pair


def run_index(cfg: RunConfig, outdir: Path) -> dict:
    sec = cfg.index
    B = MatrixPath.from_file(sec["path"])
    period = float(sec.get("period", B.period))
    if abs(period - B.period) > 1e-9 * B.period:
        raise ConfigError(f"index.period {period} does not match the file period {B.period}")
    its = sec.get("iterates", 1)
    k_list = list(range(1, its + 1)) if isinstance(its, int) else sorted(set(its))
    schedule = cfg.modes_schedule or (16, 32, 64, 128, 256)
    base = _maslov_row(B, 1, schedule)
    rows = []
    for k in k_list:
        pair = base if k == 1 else _maslov_row(B, k, schedule)
        rep = check_iteration_bounds(base, pair, k)
        rows.append({
            "k": k, "i": pair.i, "nu": pair.nu,
            "prop210_lo": rep.coarse.lower, "prop210_hi": rep.coarse.upper,
            "prop212_lo": rep.refined.lower, "prop212_hi": rep.refined.upper,
            "ok": rep.ok,
        })
    with open(outdir / "indices.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    header = f"{'k':>4} {'i':>6} {'nu':>4}   bounds"
    print(header)
    for r in rows:
        verdict = "ok" if r["ok"] else "VIOLATED"
        print(f"{r['k']:>4} {r['i']:>6} {r['nu']:>4}   "
              f"[{r['prop210_lo']}, {r['prop210_hi']}] / "
              f"[{r['prop212_lo']}, {r['prop212_hi']}]  {verdict}")
    return {"mode": "index", "n": B.n, "period": period, "rows": rows,
            "all_ok": all(r["ok"] for r in rows)}


def run_check(cfg: RunConfig, outdir: Path) -> dict:
    model = build_model(cfg.model)
    which = tuple(cfg.check.get("hypotheses", ("H1", "H2", "H3", "H3prime", "H4", "H5")))
    spec = SamplingSpec(seed=cfg.seed)
    verdicts = check_hypotheses(model, which=which, sampling=spec)
    out = {}
    for name, v in verdicts.items():
        out[name] = {"status": v.status, "ok": v.ok}
        print(f"{name:>8}: {v.status}")
    return {"mode": "check", "model": model.name, "verdicts": out,
            "all_ok": all(v["ok"] for v in out.values())}


def _solve_options(cfg: RunConfig) -> SolveOptions:
    sec = cfg.solve
    kwargs = {}
    for name in ("m", "newton_tol", "max_newton", "nonconst_tol", "seed_count"):
        if name in sec:
            kwargs[name] = sec[name]
    if cfg.modes_schedule:
        kwargs["certify_schedule"] = cfg.modes_schedule
    return SolveOptions(seed=cfg.seed, **kwargs)


def _result_record(res, model, want_minimal_period: bool) -> dict:
    rec = {
        "k": res.k, "period": res.period, "value": res.value,
        "residual": res.residual, "morse_index": res.morse_index,
        "morse_nullity": res.morse_nullity,
        "maslov_i": res.maslov.i, "maslov_nu": res.maslov.nu,
        "m_stable": res.m_stable, "monodromy_nullity": res.monodromy_nullity,
        "reintegration_error": res.reintegration_error,
        "window": list(res.window) if res.window else None,
        "in_window": res.in_window, "sandwich_ok": res.sandwich_ok,
    }
    if want_minimal_period and model.autonomous:
        verdict = minimal_period_check(res, model)
        rec["minimal_period"] = {
            "period_numeric": verdict.period_numeric,
            "k_numeric": verdict.k_numeric,
            "certified_k": verdict.certificate.certified_k,
            "consistent": verdict.consistent,
        }
    return rec


def _write_solutions(results, outdir: Path, artifacts: list, plot_data: bool):
    sol = outdir / "solutions"
    sol.mkdir(exist_ok=True)
    for i, res in enumerate(results):
        fname = sol / f"orbit_k{res.k}_{i}.csv"
        save_loop_csv(res.loop, fname)
        artifacts.append(str(fname.relative_to(outdir)))
        if plot_data:
            pts = loop_samples(res.loop, 512)
            ts = np.arange(512) * res.period / 512
            pname = sol / f"orbit_k{res.k}_{i}_samples.csv"
            with open(pname, "w") as fh:
                fh.write("t," + ",".join(f"z{j + 1}" for j in range(pts.shape[1])) + "\n")
                for t, row in zip(ts, pts):
                    fh.write(f"{float(t)!r}," + ",".join(repr(float(x)) for x in row) + "\n")
            artifacts.append(str(pname.relative_to(outdir)))


def run_solve(cfg: RunConfig, outdir: Path, artifacts: list) -> dict:
    model = build_model(cfg.model)
    period = float(cfg.solve.get("period", model.period))
    opts = _solve_options(cfg)
    out = solve_periodic(model, period, opts)
    if not out.results:
        return {"mode": "solve", "model": model.name, "results": [],
                "failures": [f.status for f in out.failures], "all_ok": False}
    _write_solutions(out.results, outdir, artifacts, cfg.solve.get("plot_data", False))
    records = [_result_record(r, model, cfg.solve.get("minimal_period", True))
               for r in out.results]
    for rec in records:
        print(f"k={rec['k']}  f={rec['value']:.6f}  residual={rec['residual']:.2e}  "
              f"maslov=({rec['maslov_i']}, {rec['maslov_nu']})  "
              f"window={'ok' if rec['in_window'] else 'OUT'}  "
              f"sandwich={'ok' if rec['sandwich_ok'] else 'FAIL'}")
    return {"mode": "solve", "model": model.name, "results": records,
            "all_ok": all(r["in_window"] and r["sandwich_ok"] for r in records)}


def run_scan(cfg: RunConfig, outdir: Path, artifacts: list) -> dict:
    model = build_model(cfg.model)
    tau = float(cfg.scan.get("period", model.period))
    k_list = cfg.scan["k_list"]
    opts = _solve_options(cfg)
    out = subharmonic_scan(model, tau, k_list, opts)
    _write_solutions(out.results, outdir, artifacts, cfg.scan.get("plot_data", False))
    records = [_result_record(r, model, cfg.scan.get("minimal_period", False))
               for r in out.results]
    by_k = {r.k: r for r in out.results}
    pairs = []
    for ka in sorted(by_k):
        for kb in sorted(by_k):
            if kb % ka == 0 and kb > ka:
                p = kb // ka
                verdict = distinctness_check(by_k[ka], by_k[kb], p, model.n, tau=tau)
                pairs.append({"k": ka, "pk": kb, "p": p,
                              "certified": verdict.certified, "route": verdict.route,
                              "shift_gap": verdict.shift_gap})
    for rec in records:
        print(f"k={rec['k']}  f={rec['value']:.6f}  residual={rec['residual']:.2e}  "
              f"maslov=({rec['maslov_i']}, {rec['maslov_nu']})  "
              f"sandwich={'ok' if rec['sandwich_ok'] else 'FAIL'}")
    for pr in pairs:
        tag = f"{pr['route']}" if pr["certified"] else "not certified"
        print(f"z_{pr['k']} vs z_{pr['pk']} (p={pr['p']}): {tag}, "
              f"shift gap {pr['shift_gap']:.3e}")
    solved = {r["k"] for r in records}
    return {"mode": "scan", "model": model.name, "results": records,
            "distinctness": pairs,
            "missing_k": sorted(set(k_list) - solved),
            "all_ok": all(r["sandwich_ok"] for r in records) and not
            sorted(set(k_list) - solved)}


def run(config: RunConfig) -> int:
    """Execute the configured pipeline; returns a process exit status."""
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    artifacts = ["summary.json"]
    try:
        if config.mode == "index":
            summary = run_index(config, outdir)
            artifacts.append("indices.csv")
        elif config.mode == "check":
            summary = run_check(config, outdir)
        elif config.mode == "solve":
            summary = run_solve(config, outdir, artifacts)
        else:
            summary = run_scan(config, outdir, artifacts)
    except Exception as exc:   # pipeline failure: keep partial artifacts, mark it
        (outdir / "summary.json").write_text(_canonical_json(
            {"mode": config.mode, "status": "failed", "error": str(exc)}))
        _write_manifest(outdir, config, artifacts, status="failed")
        print(f"error: {exc}", file=sys.stderr)
        return 1
    summary["seed"] = config.seed
    (outdir / "summary.json").write_text(_canonical_json(summary))
    _write_manifest(outdir, config, artifacts, status="ok")
    return 0 if summary.get("all_ok", True) else 1


def _add_common(p):
    p.add_argument("--config", help="TOML or JSON run configuration")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="random seed override")
    p.add_argument("--modes", help="comma-separated truncation schedule, e.g. 16,32,64")
    p.add_argument("--verbose", action="store_true")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="linkorbit",
                                     description="index pairs and linking orbits of "
                                                 "periodic Hamiltonian systems")
    sub = parser.add_subparsers(dest="command", required=True)
    p_index = sub.add_parser("index", help="index table of a matrix loop")
    p_index.add_argument("--path", help="matrix-series file")
    p_index.add_argument("--period", type=float, help="base period tau")
    p_index.add_argument("--iterates", type=int, help="compute k = 1..K")
    _add_common(p_index)
    for name, helptext in (("solve", "find a periodic orbit"),
                           ("scan", "subharmonic scan over k"),
                           ("check", "hypothesis checks of the configured model")):
        _add_common(sub.add_parser(name, help=helptext))
    args = parser.parse_args(argv)

    data = {}
    if args.config:
        try:
            data = load_config(args.config)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 2
    data["mode"] = args.command
    if args.command == "index":
        sec = data.setdefault("index", {})
        if args.path:
            sec["path"] = args.path
        if args.period:
            sec["period"] = args.period
        if args.iterates:
            sec["iterates"] = args.iterates
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out:
        data["out"] = args.out
    try:
        cfg = validate_config(data, source=args.config or "<flags>")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.modes:
        cfg.modes_schedule = tuple(int(x) for x in args.modes.split(","))
    cfg.verbose = args.verbose
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
