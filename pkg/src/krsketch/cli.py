"""Command-line front end.

Subcommands: the three synthetic sweeps (``sweep-r``, ``sweep-n``,
``sweep-p``), the tomography benchmark (``eit``), two statistical
diagnostics (``embed-test``, ``zeta-test``), and figure rendering
(``plot``).  Option values resolve with increasing precedence: built-in
defaults, then a ``--config`` file (JSON object or ``key=value`` lines,
keys matching the flag names with underscores), then explicit flags.

Exit codes: 0 on success, 1 on usage or configuration errors, 2 on
numerical failures (solver breakdown or a failed diagnostic).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import eit as eit_mod
from . import embedding, figures, records, synthbench
from .lsq import DEFAULT_RCOND
from .sketches import STRATEGIES

_STRATEGY_CHOICES = ", ".join(STRATEGIES)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _p_int(text):
    return int(str(text))


def _p_float(text):
    return float(str(text))


def _p_str(text):
    return str(text)


def _p_bool(text):
    value = str(text).lower()
    if value in ("true", "1", "yes", "on"):
        return True
    if value in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _p_int_list(text):
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    values = tuple(int(v) for v in str(text).split(",") if v.strip())
    if not values:
        raise ValueError("expected a comma-separated list of integers")
    return values


def _p_strategies(text):
    if isinstance(text, (list, tuple)):
        names = tuple(str(v) for v in text)
    else:
        names = tuple(v.strip() for v in str(text).split(",") if v.strip())
    for name in names:
        if name not in STRATEGIES:
            raise ValueError(f"unknown strategy {name!r} (choices: {_STRATEGY_CHOICES})")
    if not names:
        raise ValueError("expected at least one strategy")
    return names


# Per-command option tables: dest, flag, parser, default, help.
_COMMON_SWEEP_OPTS = [
    ("strategy", "--strategy", _p_strategies, STRATEGIES,
     f"comma-separated strategies ({_STRATEGY_CHOICES})"),
    ("trials", "--trials", _p_int, 10, "trials per grid point"),
    ("seed", "--seed", _p_int, synthbench.DEFAULT_SEED, "master seed"),
    ("rcond", "--rcond", _p_float, DEFAULT_RCOND, "relative rank cutoff for solves"),
    ("jobs", "--jobs", _p_int, 1, "worker cap for parallel trials"),
    ("out", "--out", _p_str, None, "output path (defaults to <command>.csv)"),
    ("format", "--format", _p_str, "csv", "output format: csv or json"),
    ("timing", "--timing", _p_bool, False,
     "record measured wall times (off keeps reruns byte-identical)"),
    ("eps", "--eps", _p_float, 0.5, "embedding tolerance, recorded as metadata"),
    ("delta", "--delta", _p_float, 1e-3,
     "embedding failure probability, recorded as metadata"),
]

_OPTIONS = {
    "sweep-r": _COMMON_SWEEP_OPTS + [
        ("r_grid", "--r-grid", _p_int_list, synthbench.R_GRID_DEFAULT, "sketch sizes"),
        ("n1", "--n1", _p_int, 100, "first factor dimension"),
        ("n2", "--n2", _p_int, 100, "second factor dimension"),
        ("p", "--p", _p_int, 10, "unknown count"),
        ("noise", "--noise", _p_float, synthbench.DEFAULT_NOISE, "data noise level"),
    ],
    "sweep-n": _COMMON_SWEEP_OPTS + [
        ("n_grid", "--n-grid", _p_int_list, synthbench.N_GRID_DEFAULT,
         "factor dimensions (n1 = n2 = n)"),
        ("r", "--r", _p_int, 2209, "sketch size"),
        ("p", "--p", _p_int, 10, "unknown count"),
        ("noise", "--noise", _p_float, synthbench.DEFAULT_NOISE, "data noise level"),
    ],
    "sweep-p": _COMMON_SWEEP_OPTS + [
        ("p_grid", "--p-grid", _p_int_list, synthbench.P_GRID_DEFAULT, "unknown counts"),
        ("r", "--r", _p_int, 4096, "sketch size"),
        ("n1", "--n1", _p_int, 100, "first factor dimension"),
        ("n2", "--n2", _p_int, 100, "second factor dimension"),
        ("noise", "--noise", _p_float, synthbench.DEFAULT_NOISE, "data noise level"),
    ],
    "eit": _COMMON_SWEEP_OPTS + [
        ("r_grid", "--r-grid", _p_int_list, eit_mod.EIT_R_GRID_DEFAULT, "sketch sizes"),
        ("nx", "--nx", _p_int, eit_mod.DEFAULT_NX, "cells per side"),
        ("sigma_star", "--sigma-star", _p_float, eit_mod.DEFAULT_SIGMA_STAR,
         "background conductivity"),
        ("noise", "--noise", _p_float, eit_mod.DEFAULT_NOISE_SD, "data noise sd"),
        ("quadrature", "--quadrature", _p_str, "one_point",
         "cell rule: one_point or four_point"),
        ("sources", "--sources", _p_int, None,
         "boundary source count (default: every boundary node)"),
        ("grids", "--grids", _p_bool, True,
         "write reconstruction grids for the largest r"),
    ],
    "embed-test": [
        ("eps", "--eps", _p_float, 0.5, "embedding tolerance"),
        ("delta", "--delta", _p_float, 0.1, "embedding failure probability"),
        ("p", "--p", _p_int, 4, "factor range dimension"),
        ("n1", "--n1", _p_int, 8, "first factor dimension"),
        ("n2", "--n2", _p_int, 8, "second factor dimension"),
        ("seeds", "--seeds", _p_int, 100, "independent sketch draws per strategy"),
        ("samples", "--samples", _p_int, 2000, "sphere samples per distortion estimate"),
        ("seed", "--seed", _p_int, synthbench.DEFAULT_SEED, "master seed"),
        ("out", "--out", _p_str, None, "optional JSON report path"),
    ],
    "zeta-test": [
        ("p", "--p", _p_int, 16, "spectrum length"),
        ("draws", "--draws", _p_int, 1_000_000, "Monte Carlo draws per spectrum"),
        ("spectra", "--spectra", _p_int, 3, "random spectra to test"),
        ("seed", "--seed", _p_int, synthbench.DEFAULT_SEED, "master seed"),
        ("out", "--out", _p_str, None, "optional JSON report path"),
    ],
    "plot": [
        ("input", "--input", None, None, "input CSV (repeat for panel grids)"),
        ("kind", "--kind", _p_str, None, f"one of {', '.join(figures.FIGURE_KINDS)}"),
        ("out", "--out", _p_str, None, "output basename (writes .png and .svg)"),
        ("strategy", "--strategy", _p_strategies, None, "strategy subset to draw"),
        ("scale", "--scale", _p_str, None, "axis scale: log-log or linear"),
        ("medians", "--medians", _p_str, None,
         "stored medians JSON to verify against (default: <input>.medians.json)"),
    ],
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="krsketch", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command")
    for command, opts in _OPTIONS.items():
        cmd_parser = sub.add_parser(command)
        cmd_parser.add_argument("--config", default=None, help="config file path")
        for dest, flag, _, _, help_text in opts:
            if command == "plot" and dest == "input":
                cmd_parser.add_argument(flag, dest=dest, action="append",
                                        default=None, help=help_text)
            elif flag in ("--timing", "--grids"):
                cmd_parser.add_argument(flag, dest=dest, nargs="?", const="true",
                                        default=None, help=help_text)
            else:
                cmd_parser.add_argument(flag, dest=dest, default=None, help=help_text)
    return parser


def _load_config_file(path: str) -> dict:
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        loaded = json.loads(text)
        if not isinstance(loaded, dict):
            raise ValueError("config JSON must be an object")
        return loaded
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno} is not key=value: {line!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _resolve_config(command: str, args: argparse.Namespace) -> dict:
    """defaults < config file < flags, with every layer type-checked."""
    table = _OPTIONS[command]
    file_values = _load_config_file(args.config) if args.config else {}
    known = {dest for dest, *_ in table}
    for key in file_values:
        if key not in known:
            raise ValueError(f"unknown config key {key!r} for {command}")
    resolved = {}
    for dest, _, parse, default, _ in table:
        value = getattr(args, dest, None)
        if value is None:
            value = file_values.get(dest, default)
        if value is not None and parse is not None:
            value = parse(value)
        resolved[dest] = value
    return resolved


def _write_records(cfg: dict, kind: str, recs: list, metadata: dict, out_default: str):
    out = cfg.get("out") or out_default
    fmt = cfg.get("format", "csv")
    if fmt == "csv":
        records.write_sweep_csv(out, recs, kind, include_timing=cfg.get("timing", False))
    elif fmt == "json":
        rows = []
        for rec in recs:
            row = asdict(rec)
            if not cfg.get("timing", False):
                row["wall_time_ms"] = 0.0
            if kind != "eit_sweep":
                for extra in records.EIT_EXTRA_COLUMNS:
                    row.pop(extra, None)
            rows.append(row)
        payload = {"schema": records.schema_line(kind).lstrip("# "), "records": rows}
        records._atomic_write_text(out, json.dumps(payload, indent=2) + "\n")
    else:
        raise _UsageError(f"unknown format {fmt!r}")
    records.write_medians_json(records.medians_json_path(out), recs, kind, metadata)
    print(f"wrote {len(recs)} records to {out}")
    return out


def _sweep_config(cfg: dict) -> synthbench.SweepConfig:
    return synthbench.SweepConfig(
        strategies=cfg["strategy"],
        trials=cfg["trials"],
        master_seed=cfg["seed"],
        noise_level=cfg.get("noise", synthbench.DEFAULT_NOISE),
        rcond=cfg["rcond"],
        jobs=cfg["jobs"],
    )


def _metadata(cfg: dict, **extra) -> dict:
    meta = {
        "eps": cfg.get("eps"),
        "delta": cfg.get("delta"),
        "seed": cfg.get("seed"),
        "trials": cfg.get("trials"),
        "strategies": list(cfg.get("strategy", ())),
    }
    meta.update(extra)
    return meta


def _cmd_sweep_r(cfg: dict) -> int:
    recs = synthbench.sweep_r(cfg["r_grid"], cfg["n1"], cfg["n2"], cfg["p"],
                              _sweep_config(cfg))
    _write_records(cfg, "sweep_r", recs, _metadata(cfg, n1=cfg["n1"], n2=cfg["n2"],
                   p=cfg["p"], noise=cfg["noise"]), "sweep_r.csv")
    return 0


def _cmd_sweep_n(cfg: dict) -> int:
    recs = synthbench.sweep_n(cfg["n_grid"], cfg["r"], cfg["p"], _sweep_config(cfg))
    _write_records(cfg, "sweep_n", recs, _metadata(cfg, r=cfg["r"], p=cfg["p"],
                   noise=cfg["noise"]), "sweep_n.csv")
    return 0


def _cmd_sweep_p(cfg: dict) -> int:
    recs = synthbench.sweep_p(cfg["p_grid"], cfg["r"], cfg["n1"], cfg["n2"],
                              _sweep_config(cfg))
    _write_records(cfg, "sweep_p", recs, _metadata(cfg, r=cfg["r"], n1=cfg["n1"],
                   n2=cfg["n2"], noise=cfg["noise"]), "sweep_p.csv")
    return 0


def _cmd_eit(cfg: dict) -> int:
    system = eit_mod.make_eit_problem(
        nx=cfg["nx"],
        sigma_star=cfg["sigma_star"],
        noise_sd=cfg["noise"],
        seed=cfg["seed"],
        quadrature=cfg["quadrature"],
        source_count=cfg["sources"],
    )
    sweep_cfg = _sweep_config(cfg)
    recs = eit_mod.sweep_eit(system, cfg["r_grid"], sweep_cfg)
    out = _write_records(cfg, "eit_sweep", recs, _metadata(cfg, nx=cfg["nx"],
                         sigma_star=cfg["sigma_star"], noise=cfg["noise"],
                         quadrature=cfg["quadrature"]), "eit_sweep.csv")
    if cfg["grids"]:
        stem = str(out)
        stem = stem[: -len(Path(stem).suffix)] if Path(stem).suffix else stem
        nx = system.mesh.nx
        records.write_grid_csv(f"{stem}.grid_truth.csv", system.sigma_true, nx, "truth")
        final_r = max(cfg["r_grid"])
        for strategy in sweep_cfg.strategies:
            sigma_hat = eit_mod.median_trial_reconstruction(
                system, strategy, final_r, sweep_cfg
            )
            records.write_grid_csv(
                f"{stem}.grid_{strategy.replace('-', '_')}.csv", sigma_hat, nx, strategy
            )
        print(f"wrote reconstruction grids for r={final_r}")
    return 0


def _report_check(results: list, name: str, ok: bool, detail: str) -> None:
    results.append({"check": name, "ok": bool(ok), "detail": detail})
    print(f"[{'pass' if ok else 'FAIL'}] {name}: {detail}")


def _finish_checks(results: list, out: str | None) -> int:
    if out:
        payload = {"checks": results, "ok": all(r["ok"] for r in results)}
        records._atomic_write_text(out, json.dumps(payload, indent=2) + "\n")
    return 0 if all(r["ok"] for r in results) else 2


def _cmd_embed_test(cfg: dict) -> int:
    eps, delta, p = cfg["eps"], cfg["delta"], cfg["p"]
    n1, n2 = cfg["n1"], cfg["n2"]
    results: list = []

    rng = np.random.default_rng(cfg["seed"])
    basis = embedding.RangeBasis(
        np.linalg.qr(rng.standard_normal((n1, p)))[0],
        np.linalg.qr(rng.standard_normal((n2, p)))[0],
    )
    from .sketches import gen_dense_gaussian

    probe = gen_dense_gaussian(
        embedding.embed_dim_gaussian(eps, delta, p, embedding.CAL_C0["dense-gaussian"]),
        n1 * n2,
        cfg["seed"],
    )
    exact = embedding.sup_distortion_exact(probe, basis)
    sampled = embedding.sup_distortion_sampled(probe, basis, cfg["samples"], cfg["seed"])
    _report_check(
        results,
        "sampled-sup-brackets-exact",
        sampled <= exact + 1e-12 and sampled >= 0.5 * exact,
        f"sampled={sampled:.4f} exact={exact:.4f}",
    )
    nested_small = embedding.sup_distortion_sampled(probe, basis, 50, cfg["seed"])
    _report_check(
        results,
        "sampled-sup-monotone-in-samples",
        nested_small <= sampled + 1e-15,
        f"50 samples {nested_small:.4f} <= {cfg['samples']} samples {sampled:.4f}",
    )

    for strategy in STRATEGIES:
        rows = embedding.embed_dim_gaussian(eps, delta, p, embedding.CAL_C0[strategy])
        if strategy == "case1":
            kwargs = {"r1": rows, "r2": rows}
            label = f"r1=r2={rows}"
        else:
            kwargs = {"r": rows}
            label = f"r={rows}"
        rate = embedding.embedding_success_rate(
            strategy, eps, n1, n2, p, cfg["seeds"], cfg["samples"], cfg["seed"], **kwargs
        )
        _report_check(
            results,
            f"success-rate-{strategy}",
            rate >= 1.0 - delta,
            f"{label}: {rate:.3f} of {cfg['seeds']} draws within eps={eps}",
        )
    return _finish_checks(results, cfg["out"])


def _cmd_zeta_test(cfg: dict) -> int:
    p, draws, seed = cfg["p"], cfg["draws"], cfg["seed"]
    results: list = []

    stats = embedding.zeta_sample(embedding.SigmaSpectrum.product_normal(p), draws, seed)
    se2 = math.sqrt(max(stats.var_zeta2, 1e-30) / draws)
    se4 = math.sqrt(max(stats.var_zeta4, 1e-30) / draws)
    _report_check(results, "product-normal-second-moment",
                  abs(stats.m2 - 1.0) <= 4 * se2,
                  f"m2={stats.m2:.5f} (band 1 +/- {4 * se2:.5f})")
    _report_check(results, "product-normal-fourth-moment-equality",
                  abs(stats.m4 - 9.0) <= 4 * se4,
                  f"m4={stats.m4:.4f} (band 9 +/- {4 * se4:.4f})")

    for k in range(cfg["spectra"]):
        spectrum = embedding.SigmaSpectrum.random(p, seed + 100 + k)
        stats = embedding.zeta_sample(spectrum, draws, seed + 200 + k)
        se2 = math.sqrt(max(stats.var_zeta2, 1e-30) / draws)
        se4 = math.sqrt(max(stats.var_zeta4, 1e-30) / draws)
        _report_check(results, f"spectrum-{k}-second-moment",
                      abs(stats.m2 - 1.0) <= 4 * se2,
                      f"m2={stats.m2:.5f} (band 1 +/- {4 * se2:.5f})")
        _report_check(results, f"spectrum-{k}-fourth-moment-bound",
                      stats.m4 <= 9.0 + 4 * se4,
                      f"m4={stats.m4:.4f} <= 9 + {4 * se4:.4f}")
        _report_check(results, f"spectrum-{k}-variance-bound",
                      stats.var_zeta2 <= 8.0 + 4 * se4,
                      f"var={stats.var_zeta2:.4f} <= 8 + {4 * se4:.4f}")
        tails_ok = True
        details = []
        for t, frac in zip(stats.thresholds, stats.tail_fracs):
            bound = embedding.zeta_tail_bound(float(t), p)
            slack = 4 * math.sqrt(max(bound, frac) / draws) + 5.0 / draws
            if bound < 1.0:
                tails_ok = tails_ok and frac <= bound + slack
            details.append(f"t={t:.2f}: {frac:.2e} vs {bound:.2e}")
        _report_check(results, f"spectrum-{k}-tail-bounds", tails_ok, "; ".join(details))
    return _finish_checks(results, cfg["out"])


def _cmd_plot(cfg: dict) -> int:
    if not cfg["input"]:
        raise _UsageError("plot needs at least one --input")
    if not cfg["kind"]:
        raise _UsageError("plot needs --kind")
    out = cfg["out"] or f"{cfg['kind']}"
    medians = cfg["medians"]
    if medians is None and cfg["kind"] != "eit_panels":
        sidecar = records.medians_json_path(cfg["input"][0])
        if sidecar.exists():
            medians = str(sidecar)
    spec = figures.FigureSpec(
        kind=cfg["kind"],
        inputs=tuple(cfg["input"]),
        out_base=out,
        strategies=cfg["strategy"],
        scale=cfg["scale"],
        medians=medians,
    )
    paths = figures.render(spec)
    print("wrote " + " and ".join(str(p) for p in paths))
    return 0


_COMMANDS = {
    "sweep-r": _cmd_sweep_r,
    "sweep-n": _cmd_sweep_n,
    "sweep-p": _cmd_sweep_p,
    "eit": _cmd_eit,
    "embed-test": _cmd_embed_test,
    "zeta-test": _cmd_zeta_test,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage()
            return 1
        cfg = _resolve_config(args.command, args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](cfg)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # solver or data failure: distinct exit code
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
