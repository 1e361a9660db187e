"""Command-line front end.

Subcommands: ``validate``, ``run-ucb``, ``run-exp3``, ``lowerbound-report``,
``reproduce fig-adv``, ``reproduce fig-sto``, ``plot``.  Runs are configured
by a JSON file (instance, horizon, seeds, params) with a few flag overrides;
all outputs are CSV (SVG for ``plot``) written under ``$WALKBANDIT_OUTDIR``
(default: current directory).

Exit codes: 0 success, 1 configuration error, 2 instance validation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .chain import ChainInstance, ChainValidationError, validate
from .exp3 import Exp3Params, StandardExp3, TrajectoryExp3, default_params
from .harness import (adversarial_comparison, run_adversarial, run_stochastic,
                      stochastic_learning_curves, write_curves_csv, write_run_csv)
from .instances import BUILTIN_INSTANCES, builtin_instance
from .lowerbounds import report_rows
from .simulate import FixedLengths, rng_at
from .ucb import TrajectoryUcb


class ConfigError(ValueError):
    """Bad or missing run configuration."""


def _outdir() -> Path:
    return Path(os.environ.get("WALKBANDIT_OUTDIR", "."))


def _outpath(name: str | None, default: str) -> Path:
    path = Path(name) if name else Path(default)
    if not path.is_absolute():
        path = _outdir() / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _resolve_instance(spec: str, cfg: dict, seed: int = 0):
    """Builtin name or chain-file path -> (chain, default length process)."""
    if spec in BUILTIN_INSTANCES:
        return builtin_instance(
            spec, eps=float(cfg.get("eps", 0.0)), n_nodes=int(cfg.get("n_nodes", 4)),
            horizon=int(cfg.get("horizon", 1000)),
            family_index=int(cfg.get("family_index", 0)), seed=seed)
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"instance {spec!r} is neither a builtin "
                          f"{BUILTIN_INSTANCES} nor an existing file")
    chain, fixed = ChainInstance.load(path)
    return chain, FixedLengths(chain.n_nodes, fixed)


def _load_config(args) -> dict:
    cfg: dict = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    for key in ("instance", "horizon", "eps"):
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            cfg[key] = value
    if getattr(args, "seeds", None) is not None:
        cfg["seeds"] = args.seeds
    if "instance" not in cfg:
        raise ConfigError("no instance given (config key 'instance' or --instance)")
    cfg.setdefault("horizon", 1000)
    cfg.setdefault("seeds", [0])
    return cfg


def _seed_list(spec) -> list[int]:
    if isinstance(spec, int):
        return list(range(spec))
    if isinstance(spec, str):
        return [int(s) for s in spec.split(",") if s.strip()]
    return [int(s) for s in spec]


def _instance_label(spec: str) -> str:
    """Filename-safe tag for an instance: builtin name or the file's stem."""
    return spec if spec in BUILTIN_INSTANCES else Path(spec).stem


def _params_dict(cfg: dict) -> dict:
    params = cfg.get("params", "auto")
    if params == "auto":
        return {}
    if not isinstance(params, dict):
        raise ConfigError("'params' must be \"auto\" or an object")
    return params


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_validate(args) -> int:
    chain, _ = _resolve_instance(args.instance, {"eps": args.eps or 0.0})
    report = validate(chain)
    print(report.summary())
    return 0 if report.ok else 2


def _cmd_run_ucb(args) -> int:
    cfg = _load_config(args)
    params = _params_dict(cfg)
    horizon = int(cfg["horizon"])
    for seed in _seed_list(cfg["seeds"]):
        chain, process = _resolve_instance(cfg["instance"], cfg, seed=seed)
        policy = TrajectoryUcb(chain.n_nodes, float(params.get("rho", chain.rho)),
                               width=params.get("width", "scaled"))
        record = run_stochastic(chain, process, horizon, seed, policy,
                                track_error=True, log_vectors=True)
        out = _outpath(args.out, f"ucb_{_instance_label(cfg['instance'])}_seed{seed}.csv")
        if args.out and len(_seed_list(cfg["seeds"])) > 1:
            out = out.with_name(f"{out.stem}_seed{seed}{out.suffix}")
        write_run_csv(record, out)
        print(f"wrote {out}")
    return 0


def _cmd_run_exp3(args) -> int:
    cfg = _load_config(args)
    params = _params_dict(cfg)
    horizon = int(cfg["horizon"])
    variant = params.get("variant", "shifted")
    for seed in _seed_list(cfg["seeds"]):
        chain, process = _resolve_instance(cfg["instance"], cfg, seed=seed)
        rng = rng_at(seed, 1)
        if variant == "standard":
            policy = StandardExp3(chain.n_nodes,
                                  float(params.get("learning_rate", 0.001)), rng)
        else:
            if params:
                defaults = default_params(chain, horizon,
                                          params.get("fail_prob"))
                tuned = Exp3Params(
                    cap=int(params.get("cap", defaults.cap)),
                    learning_rate=float(params.get("learning_rate",
                                                   defaults.learning_rate)),
                    exploration_bias=float(params.get("exploration_bias",
                                                      defaults.exploration_bias)),
                    fail_prob=float(params.get("fail_prob", defaults.fail_prob)))
            else:
                tuned = default_params(chain, horizon)
            policy = TrajectoryExp3(chain.n_nodes, tuned, rng, variant=variant)
        record = run_adversarial(chain, process, horizon, seed, policy,
                                 log_vectors=True)
        out = _outpath(args.out, f"exp3_{_instance_label(cfg['instance'])}_seed{seed}.csv")
        if args.out and len(_seed_list(cfg["seeds"])) > 1:
            out = out.with_name(f"{out.stem}_seed{seed}{out.suffix}")
        write_run_csv(record, out)
        print(f"wrote {out}")
    return 0


def _cmd_lowerbound_report(args) -> int:
    grid = [float(s) for s in args.eps_grid.split(",") if s.strip()]
    rows = report_rows(grid, args.horizon)
    out = _outpath(args.out, "lowerbound_report.csv")
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        names = list(rows[0].keys())
        writer.writerow(names)
        for row in rows:
            writer.writerow([repr(float(row[name])) for name in names])
    print(f"wrote {out}")
    return 0


def _cmd_reproduce(args) -> int:
    seeds = _seed_list(args.seeds)
    if args.figure == "fig-adv":
        curves = adversarial_comparison(seeds=seeds, horizon=args.horizon,
                                        learning_rate=args.rate, n_jobs=args.jobs)
        out = _outpath(args.out, "fig_adv.csv")
    else:
        curves = stochastic_learning_curves(seeds=seeds, horizon=args.horizon,
                                            width=args.width, n_jobs=args.jobs)
        out = _outpath(args.out, "fig_sto.csv")
    write_curves_csv(out, curves)
    print(f"wrote {out}")
    return 0


def _cmd_plot(args) -> int:
    import matplotlib
    matplotlib.use("Agg")
    # Stable element ids + no timestamp, so repeated renders are identical.
    matplotlib.rcParams["svg.hashsalt"] = "walkbandit"
    import matplotlib.pyplot as plt

    with open(args.csv, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = {name: [] for name in header}
        for row in reader:
            for name, value in zip(header, row):
                data[name].append(float(value))
    columns = {name: np.array(vals) for name, vals in data.items()}
    x = columns.get(args.x)
    if x is None:
        raise ConfigError(f"no column {args.x!r} in {args.csv}")

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name in columns:
        if not name.endswith("_mean"):
            continue
        label = name[:-len("_mean")]
        ax.plot(x, columns[name], label=label)
        std = columns.get(f"{label}_std")
        if std is not None:
            ax.fill_between(x, columns[name] - std, columns[name] + std, alpha=0.25)
    ax.set_xlabel(args.x)
    ax.legend()
    fig.tight_layout()
    out = _outpath(args.out, Path(args.csv).stem + ".svg")
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walkbandit",
        description="Bandits with random-walk trajectory feedback: runs, "
                    "lower-bound reports, figure reproduction.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance and print the report")
    p.add_argument("instance", help=f"builtin {BUILTIN_INSTANCES} or chain-file path")
    p.add_argument("--eps", type=float, default=None)
    p.set_defaults(fn=_cmd_validate)

    for name, fn in (("run-ucb", _cmd_run_ucb), ("run-exp3", _cmd_run_exp3)):
        p = sub.add_parser(name, help=f"seeded {name.split('-')[1]} runs, one CSV per seed")
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--instance", help="builtin name or chain-file path")
        p.add_argument("--horizon", type=int, default=None)
        p.add_argument("--seeds", default=None,
                       help="comma-separated seed list (a count in config files)")
        p.add_argument("--eps", type=float, default=None)
        p.add_argument("--out", default=None)
        p.set_defaults(fn=fn)

    p = sub.add_parser("lowerbound-report", help="exact gap/KL/floor table as CSV")
    p.add_argument("--eps-grid", default="0.0001,0.001,0.01,0.1")
    p.add_argument("--horizon", type=int, default=10000)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_lowerbound_report)

    p = sub.add_parser("reproduce", help="rerun a figure's experiment")
    p.add_argument("figure", choices=["fig-adv", "fig-sto"])
    p.add_argument("--seeds", default="0,1,2,3,4,5,6,7,8,9",
                   help="comma-separated seed list")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--rate", type=float, default=0.001, help="fig-adv learning rate")
    p.add_argument("--width", default="scaled", choices=["scaled", "truncation"])
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_reproduce)

    p = sub.add_parser("plot", help="render a curves CSV to SVG (mean lines, std bands)")
    p.add_argument("csv")
    p.add_argument("--x", default="t")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_plot)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    if getattr(args, "figure", None) is not None and args.horizon is None:
        args.horizon = 30000 if args.figure == "fig-adv" else 20000
    try:
        return args.fn(args)
    except ChainValidationError as exc:
        print(f"instance validation failed: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
