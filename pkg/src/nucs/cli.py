"""Command-line interface: ``nucs select | simulate | evaluate``.

Exit codes: 0 ok, 1 configuration error, 2 data error, 3 numeric failure.
Diagnostics go to stderr; stdout carries results only.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import baselines
from ._util import atomic_write_text
from .data import load_dataset, load_selection, read_label_map, save_selection, write_report
from .difficulty import winsorized_class_difficulty
from .errors import ConfigError, DataError, NucsError
from .gaussian import GaussianTwoClassModel, optimal_constrained, sweep
from .pipeline import build_report, select_nucs
from .ridge import RidgeConfig, bias_metrics, fit_ridge, predict
from .window import WindowGrid

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

METHODS = ("nucs", "nucs-o", "random", "el2n-hard", "moderate", "ccs", "bws", "ccs-cp")
NEEDS_FEATURES = {"nucs", "bws", "moderate"}

SELECT_DEFAULTS = {
    "method": "nucs",
    "alpha": None,
    "gamma": 0.05,
    "step": 0.1,
    "lambda": 1.0,
    "beta": 0.0,
    "bins": 50,
    "k_fixed": None,
    "seed": 0,
    "labels": None,
    "scores": None,
    "features": None,
    "out": None,
    "report": None,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nucs", description="Non-uniform class-wise coreset selection")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("select", help="select a coreset and write selection CSV + report JSON")
    s.add_argument("--config", help="TOML file with defaults for any select option")
    s.add_argument("--labels")
    s.add_argument("--scores")
    s.add_argument("--features")
    s.add_argument("--method", choices=METHODS)
    s.add_argument("--alpha", type=float, help="pruning rate in (0, 1)")
    s.add_argument("--gamma", type=float, help="winsorization fraction (default 0.05)")
    s.add_argument("--step", type=float, help="window grid step (default 0.1)")
    s.add_argument("--lambda", dest="lambda_", type=float, help="ridge regularization (default 1)")
    s.add_argument("--beta", type=float, help="CCS hard cutoff rate (default 0)")
    s.add_argument("--bins", type=int, help="CCS strata (default 50)")
    s.add_argument("--k-fixed", dest="k_fixed", type=float, help="fixed window endpoint for nucs-o")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", help="selection CSV path")
    s.add_argument("--report", help="report JSON path")

    g = sub.add_parser("simulate", help="two-class Gaussian allocation sweep")
    g.add_argument("--mu0", type=float, required=True)
    g.add_argument("--mu1", type=float, required=True)
    g.add_argument("--sigma0", type=float, required=True)
    g.add_argument("--sigma1", type=float, required=True)
    g.add_argument("--f", type=float, required=True, help="global selection rate")
    g.add_argument("--points", type=int, default=21)
    g.add_argument("--mc-samples", type=int, default=100_000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="sweep CSV path")

    e = sub.add_parser("evaluate", help="worst-class accuracy and recall spread")
    e.add_argument("--selection", required=True, help="CSV of ids to evaluate on")
    e.add_argument("--predictions", required=True, help="CSV with header id,prediction")
    e.add_argument("--labels", required=True)
    return p


def _resolve_select_config(args) -> dict:
    cfg = dict(SELECT_DEFAULTS)
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"{path}: config file not found")
        try:
            raw = tomllib.loads(path.read_text(encoding="utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        for key, value in raw.items():
            key = key.replace("-", "_")
            if key not in cfg:
                raise ConfigError(f"{path}: unknown option {key!r}")
            cfg[key] = value
    flags = vars(args)
    for key in cfg:
        value = flags.get("lambda_" if key == "lambda" else key)
        if value is not None:
            cfg[key] = value

    for key in ("labels", "scores", "out", "report", "alpha"):
        if cfg[key] is None:
            raise ConfigError(f"missing required option --{key}")
    if cfg["method"] not in METHODS:
        raise ConfigError(f"unknown method {cfg['method']!r}")
    if not 0.0 < cfg["alpha"] < 1.0:
        raise ConfigError(f"--alpha must lie in (0, 1), got {cfg['alpha']}")
    if cfg["method"] == "nucs-o" and cfg["k_fixed"] is None:
        raise ConfigError("method nucs-o needs --k-fixed")
    if cfg["k_fixed"] is not None and cfg["method"] != "nucs-o":
        raise ConfigError("--k-fixed only applies to method nucs-o")
    if cfg["method"] in NEEDS_FEATURES and cfg["features"] is None:
        raise ConfigError(f"method {cfg['method']} needs --features")
    return cfg


def _selection_metrics(ds, sel, ridge_cfg) -> dict | None:
    """Ridge fit on the coreset, scored over the whole dataset."""
    if ds.features is None:
        return None
    idx = np.array([ds.id_index[i] for i in sel.selected_ids])
    w = fit_ridge(ds.features[idx], ds.labels[idx], ridge_cfg, n_classes=ds.n_classes)
    pred = predict(w, ds.features, ridge_cfg)
    wca, diff = bias_metrics(pred, ds.labels)
    return {"accuracy": float(np.mean(pred == ds.labels)), "wca": wca, "diff": diff}


def run_select(cfg: dict) -> int:
    ds = load_dataset(cfg["labels"], cfg["scores"], cfg["features"])
    method = cfg["method"]
    alpha, gamma, seed = cfg["alpha"], cfg["gamma"], cfg["seed"]
    grid = WindowGrid(cfg["step"])
    ridge_cfg = RidgeConfig(cfg["lambda"])

    proxy = None
    table = None
    if method in ("nucs", "nucs-o"):
        run = select_nucs(ds, alpha, gamma, grid, ridge_cfg, k_fixed=cfg["k_fixed"])
        sel, proxy, table = run.selection, run.proxy, run.table
    elif method == "bws":
        run = baselines.run_bws(ds, alpha, grid, ridge_cfg, gamma)
        sel, proxy, table = run.selection, run.proxy, run.table
    elif method == "random":
        sel = baselines.select_random(ds, alpha, seed)
    elif method == "el2n-hard":
        sel = baselines.select_hard(ds, alpha)
    elif method == "moderate":
        sel = baselines.select_moderate(ds, alpha)
    elif method == "ccs":
        sel = baselines.select_ccs(ds, alpha, cfg["beta"], cfg["bins"], seed)
    else:
        sel = baselines.select_ccs_cp(ds, alpha, cfg["beta"], cfg["bins"], seed)
    if table is None:
        table = winsorized_class_difficulty(ds, gamma)

    params = {k: v for k, v in cfg.items() if k not in ("out", "report")}
    report = build_report(ds, table, sel, proxy, params, _selection_metrics(ds, sel, ridge_cfg),
                          chosen_k=cfg["k_fixed"])
    save_selection(sel, cfg["out"])
    write_report(report, cfg["report"])
    return 0


def run_simulate(args) -> int:
    model = GaussianTwoClassModel(args.mu0, args.mu1, args.sigma0, args.sigma1, args.f)
    opt = optimal_constrained(model)
    rows = sweep(model, args.points, args.mc_samples, args.seed)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["f0", "t", "E_closed", "E_mc", "regime"], lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    atomic_write_text(args.out, buf.getvalue())
    print(json.dumps({"t": opt.t, "f0": opt.f0, "f1": opt.f1, "regime": opt.regime}))
    return 0


def run_evaluate(args) -> int:
    ids = load_selection(args.selection)
    preds = read_label_map(args.predictions, "prediction")
    truth = read_label_map(args.labels, "label")
    missing = [i for i in ids if i not in preds or i not in truth]
    if missing:
        raise DataError(f"ids without prediction or label: {missing[:5]}")
    classes = {}
    for i in ids:
        classes.setdefault(truth[i], len(classes))
    y = np.array([classes[truth[i]] for i in ids])
    p = np.array([classes.get(preds[i], -1) for i in ids])
    wca, diff = bias_metrics(p, y)
    print(json.dumps({"wca": wca, "diff": diff, "accuracy": float(np.mean(p == y))}))
    return 0


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        if args.command == "select":
            return run_select(_resolve_select_config(args))
        if args.command == "simulate":
            return run_simulate(args)
        return run_evaluate(args)
    except NucsError as exc:
        print(f"nucs: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"nucs: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
