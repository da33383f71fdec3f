"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error. Option values come from
flags, then a flat ``key=value`` config file (``--config``), then defaults.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from .classify import STRATEGIES, ClassifierConfig, classify_nodes
from .experiments import (
    N_GRID,
    POWER_GRID,
    SETTINGS,
    ExperimentConfig,
    power_curve,
    run_experiment,
    write_power_csv,
    write_results_csv,
)
from .io import DataError, ingest_and_symmetrize
from .model import DegenerateFitError, PartialLabels
from .stats import mcnemar

log = logging.getLogger("wsbm")

USAGE_ERROR = 1
DATA_ERROR = 2

DEFAULTS = {
    "simulate": {
        "setting": None,
        "replicates": 100,
        "seed": None,
        "out": None,
        "strategies": "ptr_qda,ordered",
        "n_grid": ",".join(map(str, N_GRID)),
        "train_fraction": 0.1,
        "alpha": 0.1,
        "smoothing": 1.0,
        "smoothing_r": 100.0,
        "logit_coeff": 10.0,
        "workers": 1,
    },
    "power": {
        "replicates": 500,
        "seed": None,
        "out": None,
        "alpha": 0.1,
        "grid": ",".join(map(str, POWER_GRID)),
        "n": 200,
    },
    "classify": {
        "edges": None,
        "labels": None,
        "strategy": None,
        "out": None,
        "seed": None,
        "holdout_fraction": 0.0,
        "alpha": 0.1,
        "smoothing": 1.0,
        "smoothing_r": 100.0,
        "logit_coeff": 10.0,
        "logit_sweep": None,
        "sweep_out": None,
    },
    "compare": {
        "edges": None,
        "labels": None,
        "strategy_a": None,
        "strategy_b": None,
        "seed": None,
        "out": None,
        "holdout_fraction": 0.5,
        "alpha": 0.1,
        "smoothing": 1.0,
        "smoothing_r": 100.0,
        "logit_coeff": 10.0,
    },
    "plotdata": {"in_path": None, "out": None},
}

REQUIRED = {
    "simulate": ("setting", "seed", "out"),
    "power": ("seed", "out"),
    "classify": ("edges", "labels", "strategy", "out"),
    "compare": ("edges", "labels", "strategy_a", "strategy_b", "seed"),
    "plotdata": ("in_path", "out"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(USAGE_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wsbm", description="Vertex classification on weighted SBM graphs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def opt(p, flag, **kw):
        p.add_argument(flag, default=None, **kw)

    def common(p):
        opt(p, "--config", help="flat key=value file; flags take precedence")

    def clf_opts(p):
        opt(p, "--alpha", type=float, help="gate level for ordered_gated")
        opt(p, "--smoothing", type=float, help="additive smoothing for ordered")
        opt(p, "--smoothing-r", type=float, help="upper smoothing r for ordered_dynamic")
        opt(p, "--logit-coeff", type=float, help="logistic coefficient for general_logit")

    p = sub.add_parser("simulate", help="run a simulation setting")
    common(p)
    opt(p, "--setting", help="|".join(s.replace("_", "-") for s in SETTINGS))
    opt(p, "--replicates", type=int)
    opt(p, "--seed", type=int)
    opt(p, "--out")
    opt(p, "--strategies", help="comma-separated strategy names")
    opt(p, "--n-grid", help="comma-separated node counts")
    opt(p, "--train-fraction", type=float)
    opt(p, "--workers", type=int)
    clf_opts(p)

    p = sub.add_parser("power", help="power curves of the two- and three-decision tests")
    common(p)
    opt(p, "--replicates", type=int)
    opt(p, "--seed", type=int)
    opt(p, "--out")
    opt(p, "--alpha", type=float)
    opt(p, "--grid", help="comma-separated mean differences")
    opt(p, "--n", type=int)

    p = sub.add_parser("classify", help="classify unlabeled nodes of an edge list")
    common(p)
    opt(p, "--edges")
    opt(p, "--labels")
    opt(p, "--strategy")
    opt(p, "--out")
    opt(p, "--seed", type=int)
    opt(p, "--holdout-fraction", type=float)
    opt(p, "--logit-sweep", help="comma-separated general_logit coefficients to sweep")
    opt(p, "--sweep-out")
    clf_opts(p)

    p = sub.add_parser("compare", help="paired holdout comparison with McNemar's test")
    common(p)
    opt(p, "--edges")
    opt(p, "--labels")
    opt(p, "--strategy-a")
    opt(p, "--strategy-b")
    opt(p, "--seed", type=int)
    opt(p, "--out")
    opt(p, "--holdout-fraction", type=float)
    clf_opts(p)

    p = sub.add_parser("plotdata", help="long-format plot rows from a results CSV")
    p.add_argument("--in", dest="in_path", default=None)
    opt(p, "--out")
    return parser


def read_config(path) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in text.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def resolve(command: str, args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags (highest precedence last)."""
    defaults = DEFAULTS[command]
    opts = dict(defaults)
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        for key, value in read_config(cfg_path).items():
            if key not in defaults:
                raise UsageError(f"unknown config key {key!r} for {command}")
            ref = defaults[key]
            try:
                opts[key] = type(ref)(value) if isinstance(ref, (int, float)) else value
            except ValueError:
                raise UsageError(f"bad value for {key}: {value!r}") from None
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    missing = [k for k in REQUIRED[command] if opts.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))
    return opts


def _floats(text) -> list[float]:
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _strategy(name: str) -> str:
    name = name.strip().replace("-", "_")
    if name not in STRATEGIES:
        raise UsageError(f"invalid strategy {name!r}; choose from {', '.join(STRATEGIES)}")
    return name


def _classifier_config(opts) -> ClassifierConfig:
    return ClassifierConfig(
        smoothing=float(opts["smoothing"]),
        alpha=float(opts["alpha"]),
        r=float(opts["smoothing_r"]),
        logit_coeff=float(opts["logit_coeff"]),
    )


def holdout_split(labels: PartialLabels, fraction: float, seed: int):
    """Withhold ``fraction`` of each class's labeled nodes, keeping >= 2 per class.

    Returns ``(training labels, held-out node indices, their true blocks)``.
    """
    if not 0 <= fraction < 1:
        raise UsageError("holdout fraction must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    train, held = dict(labels.assignments), []
    for u in range(labels.n_blocks):
        members = labels.members(u)
        k = min(int(round(fraction * len(members))), max(len(members) - 2, 0))
        for i in rng.choice(members, size=k, replace=False):
            held.append(int(i))
            del train[int(i)]
    held.sort()
    truth = np.array([labels.assignments[i] for i in held], dtype=np.int64)
    return PartialLabels(labels.n, labels.n_blocks, train), np.array(held, dtype=np.int64), truth


def _holdout_predictions(pred, held):
    lookup = dict(zip(pred.nodes.tolist(), pred.labels.tolist()))
    return np.array([lookup[i] for i in held], dtype=np.int64)


def _write_meta(path, items) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("key", "value"))
        for k, v in items:
            w.writerow((k, v))


def cmd_simulate(opts) -> int:
    setting = str(opts["setting"]).replace("-", "_")
    if setting not in SETTINGS:
        raise UsageError(f"unknown setting {opts['setting']!r}")
    strategies = tuple(_strategy(s) for s in str(opts["strategies"]).split(","))
    cfg = ExperimentConfig(
        setting=setting,
        n_grid=tuple(int(x) for x in _floats(opts["n_grid"])),
        train_fraction=float(opts["train_fraction"]),
        replicates=int(opts["replicates"]),
        strategies=strategies,
        classifier=_classifier_config(opts),
        seed=int(opts["seed"]),
        workers=int(opts["workers"]),
    )
    result = run_experiment(cfg)
    write_results_csv(result.rows, opts["out"])
    excluded = sum({r.n: r.excluded for r in result.rows}.values())
    if excluded:
        log.warning("%d replicate(s) excluded after retries", excluded)
    return 0


def cmd_power(opts) -> int:
    rows = power_curve(
        _floats(opts["grid"]),
        alpha=float(opts["alpha"]),
        replicates=int(opts["replicates"]),
        seed=int(opts["seed"]),
        n=int(opts["n"]),
    )
    write_power_csv(rows, opts["out"])
    return 0


def _load(opts):
    try:
        data = ingest_and_symmetrize(opts["edges"], opts["labels"])
    except FileNotFoundError as exc:
        raise UsageError(f"missing file: {exc.filename}") from None
    if data.labels.n_blocks < 2:
        raise DataError("label file must name at least two classes")
    return data


def cmd_classify(opts) -> int:
    strategy = _strategy(opts["strategy"])
    fraction = float(opts["holdout_fraction"])
    sweep = _floats(opts["logit_sweep"]) if opts["logit_sweep"] else None
    if (fraction > 0 or sweep) and opts["seed"] is None:
        raise UsageError("--seed is required with --holdout-fraction or --logit-sweep")
    if sweep and not fraction > 0:
        raise UsageError("--logit-sweep needs --holdout-fraction > 0")
    data = _load(opts)
    clf = _classifier_config(opts)
    seed = int(opts["seed"]) if opts["seed"] is not None else None
    if fraction > 0:
        train, held, truth = holdout_split(data.labels, fraction, seed)
    else:
        train, held, truth = data.labels, np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)

    pred = classify_nodes(data.graph, train, strategy, clf)
    names = data.class_names
    held_truth = dict(zip(held.tolist(), truth.tolist()))
    with open(opts["out"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", "predicted_block", "predicted_class", *[f"prior_{c}" for c in names], "holdout", "true_class"])
        for k, i in enumerate(pred.nodes):
            i = int(i)
            u = int(pred.labels[k])
            true = names[held_truth[i]] if i in held_truth else ""
            w.writerow([data.node_ids[i], u + 1, names[u], *[repr(float(p)) for p in pred.priors[k]], int(i in held_truth), true])

    meta = [("strategy", strategy), ("holdout_fraction", repr(fraction)), ("seed", "" if seed is None else seed)]
    meta += [("n_nodes", data.graph.n), ("n_edges", data.graph.n_edges), ("n_holdout", len(held))]
    if len(held):
        err = float(np.mean(_holdout_predictions(pred, held) != truth))
        meta.append(("holdout_error", repr(err)))
        print(f"holdout_error={err!r}")
    meta += [(f"class_{u + 1}", name) for u, name in enumerate(names)]
    _write_meta(str(opts["out"]) + ".meta.csv", meta)

    if sweep:
        base = _holdout_predictions(classify_nodes(data.graph, train, "ptr_qda", clf), held)
        base_err = float(np.mean(base != truth))
        sweep_out = opts["sweep_out"] or str(opts["out"]) + ".sweep.csv"
        with open(sweep_out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["logit_coeff", "holdout_error", "ptr_qda_error", "mcnemar_p"])
            for c in sweep:
                cfg = ClassifierConfig(clf.smoothing, clf.alpha, clf.r, c, clf.logit_center)
                got = _holdout_predictions(classify_nodes(data.graph, train, "general_logit", cfg), held)
                p = mcnemar(truth, got, base).pvalue
                w.writerow([repr(c), repr(float(np.mean(got != truth))), repr(base_err), repr(p)])
    return 0


def cmd_compare(opts) -> int:
    sa, sb = _strategy(opts["strategy_a"]), _strategy(opts["strategy_b"])
    fraction = float(opts["holdout_fraction"])
    if not fraction > 0:
        raise UsageError("compare needs --holdout-fraction > 0")
    data = _load(opts)
    clf = _classifier_config(opts)
    train, held, truth = holdout_split(data.labels, fraction, int(opts["seed"]))
    if not len(held):
        raise DataError("holdout split is empty; too few labeled nodes")
    pa = _holdout_predictions(classify_nodes(data.graph, train, sa, clf), held)
    pb = _holdout_predictions(classify_nodes(data.graph, train, sb, clf), held)
    res = mcnemar(truth, pa, pb)
    err_a, err_b = float(np.mean(pa != truth)), float(np.mean(pb != truth))
    print(f"error_a={err_a!r} error_b={err_b!r} mcnemar_stat={res.statistic!r} mcnemar_p={res.pvalue!r}")
    if opts["out"]:
        names = data.class_names
        with open(opts["out"], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node", "true_class", f"pred_{sa}", f"pred_{sb}"])
            for k, i in enumerate(held):
                w.writerow([data.node_ids[i], names[truth[k]], names[pa[k]], names[pb[k]]])
        _write_meta(
            str(opts["out"]) + ".meta.csv",
            [
                ("strategy_a", sa),
                ("strategy_b", sb),
                ("holdout_fraction", repr(fraction)),
                ("seed", opts["seed"]),
                ("n_holdout", len(held)),
                ("error_a", repr(err_a)),
                ("error_b", repr(err_b)),
                ("mcnemar_statistic", repr(res.statistic)),
                ("mcnemar_p", repr(res.pvalue)),
            ],
        )
    return 0


def plot_rows(rows: list[dict]) -> list[tuple]:
    """(x, series, y, ylo, yhi) rows from simulate, power or sweep CSV rows."""
    out = []
    if not rows:
        return out
    fields = rows[0].keys()
    if "mu_diff" in fields:
        for r in rows:
            for series in ("two", "three"):
                y, se = float(r[f"power_{series}"]), float(r[f"se_{series}"])
                out.append((r["mu_diff"], f"power_{series}", y, y - 1.96 * se, y + 1.96 * se))
    elif "logit_coeff" in fields:
        for r in rows:
            for series, key in (("general_logit", "holdout_error"), ("ptr_qda", "ptr_qda_error")):
                y = float(r[key])
                out.append((r["logit_coeff"], series, y, y, y))
    elif "mean_error" in fields:
        for r in rows:
            y, h = float(r["mean_error"]), float(r["ci_half_width"])
            out.append((r["n"], f"{r['setting']}/{r['strategy']}", y, y - h, y + h))
    else:
        raise DataError("unrecognized results CSV header")
    return out


def cmd_plotdata(opts) -> int:
    try:
        with open(opts["in_path"], newline="") as fh:
            rows = list(csv.DictReader(fh))
    except FileNotFoundError as exc:
        raise UsageError(f"missing file: {exc.filename}") from None
    try:
        out = plot_rows(rows)
    except (KeyError, ValueError) as exc:
        raise DataError(f"malformed results file: {exc}") from None
    with open(opts["out"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("x", "series", "y", "ylo", "yhi"))
        for x, series, y, lo, hi in out:
            w.writerow((x, series, repr(y), repr(lo), repr(hi)))
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "power": cmd_power,
    "classify": cmd_classify,
    "compare": cmd_compare,
    "plotdata": cmd_plotdata,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        opts = resolve(args.command, args)
        return COMMANDS[args.command](opts)
    except UsageError as exc:
        print(f"wsbm: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (DataError, DegenerateFitError) as exc:
        print(f"wsbm: data error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except OSError as exc:
        print(f"wsbm: error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
