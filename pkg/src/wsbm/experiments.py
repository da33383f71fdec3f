"""Monte Carlo harness for the simulation studies."""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .classify import ClassifierConfig, classify_nodes, collect_block_weights, pooled_gate_samples
from .model import BlockModel, DegenerateFitError, Normal, Poisson, rank_one_b, sample_sbm
from .stats import ThreeDecision, three_decision_test

log = logging.getLogger(__name__)

N_GRID = (150, 200, 250, 300, 350, 400, 450, 500)
SETTINGS = ("1", "2", "3", "4", "poisson_diff", "poisson_same")
POWER_GRID = (-6.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 6.0)
MAX_RETRIES = 3
Z95 = 1.959963984540054


def _gaussian_F(mu_within, sd_within, mu_between, sd_between):
    w = Normal(mu_within, sd_within)
    b = Normal(mu_between, sd_between)
    return ((w, b), (b, w))


def builtin_setting(setting: str, mu: float = 5.0) -> tuple[BlockModel, tuple]:
    """Two-block rank-one model of a named simulation setting plus its n grid.

    Settings 1-4 cross different/same means (gap 2) with different (4 vs 9)
    or same (9) scales; ``mu`` is the within-block mean.
    """
    setting = str(setting).replace("-", "_")
    B = rank_one_b(0.52, 0.48)
    pi = (0.5, 0.5)
    gauss = {
        "1": (mu, 4.0, mu + 2.0, 9.0),
        "2": (mu, 9.0, mu + 2.0, 9.0),
        "3": (mu, 4.0, mu, 9.0),
        "4": (mu, 9.0, mu, 9.0),
    }
    if setting in gauss:
        F = _gaussian_F(*gauss[setting])
    elif setting == "poisson_diff":
        F = ((Poisson(3.0), Poisson(6.0)), (Poisson(6.0), Poisson(3.0)))
    elif setting == "poisson_same":
        F = ((Poisson(3.0), Poisson(3.0)), (Poisson(3.0), Poisson(3.0)))
    else:
        raise ValueError(f"unknown setting {setting!r}; expected one of {SETTINGS}")
    return BlockModel(pi, B, F), N_GRID


def split_counts(total: int, K: int) -> list[int]:
    """Even split of ``total`` over K blocks, remainder to the first blocks."""
    base, extra = divmod(int(total), K)
    return [base + (1 if u < extra else 0) for u in range(K)]


def replicate_seed(master: int, *counters: int) -> int:
    """Counter-based child seed, independent across counter tuples."""
    ss = np.random.SeedSequence(entropy=master, spawn_key=tuple(int(c) for c in counters))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    setting: Union[str, BlockModel] = "1"
    n_grid: Sequence[int] = N_GRID
    train_fraction: float = 0.1
    replicates: int = 100
    strategies: Sequence[str] = ("ptr_qda", "ordered")
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not len(self.n_grid):
            raise ValueError("n grid must be nonempty")
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        if not 0 < self.train_fraction < 1:
            raise ValueError("training fraction must lie in (0, 1)")

    @property
    def setting_name(self) -> str:
        return self.setting if isinstance(self.setting, str) else "custom"

    def model(self) -> BlockModel:
        if isinstance(self.setting, BlockModel):
            return self.setting
        return builtin_setting(self.setting)[0]


@dataclass(frozen=True)
class ResultRow:
    setting: str
    strategy: str
    n: int
    mean_error: float
    ci_half_width: float
    replicates: int
    excluded: int = 0


@dataclass(frozen=True)
class ExperimentResult:
    rows: tuple
    # per (strategy, n): per-replicate error rates in replicate order
    errors: dict

    def row(self, strategy: str, n: int) -> ResultRow:
        for r in self.rows:
            if r.strategy == strategy and r.n == n:
                return r
        raise KeyError((strategy, n))

    def to_csv(self, path) -> None:
        write_results_csv(self.rows, path)


CSV_FIELDS = ("setting", "strategy", "n", "mean_error", "ci_half_width", "replicates")


def write_results_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in rows:
            w.writerow([r.setting, r.strategy, r.n, repr(r.mean_error), repr(r.ci_half_width), r.replicates])


def block_and_train_counts(model: BlockModel, n: int, train_fraction: float):
    """Block sizes from the priors (largest remainder) and an even training split."""
    K = model.K
    if np.allclose(model.pi, 1.0 / K):
        blocks = split_counts(n, K)
    else:
        raw = model.pi * n
        blocks = np.floor(raw).astype(int)
        order = np.argsort(-(raw - blocks), kind="stable")
        blocks[order[: n - blocks.sum()]] += 1
        blocks = blocks.tolist()
    train = split_counts(int(round(n * train_fraction)), K)
    return blocks, train


def _run_replicate(args):
    """One replicate: every strategy on the same graph and label split."""
    model, n, train_fraction, strategies, clf, master, n_index, rep = args
    blocks, train = block_and_train_counts(model, n, train_fraction)
    for attempt in range(MAX_RETRIES + 1):
        seed = replicate_seed(master, n_index, rep, attempt)
        graph, labels, truth = sample_sbm(model, blocks, train, seed)
        try:
            errs = []
            for s in strategies:
                pred = classify_nodes(graph, labels, s, clf)
                errs.append(float(np.mean(pred.labels != truth[pred.nodes])))
            return errs, attempt
        except DegenerateFitError as exc:
            log.debug("replicate %d (n=%d) attempt %d failed: %s", rep, n, attempt, exc)
    return None, MAX_RETRIES


def _summarize(errs: list[float]) -> tuple[float, float]:
    m = len(errs)
    if m == 0:
        return math.nan, math.nan
    mean = math.fsum(errs) / m
    if m == 1:
        return mean, 0.0
    sd = math.sqrt(math.fsum((e - mean) ** 2 for e in errs) / (m - 1))
    return mean, Z95 * sd / math.sqrt(m)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Misclassification rate of each strategy across the n grid.

    Replicates may run in worker processes; results are reduced in
    replicate order so output depends only on the config.
    """
    model = cfg.model()
    jobs = [
        (model, int(n), cfg.train_fraction, tuple(cfg.strategies), cfg.classifier, cfg.seed, k, rep)
        for k, n in enumerate(cfg.n_grid)
        for rep in range(cfg.replicates)
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            outcomes = list(pool.map(_run_replicate, jobs, chunksize=max(1, len(jobs) // (8 * cfg.workers))))
    else:
        outcomes = [_run_replicate(j) for j in jobs]

    rows, errors = [], {}
    for k, n in enumerate(cfg.n_grid):
        chunk = outcomes[k * cfg.replicates : (k + 1) * cfg.replicates]
        ok = [errs for errs, _ in chunk if errs is not None]
        excluded = cfg.replicates - len(ok)
        if excluded:
            log.warning("n=%d: %d replicate(s) excluded after retries", n, excluded)
        for s_idx, s in enumerate(cfg.strategies):
            per_rep = [errs[s_idx] for errs in ok]
            errors[(s, int(n))] = per_rep
            mean, half = _summarize(per_rep)
            rows.append(ResultRow(cfg.setting_name, s, int(n), mean, half, len(per_rep), excluded))
    return ExperimentResult(tuple(rows), errors)


@dataclass(frozen=True)
class PowerRow:
    mu_diff: float
    power_two: float
    power_three: float
    se_two: float
    se_three: float
    replicates: int


def _power_model(mu_diff: float, mu: float, sd: float) -> BlockModel:
    F = _gaussian_F(mu, sd, mu + mu_diff, sd)
    return BlockModel((0.5, 0.5), rank_one_b(0.52, 0.48), F)


def power_curve(
    mu_diffs: Sequence[float] = POWER_GRID,
    alpha: float = 0.1,
    replicates: int = 500,
    seed: int = 0,
    n: int = 200,
    mu: float = 5.0,
    sd: float = 9.0,
) -> list[PowerRow]:
    """Power of the two- and three-decision MWU tests on training-edge weights.

    ``mu_diff`` is (between-block mean) - (within-block mean). Two-decision
    power is the rejection rate; three-decision power counts rejections that
    also order the means correctly. Replicate seeds depend only on the
    replicate index, so grid points share random numbers.
    """
    if not len(mu_diffs):
        raise ValueError("mu_diff grid must be nonempty")
    blocks = split_counts(n, 2)
    train = split_counts(n // 10, 2)
    out = []
    for diff in mu_diffs:
        model = _power_model(float(diff), mu, sd)
        rej = correct = used = 0
        for rep in range(replicates):
            graph, labels, _ = sample_sbm(model, blocks, train, replicate_seed(seed, rep))
            within, between = pooled_gate_samples(collect_block_weights(graph, labels))
            if len(within) == 0 or len(between) == 0:
                continue
            used += 1
            decision = three_decision_test(within, between, alpha)
            if decision is ThreeDecision.FAIL_TO_REJECT:
                continue
            rej += 1
            if (diff > 0 and decision is ThreeDecision.WITHIN_LESS) or (
                diff < 0 and decision is ThreeDecision.BETWEEN_LESS
            ):
                correct += 1
        p2, p3 = rej / used, correct / used
        out.append(
            PowerRow(
                float(diff),
                p2,
                p3,
                math.sqrt(p2 * (1 - p2) / used),
                math.sqrt(p3 * (1 - p3) / used),
                used,
            )
        )
    return out


POWER_FIELDS = ("mu_diff", "power_two", "power_three", "se_two", "se_three", "replicates")


def write_power_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(POWER_FIELDS)
        for r in rows:
            w.writerow([repr(r.mu_diff), repr(r.power_two), repr(r.power_three), repr(r.se_two), repr(r.se_three), r.replicates])
