"""Nonparametric tests, p-value combination and permutation dissimilarity.

All p-values returned here are clamped to [0, 1].
"""

from __future__ import annotations

import enum
import math
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import ndtr
from scipy.stats import rankdata

P_FLOOR = 1e-300


class TestResult(NamedTuple):
    statistic: float
    pvalue: float


# keep pytest from collecting the NamedTuple above
TestResult.__test__ = False


class ThreeDecision(enum.Enum):
    FAIL_TO_REJECT = "fail_to_reject"
    WITHIN_LESS = "within_less"  # decide E(within) < E(between)
    BETWEEN_LESS = "between_less"  # decide E(between) < E(within)


def is_permutation(p: Sequence) -> bool:
    return len(set(p)) == len(p)


def footrule_distance(p1: Sequence, p2: Sequence) -> int:
    """Spearman footrule: sum over items of |index in p1 - index in p2|."""
    if len(p1) != len(p2):
        raise ValueError("permutations must have equal length")
    pos2 = {item: k for k, item in enumerate(p2)}
    if len(pos2) != len(p2) or not is_permutation(p1) or set(p1) != set(pos2):
        raise ValueError("arguments must be permutations of the same items")
    return sum(abs(k - pos2[item]) for k, item in enumerate(p1))


def _norm_sf(z: float) -> float:
    return float(ndtr(-z))


def _exact_u_pvalue(ranks: np.ndarray, n1: int, u: float) -> float:
    """Two-sided exact p for U from the permutation null over the given ranks.

    Counts subsets of size n1 by doubled rank sum (dynamic programming), then
    sums the mass at least as far from the null mean as the observed U.
    """
    r2 = np.rint(2 * ranks).astype(np.int64)
    total = int(r2.sum())
    # counts[k][s]: number of k-subsets with doubled rank sum s
    counts = np.zeros((n1 + 1, total + 1))
    counts[0, 0] = 1.0
    for r in r2:
        counts[1:, r:] += counts[:-1, : total + 1 - r].copy()
    dist = counts[n1]
    sums = np.arange(total + 1) / 2.0
    us = sums - n1 * (n1 + 1) / 2.0
    mean = n1 * (len(ranks) - n1) / 2.0
    extreme = np.abs(us - mean) >= abs(u - mean) - 1e-9
    return float(min(1.0, dist[extreme].sum() / dist.sum()))


def mann_whitney_u(x, y) -> TestResult:
    """Two-sided Mann-Whitney U test; the statistic is U for ``x``.

    Uses the tie-corrected normal approximation with continuity correction.
    When the smaller sample has at most two observations the approximation is
    poor, so the exact permutation distribution of the rank sum is used.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    n1, n2 = len(x), len(y)
    if n1 < 1 or n2 < 1:
        raise ValueError("both samples need at least one observation")
    pooled = np.concatenate([x, y])
    ranks = rankdata(pooled)
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2.0)
    N = n1 + n2
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float((tie_counts**3 - tie_counts).sum())
    var = n1 * n2 / 12.0 * ((N + 1) - tie_term / (N * (N - 1))) if N > 1 else 0.0
    if var <= 0:
        raise ValueError("all pooled values are identical; U has zero variance")
    if min(n1, n2) <= 2:
        return TestResult(u, _exact_u_pvalue(ranks, n1, u))
    z = max(abs(u - n1 * n2 / 2.0) - 0.5, 0.0) / math.sqrt(var)
    return TestResult(u, min(1.0, 2.0 * _norm_sf(z)))


def three_decision_test(within, between, alpha: float) -> ThreeDecision:
    """Fail to reject, or reject and order the two means by sample mean."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    res = mann_whitney_u(within, between)
    if res.pvalue >= alpha:
        return ThreeDecision.FAIL_TO_REJECT
    if np.mean(within) < np.mean(between):
        return ThreeDecision.WITHIN_LESS
    return ThreeDecision.BETWEEN_LESS


def kolmogorov_sf(lam: float) -> float:
    """Survival function of the limiting Kolmogorov distribution."""
    if lam < 0.2:
        # complementary series: 1 - Q(0.2) < 1e-12
        return 1.0
    total, k = 0.0, 1
    while True:
        term = math.exp(-2.0 * k * k * lam * lam)
        total += term if k % 2 else -term
        if term < 1e-10 or k > 100_000:
            break
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


def ks_two_sample(x, y) -> TestResult:
    """Two-sided two-sample KS test with the asymptotic p-value."""
    x = np.sort(np.asarray(x, dtype=float).ravel())
    y = np.sort(np.asarray(y, dtype=float).ravel())
    n1, n2 = len(x), len(y)
    if n1 < 1 or n2 < 1:
        raise ValueError("both samples need at least one observation")
    grid = np.concatenate([x, y])
    cdf1 = np.searchsorted(x, grid, side="right") / n1
    cdf2 = np.searchsorted(y, grid, side="right") / n2
    D = float(np.max(np.abs(cdf1 - cdf2)))
    n_eff = n1 * n2 / (n1 + n2)
    return TestResult(D, kolmogorov_sf(math.sqrt(n_eff) * D))


def _check_even_dof(dof: int) -> None:
    if dof < 2 or dof % 2:
        raise ValueError(f"degrees of freedom must be a positive even integer, got {dof}")


def chi_square_sf(x: float, dof: int) -> float:
    """Closed-form chi-square survival function for even ``dof``."""
    _check_even_dof(dof)
    if x < 0:
        raise ValueError("x must be nonnegative")
    half = x / 2.0
    term, total = 1.0, 1.0
    for k in range(1, dof // 2):
        term *= half / k
        total += term
    return min(1.0, math.exp(-half) * total)


def chi_square_logsf(x: float, dof: int) -> float:
    """log of :func:`chi_square_sf`, stable far into the tail."""
    _check_even_dof(dof)
    if x < 0:
        raise ValueError("x must be nonnegative")
    half = x / 2.0
    if half == 0:
        return 0.0
    logs = [k * math.log(half) - math.lgamma(k + 1) for k in range(dof // 2)]
    top = max(logs)
    return min(0.0, -half + top + math.log(math.fsum(math.exp(v - top) for v in logs)))


def fishers_method(pvals) -> TestResult:
    """Combine independent p-values: T = -2 sum log p ~ chi2 with 2k dof."""
    pvals = [float(p) for p in pvals]
    if not pvals:
        raise ValueError("need at least one p-value")
    if any(not 0 <= p <= 1 for p in pvals):
        raise ValueError("p-values must lie in [0, 1]")
    T = -2.0 * math.fsum(math.log(max(p, P_FLOOR)) for p in pvals)
    return TestResult(T, chi_square_sf(T, 2 * len(pvals)))


def fishers_logp(pvals) -> float:
    """Log of the combined Fisher p-value (avoids underflow to 0)."""
    pvals = [float(p) for p in pvals]
    if not pvals:
        raise ValueError("need at least one p-value")
    T = -2.0 * math.fsum(math.log(max(p, P_FLOOR)) for p in pvals)
    return chi_square_logsf(T, 2 * len(pvals))


def _binom_cdf_half(k: int, n: int) -> float:
    return math.fsum(math.comb(n, i) for i in range(k + 1)) / 2.0**n


def mcnemar(truth, pred_a, pred_b) -> TestResult:
    """Paired comparison of two classifiers on their discordant cases.

    ``b`` counts cases only ``pred_a`` gets right, ``c`` those only ``pred_b``
    gets right. Below 25 discordant cases the exact binomial test is used
    (statistic = min(b, c)); otherwise the continuity-corrected chi-square.
    """
    truth, pred_a, pred_b = (np.asarray(v) for v in (truth, pred_a, pred_b))
    if not (len(truth) == len(pred_a) == len(pred_b)):
        raise ValueError("label vectors must have equal length")
    if len(truth) < 1:
        raise ValueError("need at least one case")
    ok_a, ok_b = pred_a == truth, pred_b == truth
    b = int(np.sum(ok_a & ~ok_b))
    c = int(np.sum(~ok_a & ok_b))
    n = b + c
    if n == 0:
        return TestResult(0.0, 1.0)
    if n < 25:
        return TestResult(float(min(b, c)), min(1.0, 2.0 * _binom_cdf_half(min(b, c), n)))
    stat = (abs(b - c) - 1.0) ** 2 / n
    # chi-square with one dof
    return TestResult(stat, math.erfc(math.sqrt(stat / 2.0)))


def logistic_sharpen(p: float, coeff: float, center: float = 0.5) -> float:
    """1 / (1 + exp(-coeff * (p - center)))."""
    z = coeff * (p - center)
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)
