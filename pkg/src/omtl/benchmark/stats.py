"""Friedman rank test with post-hoc least-significant-difference comparisons."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import InvalidInputError


@dataclass(frozen=True)
class FriedmanResult:
    statistic: float
    p_value: float
    mean_ranks: np.ndarray
    critical_difference: float
    significant: np.ndarray  # (M, M) bool, symmetric
    victories: np.ndarray
    defeats: np.ndarray


def friedman_fisher(table, alpha: float = 0.05, lower_is_better: bool = True) -> FriedmanResult:
    """Friedman test over a ``(k datasets, M methods)`` score table.

    Ranks are taken within each row (1 = best, ties averaged).  The statistic
    is the tie-corrected chi-square form with ``M - 1`` degrees of freedom.

    Pairwise calls use the least significant difference on mean ranks,
    ``z_{1-alpha/2} sqrt(M (M + 1) / (6 k))``, and are only made when the
    omnibus test rejects at ``alpha``.  A significant pair counts as a victory
    for the method with the lower mean rank and a defeat for the other.
    """
    X = np.asarray(table, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2 or X.shape[1] < 2:
        raise InvalidInputError(f"need at least 2 datasets and 2 methods, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("score table has non-finite entries")
    k, M = X.shape
    ranks = stats.rankdata(X if lower_is_better else -X, axis=1)
    rank_sums = ranks.sum(axis=0)
    mean_ranks = rank_sums / k
    A1 = float(np.sum(ranks**2))
    C1 = k * M * (M + 1) ** 2 / 4.0
    spread = float(np.sum((rank_sums - k * (M + 1) / 2.0) ** 2))
    if A1 - C1 <= 1e-12 * C1:
        statistic, p_value = 0.0, 1.0
    else:
        statistic = (M - 1) * spread / (A1 - C1)
        p_value = float(stats.chi2.sf(statistic, M - 1))
    cd = float(stats.norm.ppf(1 - alpha / 2) * np.sqrt(M * (M + 1) / (6.0 * k)))
    diff = np.abs(mean_ranks[:, None] - mean_ranks[None, :])
    significant = (diff > cd) & (p_value < alpha)
    better = mean_ranks[:, None] < mean_ranks[None, :]
    victories = np.sum(significant & better, axis=1)
    defeats = np.sum(significant & ~better & (diff > 0), axis=1)
    return FriedmanResult(float(statistic), p_value, mean_ranks, cd, significant, victories, defeats)
