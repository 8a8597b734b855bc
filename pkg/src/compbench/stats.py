"""Score normalization, human-rating aggregation, and rank correlation.

Correlation uses the tie-corrected tau (tau-b) and average-rank Spearman rho,
since 5-point human ratings are heavily tied. Both are computed by scipy
behind this module's surface; the test suite checks them against explicit
O(n^2)/definitional oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np
from scipy import stats as _scipy_stats


class StatsError(ValueError):
    """Undefined statistic or invalid input."""


@dataclass
class PairedScores:
    """Metric and human values aligned by (prompt_id, image_id)."""

    keys: list[tuple[str, str]]
    metric_values: list[float]
    human_values: list[float]

    def __post_init__(self):
        if not (len(self.keys) == len(self.metric_values) == len(self.human_values)):
            raise StatsError("keys, metric values, and human values must align")
        if len(self.keys) < 2:
            raise StatsError("need at least 2 paired samples")


@dataclass
class CorrelationResult:
    tau: float
    rho: float
    n: int

    def to_dict(self) -> dict[str, Any]:
        return {"tau": self.tau, "rho": self.rho, "n": self.n}


def normalize_minmax(values: Sequence[float]) -> list[float]:
    """Affine rescale to [0, 1]; constant input maps to all 0.5."""
    if len(values) == 0:
        raise StatsError("cannot normalize an empty sequence")
    lo, hi = min(values), max(values)
    if lo == hi:
        return [0.5] * len(values)
    span = hi - lo
    return [(v - lo) / span for v in values]


def aggregate_human(ratings: Iterable[int]) -> float:
    """Mean of 1-5 ratings divided by 5, landing in [0.2, 1.0]."""
    ratings = list(ratings)
    if not ratings:
        raise StatsError("need at least one rating")
    for r in ratings:
        if r not in (1, 2, 3, 4, 5):
            raise StatsError(f"rating out of range 1..5: {r!r}")
    return sum(ratings) / len(ratings) / 5.0


def kendall_tau(paired: PairedScores) -> float:
    """Tie-corrected Kendall tau (tau-b)."""
    x = np.asarray(paired.metric_values, dtype=float)
    y = np.asarray(paired.human_values, dtype=float)
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise StatsError("tau undefined when one side is all tied")
    tau = _scipy_stats.kendalltau(x, y, variant="b").statistic
    if math.isnan(tau):
        raise StatsError("tau undefined for this input")
    return float(tau)


def spearman_rho(paired: PairedScores) -> float:
    """Pearson correlation of average-ranked data."""
    x = np.asarray(paired.metric_values, dtype=float)
    y = np.asarray(paired.human_values, dtype=float)
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise StatsError("rho undefined when one side has zero rank variance")
    rho = _scipy_stats.spearmanr(x, y).statistic
    if math.isnan(rho):
        raise StatsError("rho undefined for this input")
    return float(rho)


def correlate_metric(
    metric_scores: dict[tuple[str, str], float],
    human_scores: dict[tuple[str, str], float],
) -> CorrelationResult:
    """Inner-join on (prompt_id, image_id), min-max the metric side, correlate."""
    shared = sorted(set(metric_scores) & set(human_scores))
    if len(shared) < 2:
        raise StatsError(f"need at least 2 joined pairs, got {len(shared)}")
    paired = PairedScores(
        keys=shared,
        metric_values=normalize_minmax([metric_scores[k] for k in shared]),
        human_values=[human_scores[k] for k in shared],
    )
    return CorrelationResult(
        tau=kendall_tau(paired), rho=spearman_rho(paired), n=len(shared)
    )
