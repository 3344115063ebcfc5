"""Friedman omnibus test and Nemenyi post-hoc critical differences.

Scores are ranked within each block (fold), 1 = best under the table's
direction, ties sharing averaged ranks. The chi-squared statistic uses
the mean-rank form

    chi2 = 12 N / (k (k+1)) * (sum_j R_j^2 - k (k+1)^2 / 4)

and is divided by the tie-correction factor

    C = 1 - sum_blocks sum_groups (t^3 - t) / (N k (k^2 - 1))

whenever ties are present (the uncorrected value is kept alongside for
transparency). The Iman-Davenport F refinement is reported when its
denominator is positive; the omnibus decision cites the Friedman p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError
from .special import chi2_sf, f_sf, studentized_range_quantile

Direction = str  # "higher" | "lower"


@dataclass(frozen=True)
class ScoreTable:
    """k models scored over N blocks; no missing cells allowed."""

    models: tuple[str, ...]
    blocks: tuple[tuple[float, ...], ...]
    direction: Direction = "higher"

    def __post_init__(self):
        if len(self.models) < 2:
            raise ValidationError("score table needs at least 2 models")
        if len(set(self.models)) != len(self.models):
            raise ValidationError("model names must be unique")
        if self.direction not in ("higher", "lower"):
            raise ValidationError(f"direction must be 'higher' or 'lower', got {self.direction!r}")
        k = len(self.models)
        for i, block in enumerate(self.blocks):
            if len(block) != k:
                raise ValidationError(f"block {i} has {len(block)} cells, expected {k}")


@dataclass(frozen=True)
class RankMatrix:
    """Tied fractional ranks per block; every row sums to k(k+1)/2."""

    models: tuple[str, ...]
    ranks: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class FriedmanResult:
    chi2: float
    df: int
    p_value: float
    tie_corrected: bool
    chi2_uncorrected: float
    iman_davenport_F: float | None
    iman_davenport_p: float | None
    mean_ranks: tuple[float, ...]
    n_blocks: int


@dataclass(frozen=True)
class NemenyiResult:
    alpha: float
    q_alpha: float
    critical_difference: float
    significant: tuple[tuple[bool, ...], ...]


def rank_matrix(table: ScoreTable) -> RankMatrix:
    """Rank each block, best score first, tied scores averaged."""
    rows = []
    for b, block in enumerate(table.blocks):
        for m, score in enumerate(block):
            if not math.isfinite(score):
                raise ValidationError(
                    f"non-finite score at block {b}, model {table.models[m]!r}: {score}"
                )
        reverse = table.direction == "higher"
        order = sorted(range(len(block)), key=lambda i: block[i], reverse=reverse)
        ranks = [0.0] * len(block)
        pos = 0
        while pos < len(order):
            end = pos
            while end + 1 < len(order) and block[order[end + 1]] == block[order[pos]]:
                end += 1
            # positions pos..end share ranks pos+1..end+1
            avg = (pos + end + 2) / 2.0
            for idx in order[pos : end + 1]:
                ranks[idx] = avg
            pos = end + 1
        rows.append(tuple(ranks))
    return RankMatrix(models=table.models, ranks=tuple(rows))


def _tie_term(row: tuple[float, ...]) -> int:
    """Sum of t^3 - t over the row's tie groups (equal ranks = tied scores)."""
    sizes: dict[float, int] = {}
    for r in row:
        sizes[r] = sizes.get(r, 0) + 1
    return sum(t**3 - t for t in sizes.values())


def friedman(ranks: RankMatrix) -> FriedmanResult:
    """Friedman test over a rank matrix, tie-corrected by default."""
    n = len(ranks.ranks)
    k = len(ranks.models)
    if n < 2:
        raise ValidationError(f"Friedman test needs N >= 2 blocks, got {n}")
    if k < 2:
        raise ValidationError(f"Friedman test needs k >= 2 models, got {k}")
    for row in ranks.ranks:
        if len(row) != k:
            raise ValidationError("rank matrix rows must all have k entries")

    mean_ranks = tuple(sum(row[j] for row in ranks.ranks) / n for j in range(k))
    spread = sum(r * r for r in mean_ranks) - k * (k + 1) ** 2 / 4.0
    chi2_raw = (12.0 * n / (k * (k + 1))) * spread

    tie_sum = sum(_tie_term(row) for row in ranks.ranks)
    correction = 1.0 - tie_sum / (n * k * (k**2 - 1))
    ties_present = tie_sum > 0

    if correction == 0.0:
        # every block fully tied: no evidence of any difference
        chi2 = 0.0
        p_value = 1.0
    else:
        chi2 = chi2_raw / correction if ties_present else chi2_raw
        p_value = chi2_sf(chi2, k - 1)

    denom = n * (k - 1) - chi2
    if denom > 0:
        f_stat = (n - 1) * chi2 / denom
        f_p = f_sf(f_stat, k - 1, (k - 1) * (n - 1))
    else:
        f_stat = None
        f_p = None

    return FriedmanResult(
        chi2=chi2,
        df=k - 1,
        p_value=p_value,
        tie_corrected=ties_present,
        chi2_uncorrected=chi2_raw,
        iman_davenport_F=f_stat,
        iman_davenport_p=f_p,
        mean_ranks=mean_ranks,
        n_blocks=n,
    )


def nemenyi(mean_ranks: tuple[float, ...], k: int, n: int, alpha: float = 0.05) -> NemenyiResult:
    """Pairwise significance: |R_i - R_j| > CD = q_alpha * sqrt(k(k+1)/(6N))."""
    if k != len(mean_ranks):
        raise ValidationError(f"k={k} does not match {len(mean_ranks)} mean ranks")
    if k < 2:
        raise ValidationError(f"Nemenyi test needs k >= 2, got {k}")
    if n < 2:
        raise ValidationError(f"Nemenyi test needs N >= 2, got {n}")
    q = studentized_range_quantile(k, alpha)
    cd = q * math.sqrt(k * (k + 1) / (6.0 * n))
    significant = tuple(
        tuple(i != j and abs(mean_ranks[i] - mean_ranks[j]) > cd for j in range(k))
        for i in range(k)
    )
    return NemenyiResult(alpha=alpha, q_alpha=q, critical_difference=cd, significant=significant)
