"""Correctness and complexity statistics.

pass@k for a single problem with n samples of which c are correct:

    pass@k = 1 - C(n-c, k) / C(n, k)
           = 1 - prod_{i=n-c+1..n} (i - k) / i

The product form never forms the (potentially huge) binomials and is
exact at the boundaries: an all-wrong problem gives 0, and any problem
with fewer than k wrong samples gives exactly 1 (a zero factor).

Category-level scores pool counts across benchmarks — a single
pass@k(sum n, sum c) — because that is the arithmetic behind published
per-category figures such as 31 correct of 67 well-formed = 0.463.  A
mean-of-benchmarks variant is provided under a separate label.

The complexity comparison is a one-sided Wilcoxon signed-rank test over
per-benchmark means, exact (all 2^m sign assignments) up to m = 20 and
normal-approximated with continuity and tie corrections above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from scipy.stats import rankdata

EXACT_WILCOXON_LIMIT = 20
MIN_WILCOXON_PAIRS = 5


class StatsDomainError(Exception):
    code = "domain-error"


class EmptyInputError(Exception):
    code = "empty-input"


class TooFewPairsError(Exception):
    code = "too-few-pairs"


def pass_at_k(n: int, c: int, k: int) -> float:
    """Probability that at least one of k drawn samples is correct."""
    if not (0 <= c <= n):
        raise StatsDomainError(f"need 0 <= c <= n, got c={c} n={n}")
    if not (1 <= k <= n):
        raise StatsDomainError(f"need 1 <= k <= n, got k={k} n={n}")
    product = 1.0
    for i in range(n - c + 1, n + 1):
        product *= (i - k) / i
        if product == 0.0:
            return 1.0
    return 1.0 - product


def pass_at_k_exact(n: int, c: int, k: int) -> Fraction:
    """Rational-arithmetic twin of ``pass_at_k`` (used to pin exactness)."""
    if not (0 <= c <= n) or not (1 <= k <= n):
        raise StatsDomainError(f"bad arguments n={n} c={c} k={k}")
    return 1 - Fraction(math.comb(n - c, k), math.comb(n, k))


def aggregate_pass_at_k(counts: Sequence, k: int, conditioned: bool = False,
                        method: str = "pooled") -> float:
    """Category-level pass@k over per-benchmark (n, c, w) counts.

    ``conditioned`` restricts the denominator to well-formed samples (w
    instead of n); benchmarks with w = 0 then drop out of the pool.
    ``method`` is "pooled" (default, the published arithmetic) or "mean"
    (mean of per-benchmark scores, explicitly a different statistic).
    """
    counts = list(counts)
    if not counts:
        raise EmptyInputError("no benchmark counts supplied")
    if method not in ("pooled", "mean"):
        raise StatsDomainError(f"unknown method {method!r}")

    def denominator(item) -> int:
        return item.w if conditioned else item.n

    if method == "pooled":
        total_n = sum(denominator(item) for item in counts)
        total_c = sum(item.c for item in counts)
        if total_n == 0:
            raise StatsDomainError("pooled denominator is zero")
        return pass_at_k(total_n, total_c, k)

    scores = []
    for item in counts:
        denom = denominator(item)
        if denom == 0:
            continue  # no well-formed samples: no conditional score exists
        # with fewer than k usable samples, drawing them all is the best a
        # user could do, so score pass@min(k, denom)
        scores.append(pass_at_k(denom, item.c, min(k, denom)))
    if not scores:
        raise StatsDomainError("no benchmark has a nonzero denominator")
    return sum(scores) / len(scores)


@dataclass(frozen=True)
class WilcoxonResult:
    w_statistic: float  # rank sum of positive differences
    p_value: float  # one-sided, H1: first sample > second
    n_pairs: int  # nonzero differences used
    exact: bool


def _exact_tail_probability(scaled_ranks: list[int], w_scaled: int) -> float:
    """P(W+ >= w) under H0 by counting sign assignments.

    Dynamic program over the distribution of the scaled positive-rank sum;
    identical to enumerating all 2^m sign vectors, in O(m * sum) instead
    of O(2^m).  Ranks arrive doubled so ties (.5 average ranks) stay
    integral.
    """
    total = sum(scaled_ranks)
    counts = [0] * (total + 1)
    counts[0] = 1
    for rank in scaled_ranks:
        for value in range(total, rank - 1, -1):
            counts[value] += counts[value - rank]
    favourable = sum(counts[max(0, w_scaled):])
    return favourable / (2 ** len(scaled_ranks))


def wilcoxon_one_sided(xs: Sequence[float], ys: Sequence[float]) -> WilcoxonResult:
    """One-sided Wilcoxon signed-rank test of H1: xs shifted above ys.

    Zero differences are dropped (Wilcoxon's method); tied absolute
    differences receive average ranks.  Exact p up to 20 nonzero pairs,
    normal approximation with continuity and tie corrections beyond.
    """
    if len(xs) != len(ys):
        raise StatsDomainError(f"paired samples differ in length: {len(xs)} vs {len(ys)}")
    diffs = [float(x) - float(y) for x, y in zip(xs, ys)]
    nonzero = [d for d in diffs if d != 0.0]
    m = len(nonzero)
    if m < MIN_WILCOXON_PAIRS:
        raise TooFewPairsError(
            f"need at least {MIN_WILCOXON_PAIRS} nonzero differences, got {m}"
        )
    ranks = rankdata([abs(d) for d in nonzero])
    w_plus = float(sum(r for r, d in zip(ranks, nonzero) if d > 0))

    if m <= EXACT_WILCOXON_LIMIT:
        scaled = [int(round(2 * r)) for r in ranks]
        p = _exact_tail_probability(scaled, int(round(2 * w_plus)))
        return WilcoxonResult(w_plus, p, m, exact=True)

    mean = m * (m + 1) / 4.0
    tie_counts: dict[float, int] = {}
    for r in ranks:
        tie_counts[r] = tie_counts.get(r, 0) + 1
    tie_term = sum(t**3 - t for t in tie_counts.values() if t > 1)
    variance = m * (m + 1) * (2 * m + 1) / 24.0 - tie_term / 48.0
    z = (w_plus - mean - 0.5) / math.sqrt(variance)
    p = 0.5 * math.erfc(z / math.sqrt(2.0))
    return WilcoxonResult(w_plus, p, m, exact=False)
