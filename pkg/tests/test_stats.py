import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patchbench.harness import EvalCounts
from patchbench.stats import (
    EmptyInputError,
    StatsDomainError,
    TooFewPairsError,
    aggregate_pass_at_k,
    pass_at_k,
    pass_at_k_exact,
    wilcoxon_one_sided,
)


def pass_at_k_enumeration(n: int, c: int, k: int) -> Fraction:
    """Independent oracle: enumerate every k-subset of n samples and count
    the subsets containing at least one of the c correct ones."""
    samples = [i < c for i in range(n)]
    subsets = list(itertools.combinations(range(n), k))
    hits = sum(1 for subset in subsets if any(samples[i] for i in subset))
    return Fraction(hits, len(subsets))


def wilcoxon_enumeration(xs, ys) -> tuple[float, float]:
    """Independent oracle: all 2^m sign assignments of the ranked |d|."""
    from scipy.stats import rankdata

    diffs = [x - y for x, y in zip(xs, ys)]
    nonzero = [d for d in diffs if d != 0.0]
    ranks = list(rankdata([abs(d) for d in nonzero]))
    observed = sum(r for r, d in zip(ranks, nonzero) if d > 0)
    m = len(nonzero)
    at_least = 0
    for signs in itertools.product((0, 1), repeat=m):
        w = sum(r for r, s in zip(ranks, signs) if s)
        if w >= observed - 1e-12:
            at_least += 1
    return observed, at_least / 2**m


class TestPassAtK:
    def test_pass_at_1_is_c_over_n(self):
        assert pass_at_k(10, 3, 1) == pytest.approx(0.3, abs=1e-12)

    def test_frozen_derived_value(self):
        # enumeration over C(10,3) = 120 subsets: 85 contain a correct sample
        assert pass_at_k_enumeration(10, 3, 3) == Fraction(85, 120)
        assert pass_at_k(10, 3, 3) == pytest.approx(85 / 120, abs=1e-9)

    def test_paper_conditioned_value(self):
        assert pass_at_k(67, 31, 1) == pytest.approx(0.463, abs=5e-4)

    def test_boundaries_exact(self):
        assert pass_at_k(10, 0, 3) == 0.0
        assert pass_at_k(10, 10, 3) == 1.0
        assert pass_at_k(5, 3, 4) == 1.0  # fewer wrong samples than k

    def test_domain_errors(self):
        with pytest.raises(StatsDomainError):
            pass_at_k(5, 6, 1)
        with pytest.raises(StatsDomainError):
            pass_at_k(5, 2, 0)
        with pytest.raises(StatsDomainError):
            pass_at_k(5, 2, 6)
        with pytest.raises(StatsDomainError):
            pass_at_k(5, -1, 1)

    def test_full_sweep_matches_enumeration(self):
        for n in range(1, 13):
            for c in range(n + 1):
                for k in range(1, min(3, n) + 1):
                    exact = pass_at_k_exact(n, c, k)
                    assert exact == pass_at_k_enumeration(n, c, k), (n, c, k)
                    assert abs(pass_at_k(n, c, k) - float(exact)) < 1e-12, (n, c, k)

    @given(st.integers(1, 40), st.data())
    @settings(max_examples=200, deadline=None)
    def test_monotonicity(self, n, data):
        c = data.draw(st.integers(0, n))
        k = data.draw(st.integers(1, n))
        value = pass_at_k(n, c, k)
        assert 0.0 <= value <= 1.0
        if k < n:
            assert pass_at_k(n, c, k + 1) >= value - 1e-12
        if c < n:
            assert pass_at_k(n, c + 1, k) >= value - 1e-12

    def test_pass_at_n_is_one_iff_any_correct(self):
        assert pass_at_k(10, 1, 10) == 1.0
        assert pass_at_k(10, 0, 10) == 0.0


class TestAggregate:
    def make_counts(self, rows):
        return [EvalCounts(n=n, c=c, w=w) for n, c, w in rows]

    def test_pooled_standard_matches_paper_overall(self):
        counts = self.make_counts([(10, 3, 9)] * 10)  # 100 samples, 30 correct
        assert aggregate_pass_at_k(counts, 1) == pytest.approx(0.300, abs=5e-4)

    def test_pooled_conditioned(self):
        # wavir-like: 15 well-formed, 8 correct -> 0.533
        counts = self.make_counts([(10, 4, 8), (10, 4, 7)])
        assert aggregate_pass_at_k(counts, 1, conditioned=True) == pytest.approx(
            8 / 15, abs=1e-9
        )

    def test_conditioned_excludes_zero_well_formed(self):
        counts = self.make_counts([(10, 5, 10), (10, 0, 0)])
        assert aggregate_pass_at_k(counts, 1, conditioned=True) == pytest.approx(0.5)

    def test_mean_method_differs_and_is_labeled(self):
        counts = self.make_counts([(10, 10, 10), (10, 0, 10)])
        pooled = aggregate_pass_at_k(counts, 1)
        mean = aggregate_pass_at_k(counts, 1, method="mean")
        assert pooled == pytest.approx(0.5)
        assert mean == pytest.approx(0.5)
        counts = self.make_counts([(10, 2, 10), (2, 1, 2)])
        assert aggregate_pass_at_k(counts, 1) == pytest.approx(3 / 12)
        assert aggregate_pass_at_k(counts, 1, method="mean") == pytest.approx(
            (0.2 + 0.5) / 2
        )

    def test_empty_input(self):
        with pytest.raises(EmptyInputError):
            aggregate_pass_at_k([], 1)

    def test_conditioned_dominates_standard_when_waste_exists(self):
        counts = self.make_counts([(10, 3, 6), (10, 2, 5)])
        standard = aggregate_pass_at_k(counts, 1)
        conditioned = aggregate_pass_at_k(counts, 1, conditioned=True)
        assert conditioned > standard


class TestWilcoxon:
    def test_all_zero_differences(self):
        xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        with pytest.raises(TooFewPairsError):
            wilcoxon_one_sided(xs, xs)

    def test_published_nine_pair_example(self):
        # classic paired dataset whose exact one-sided p is 10/512
        xs = [1.83, 0.50, 1.62, 2.48, 1.68, 1.88, 1.55, 3.06, 1.30]
        ys = [0.878, 0.647, 0.598, 2.05, 1.06, 1.29, 1.06, 3.14, 1.29]
        result = wilcoxon_one_sided(xs, ys)
        assert result.exact
        assert result.w_statistic == 40.0
        assert result.p_value == pytest.approx(0.01953125, abs=1e-9)

    def test_twenty_randomized_cases_match_enumeration(self):
        rng = random.Random(20240502)
        for case in range(20):
            m = rng.randint(5, 12)
            xs = [round(rng.uniform(0, 20), 2) for _ in range(m)]
            ys = [round(rng.uniform(0, 20), 2) for _ in range(m)]
            # force a few ties and zeros across cases
            if case % 3 == 0 and m > 6:
                ys[1] = xs[1]
                xs[3], ys[3] = ys[2] + 1.5, xs[2] + 1.5
            try:
                result = wilcoxon_one_sided(xs, ys)
            except TooFewPairsError:
                continue
            w_ref, p_ref = wilcoxon_enumeration(xs, ys)
            assert result.w_statistic == pytest.approx(w_ref)
            assert result.p_value == pytest.approx(p_ref, abs=1e-6), (case, xs, ys)

    def test_tied_ranks_match_enumeration(self):
        xs = [5.0, 5.0, 7.0, 9.0, 2.0, 4.0]
        ys = [3.0, 3.0, 5.0, 1.0, 4.0, 8.0]  # |d| = 2,2,2,8,2,4 with heavy ties
        result = wilcoxon_one_sided(xs, ys)
        w_ref, p_ref = wilcoxon_enumeration(xs, ys)
        assert result.w_statistic == pytest.approx(w_ref)
        assert result.p_value == pytest.approx(p_ref, abs=1e-9)

    def test_swap_symmetry(self):
        rng = random.Random(7)
        xs = [rng.uniform(0, 10) for _ in range(8)]
        ys = [rng.uniform(0, 10) for _ in range(8)]
        forward = wilcoxon_one_sided(xs, ys)
        backward = wilcoxon_one_sided(ys, xs)
        # exact discrete test: p> + p< = 1 + P(W = w_observed) >= 1
        assert forward.p_value + backward.p_value >= 1.0
        total = forward.n_pairs * (forward.n_pairs + 1) / 2
        assert forward.w_statistic + backward.w_statistic == pytest.approx(total)

    def test_normal_approximation_agrees_with_scipy(self):
        from scipy.stats import wilcoxon as scipy_wilcoxon

        rng = random.Random(99)
        xs = [rng.uniform(0, 30) for _ in range(25)]
        ys = [rng.uniform(0, 28) for _ in range(25)]
        result = wilcoxon_one_sided(xs, ys)
        assert not result.exact
        ref = scipy_wilcoxon(xs, ys, alternative="greater", correction=True,
                             mode="approx")
        assert result.p_value == pytest.approx(ref.pvalue, abs=1e-6)

    def test_strong_effect_is_significant(self):
        xs = [10 + i for i in range(10)]
        ys = [5 + i * 0.9 for i in range(10)]
        result = wilcoxon_one_sided(xs, ys)
        assert result.p_value == pytest.approx(1 / 1024, abs=1e-9)

    def test_length_mismatch(self):
        with pytest.raises(StatsDomainError):
            wilcoxon_one_sided([1, 2, 3], [1, 2])
