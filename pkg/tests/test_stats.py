"""Stats tests against brute-force oracles."""

import math
import random

import pytest

from compbench.stats import (
    CorrelationResult,
    PairedScores,
    StatsError,
    aggregate_human,
    correlate_metric,
    kendall_tau,
    normalize_minmax,
    spearman_rho,
)


def brute_force_tau_b(x, y):
    """O(n^2) concordant/discordant counting with the tie correction."""
    n = len(x)
    concordant = discordant = 0
    ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif dx * dy > 0:
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) / 2
    # pairs tied only in x / only in y reduce the effective pair counts
    n1 = sum(
        t * (t - 1) / 2
        for t in [x.count(v) for v in set(x)]
    )
    n2 = sum(
        t * (t - 1) / 2
        for t in [y.count(v) for v in set(y)]
    )
    denom = math.sqrt((n0 - n1) * (n0 - n2))
    return (concordant - discordant) / denom


def average_ranks(values):
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def pearson(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = sum((a - mx) ** 2 for a in x)
    vy = sum((b - my) ** 2 for b in y)
    return cov / math.sqrt(vx * vy)


def brute_force_spearman(x, y):
    return pearson(average_ranks(x), average_ranks(y))


def paired(x, y):
    keys = [("p", f"i{k}") for k in range(len(x))]
    return PairedScores(keys=keys, metric_values=list(x), human_values=list(y))


def random_tied_vectors(rng, n):
    # coarse grids produce plenty of ties, like 5-point human ratings do
    x = [rng.randrange(0, 6) / 5 for _ in range(n)]
    y = [rng.randrange(1, 6) / 5 for _ in range(n)]
    return x, y


class TestNormalizeMinmax:
    def test_affine(self):
        assert normalize_minmax([2, 4, 6]) == [0.0, 0.5, 1.0]

    def test_constant_maps_to_half(self):
        assert normalize_minmax([7, 7, 7]) == [0.5, 0.5, 0.5]

    def test_already_normalized_unchanged(self):
        assert normalize_minmax([0.0, 0.25, 1.0]) == [0.0, 0.25, 1.0]

    def test_empty_rejected(self):
        with pytest.raises(StatsError):
            normalize_minmax([])


class TestAggregateHuman:
    @pytest.mark.parametrize(
        "ratings,expected", [((5, 4, 3), 0.8), ((5, 5, 5), 1.0), ((1,), 0.2)]
    )
    def test_mean_over_five(self, ratings, expected):
        assert aggregate_human(ratings) == pytest.approx(expected, abs=1e-15)

    def test_out_of_range_rejected(self):
        with pytest.raises(StatsError):
            aggregate_human([5, 6])

    def test_empty_rejected(self):
        with pytest.raises(StatsError):
            aggregate_human([])

    def test_range_property(self):
        rng = random.Random(0)
        for _ in range(200):
            ratings = [rng.randrange(1, 6) for _ in range(rng.randrange(1, 10))]
            assert 0.2 <= aggregate_human(ratings) <= 1.0


class TestKendallTau:
    def test_perfect_concordance(self):
        assert kendall_tau(paired([1, 2, 3], [1, 2, 3])) == pytest.approx(1.0)

    def test_perfect_discordance(self):
        assert kendall_tau(paired([1, 2, 3], [3, 2, 1])) == pytest.approx(-1.0)

    def test_all_tied_side_rejected(self):
        with pytest.raises(StatsError):
            kendall_tau(paired([1, 1, 1], [1, 2, 3]))

    def test_matches_brute_force_with_ties(self):
        rng = random.Random(7)
        for _ in range(200):
            n = rng.randrange(3, 51)
            x, y = random_tied_vectors(rng, n)
            if len(set(x)) < 2 or len(set(y)) < 2:
                continue
            assert kendall_tau(paired(x, y)) == pytest.approx(
                brute_force_tau_b(x, y), abs=1e-9
            )


class TestSpearmanRho:
    def test_monotone_increasing(self):
        assert spearman_rho(paired([0.1, 0.5, 0.9], [1, 4, 5])) == pytest.approx(1.0)

    def test_exact_reversal(self):
        assert spearman_rho(paired([0.1, 0.5, 0.9], [5, 4, 1])) == pytest.approx(-1.0)

    def test_zero_variance_rejected(self):
        with pytest.raises(StatsError):
            spearman_rho(paired([2, 2, 2], [1, 2, 3]))

    def test_matches_definitional_oracle_with_ties(self):
        rng = random.Random(8)
        for _ in range(200):
            n = rng.randrange(3, 51)
            x, y = random_tied_vectors(rng, n)
            if len(set(x)) < 2 or len(set(y)) < 2:
                continue
            assert spearman_rho(paired(x, y)) == pytest.approx(
                brute_force_spearman(x, y), abs=1e-9
            )


class TestInvarianceProperties:
    def test_strictly_increasing_transform_preserves_both(self):
        rng = random.Random(9)
        for _ in range(50):
            n = rng.randrange(5, 40)
            x, y = random_tied_vectors(rng, n)
            if len(set(x)) < 2 or len(set(y)) < 2:
                continue
            tx = [math.exp(v) for v in x]
            assert kendall_tau(paired(tx, y)) == pytest.approx(
                kendall_tau(paired(x, y)), abs=1e-12
            )
            assert spearman_rho(paired(tx, y)) == pytest.approx(
                spearman_rho(paired(x, y)), abs=1e-12
            )

    def test_minmax_normalization_changes_nothing(self):
        rng = random.Random(10)
        for _ in range(50):
            n = rng.randrange(5, 40)
            x, y = random_tied_vectors(rng, n)
            if len(set(x)) < 2 or len(set(y)) < 2:
                continue
            nx = normalize_minmax(x)
            assert kendall_tau(paired(nx, y)) == pytest.approx(
                kendall_tau(paired(x, y)), abs=1e-12
            )
            assert spearman_rho(paired(nx, y)) == pytest.approx(
                spearman_rho(paired(x, y)), abs=1e-12
            )

    def test_symmetry(self):
        rng = random.Random(11)
        for _ in range(50):
            x, y = random_tied_vectors(rng, 20)
            if len(set(x)) < 2 or len(set(y)) < 2:
                continue
            assert kendall_tau(paired(x, y)) == pytest.approx(kendall_tau(paired(y, x)))
            assert spearman_rho(paired(x, y)) == pytest.approx(spearman_rho(paired(y, x)))

    def test_range(self):
        rng = random.Random(12)
        for _ in range(100):
            x, y = random_tied_vectors(rng, 15)
            if len(set(x)) < 2 or len(set(y)) < 2:
                continue
            assert -1.0 <= kendall_tau(paired(x, y)) <= 1.0
            assert -1.0 <= spearman_rho(paired(x, y)) <= 1.0


class TestCorrelateMetric:
    def test_identical_scores_give_unity(self):
        metric = {("p", f"i{k}"): v for k, v in enumerate([0.1, 0.4, 0.7, 0.9])}
        human = {("p", f"i{k}"): v for k, v in enumerate([0.1, 0.4, 0.7, 0.9])}
        result = correlate_metric(metric, human)
        assert result.tau == pytest.approx(1.0)
        assert result.rho == pytest.approx(1.0)
        assert result.n == 4

    def test_disjoint_keys_rejected(self):
        with pytest.raises(StatsError):
            correlate_metric({("a", "1"): 0.5}, {("b", "2"): 0.5})

    def test_inner_join_drops_unmatched(self):
        metric = {("p", "i0"): 0.2, ("p", "i1"): 0.8, ("p", "zzz"): 0.5}
        human = {("p", "i0"): 0.4, ("p", "i1"): 1.0, ("q", "i9"): 0.2}
        assert correlate_metric(metric, human).n == 2

    def test_fixture_of_30_pairs_matches_oracles(self):
        rng = random.Random(13)
        x, y = random_tied_vectors(rng, 30)
        metric = {("p", f"i{k}"): v for k, v in enumerate(x)}
        human = {("p", f"i{k}"): v for k, v in enumerate(y)}
        result = correlate_metric(metric, human)
        assert result.tau == pytest.approx(brute_force_tau_b(x, y), abs=1e-9)
        assert result.rho == pytest.approx(brute_force_spearman(x, y), abs=1e-9)

    def test_paired_scores_validates_lengths(self):
        with pytest.raises(StatsError):
            PairedScores(keys=[("p", "i")], metric_values=[0.5], human_values=[0.5])
