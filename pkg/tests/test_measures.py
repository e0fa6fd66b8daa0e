import math
from fractions import Fraction
from math import factorial

import pytest

from goodseq.config import configure
from goodseq.errors import ConfigurationError, GrowthTooSlow, NotDivisible, SelectionTooShallow
from goodseq.lacunary import build_modulus
from goodseq.measures import (
    SelectionMode,
    SubsequenceSelection,
    WienerMethod,
    dirichlet_check,
    eta_majorant,
    eta_words,
    mean_limit,
    mtheta_bound,
    mu_hat,
    mu_hat_mc,
    nu_hat,
    select_subsequence,
    theta_of_eta,
    wiener_average,
    wiener_limit,
)
from goodseq.modone import dist_nearest_int, rational, times_int_mod1
from goodseq.spectral import Classification, direct_average, h2_diagnostic


@pytest.fixture
def prop5(factorial2):
    return select_subsequence(factorial2, SelectionMode.PROP5, 3)


@pytest.fixture
def thm6(squaring):
    return select_subsequence(squaring, SelectionMode.THM6, 4)


class TestSelection:
    def test_prop5_on_factorial(self, prop5):
        assert prop5.indices == (7, 15, 31)
        assert prop5.certified

    def test_prop5_on_geometric(self, geometric3):
        with pytest.raises(GrowthTooSlow):
            select_subsequence(geometric3, SelectionMode.PROP5, 1)

    def test_thm6_on_factorial(self, factorial2):
        sel = select_subsequence(factorial2, SelectionMode.THM6, 2)
        assert sel.indices == (7, 16 * factorial(9) - 1)
        with pytest.raises(GrowthTooSlow):
            select_subsequence(factorial2, SelectionMode.THM6, 3)

    def test_squaring_family(self, squaring, thm6):
        assert thm6.indices == (2, 4, 6, 8)
        assert select_subsequence(squaring, SelectionMode.PROP5, 3).indices == (2, 3, 4)

    def test_not_divisible(self):
        with pytest.raises(NotDivisible):
            select_subsequence(build_modulus("explicit:1,9,100,2000,50000"), SelectionMode.PROP5, 1)

    def test_needs_positive_depth(self, factorial2):
        with pytest.raises(ConfigurationError):
            select_subsequence(factorial2, SelectionMode.PROP5, 0)

    def test_json(self, prop5):
        data = prop5.to_json()
        assert data == {"mode": "prop5", "indices": [7, 15, 31], "horizon": 31 + 16}
        assert SubsequenceSelection.from_json(data).indices == prop5.indices


class TestEtaPoints:
    def test_zero_word(self, factorial2, prop5):
        assert theta_of_eta(factorial2, (0, 0, 0), prop5).theta == rational(0)

    def test_single_letter(self, factorial2, prop5):
        point = theta_of_eta(factorial2, (1,), prop5)
        assert point.theta == rational(1, factorial(9))
        assert point.truncation_err == Fraction(2, factorial(17))

    def test_two_letters(self, factorial2, prop5):
        point = theta_of_eta(factorial2, (1, 1), prop5)
        assert point.theta.value == Fraction(1, factorial(9)) + Fraction(1, factorial(17))

    def test_too_long(self, factorial2, prop5):
        with pytest.raises(SelectionTooShallow):
            theta_of_eta(factorial2, (1, 0, 1, 1), prop5)

    def test_injective(self, factorial2):
        sel = select_subsequence(factorial2, SelectionMode.PROP5, 5)
        thetas = {theta_of_eta(factorial2, eta, sel).theta for eta in eta_words(5)}
        assert len(thetas) == 32

    def test_distance_bounds(self, factorial2):
        sel = select_subsequence(factorial2, SelectionMode.PROP5, 4)
        for eta in eta_words(4):
            theta = theta_of_eta(factorial2, eta, sel).theta
            for j in range(1, 41):
                distance = dist_nearest_int(times_int_mod1(theta, factorial2[j]))
                assert distance <= mtheta_bound(factorial2, sel, j, 4)
                assert distance <= Fraction(1, 4)

    def test_h2_bound(self, factorial2):
        sel = select_subsequence(factorial2, SelectionMode.PROP5, 4)
        bound = 8 * sum(1 / factorial2.ratio_at(j) ** 2 for j in sel.indices)
        assert bound < Fraction(1, 3)
        for eta in eta_words(4):
            report = h2_diagnostic(factorial2, theta_of_eta(factorial2, eta, sel).theta, 40)
            assert report.total < bound

    def test_majorant_dominates_tail(self, factorial2, prop5):
        majorant = eta_majorant(factorial2, prop5, 3)
        for eta in eta_words(3):
            theta = theta_of_eta(factorial2, eta, prop5).theta
            terms = [dist_nearest_int(times_int_mod1(theta, factorial2[j])) ** 2 for j in range(1, 41)]
            for k in range(1, 36):
                assert sum(terms[k - 1:]) <= majorant(k)


class TestMuHat:
    def test_zero(self, factorial2, prop5):
        assert mu_hat(factorial2, prop5, 0).to_complex() == 1

    def test_divisible(self, factorial2, prop5):
        s = 5 * factorial(33)
        assert mu_hat(factorial2, prop5, s).to_complex() == 1

    def test_half_modulus(self, factorial2, prop5):
        assert abs(mu_hat(factorial2, prop5, factorial(9) // 2, K=1)) == 0

    def test_matches_word_average(self, factorial2, prop5):
        s = 123_457
        exact = mu_hat(factorial2, prop5, s).to_complex()
        total = 0j
        for eta in eta_words(3):
            theta = theta_of_eta(factorial2, eta, prop5).theta
            total += complex(math.cos(2 * math.pi * float(times_int_mod1(theta, s).value)),
                             math.sin(2 * math.pi * float(times_int_mod1(theta, s).value)))
        assert exact == pytest.approx(total / 8, abs=1e-12)

    def test_monte_carlo_zero(self, factorial2, prop5):
        estimate = mu_hat_mc(factorial2, prop5, 0, samples=100, seed=1)
        assert estimate.value == 1
        assert estimate.std_err == 0

    def test_monte_carlo_single_sample(self, factorial2, prop5):
        estimate = mu_hat_mc(factorial2, prop5, 200_000, samples=1, seed=3)
        assert abs(estimate.value) == pytest.approx(1)

    def test_monte_carlo_agrees(self, factorial2, prop5):
        s = 200_000
        exact = mu_hat(factorial2, prop5, s).to_complex()
        estimate = mu_hat_mc(factorial2, prop5, s, samples=10_000, seed=12345)
        assert estimate.std_err > 0
        assert abs(estimate.value - exact) <= 4 * estimate.std_err

    def test_monte_carlo_agreement_rate(self, factorial2, prop5):
        pairs = [(3 ** k, seed) for k in range(8, 18) for seed in range(10)]
        misses = 0
        for s, seed in pairs:
            exact = mu_hat(factorial2, prop5, s).to_complex()
            estimate = mu_hat_mc(factorial2, prop5, s, samples=4000, seed=seed)
            if abs(estimate.value - exact) > 4 * estimate.std_err:
                misses += 1
        assert misses <= len(pairs) // 100

    def test_monte_carlo_is_reproducible(self, factorial2, prop5):
        first = mu_hat_mc(factorial2, prop5, 200_000, samples=10_000, seed=9)
        configure(threads=3)
        second = mu_hat_mc(factorial2, prop5, 200_000, samples=10_000, seed=9)
        assert first == second


class TestWiener:
    def test_deterministic_theta(self, factorial2, prop5):
        estimate = wiener_average(factorial2, prop5, 50, K=0)
        assert estimate.mean_coeff == 1
        assert estimate.mean_sq == 1

    @pytest.mark.parametrize("N", [3 ** 4, 3 ** 6, 3 ** 8])
    def test_cauchy_schwarz(self, factorial2, prop5, N):
        estimate = wiener_average(factorial2, prop5, N)
        assert estimate.mean_sq >= abs(estimate.mean_coeff) ** 2 > 0

    def test_mean_coeff_is_average_over_words(self, factorial2, prop5):
        N = 3 ** 8
        estimate = wiener_average(factorial2, prop5, N)
        averages = [
            direct_average(factorial2, theta_of_eta(factorial2, eta, prop5).theta, N).average.to_complex()
            for eta in eta_words(3)
        ]
        assert estimate.mean_coeff == pytest.approx(sum(averages) / 8, abs=1e-12)

    def test_positive_limit(self, factorial2, prop5):
        limit = mean_limit(factorial2, prop5)
        assert 0 < limit < 1
        estimate = wiener_average(factorial2, prop5, 3 ** 8)
        assert estimate.mean_sq >= 0.9 * limit ** 2
        assert wiener_limit(factorial2, prop5) >= limit ** 2

    def test_monte_carlo_needs_seed(self, factorial2, prop5):
        with pytest.raises(ConfigurationError):
            wiener_average(factorial2, prop5, 81, method=WienerMethod.MONTE_CARLO, samples=100)

    def test_monte_carlo_agrees(self, factorial2, prop5):
        exact = wiener_average(factorial2, prop5, 3 ** 6)
        estimate = wiener_average(
            factorial2, prop5, 3 ** 6, method=WienerMethod.MONTE_CARLO, samples=10_000, seed=2024
        )
        assert estimate.samples == 10_000 and estimate.seed == 2024
        assert abs(estimate.mean_coeff - exact.mean_coeff) <= 4 * estimate.std_err
        assert estimate.mean_sq >= abs(estimate.mean_coeff) ** 2
        assert estimate.record()["method"] == "monte_carlo"


class TestDirichlet:
    def test_nu_hat(self, squaring, thm6):
        theta = theta_of_eta(squaring, (1, 1, 1, 1), thm6).theta
        assert nu_hat(squaring, theta, 0).value == 1
        for t in (1, 2, 5, 17, 1000):
            assert abs(nu_hat(squaring, theta, t).value) <= 1
        values = [nu_hat(squaring, theta, squaring[j]).value for j in thm6.indices]
        assert values == sorted(values)
        assert values[-1] == pytest.approx(1)

    def test_dirichlet_rows(self, squaring, thm6):
        point = theta_of_eta(squaring, (1, 1, 1, 1), thm6)
        rows = dirichlet_check(squaring, point, 3)
        assert [row.j_n for row in rows] == [2, 4, 6]
        lowers = [row.L_lower for row in rows]
        assert lowers == sorted(lowers)
        assert lowers[2] >= 0.97
        for row in rows:
            assert row.tail_sum < row.tail_bound == Fraction(4, 3) / 4 ** row.n
            assert row.L_lower >= 1 - 16 * math.pi ** 2 / 9 / 4 ** row.n
            assert row.L_value.classification is Classification.POSITIVE_CONVERGED
            assert row.L_value.value >= row.L_lower - 1e-12
        assert rows[0].tail_sum < Fraction(1, 3)

    def test_zero_word(self, squaring, thm6):
        point = theta_of_eta(squaring, (0, 0, 0, 0), thm6)
        rows = dirichlet_check(squaring, point, 4)
        assert all(row.L_value.value == 1 and row.tail_sum == 0 for row in rows)

    def test_requires_thm6(self, squaring):
        sel = select_subsequence(squaring, SelectionMode.PROP5, 3)
        point = theta_of_eta(squaring, (1, 1, 1), sel)
        with pytest.raises(ConfigurationError):
            dirichlet_check(squaring, point, 2)

    def test_too_shallow(self, squaring, thm6):
        point = theta_of_eta(squaring, (1, 1), thm6)
        with pytest.raises(SelectionTooShallow):
            dirichlet_check(squaring, point, 5)
