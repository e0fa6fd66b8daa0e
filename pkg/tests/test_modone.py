import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from goodseq.errors import ConfigurationError, InsufficientPrecision
from goodseq.lacunary import build_modulus, element_at
from goodseq.modone import (
    DyadicAngle,
    RationalAngle,
    angle_from_json,
    angle_to_json,
    context,
    cos_factor,
    dist_nearest_int,
    dyadic,
    parse_angle,
    rational,
    times_int_mod1,
    to_fraction,
    to_mpf,
    unit_exp,
)
from goodseq.spectral import direct_average, partial_products

# precisione dei confronti: il doppio di quella di lavoro
CHECK = context(512)


def within(value, expected, err):
    return abs(to_mpf(CHECK, value) - to_mpf(CHECK, expected)) <= to_mpf(CHECK, err)


def test_rational_is_reduced_mod_one():
    theta = rational(7, 3)
    assert theta.value == Fraction(1, 3)
    assert (theta.p, theta.q) == (1, 3)
    assert rational(-1, 4).value == Fraction(3, 4)


def test_denominator_must_be_positive():
    with pytest.raises(ConfigurationError):
        rational(1, 0)


def test_times_int_mod1_rational():
    assert times_int_mod1(rational(1, 9), 6) == rational(2, 3)
    assert times_int_mod1(rational(1, 7), 22) == rational(1, 7)


def test_times_int_mod1_on_sequence(geometric3):
    for n in (1, 7, 100, 1000):
        assert times_int_mod1(rational(1, 3), element_at(geometric3, n)) == rational(0)


def test_times_int_mod1_negative():
    with pytest.raises(ValueError):
        times_int_mod1(rational(1, 3), -1)


def test_dyadic_loses_effective_bits():
    theta = dyadic(1, 128)
    shifted = times_int_mod1(theta, 1 << 20)
    assert shifted.effective_bits == 128 - 21
    assert to_fraction(shifted) == Fraction(1 << 20, 1 << 128)


def test_dyadic_insufficient_precision():
    with pytest.raises(InsufficientPrecision):
        times_int_mod1(dyadic(1, 128), 1 << 70)


def test_dyadic_needs_enough_bits():
    with pytest.raises(ConfigurationError):
        DyadicAngle(1, 32)


def test_dist_nearest_int():
    assert dist_nearest_int(rational(3, 10)) == Fraction(3, 10)
    assert dist_nearest_int(rational(5, 6)) == Fraction(1, 6)
    assert dist_nearest_int(rational(1, 2)) == Fraction(1, 2)


def test_unit_exp_exact_points():
    assert unit_exp(rational(0)).to_complex() == 1
    assert unit_exp(rational(1, 2)).to_complex() == -1
    assert unit_exp(rational(1, 2)).err == 0


def test_unit_exp_third():
    e = unit_exp(rational(1, 3))
    assert abs(float(e.re) + 0.5) <= float(e.err) + 1e-17
    assert abs(float(e.im) - math.sqrt(3) / 2) <= float(e.err) + 1e-16


def test_unit_exp_dyadic_matches_rational():
    quarter = dyadic(1 << 126, 128)
    e = unit_exp(quarter)
    assert 0 < e.err < Fraction(1, 1 << 120)
    assert within(e.re, 0, e.err)
    assert within(e.im, 1, e.err)


@pytest.mark.parametrize(
    "t, expected",
    [((0, 1), 1), ((1, 2), Fraction(-1, 3)), ((1, 3), 0), ((1, 4), Fraction(1, 3)), ((1, 6), Fraction(2, 3))],
)
def test_cos_factor_exact(t, expected):
    f = cos_factor(rational(*t))
    assert f.re == expected
    assert f.err == 0


@given(p=st.integers(min_value=0, max_value=10_000), q=st.integers(min_value=1, max_value=10_000))
def test_cos_factor_range(p, q):
    value = float(cos_factor(rational(p, q)).re)
    assert -1 / 3 - 1e-15 <= value <= 1 + 1e-15


@given(p=st.integers(), q=st.integers(min_value=1, max_value=10 ** 6), s=st.integers(min_value=0, max_value=10 ** 30))
def test_times_int_mod1_matches_fraction(p, q, s):
    assert times_int_mod1(rational(p, q), s).value == (Fraction(p, q) * s) % 1


def test_parse_angle():
    assert parse_angle("1/3") == rational(1, 3)
    assert parse_angle("0") == rational(0)
    assert parse_angle("0.25") == rational(1, 4)
    theta = parse_angle("0.1@128")
    assert isinstance(theta, DyadicAngle)
    assert theta.bits == 128
    assert abs(to_fraction(theta) - Fraction(1, 10)) <= Fraction(1, 1 << 129)
    with pytest.raises(ConfigurationError):
        parse_angle("pi")


def test_angle_json():
    for theta in (rational(5, 17), dyadic(12345, 96)):
        assert angle_from_json(angle_to_json(theta)) == theta
    assert isinstance(angle_from_json({"rational": ["1", "2"]}), RationalAngle)


@given(
    p=st.integers(),
    q=st.integers(min_value=1, max_value=10 ** 6),
    factors=st.lists(st.integers(min_value=0, max_value=10 ** 12), min_size=1, max_size=5),
)
def test_repeated_multiplication_rational(p, q, factors):
    theta = rational(p, q)
    stepwise = theta
    for s in factors:
        stepwise = times_int_mod1(stepwise, s)
    assert stepwise == times_int_mod1(theta, math.prod(factors))


@given(
    mantissa=st.integers(min_value=0, max_value=(1 << 256) - 1),
    factors=st.lists(st.integers(min_value=0, max_value=(1 << 20) - 1), min_size=1, max_size=3),
)
def test_repeated_multiplication_dyadic(mantissa, factors):
    theta = dyadic(mantissa, 256)
    stepwise = theta
    for s in factors:
        stepwise = times_int_mod1(stepwise, s)
    once = times_int_mod1(theta, math.prod(factors))
    assert to_fraction(stepwise) == to_fraction(once)
    assert stepwise.effective_bits <= once.effective_bits


@given(p=st.integers(), q=st.integers(min_value=1, max_value=10 ** 9))
def test_dist_nearest_int_symmetry_rational(p, q):
    t = rational(p, q)
    assert dist_nearest_int(t) == dist_nearest_int(rational(q - p, q))
    assert 0 <= dist_nearest_int(t) <= Fraction(1, 2)


@given(mantissa=st.integers(min_value=0, max_value=(1 << 128) - 1))
def test_dist_nearest_int_symmetry_dyadic(mantissa):
    assert dist_nearest_int(dyadic(mantissa, 128)) == dist_nearest_int(dyadic(-mantissa, 128))


@given(p=st.integers(min_value=0, max_value=10 ** 6), q=st.integers(min_value=1, max_value=10 ** 6))
def test_unit_exp_on_circle_rational(p, q):
    e = unit_exp(rational(p, q))
    conj = unit_exp(rational(q - p, q))
    modulus = CHECK.sqrt(to_mpf(CHECK, e.re) ** 2 + to_mpf(CHECK, e.im) ** 2)
    assert within(modulus, 1, e.err)
    re = to_mpf(CHECK, e.re) * to_mpf(CHECK, conj.re) - to_mpf(CHECK, e.im) * to_mpf(CHECK, conj.im)
    im = to_mpf(CHECK, e.re) * to_mpf(CHECK, conj.im) + to_mpf(CHECK, e.im) * to_mpf(CHECK, conj.re)
    assert within(re, 1, 2 * e.err)
    assert within(im, 0, 2 * e.err)


@given(mantissa=st.integers(min_value=0, max_value=(1 << 128) - 1))
def test_unit_exp_on_circle_dyadic(mantissa):
    e = unit_exp(dyadic(mantissa, 128))
    conj = unit_exp(dyadic(-mantissa, 128))
    modulus = CHECK.sqrt(to_mpf(CHECK, e.re) ** 2 + to_mpf(CHECK, e.im) ** 2)
    assert within(modulus, 1, e.err)
    re = to_mpf(CHECK, e.re) * to_mpf(CHECK, conj.re) - to_mpf(CHECK, e.im) * to_mpf(CHECK, conj.im)
    assert within(re, 1, e.err + conj.err)


class TestPrecisionAccounting:
    """Un diadico che rappresenta esattamente un razionale resta entro il suo err."""

    theta_rational = rational(5, 32)
    theta_dyadic = dyadic(5 << 251, 256)

    def test_partial_products(self, geometric3):
        exact = partial_products(geometric3, self.theta_rational, 20)
        approx = partial_products(geometric3, self.theta_dyadic, 20)
        for k in range(20):
            assert approx.errors[k] > 0 or k == 0
            assert within(approx.values[k], exact.values[k], approx.errors[k] + exact.errors[k])

    @pytest.mark.parametrize("family", ["geometric:3", "factorial:2"])
    def test_direct_average(self, family):
        m = build_modulus(family)
        exact = direct_average(m, self.theta_rational, 500)
        approx = direct_average(m, self.theta_dyadic, 500)
        assert exact.exact and not approx.exact
        bound = exact.average.err + approx.average.err
        assert within(approx.average.re, exact.average.re, bound)
        assert within(approx.average.im, exact.average.im, bound)
