from fractions import Fraction

import pytest

from aplab.groups import (ApParams, Group, as_density, check_coprime,
                          density_target, pair_support, progression_support,
                          single_support)


def test_as_density_decimal_exactness():
    # 0.4 must mean 2/5 exactly, not the nearest binary double
    assert as_density(0.4) == Fraction(2, 5)
    assert as_density(0.6) == Fraction(3, 5)
    assert as_density("0.6") == Fraction(3, 5)
    assert as_density(Fraction(1, 3)) == Fraction(1, 3)
    assert as_density(1) == Fraction(1)


def test_density_target_avoids_float_ceil():
    # ceil(0.4 * 5) = 2; the binary double for 0.4 would round this up to 3
    assert density_target(Group(5), ApParams(3, 0.4)) == 2
    assert density_target(Group(5), ApParams(3, 0.6)) == 3
    assert density_target(Group(13), ApParams(3, 0.4)) == 6
    assert density_target(Group(7), ApParams(3, 1)) == 7


def test_group_validation():
    with pytest.raises(ValueError):
        Group(0)
    g = Group(7)
    assert g.reduce(-1) == 6
    assert list(g.elements()) == list(range(7))


def test_params_validation():
    with pytest.raises(ValueError):
        ApParams(1)
    with pytest.raises(ValueError):
        ApParams(3, 0)
    with pytest.raises(ValueError):
        ApParams(3, Fraction(6, 5))
    p = ApParams(5)
    assert p.t == 4
    assert p.r == 2
    with pytest.raises(ValueError):
        _ = ApParams(4).r  # even k has no half-length


def test_check_coprime():
    assert check_coprime(Group(5), ApParams(3))
    assert not check_coprime(Group(6), ApParams(3))  # gcd(6, 2!) = 2
    assert check_coprime(Group(25), ApParams(5))     # gcd(25, 24) = 1
    assert not check_coprime(Group(25), ApParams(6))  # 5 divides 5!


def test_progression_support():
    assert progression_support(Group(5), 3, 4, 3) == [3, 2, 1]
    assert progression_support(Group(7), 0, 2, 4) == [0, 2, 4, 6]
    with pytest.raises(ValueError):
        progression_support(Group(5), 0, 1, 0)


def test_pair_and_single_support():
    assert pair_support(Group(11), 0, 1, 3, 1) == {1, 2, 3, 6}
    # colliding windows shrink the union
    assert pair_support(Group(7), 0, 1, 2, 1) == {1, 2, 4}
    assert single_support(Group(11), 0, 3, 1) == [3, 6]
    assert single_support(Group(7), 2, 1, 2) == [3, 4, 5, 6]
