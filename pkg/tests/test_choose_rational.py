from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from projsum.errors import EmptyInterval
from projsum.strategies import choose_rational


def _oracle(lo, hi):
    """Smallest denominator first, then smallest numerator, by exhaustive search."""
    q = 1
    while True:
        p = (lo * q).__floor__() + 1
        if Fraction(p, q) < hi:
            return Fraction(p, q)
        q += 1


@pytest.mark.parametrize("lo, hi, expected", [
    (Fraction(1, 3), Fraction(2, 3), Fraction(1, 2)),
    (1, 2, Fraction(3, 2)),
    (1.4, 1.6, Fraction(3, 2)),
    (Fraction(0), Fraction(3), Fraction(1)),
    (Fraction(7, 10), Fraction(71, 100), Fraction(12, 17)),
])
def test_examples(lo, hi, expected):
    assert choose_rational(lo, hi) == expected


@pytest.mark.parametrize("lo, hi", [(1, 1), (2, 1), (Fraction(1, 2), Fraction(1, 2))])
def test_empty(lo, hi):
    with pytest.raises(EmptyInterval):
        choose_rational(lo, hi)


@given(st.fractions(min_value=0, max_value=5, max_denominator=60),
       st.fractions(min_value=Fraction(1, 60), max_value=2, max_denominator=60))
def test_matches_denominator_search(lo, width):
    hi = lo + width
    got = choose_rational(lo, hi)
    assert lo < got < hi
    assert got == _oracle(lo, hi)


@given(st.floats(0, 10, allow_nan=False), st.floats(1e-6, 3, allow_nan=False))
def test_float_endpoints_strictly_inside(lo, width):
    hi = lo + width
    got = choose_rational(lo, hi)
    assert lo < got < hi
