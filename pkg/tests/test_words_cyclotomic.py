import cmath

import pytest
from hypothesis import given, settings, strategies as st

from g2kummer import words as W
from g2kummer.cyclotomic import Cyclo, cyclotomic_polynomial


def test_parse_expands_conjugates_and_brackets():
    assert W.parse_word("t2") == (("a", 2), ("t", 1), ("a", -2))
    assert W.parse_word("[b,t]") == (("b", 1), ("t", 1), ("b", -1), ("t", -1))
    assert W.parse_word("1") == ()
    with pytest.raises(ValueError):
        W.parse_word("x3")


def test_free_reduction():
    assert W.normalize([("a", 2), ("a", -2), ("b", 1)]) == (("b", 1),)
    assert W.concat(W.parse_word("b t"), W.parse_word("t^-1 b^-1")) == ()


letters = st.lists(st.tuples(st.sampled_from("abt"), st.integers(-3, 3)), max_size=8)


@given(letters)
def test_inverse_cancels(ls):
    w = W.normalize(ls)
    assert W.concat(w, W.inverse_word(w)) == ()


@given(letters)
def test_format_parse_round_trip(ls):
    w = W.normalize(ls)
    assert W.parse_word(W.format_word(w)) == w


def test_cyclotomic_polynomials():
    assert cyclotomic_polynomial(4) == (1, 0, 1)
    assert cyclotomic_polynomial(7) == (1,) * 7
    assert cyclotomic_polynomial(8) == (1, 0, 0, 0, 1)


@given(st.sampled_from([4, 7, 8, 12]), st.integers(0, 30), st.integers(0, 30))
@settings(max_examples=50)
def test_root_arithmetic_matches_complex(n, j, k):
    x, y = Cyclo.root(n, j), Cyclo.root(n, k)
    z = cmath.exp(2j * cmath.pi / n)
    assert abs(complex(x * y) - z ** (j + k)) < 1e-12
    assert abs(complex(x + y) - (z ** j + z ** k)) < 1e-12
    assert abs(complex(x.conjugate()) - (z ** j).conjugate()) < 1e-12


def test_root_of_unity_relation_is_exact():
    z = Cyclo.root(7)
    total = sum((Cyclo.root(7, k) for k in range(1, 7)), Cyclo.const(7, 1))
    assert total.is_zero()
    assert z * z.conjugate() == 1


def test_mixing_fields_rejected():
    with pytest.raises(ValueError):
        Cyclo.root(4) + Cyclo.root(7)
