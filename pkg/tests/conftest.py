from fractions import Fraction

import pytest

from neurovariety import RATIONAL, HomPoly, prime_field


@pytest.fixture
def fp():
    return prime_field()


def rational_poly(num_vars, degree, terms):
    """HomPoly over Q from (int coefficient, exponent tuple) pairs."""
    return HomPoly.from_terms(
        RATIONAL, num_vars, degree,
        [(Fraction(c), e) for c, e in terms])


def fp_poly(num_vars, degree, terms, field=None):
    field = field or prime_field()
    return HomPoly.from_terms(
        field, num_vars, degree,
        [(field.from_int(c), e) for c, e in terms])
