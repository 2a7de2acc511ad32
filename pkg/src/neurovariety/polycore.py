"""Dense homogeneous multivariate polynomial arithmetic over pluggable fields.

A homogeneous polynomial in ``num_vars`` variables of total degree ``degree``
is stored as a dense coefficient vector of length C(num_vars + degree - 1,
degree).  Coefficient order is graded-lexicographic, descending in the first
variable: for two variables and degree 2 the basis is x^2, xy, y^2.

Scalars are plain Python values (int residues, Fraction, complex); a
ScalarField object supplies the arithmetic, so the same polynomial code runs
exactly over the rationals, exactly over a large prime field, or numerically
over complex floats.  The prime field defaults to the Mersenne prime 2^61 - 1.

Every operation whose output basis would exceed the capacity cap (default
5,000,000 entries, overridable via the NEUROVARIETY_CAP environment variable)
raises CapacityError instead of exhausting memory.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .errors import (
    CapacityError,
    DegreeMismatchError,
    ShapeError,
    UnsupportedFieldError,
)

MERSENNE61 = (1 << 61) - 1
DEFAULT_CAP = 5_000_000

# Pair-product index tables are only cached up to this many entries; larger
# multiplications fall back to per-pair exponent lookups.
_MUL_TABLE_LIMIT = 1 << 21


def capacity_cap() -> int:
    """Current basis-size cap; NEUROVARIETY_CAP overrides the default."""
    raw = os.environ.get("NEUROVARIETY_CAP")
    return int(raw) if raw else DEFAULT_CAP


# ---------------------------------------------------------------------------
# Scalar fields
# ---------------------------------------------------------------------------

class ScalarField:
    """Arithmetic strategy for one coefficient domain.

    Subclasses operate on raw Python scalars rather than wrapping them in
    element objects; polynomial inner loops stay allocation-free.
    """

    kind: str = ""
    exact: bool = True
    prime: int | None = None

    def zero(self):
        raise NotImplementedError

    def one(self):
        return self.from_int(1)

    def from_int(self, n: int):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow_int(self, a, n: int):
        """a**n for n >= 0 by square-and-multiply."""
        if n < 0:
            return self.pow_int(self.inv(a), -n)
        result = self.one()
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    def is_zero(self, a) -> bool:
        raise NotImplementedError

    def random_scalar(self, rng):
        raise UnsupportedFieldError(
            f"uniform sampling is not defined over {self.kind}")

    def from_rational(self, q: Fraction):
        """Image of an exact rational in this field."""
        raise NotImplementedError

    def encode(self, a):
        """JSON-encodable form of a scalar."""
        raise NotImplementedError

    def decode(self, v):
        raise NotImplementedError

    def descriptor(self) -> dict:
        d = {"kind": self.kind}
        if self.prime is not None:
            d["prime"] = self.prime
        return d

    def __eq__(self, other):
        return isinstance(other, ScalarField) and self.kind == other.kind \
            and self.prime == other.prime

    def __hash__(self):
        return hash((self.kind, self.prime))

    def __repr__(self):
        if self.prime is not None:
            return f"{type(self).__name__}({self.prime})"
        return f"{type(self).__name__}()"


class RationalField(ScalarField):
    """Exact rational arithmetic on fractions.Fraction scalars."""

    kind = "exact_rational"
    exact = True

    def zero(self):
        return Fraction(0)

    def from_int(self, n):
        return Fraction(n)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("cannot invert zero")
        return 1 / a

    def is_zero(self, a):
        return a == 0

    def from_rational(self, q):
        return Fraction(q)

    def encode(self, a):
        return str(Fraction(a))

    def decode(self, v):
        return Fraction(str(v))


class PrimeFieldImpl(ScalarField):
    """Exact arithmetic on residues modulo a prime, stored as ints in [0, p)."""

    kind = "prime_field"
    exact = True

    def __init__(self, prime: int = MERSENNE61):
        if prime < 2:
            raise ValueError(f"modulus must be a prime >= 2, got {prime}")
        # Fermat sanity check; catches composite moduli from typos.
        for base in (2, 3, 5, 7):
            if base % prime and pow(base, prime - 1, prime) != 1:
                raise ValueError(f"modulus {prime} is not prime")
        self.prime = prime

    def zero(self):
        return 0

    def from_int(self, n):
        return n % self.prime

    def add(self, a, b):
        s = a + b
        return s - self.prime if s >= self.prime else s

    def sub(self, a, b):
        s = a - b
        return s + self.prime if s < 0 else s

    def mul(self, a, b):
        return (a * b) % self.prime

    def neg(self, a):
        return self.prime - a if a else 0

    def inv(self, a):
        if a % self.prime == 0:
            raise ZeroDivisionError("cannot invert zero")
        return pow(a, -1, self.prime)

    def is_zero(self, a):
        return a == 0

    def random_scalar(self, rng):
        return rng.randrange(self.prime)

    def from_rational(self, q):
        q = Fraction(q)
        den = q.denominator % self.prime
        if den == 0:
            raise ZeroDivisionError(
                f"denominator {q.denominator} vanishes mod {self.prime}")
        return (q.numerator % self.prime) * pow(den, -1, self.prime) % self.prime

    def encode(self, a):
        return int(a)

    def decode(self, v):
        return int(v) % self.prime


class ComplexFloatField(ScalarField):
    """complex128-style floating arithmetic, for cross-checks and witnesses."""

    kind = "complex_float"
    exact = False

    def zero(self):
        return 0j

    def from_int(self, n):
        return complex(n)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("cannot invert zero")
        return 1 / a

    def is_zero(self, a):
        return a == 0

    def random_scalar(self, rng):
        return complex(rng.uniform(-1.0, 1.0))

    def from_rational(self, q):
        return complex(Fraction(q))

    def encode(self, a):
        a = complex(a)
        return [a.real, a.imag]

    def decode(self, v):
        if isinstance(v, (list, tuple)):
            return complex(v[0], v[1])
        return complex(v)


RATIONAL = RationalField()
COMPLEX = ComplexFloatField()

_prime_fields: dict[int, PrimeFieldImpl] = {}


def prime_field(prime: int = MERSENNE61) -> PrimeFieldImpl:
    """Shared PrimeField instance for the given modulus."""
    field = _prime_fields.get(prime)
    if field is None:
        field = _prime_fields[prime] = PrimeFieldImpl(prime)
    return field


def field_from_descriptor(d: dict) -> ScalarField:
    kind = d.get("kind")
    if kind == "exact_rational":
        return RATIONAL
    if kind == "prime_field":
        return prime_field(int(d.get("prime", MERSENNE61)))
    if kind == "complex_float":
        return COMPLEX
    raise UnsupportedFieldError(f"unknown field descriptor {d!r}")


# ---------------------------------------------------------------------------
# Monomial indexing
# ---------------------------------------------------------------------------

def basis_size(num_vars: int, degree: int) -> int:
    """Number of monomials of total degree ``degree`` in ``num_vars`` variables."""
    if num_vars < 1:
        raise ShapeError(f"num_vars must be >= 1, got {num_vars}")
    if degree < 0:
        raise ShapeError(f"degree must be >= 0, got {degree}")
    return math.comb(num_vars + degree - 1, degree)


def checked_basis_size(num_vars: int, degree: int) -> int:
    """basis_size, but raises CapacityError beyond the configured cap."""
    size = basis_size(num_vars, degree)
    cap = capacity_cap()
    if size > cap:
        raise CapacityError(
            f"basis of {size} monomials ({num_vars} vars, degree {degree}) "
            f"exceeds capacity cap {cap}")
    return size


def _enumerate_exponents(num_vars: int, degree: int) -> list[tuple[int, ...]]:
    if num_vars == 1:
        return [(degree,)]
    out = []
    for lead in range(degree, -1, -1):
        for rest in _enumerate_exponents(num_vars - 1, degree - lead):
            out.append((lead,) + rest)
    return out


class MonomialIndexer:
    """Bijection between degree-``degree`` exponent vectors and 0..size-1.

    Order is graded-lexicographic, descending in the first variable, so
    rank((2,0)) = 0, rank((1,1)) = 1, rank((0,2)) = 2 for two variables.
    """

    __slots__ = ("num_vars", "degree", "size", "exponents", "index")

    def __init__(self, num_vars: int, degree: int):
        self.num_vars = num_vars
        self.degree = degree
        self.size = checked_basis_size(num_vars, degree)
        self.exponents = _enumerate_exponents(num_vars, degree)
        self.index = {e: i for i, e in enumerate(self.exponents)}

    def rank(self, exponents: Sequence[int]) -> int:
        e = tuple(exponents)
        if len(e) != self.num_vars or any(x < 0 for x in e):
            raise ShapeError(
                f"expected {self.num_vars} non-negative exponents, got {e}")
        if sum(e) != self.degree:
            raise DegreeMismatchError(
                f"exponents {e} sum to {sum(e)}, expected degree {self.degree}")
        return self.index[e]

    def unrank(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.size:
            raise IndexError(
                f"monomial index {index} out of range for basis of {self.size}")
        return self.exponents[index]


@lru_cache(maxsize=None)
def _indexer_cached(num_vars: int, degree: int) -> MonomialIndexer:
    return MonomialIndexer(num_vars, degree)


def indexer(num_vars: int, degree: int) -> MonomialIndexer:
    """Shared MonomialIndexer for the given shape (capacity-checked)."""
    # Size check runs before consulting the cache so a lowered cap still bites.
    checked_basis_size(num_vars, degree)
    return _indexer_cached(num_vars, degree)


def monomial_rank(exponents: Sequence[int]) -> int:
    """Index of an exponent vector in its graded-lex basis."""
    e = tuple(exponents)
    return indexer(len(e), sum(e)).rank(e)


def monomial_unrank(index: int, num_vars: int, degree: int) -> tuple[int, ...]:
    """Exponent vector at ``index`` in the (num_vars, degree) basis."""
    return indexer(num_vars, degree).unrank(index)


@lru_cache(maxsize=None)
def _mul_table(num_vars: int, deg_a: int, deg_b: int) -> list[tuple[int, ...]]:
    """table[i][j] = rank of exponent sum of monomial i (deg_a) and j (deg_b)."""
    ia = indexer(num_vars, deg_a)
    ib = indexer(num_vars, deg_b)
    target = indexer(num_vars, deg_a + deg_b).index
    table = []
    for ea in ia.exponents:
        table.append(tuple(
            target[tuple(x + y for x, y in zip(ea, eb))]
            for eb in ib.exponents))
    return table


# ---------------------------------------------------------------------------
# Homogeneous polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HomPoly:
    """Immutable dense homogeneous polynomial.

    The zero polynomial is the all-zero coefficient vector; there is no
    separate flag.
    """

    field: ScalarField
    num_vars: int
    degree: int
    coeffs: tuple

    def __post_init__(self):
        expected = basis_size(self.num_vars, self.degree)
        if len(self.coeffs) != expected:
            raise ShapeError(
                f"coefficient vector has {len(self.coeffs)} entries, "
                f"expected {expected} for {self.num_vars} vars degree {self.degree}")

    @classmethod
    def zero(cls, field: ScalarField, num_vars: int, degree: int) -> "HomPoly":
        size = checked_basis_size(num_vars, degree)
        return cls(field, num_vars, degree, (field.zero(),) * size)

    @classmethod
    def variable(cls, field: ScalarField, num_vars: int, var: int) -> "HomPoly":
        """The degree-1 polynomial x_var."""
        if not 0 <= var < num_vars:
            raise ShapeError(f"variable index {var} out of range")
        coeffs = [field.zero()] * num_vars
        coeffs[var] = field.one()
        return cls(field, num_vars, 1, tuple(coeffs))

    @classmethod
    def from_terms(cls, field: ScalarField, num_vars: int, degree: int,
                   terms: Sequence[tuple]) -> "HomPoly":
        """Build from (coefficient, exponent-vector) pairs; later pairs add."""
        idx = indexer(num_vars, degree)
        coeffs = [field.zero()] * idx.size
        for coeff, exponents in terms:
            k = idx.rank(exponents)
            coeffs[k] = field.add(coeffs[k], coeff)
        return cls(field, num_vars, degree, tuple(coeffs))

    def is_zero(self) -> bool:
        fz = self.field.is_zero
        return all(fz(c) for c in self.coeffs)

    def add(self, other: "HomPoly") -> "HomPoly":
        _check_same_shape(self, other)
        fa = self.field.add
        return HomPoly(self.field, self.num_vars, self.degree,
                       tuple(fa(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    def scale(self, c) -> "HomPoly":
        fm = self.field.mul
        return HomPoly(self.field, self.num_vars, self.degree,
                       tuple(fm(c, a) for a in self.coeffs))

    def terms(self) -> list[tuple]:
        """Nonzero (coefficient, exponents) pairs in basis order."""
        idx = indexer(self.num_vars, self.degree)
        fz = self.field.is_zero
        return [(c, idx.exponents[i]) for i, c in enumerate(self.coeffs)
                if not fz(c)]


def _check_same_shape(p: HomPoly, q: HomPoly) -> None:
    if p.num_vars != q.num_vars or p.degree != q.degree or p.field != q.field:
        raise ShapeError(
            f"shape mismatch: ({p.num_vars} vars, deg {p.degree}, {p.field.kind}) "
            f"vs ({q.num_vars} vars, deg {q.degree}, {q.field.kind})")


def poly_mul(p: HomPoly, q: HomPoly) -> HomPoly:
    """Dense convolution product; degree adds."""
    if p.num_vars != q.num_vars or p.field != q.field:
        raise ShapeError("operands must share num_vars and field")
    field = p.field
    out_degree = p.degree + q.degree
    size = checked_basis_size(p.num_vars, out_degree)
    fz = field.is_zero

    if field.kind == "prime_field":
        return _poly_mul_prime(p, q, size)

    acc = [field.zero()] * size
    fa, fm = field.add, field.mul
    if len(p.coeffs) * len(q.coeffs) <= _MUL_TABLE_LIMIT:
        table = _mul_table(p.num_vars, p.degree, q.degree)
        for i, ca in enumerate(p.coeffs):
            if fz(ca):
                continue
            row = table[i]
            for j, cb in enumerate(q.coeffs):
                if not fz(cb):
                    k = row[j]
                    acc[k] = fa(acc[k], fm(ca, cb))
    else:
        ea_list = indexer(p.num_vars, p.degree).exponents
        eb_list = indexer(p.num_vars, q.degree).exponents
        target = indexer(p.num_vars, out_degree).index
        for i, ca in enumerate(p.coeffs):
            if fz(ca):
                continue
            ea = ea_list[i]
            for j, cb in enumerate(q.coeffs):
                if not fz(cb):
                    k = target[tuple(x + y for x, y in zip(ea, eb_list[j]))]
                    acc[k] = fa(acc[k], fm(ca, cb))
    return HomPoly(field, p.num_vars, out_degree, tuple(acc))


def _poly_mul_prime(p: HomPoly, q: HomPoly, size: int) -> HomPoly:
    # Hot path: raw int residues, one reduction per pair-product.
    prime = p.field.prime
    acc = [0] * size
    if len(p.coeffs) * len(q.coeffs) <= _MUL_TABLE_LIMIT:
        table = _mul_table(p.num_vars, p.degree, q.degree)
        for i, ca in enumerate(p.coeffs):
            if ca:
                row = table[i]
                for j, cb in enumerate(q.coeffs):
                    if cb:
                        k = row[j]
                        acc[k] = (acc[k] + ca * cb) % prime
    else:
        ea_list = indexer(p.num_vars, p.degree).exponents
        eb_list = indexer(p.num_vars, q.degree).exponents
        target = indexer(p.num_vars, p.degree + q.degree).index
        for i, ca in enumerate(p.coeffs):
            if ca:
                ea = ea_list[i]
                for j, cb in enumerate(q.coeffs):
                    if cb:
                        k = target[tuple(x + y for x, y in zip(ea, eb_list[j]))]
                        acc[k] = (acc[k] + ca * cb) % prime
    return HomPoly(p.field, p.num_vars, p.degree + q.degree, tuple(acc))


def poly_pow(p: HomPoly, r: int) -> HomPoly:
    """p**r by repeated squaring over dense convolution; r >= 1."""
    if r < 1:
        raise ValueError(f"exponent must be >= 1, got {r}")
    checked_basis_size(p.num_vars, p.degree * r)
    result = None
    base = p
    n = r
    while True:
        if n & 1:
            result = base if result is None else poly_mul(result, base)
        n >>= 1
        if not n:
            break
        base = poly_mul(base, base)
    return result


def linear_combination(polys: Sequence[HomPoly], row: Sequence) -> HomPoly:
    """Coefficient-wise weighted sum sum_j row[j] * polys[j]."""
    if not polys:
        raise ShapeError("need at least one polynomial")
    if len(polys) != len(row):
        raise ShapeError(f"{len(polys)} polynomials but {len(row)} weights")
    first = polys[0]
    for p in polys[1:]:
        _check_same_shape(first, p)
    field = first.field
    fz, fa, fm = field.is_zero, field.add, field.mul
    acc = [field.zero()] * len(first.coeffs)
    for weight, p in zip(row, polys):
        if fz(weight):
            continue
        acc = [fa(a, fm(weight, c)) for a, c in zip(acc, p.coeffs)]
    return HomPoly(field, first.num_vars, first.degree, tuple(acc))


def evaluate(p: HomPoly, point: Sequence) -> object:
    """Value of p at a point (one scalar per variable)."""
    if len(point) != p.num_vars:
        raise ShapeError(
            f"point has {len(point)} coordinates, expected {p.num_vars}")
    field = p.field
    fz, fa, fm = field.is_zero, field.add, field.mul
    exponents = indexer(p.num_vars, p.degree).exponents
    total = field.zero()
    for i, c in enumerate(p.coeffs):
        if fz(c):
            continue
        term = c
        for x, e in zip(point, exponents[i]):
            if e:
                term = fm(term, field.pow_int(x, e))
        total = fa(total, term)
    return total


# ---------------------------------------------------------------------------
# Univariate restriction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UniPoly:
    """Dense univariate polynomial; coeffs[i] is the coefficient of t**i.

    Trailing zero coefficients are allowed; degree() reports the honest value.
    """

    field: ScalarField
    coeffs: tuple

    def degree(self):
        fz = self.field.is_zero
        for i in range(len(self.coeffs) - 1, -1, -1):
            if not fz(self.coeffs[i]):
                return i
        return float("-inf")

    def is_zero(self) -> bool:
        fz = self.field.is_zero
        return all(fz(c) for c in self.coeffs)

    def add(self, other: "UniPoly") -> "UniPoly":
        if self.field != other.field:
            raise ShapeError("field mismatch")
        field = self.field
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [field.zero()] * (n - len(self.coeffs))
        b = list(other.coeffs) + [field.zero()] * (n - len(other.coeffs))
        return UniPoly(field, tuple(field.add(x, y) for x, y in zip(a, b)))

    def mul(self, other: "UniPoly") -> "UniPoly":
        if self.field != other.field:
            raise ShapeError("field mismatch")
        field = self.field
        fz, fa, fm = field.is_zero, field.add, field.mul
        out = [field.zero()] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if fz(a):
                continue
            for j, b in enumerate(other.coeffs):
                if not fz(b):
                    out[i + j] = fa(out[i + j], fm(a, b))
        return UniPoly(field, tuple(out))

    def scale(self, c) -> "UniPoly":
        fm = self.field.mul
        return UniPoly(self.field, tuple(fm(c, a) for a in self.coeffs))

    def equals(self, other: "UniPoly") -> bool:
        """Mathematical equality, ignoring trailing zeros."""
        n = max(len(self.coeffs), len(other.coeffs))
        field = self.field
        fz = field.is_zero
        for i in range(n):
            a = self.coeffs[i] if i < len(self.coeffs) else field.zero()
            b = other.coeffs[i] if i < len(other.coeffs) else field.zero()
            if not fz(field.sub(a, b)):
                return False
        return True


def restrict_to_line(p: HomPoly, base: Sequence, direction: Sequence) -> UniPoly:
    """q(t) = p(base + t * direction); degree <= deg(p), padded to deg(p)+1."""
    if len(base) != p.num_vars or len(direction) != p.num_vars:
        raise ShapeError(
            f"base/direction must have {p.num_vars} coordinates")
    field = p.field
    if all(field.is_zero(d) for d in direction):
        raise ShapeError("direction must be nonzero")
    fz = field.is_zero
    acc = UniPoly(field, (field.zero(),) * (p.degree + 1))
    exponents = indexer(p.num_vars, p.degree).exponents
    for i, c in enumerate(p.coeffs):
        if fz(c):
            continue
        term = UniPoly(field, (field.one(),))
        for b, d, e in zip(base, direction, exponents[i]):
            if e == 0:
                continue
            linear = UniPoly(field, (b, d))
            for _ in range(e):
                term = term.mul(linear)
        term = term.scale(c)
        padded = tuple(term.coeffs) + (field.zero(),) * (p.degree + 1 - len(term.coeffs))
        acc = acc.add(UniPoly(field, padded[:p.degree + 1]))
    return acc


# ---------------------------------------------------------------------------
# JSON encoding
# ---------------------------------------------------------------------------

MONOMIAL_ORDER = "graded_lex_descending"


def poly_to_json(p: HomPoly) -> dict:
    """{vars, degree, terms: [[coeff, [e...]], ...]} with nonzero terms only.

    Terms carry explicit exponent vectors, so the encoding is order-free;
    the order tag documents how coefficient vectors are laid out in memory.
    """
    return {
        "vars": p.num_vars,
        "degree": p.degree,
        "order": MONOMIAL_ORDER,
        "terms": [[p.field.encode(c), list(e)] for c, e in p.terms()],
    }


def poly_from_json(obj: dict, field: ScalarField) -> HomPoly:
    num_vars = int(obj["vars"])
    degree = int(obj["degree"])
    terms = [(field.decode(c), tuple(int(x) for x in e))
             for c, e in obj.get("terms", [])]
    return HomPoly.from_terms(field, num_vars, degree, terms)
