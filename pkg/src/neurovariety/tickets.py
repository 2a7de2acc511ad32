"""Linear dependence of powers of a polynomial family.

The ticket of a family {f_1, ..., f_k} is the set of exponents m for which
{f_j^m} is linearly dependent.  Members are screened over the prime field
(fast), and when the family has exact rational provenance the screened
members are confirmed over the rationals so certificates are exact; a
screen-only hit (rank drop mod p that does not hold over Q) is recorded,
never silently dropped.  For pairwise non-proportional families every member
must satisfy m <= 8(k-1)^2 - 1; violations are flagged as counterexample
candidates.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .diffrank import row_dependency
from .errors import CapacityError, ComputationError, ShapeError, UnsupportedFieldError
from .polycore import (
    RATIONAL,
    HomPoly,
    ScalarField,
    linear_combination,
    poly_from_json,
    poly_pow,
    poly_to_json,
    prime_field,
)

SCHEMA_VERSION = 1


def ns_bound(k: int) -> int:
    """Largest exponent at which k pairwise non-proportional powers can sum to zero."""
    if k < 2:
        raise ValueError(f"need at least two polynomials, got k={k}")
    return 8 * (k - 1) ** 2 - 1


@dataclass(frozen=True)
class PolyFamily:
    """k >= 2 homogeneous polynomials of one shape over one field.

    exact_polys holds rational lifts when the family came from exact input;
    they drive the confirmation pass for screened ticket members.
    """

    polys: tuple[HomPoly, ...]
    field: ScalarField
    exact_polys: tuple[HomPoly, ...] | None = None

    def __post_init__(self):
        if len(self.polys) < 2:
            raise ShapeError("a family needs at least two polynomials")
        first = self.polys[0]
        for p in self.polys:
            if (p.num_vars, p.degree) != (first.num_vars, first.degree):
                raise ShapeError("all family members must share num_vars and degree")
            if p.field != self.field:
                raise ShapeError("family members must live over the family field")
        if self.exact_polys is not None and len(self.exact_polys) != len(self.polys):
            raise ShapeError("exact lifts must match the family size")

    @property
    def size(self) -> int:
        return len(self.polys)

    @classmethod
    def from_exact(cls, polys: Sequence[HomPoly],
                   work_field: ScalarField | None = None) -> "PolyFamily":
        """Rational family plus its image in the working prime field."""
        if work_field is None:
            work_field = prime_field()
        exact = tuple(polys)
        for p in exact:
            if p.field != RATIONAL:
                raise UnsupportedFieldError("from_exact expects rational polynomials")
        if work_field == RATIONAL:
            return cls(exact, RATIONAL, exact)
        mapped = tuple(
            HomPoly(work_field, p.num_vars, p.degree,
                    tuple(work_field.from_rational(c) for c in p.coeffs))
            for p in exact)
        return cls(mapped, work_field, exact)

    @classmethod
    def from_json(cls, objs: Sequence[dict], field: ScalarField | None = None,
                  work_field: ScalarField | None = None) -> "PolyFamily":
        """Load a family from the polynomial JSON list format.

        Exact rational input (the default when no field is given) keeps its
        lifts for certificate confirmation.
        """
        if field is None:
            field = RATIONAL
        polys = tuple(poly_from_json(o, field) for o in objs)
        if field == RATIONAL:
            return cls.from_exact(polys, work_field)
        return cls(polys, field)

    def to_json(self) -> list[dict]:
        source = self.exact_polys if self.exact_polys is not None else self.polys
        return [poly_to_json(p) for p in source]


def builtin_family(work_field: ScalarField | None = None) -> PolyFamily:
    """The stock example family {x, y, x+y, x-y}."""
    one = RATIONAL.one()
    minus = RATIONAL.neg(one)
    x = HomPoly(RATIONAL, 2, 1, (one, RATIONAL.zero()))
    y = HomPoly(RATIONAL, 2, 1, (RATIONAL.zero(), one))
    x_plus_y = HomPoly(RATIONAL, 2, 1, (one, one))
    x_minus_y = HomPoly(RATIONAL, 2, 1, (one, minus))
    return PolyFamily.from_exact((x, y, x_plus_y, x_minus_y), work_field)


def random_family(k: int, num_vars: int, degree: int, seed: int,
                  field: ScalarField | None = None,
                  require_nonproportional: bool = True) -> PolyFamily:
    """Uniform random family over the prime field; deterministic given seed."""
    if field is None:
        field = prime_field()
    if field.kind != "prime_field":
        raise UnsupportedFieldError("random families are sampled over a prime field")
    rng = random.Random(seed)
    size = len(HomPoly.zero(field, num_vars, degree).coeffs)
    for _ in range(100):
        polys = tuple(
            HomPoly(field, num_vars, degree,
                    tuple(field.random_scalar(rng) for _ in range(size)))
            for _ in range(k))
        family = PolyFamily(polys, field)
        if not require_nonproportional or pairwise_nonproportional(family):
            return family
    raise ComputationError("could not sample a pairwise non-proportional family")


def _proportional(p: HomPoly, q: HomPoly, field: ScalarField) -> bool:
    """True iff q = c*p or p = c*q for some scalar c (zero polys count)."""
    fz = field.is_zero
    lead = next((i for i, c in enumerate(p.coeffs) if not fz(c)), None)
    if lead is None:
        return True
    if fz(q.coeffs[lead]):
        # p has a nonzero coefficient where q may not; proportional only if
        # q is a zero multiple, i.e. q = 0.
        return all(fz(c) for c in q.coeffs)
    ratio = field.div(q.coeffs[lead], p.coeffs[lead])
    return all(
        fz(field.sub(cq, field.mul(ratio, cp)))
        for cp, cq in zip(p.coeffs, q.coeffs))


def pairwise_nonproportional(family: PolyFamily) -> bool:
    """True iff no two members are scalar multiples of each other."""
    if not family.field.exact:
        raise UnsupportedFieldError(
            "proportionality tests are defined over exact fields")
    polys = family.polys
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            if _proportional(polys[i], polys[j], family.field):
                return False
    return True


def powers_dependent(family: PolyFamily, m: int,
                     use_exact: bool = False) -> tuple[bool, tuple | None]:
    """Whether {f_j^m} is linearly dependent, with a verified certificate.

    The certificate alpha is a nonzero scalar vector with
    sum_j alpha[j] * f_j^m = 0, re-verified by expansion before returning.
    """
    if m < 1:
        raise ValueError(f"power must be >= 1, got {m}")
    polys = family.exact_polys if use_exact else family.polys
    if use_exact and polys is None:
        raise UnsupportedFieldError("family carries no exact lift")
    field = RATIONAL if use_exact else family.field
    powers = [poly_pow(p, m) for p in polys]
    rows = [p.coeffs for p in powers]
    rk, cert = row_dependency(rows, field)
    if rk == len(polys):
        return False, None
    if cert is None or all(field.is_zero(c) for c in cert):
        raise ComputationError("rank deficit without a kernel certificate")
    if not linear_combination(powers, cert).is_zero():
        raise ComputationError("kernel certificate failed re-verification")
    return True, tuple(cert)


@dataclass(frozen=True)
class TicketReport:
    """Dependent exponents in [1, m_max] with certificates and bound checks.

    members is complete for the inspected range only; nothing is claimed
    beyond m_max.  bound_violations lists members above the k-based bound
    for pairwise non-proportional families (counterexample candidates).
    screen_rejections lists exponents whose prime-field dependence did not
    survive rational confirmation.
    """

    m_max: int
    members: tuple[int, ...]
    certificates: dict
    certificate_field: ScalarField
    pairwise_proportional: bool
    ns_bound: int
    bound_violations: tuple[int, ...]
    screen_rejections: tuple[int, ...]
    errors: dict

    def to_json_dict(self) -> dict:
        enc = self.certificate_field.encode
        return {
            "schema_version": SCHEMA_VERSION,
            "m_max": self.m_max,
            "members": list(self.members),
            "certificates": {str(m): [enc(c) for c in cert]
                             for m, cert in sorted(self.certificates.items())},
            "certificate_field": self.certificate_field.descriptor(),
            "pairwise_proportional": self.pairwise_proportional,
            "ns_bound": self.ns_bound,
            "bound_violations": list(self.bound_violations),
            "screen_rejections": list(self.screen_rejections),
            "errors": {str(m): msg for m, msg in sorted(self.errors.items())},
        }


def ticket(family: PolyFamily, m_max: int) -> TicketReport:
    """Scan m = 1..m_max for dependent power families.

    Per-exponent capacity failures are recorded and the scan continues.
    """
    if m_max < 1:
        raise ValueError(f"m_max must be >= 1, got {m_max}")
    proportional = not pairwise_nonproportional(family)
    confirm = family.exact_polys is not None and family.field != RATIONAL
    members: list[int] = []
    certificates: dict[int, tuple] = {}
    rejections: list[int] = []
    errors: dict[int, str] = {}
    cert_field = RATIONAL if (confirm or family.field == RATIONAL) else family.field
    for m in range(1, m_max + 1):
        try:
            dependent, cert = powers_dependent(family, m)
        except CapacityError as exc:
            errors[m] = str(exc)
            continue
        if not dependent:
            continue
        if confirm:
            dependent_q, cert_q = powers_dependent(family, m, use_exact=True)
            if not dependent_q:
                rejections.append(m)
                continue
            cert = cert_q
        members.append(m)
        certificates[m] = cert
    bound = ns_bound(family.size)
    violations = () if proportional else tuple(m for m in members if m > bound)
    return TicketReport(
        m_max=m_max,
        members=tuple(members),
        certificates=certificates,
        certificate_field=cert_field,
        pairwise_proportional=proportional,
        ns_bound=bound,
        bound_violations=violations,
        screen_rejections=tuple(rejections),
        errors=errors,
    )
