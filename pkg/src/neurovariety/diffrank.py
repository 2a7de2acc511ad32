"""Jacobian of the weights-to-coefficients map and generic-rank estimation.

The Jacobian column for one weight entry is computed by forward-mode tangent
propagation: seed the tangent at that entry's layer, push it through the
remaining layers with the chain rule (a tangent crossing the degree-r
activation picks up the cached factor r * q**(r-1)), and vectorize.  The
per-layer value cache from the forward pass is shared across all columns.

Exact rank over the prime field is the default truth source: rows are
reduced incrementally against a pivot basis of at most param_count rows, so
memory stays O(params^2) however large the ambient space is.  Floating-point
rank (SVD) exists for cross-checks only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import UnsupportedFieldError
from .network import (
    Architecture,
    WeightSet,
    ambient_dim,
    derive_seed,
    forward_layers,
    param_count,
    random_weights,
)
from .polycore import HomPoly, ScalarField, poly_mul


@dataclass(frozen=True)
class TangentPoly:
    """First-order jet value + eps * tangent with eps**2 = 0."""

    value: HomPoly
    tangent: HomPoly

    def __post_init__(self):
        v, t = self.value, self.tangent
        if (v.num_vars, v.degree, v.field) != (t.num_vars, t.degree, t.field):
            raise ValueError("value and tangent must share shape and field")

    def add(self, other: "TangentPoly") -> "TangentPoly":
        return TangentPoly(self.value.add(other.value),
                           self.tangent.add(other.tangent))

    def mul(self, other: "TangentPoly") -> "TangentPoly":
        # Product rule: (v + eps t)(v' + eps t') = vv' + eps(vt' + tv').
        return TangentPoly(
            poly_mul(self.value, other.value),
            poly_mul(self.value, other.tangent).add(
                poly_mul(self.tangent, other.value)))

    def pow(self, r: int) -> "TangentPoly":
        """Jet of value**r by repeated squaring in the dual arithmetic."""
        if r < 1:
            raise ValueError(f"exponent must be >= 1, got {r}")
        result = None
        base = self
        n = r
        while True:
            if n & 1:
                result = base if result is None else result.mul(base)
            n >>= 1
            if not n:
                break
            base = base.mul(base)
        return result


def jacobian(arch: Architecture, w: WeightSet) -> list[list]:
    """Jacobian matrix, ambient_dim rows by param_count columns.

    Column order follows the weight layout: layers W_1..W_L, each row-major.
    """
    cache = forward_layers(arch, w)
    L = arch.num_layers
    layer_inputs = [cache.inputs] + cache.post_act  # inputs seen by W_1..W_L
    columns = []
    for layer in range(L):
        for j in range(arch.widths[layer + 1]):
            for k in range(arch.widths[layer]):
                columns.append(_tangent_column(arch, w, cache, layer_inputs,
                                               layer, j, k))
    n_rows = ambient_dim(arch)
    return [[columns[c][r] for c in range(len(columns))]
            for r in range(n_rows)]


def _tangent_column(arch, w, cache, layer_inputs, layer, j, k):
    """vectorize(d p_w / d (W_{layer+1})[j,k]) via one tangent pass."""
    field = w.field
    L = arch.num_layers
    source = layer_inputs[layer][k]
    # Tangent of the layer's pre-activation output: e_j * source.
    tangent: list[HomPoly | None] = [None] * arch.widths[layer + 1]
    tangent[j] = source
    for t in range(layer, L - 1):
        factors = cache.tangent_factor[t]
        if factors is not None:
            tangent = [None if g is None else poly_mul(factors[c], g)
                       for c, g in enumerate(tangent)]
        tangent = _sparse_mat_apply(field, w.matrices[t + 1], tangent)
    flat = []
    zero_block = None
    for g in tangent:
        if g is None:
            if zero_block is None:
                zero_block = [field.zero()] * len(cache.output[0].coeffs)
            flat.extend(zero_block)
        else:
            flat.extend(g.coeffs)
    return flat


def _sparse_mat_apply(field, matrix, polys):
    """Matrix times a polynomial vector where None marks a zero entry."""
    live = [(idx, p) for idx, p in enumerate(polys) if p is not None]
    out = []
    for row in matrix:
        acc = None
        for idx, p in live:
            if field.is_zero(row[idx]):
                continue
            scaled = p.scale(row[idx])
            acc = scaled if acc is None else acc.add(scaled)
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# Rank engines
# ---------------------------------------------------------------------------

def rank(matrix: Sequence[Sequence], field: ScalarField) -> int:
    """Rank of a matrix given as rows, exact or numeric per the field."""
    rows = [row for row in matrix]
    if not rows:
        return 0
    if field.kind == "prime_field":
        return _rank_prime(rows, field.prime)
    if field.exact:
        return _rank_exact(rows, field)
    return _rank_float(rows)


def _rank_prime(rows, p: int) -> int:
    ncols = len(rows[0])
    pivots: dict[int, list[int]] = {}
    for row in rows:
        r = [x % p for x in row]
        for pc in sorted(pivots):
            f = r[pc]
            if f:
                prow = pivots[pc]
                r = [(a - f * b) % p for a, b in zip(r, prow)]
        lead = next((c for c, x in enumerate(r) if x), None)
        if lead is None:
            continue
        inv = pow(r[lead], -1, p)
        pivots[lead] = [(x * inv) % p for x in r]
        if len(pivots) == ncols:
            break
    return len(pivots)


def _rank_exact(rows, field: ScalarField) -> int:
    ncols = len(rows[0])
    fz, fs, fm, fi = field.is_zero, field.sub, field.mul, field.inv
    pivots: dict[int, list] = {}
    for row in rows:
        r = list(row)
        for pc in sorted(pivots):
            f = r[pc]
            if not fz(f):
                prow = pivots[pc]
                r = [fs(a, fm(f, b)) for a, b in zip(r, prow)]
        lead = next((c for c, x in enumerate(r) if not fz(x)), None)
        if lead is None:
            continue
        inv = fi(r[lead])
        pivots[lead] = [fm(inv, x) for x in r]
        if len(pivots) == ncols:
            break
    return len(pivots)


def _rank_float(rows) -> int:
    a = np.asarray(rows, dtype=complex)
    if a.size == 0:
        return 0
    sigma = np.linalg.svd(a, compute_uv=False)
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    tol = max(a.shape) * 1e-10 * sigma[0]
    return int(np.count_nonzero(sigma > tol))


def row_dependency(rows: Sequence[Sequence], field: ScalarField):
    """(rank, alpha) where alpha is a left-kernel vector, or None.

    alpha satisfies sum_i alpha[i] * rows[i] = 0 exactly; it is taken from
    the first incoming row that reduces to zero, so its last nonzero entry
    sits at that row's index.  Exact fields only.
    """
    if not field.exact:
        raise UnsupportedFieldError("dependency certificates need an exact field")
    rows = [list(r) for r in rows]
    if not rows:
        return 0, None
    n = len(rows)
    ncols = len(rows[0])
    fz, fs, fm, fi = field.is_zero, field.sub, field.mul, field.inv
    one, zero = field.one(), field.zero()
    pivots: dict[int, tuple[list, list]] = {}
    rk = 0
    witness = None
    for i, row in enumerate(rows):
        r = list(row)
        aug = [zero] * n
        aug[i] = one
        for pc in sorted(pivots):
            f = r[pc]
            if not fz(f):
                prow, paug = pivots[pc]
                r = [fs(a, fm(f, b)) for a, b in zip(r, prow)]
                aug = [fs(a, fm(f, b)) for a, b in zip(aug, paug)]
        lead = next((c for c, x in enumerate(r) if not fz(x)), None)
        if lead is None:
            if witness is None:
                witness = aug
            continue
        inv = fi(r[lead])
        pivots[lead] = ([fm(inv, x) for x in r], [fm(inv, x) for x in aug])
        rk += 1
    return rk, witness


# ---------------------------------------------------------------------------
# Generic rank
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RankResult:
    """Generic-rank estimate with per-trial evidence and the error bound."""

    rank: int
    trials: int
    per_trial_ranks: tuple[int, ...]
    field: ScalarField
    seed: int
    failure_bound: Fraction | None

    def failure_bound_str(self) -> str | None:
        return None if self.failure_bound is None else str(self.failure_bound)


def coefficient_weight_degree(arch: Architecture) -> int:
    """Degree in the weights of every output coefficient: 1 + r + ... + r^(L-1)."""
    r, L = arch.degree, arch.num_layers
    if r == 1:
        return L
    return (r ** L - 1) // (r - 1)


def schwartz_zippel_bound(arch: Architecture, field: ScalarField) -> Fraction | None:
    """Per-trial probability bound for underestimating the Jacobian rank.

    A rank-m minor of the Jacobian has weight-degree at most m * (e - 1)
    where e is the coefficient weight-degree, so a uniform prime-field
    sample misses a nonzero minor with probability at most m(e-1)/p.
    """
    if field.kind != "prime_field":
        return None
    m = min(param_count(arch), ambient_dim(arch))
    e = coefficient_weight_degree(arch)
    return Fraction(m * (e - 1), field.prime)


def generic_rank(arch: Architecture, field: ScalarField, trials: int = 3,
                 seed: int = 0) -> RankResult:
    """Max Jacobian rank over independently sampled weight sets."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if field.kind not in ("prime_field", "complex_float"):
        raise UnsupportedFieldError(
            f"generic rank sampling is defined over prime_field or "
            f"complex_float, not {field.kind}")
    per_trial = []
    for t in range(trials):
        w = random_weights(arch, field, derive_seed(seed, "trial", t))
        per_trial.append(rank(jacobian(arch, w), field))
    return RankResult(
        rank=max(per_trial),
        trials=trials,
        per_trial_ranks=tuple(per_trial),
        field=field,
        seed=seed,
        failure_bound=schwartz_zippel_bound(arch, field),
    )
