"""Architectures, weight tuples, and the weights-to-polynomials map.

A network with widths (d_0, ..., d_L) and activation degree r alternates
linear layers W_i with coordinate-wise r-th powers, producing d_L homogeneous
polynomials of degree r**(L-1) in d_0 variables.  Biases are structurally
absent.  forward() materializes every intermediate layer so the Jacobian
machinery can reuse the cache.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from typing import Sequence

from . import polycore
from .errors import ShapeError, SingularScalingError, UnsupportedFieldError
from .polycore import HomPoly, ScalarField, linear_combination, poly_mul, poly_pow


def derive_seed(master: int, *parts) -> int:
    """Stable 64-bit seed derived from a master seed and hashable parts."""
    h = hashlib.blake2b(repr((master,) + parts).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big")


@dataclass(frozen=True)
class Architecture:
    """Width sequence (d_0, ..., d_L) plus the activation degree r.

    r is ignored when L = 1 (no activation layer exists); r = 0 is only
    accepted in that case.
    """

    widths: tuple[int, ...]
    degree: int

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        if len(self.widths) < 2:
            raise ShapeError("need at least (d_0, d_1)")
        if any(w < 1 for w in self.widths):
            raise ShapeError(f"all widths must be >= 1, got {self.widths}")
        if self.num_layers >= 2 and self.degree < 1:
            raise ShapeError(
                f"activation degree must be >= 1 for L >= 2, got {self.degree}")
        if self.num_layers == 1 and self.degree < 0:
            raise ShapeError(f"activation degree must be >= 0, got {self.degree}")

    @classmethod
    def parse(cls, text: str, degree: int) -> "Architecture":
        """Build from the CLI width syntax "d0,d1,...,dL"."""
        try:
            widths = tuple(int(part) for part in text.split(","))
        except ValueError:
            raise ShapeError(f"cannot parse architecture {text!r}") from None
        return cls(widths, degree)

    @property
    def num_layers(self) -> int:
        return len(self.widths) - 1

    @property
    def in_width(self) -> int:
        return self.widths[0]

    @property
    def out_width(self) -> int:
        return self.widths[-1]

    @property
    def hidden_widths(self) -> tuple[int, ...]:
        return self.widths[1:-1]

    @property
    def out_degree(self) -> int:
        """Total degree of every output coordinate: r**(L-1)."""
        if self.num_layers == 1:
            return 1
        return self.degree ** (self.num_layers - 1)

    def arch_str(self) -> str:
        return ",".join(str(w) for w in self.widths)


def param_count(arch: Architecture) -> int:
    """Total number of weight entries across all layers."""
    w = arch.widths
    return sum(w[i] * w[i + 1] for i in range(arch.num_layers))


def ambient_dim(arch: Architecture) -> int:
    """Dimension of the output coefficient space, capacity-checked."""
    return arch.out_width * polycore.checked_basis_size(
        arch.in_width, arch.out_degree)


@dataclass(frozen=True)
class WeightSet:
    """One weight tuple (W_1, ..., W_L); W_i stored as a tuple of rows."""

    field: ScalarField
    matrices: tuple

    def __post_init__(self):
        mats = tuple(tuple(tuple(row) for row in m) for m in self.matrices)
        object.__setattr__(self, "matrices", mats)

    def check_shapes(self, arch: Architecture) -> None:
        if len(self.matrices) != arch.num_layers:
            raise ShapeError(
                f"{len(self.matrices)} matrices for an {arch.num_layers}-layer "
                f"architecture")
        for i, m in enumerate(self.matrices):
            rows, cols = arch.widths[i + 1], arch.widths[i]
            if len(m) != rows or any(len(r) != cols for r in m):
                raise ShapeError(
                    f"W_{i + 1} must be {rows}x{cols} for widths {arch.widths}")

    def to_json(self) -> dict:
        enc = self.field.encode
        return {
            "field": self.field.descriptor(),
            "matrices": [[[enc(x) for x in row] for row in m]
                         for m in self.matrices],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "WeightSet":
        field = polycore.field_from_descriptor(obj["field"])
        dec = field.decode
        mats = tuple(tuple(tuple(dec(x) for x in row) for row in m)
                     for m in obj["matrices"])
        return cls(field, mats)


def random_weights(arch: Architecture, field: ScalarField, seed: int) -> WeightSet:
    """Uniform random weights; deterministic given the seed.

    Prime field: uniform residues.  Complex float: uniform real entries in
    [-1, 1].  Exact rationals are rejected (genericity sampling is defined
    over the other two fields).
    """
    if field.kind == "exact_rational":
        raise UnsupportedFieldError(
            "random weights are not defined over exact rationals")
    rng = random.Random(seed)
    mats = []
    for i in range(arch.num_layers):
        rows, cols = arch.widths[i + 1], arch.widths[i]
        mats.append(tuple(
            tuple(field.random_scalar(rng) for _ in range(cols))
            for _ in range(rows)))
    return WeightSet(field, tuple(mats))


@dataclass(frozen=True)
class NetworkOutput:
    """The d_L output polynomials, all of degree r**(L-1) in d_0 variables."""

    polys: tuple[HomPoly, ...]


@dataclass
class LayerCache:
    """Per-layer values from one forward pass.

    pre_act[i] is the output of W_{i+1} (degree r**i); for non-final layers
    tangent_factor[i] holds r * pre_act[i][c] ** (r-1) coordinate-wise, the
    multiplier the chain rule applies to tangents crossing that activation
    (None when r = 1, where the activation is the identity).
    """

    inputs: list[HomPoly]
    pre_act: list[list[HomPoly]]
    post_act: list[list[HomPoly]]
    tangent_factor: list

    @property
    def output(self) -> list[HomPoly]:
        return self.pre_act[-1]


def _mat_apply(matrix, polys: Sequence[HomPoly]) -> list[HomPoly]:
    return [linear_combination(polys, row) for row in matrix]


def forward_layers(arch: Architecture, w: WeightSet) -> LayerCache:
    """Forward pass keeping every intermediate layer."""
    w.check_shapes(arch)
    field = w.field
    r = arch.degree
    inputs = [HomPoly.variable(field, arch.in_width, v)
              for v in range(arch.in_width)]
    # Guard the final basis before doing any layer work.
    polycore.checked_basis_size(arch.in_width, arch.out_degree)
    pre_act: list[list[HomPoly]] = []
    post_act: list[list[HomPoly]] = []
    factors: list = []
    current = inputs
    for layer in range(arch.num_layers):
        current = _mat_apply(w.matrices[layer], current)
        pre_act.append(current)
        if layer < arch.num_layers - 1:
            if r == 1:
                post_act.append(current)
                factors.append(None)
            else:
                activated = []
                layer_factors = []
                r_scalar = field.from_int(r)
                for q in current:
                    q_pow = q if r == 2 else poly_pow(q, r - 1)
                    activated.append(poly_mul(q_pow, q))
                    layer_factors.append(q_pow.scale(r_scalar))
                post_act.append(activated)
                factors.append(layer_factors)
            current = post_act[-1]
    return LayerCache(inputs=inputs, pre_act=pre_act, post_act=post_act,
                      tangent_factor=factors)


def forward(arch: Architecture, w: WeightSet) -> NetworkOutput:
    """Evaluate the parameter map at w."""
    return NetworkOutput(tuple(forward_layers(arch, w).output))


def vectorize(out: NetworkOutput | Sequence[HomPoly]) -> list:
    """Concatenated coefficient vectors of the output coordinates."""
    polys = out.polys if isinstance(out, NetworkOutput) else out
    flat: list = []
    for p in polys:
        flat.extend(p.coeffs)
    return flat


def apply_homogeneity(w: WeightSet, scalings: Sequence[Sequence],
                      perms: Sequence[Sequence[int]], r: int) -> WeightSet:
    """Rescale and permute weights along the fiber directions.

    scalings[i] holds the diagonal of D_{i+1} (length d_{i+1}, entries
    nonzero); perms[i] is the index form of P_{i+1}, mapping new row a to old
    row perms[i][a].  The replacement is
        W_1 -> P_1 D_1 W_1,
        W_i -> P_i D_i W_i D_{i-1}^{-r} P_{i-1}^T,
        W_L -> W_L D_{L-1}^{-r} P_{L-1}^T,
    which leaves the network map unchanged.
    """
    field = w.field
    L = len(w.matrices)
    if len(scalings) != L - 1 or len(perms) != L - 1:
        raise ShapeError(f"need {L - 1} scalings and permutations, got "
                         f"{len(scalings)} and {len(perms)}")
    for i, diag in enumerate(scalings):
        if len(diag) != len(w.matrices[i]):
            raise ShapeError(f"scaling {i + 1} has wrong length")
        if any(field.is_zero(x) for x in diag):
            raise SingularScalingError(
                f"diagonal scaling {i + 1} has a zero entry")
    for i, perm in enumerate(perms):
        if sorted(perm) != list(range(len(w.matrices[i]))):
            raise ShapeError(f"permutation {i + 1} is not a permutation")

    inv_pow = [
        [field.pow_int(field.inv(x), r) for x in diag] for diag in scalings
    ]
    new_mats = []
    for i, m in enumerate(w.matrices):
        rows = [list(row) for row in m]
        if i > 0:
            # Right-multiply by D_i^{-r} P_i^T: new column b pulls old
            # column perm[b], scaled by its inverse r-th power.
            perm, scale = perms[i - 1], inv_pow[i - 1]
            rows = [
                [field.mul(scale[perm[b]], row[perm[b]])
                 for b in range(len(row))]
                for row in rows
            ]
        if i < L - 1:
            # Left-multiply by P_{i+1} D_{i+1}: new row a is old row perm[a]
            # scaled by its diagonal entry.
            perm, diag = perms[i], scalings[i]
            rows = [
                [field.mul(diag[perm[a]], x) for x in rows[perm[a]]]
                for a in range(len(rows))
            ]
        new_mats.append(tuple(tuple(row) for row in rows))
    return WeightSet(field, tuple(new_mats))
