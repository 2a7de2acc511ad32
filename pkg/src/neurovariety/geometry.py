"""Dimension, defect, activation-threshold and zero-witness analysis.

The dimension of the representable-function space is computed operationally
as the maximum Jacobian rank over random prime-field weight samples, so every
report carries the per-trial ranks and the Schwartz-Zippel failure bound:
the value is a lower bound on the true generic rank with quantified
confidence, and edim bounds it from above.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .diffrank import RankResult, generic_rank
from .errors import (
    CapacityError,
    ComputationError,
    ConditioningError,
    ShapeError,
    UnsupportedFieldError,
)
from .network import (
    Architecture,
    WeightSet,
    ambient_dim,
    apply_homogeneity,
    derive_seed,
    forward,
    param_count,
    random_weights,
    vectorize,
)
from .polycore import ScalarField, evaluate, prime_field

SCHEMA_VERSION = 1

PARAMETER_COUNT = "parameter_count"
AMBIENT_SPACE = "ambient_space"

# zero_witness numeric policy
SINGULAR_RTOL = 1e-8
CONDITION_LIMIT = 1e10
RESIDUAL_RTOL = 1e-6


def edim(arch: Architecture) -> tuple[int, str]:
    """Expected dimension and which side of the min was active.

    min{ d_L + sum_i (d_i d_{i+1} - d_{i+1}),  d_L * C(d_0 + r^(L-1) - 1,
    r^(L-1)) }; ties report the parameter-count branch.
    """
    w = arch.widths
    by_params = w[-1] + sum(w[i] * w[i + 1] - w[i + 1]
                            for i in range(arch.num_layers))
    by_ambient = ambient_dim(arch)
    if by_params <= by_ambient:
        return by_params, PARAMETER_COUNT
    return by_ambient, AMBIENT_SPACE


def threshold_bound(widths: Sequence[int]) -> int:
    """Closed-form activation-threshold bound 8*(2*max hidden - 1)^2 - 1.

    Returns 0 for single-layer architectures, whose threshold is 0.
    """
    widths = tuple(widths)
    if len(widths) < 2:
        raise ShapeError("need at least (d_0, d_1)")
    hidden = widths[1:-1]
    if not hidden:
        return 0
    return 8 * (2 * max(hidden) - 1) ** 2 - 1


@dataclass(frozen=True)
class DimensionReport:
    """Everything measured for one (architecture, activation degree)."""

    arch: tuple[int, ...]
    degree: int
    params: int
    ambient: int
    dim: int
    edim: int
    edim_branch: str
    defect: int
    fiber_dim: int
    rank_result: RankResult
    elapsed_ms: float

    def to_json_dict(self) -> dict:
        rr = self.rank_result
        return {
            "schema_version": SCHEMA_VERSION,
            "arch": list(self.arch),
            "degree": self.degree,
            "field": rr.field.descriptor(),
            "seed": rr.seed,
            "trials": rr.trials,
            "params": self.params,
            "ambient": self.ambient,
            "rank_per_trial": list(rr.per_trial_ranks),
            "dim": self.dim,
            "edim": self.edim,
            "edim_branch": self.edim_branch,
            "defect": self.defect,
            "fiber_dim": self.fiber_dim,
            "sz_failure_bound": rr.failure_bound_str(),
            "elapsed_ms": self.elapsed_ms,
        }


def dim(arch: Architecture, field: ScalarField | None = None,
        trials: int = 3, seed: int = 0) -> DimensionReport:
    """Dimension report: dim as generic Jacobian rank, defect and fiber derived."""
    if field is None:
        field = prime_field()
    started = time.perf_counter()
    rank_result = generic_rank(arch, field, trials=trials, seed=seed)
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    expected, branch = edim(arch)
    d = rank_result.rank
    return DimensionReport(
        arch=arch.widths,
        degree=arch.degree,
        params=param_count(arch),
        ambient=ambient_dim(arch),
        dim=d,
        edim=expected,
        edim_branch=branch,
        defect=expected - d,
        fiber_dim=param_count(arch) - d,
        rank_result=rank_result,
        elapsed_ms=elapsed_ms,
    )


@dataclass(frozen=True)
class ThresholdReport:
    """Empirical activation-threshold probe over degrees 1..r_max.

    estimated_threshold is only verified up to verified_up_to: the true
    threshold is a statement about all larger degrees and is never claimed.
    """

    arch: tuple[int, ...]
    r_max: int
    deficient_degrees: tuple[int, ...]
    estimated_threshold: int
    theoretical_bound: int
    verified_up_to: int
    bound_hypothesis_met: bool
    reports: dict
    errors: dict

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "arch": list(self.arch),
            "probed_range": [1, self.r_max],
            "deficient_degrees": list(self.deficient_degrees),
            "estimated_threshold": self.estimated_threshold,
            "theoretical_bound": self.theoretical_bound,
            "verified_up_to": self.verified_up_to,
            "bound_hypothesis_met": self.bound_hypothesis_met,
            "reports": {str(r): rep.to_json_dict()
                        for r, rep in sorted(self.reports.items())},
            "errors": {str(r): msg for r, msg in sorted(self.errors.items())},
        }


def threshold_probe(widths: Sequence[int], r_max: int,
                    field: ScalarField | None = None, trials: int = 3,
                    seed: int = 0) -> ThresholdReport:
    """Run dim for every degree in 1..r_max and collect deficiencies.

    Capacity failures at large degrees are recorded per degree and do not
    abort the sweep.
    """
    widths = tuple(widths)
    if r_max < 1:
        raise ValueError(f"r_max must be >= 1, got {r_max}")
    reports: dict[int, DimensionReport] = {}
    errors: dict[int, str] = {}
    for r in range(1, r_max + 1):
        try:
            reports[r] = dim(Architecture(widths, r), field=field,
                             trials=trials, seed=derive_seed(seed, "degree", r))
        except CapacityError as exc:
            errors[r] = str(exc)
    deficient = tuple(r for r, rep in sorted(reports.items()) if rep.defect > 0)
    hidden = widths[1:-1]
    return ThresholdReport(
        arch=widths,
        r_max=r_max,
        deficient_degrees=deficient,
        estimated_threshold=max(deficient, default=0),
        theoretical_bound=threshold_bound(widths),
        verified_up_to=r_max,
        bound_hypothesis_met=all(w > 1 for w in widths[1:]),
        reports=reports,
        errors=errors,
    )


@dataclass(frozen=True)
class HomogeneityCheck:
    """Outcome of randomized weight-rescaling invariance trials."""

    arch: tuple[int, ...]
    degree: int
    trials: int
    passed: bool
    failed_seed: int | None

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "arch": list(self.arch),
            "degree": self.degree,
            "trials": self.trials,
            "passed": self.passed,
            "failed_seed": self.failed_seed,
        }


def homogeneity_check(arch: Architecture, trials: int = 100, seed: int = 0,
                      field: ScalarField | None = None) -> HomogeneityCheck:
    """Assert exact output equality under random scaled-permutation rewrites."""
    if arch.num_layers < 2:
        raise ShapeError("homogeneity check needs at least two layers")
    if field is None:
        field = prime_field()
    if not field.exact:
        raise UnsupportedFieldError("homogeneity check requires an exact field")
    for t in range(trials):
        trial_seed = derive_seed(seed, "homogeneity", t)
        rng = random.Random(trial_seed)
        w = random_weights(arch, field, derive_seed(trial_seed, "w"))
        scalings = []
        perms = []
        for width in arch.hidden_widths:
            scalings.append([_random_nonzero(field, rng) for _ in range(width)])
            perm = list(range(width))
            rng.shuffle(perm)
            perms.append(perm)
        rewritten = apply_homogeneity(w, scalings, perms, arch.degree)
        if vectorize(forward(arch, w)) != vectorize(forward(arch, rewritten)):
            return HomogeneityCheck(arch.widths, arch.degree, trials,
                                    passed=False, failed_seed=trial_seed)
    return HomogeneityCheck(arch.widths, arch.degree, trials,
                            passed=True, failed_seed=None)


def _random_nonzero(field: ScalarField, rng):
    while True:
        x = field.random_scalar(rng)
        if not field.is_zero(x):
            return x


@dataclass(frozen=True)
class FiberCheck:
    """params - dim against the hidden-width lower bound."""

    arch: tuple[int, ...]
    degree: int
    fiber_dim: int
    lower_bound: int
    ok: bool
    report: DimensionReport

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "arch": list(self.arch),
            "degree": self.degree,
            "fiber_dim": self.fiber_dim,
            "lower_bound": self.lower_bound,
            "ok": self.ok,
            "report": self.report.to_json_dict(),
        }


def fiber_check(arch: Architecture, field: ScalarField | None = None,
                trials: int = 3, seed: int = 0) -> FiberCheck:
    """Check fiber_dim >= sum of hidden widths (trivial bound 0 when L=1)."""
    report = dim(arch, field=field, trials=trials, seed=seed)
    bound = sum(arch.hidden_widths)
    return FiberCheck(
        arch=arch.widths,
        degree=arch.degree,
        fiber_dim=report.fiber_dim,
        lower_bound=bound,
        ok=report.fiber_dim >= bound,
        report=report,
    )


# ---------------------------------------------------------------------------
# Zero witness (equi-width, complex floats)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroWitness:
    """Nontrivial zero of an equi-width network, with numeric evidence."""

    point: tuple[complex, ...]
    residual: float
    singular_layer_index: int

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "found": True,
            "point": [[z.real, z.imag] for z in self.point],
            "residual": self.residual,
            "singular_layer_index": self.singular_layer_index,
        }


def zero_witness(w: WeightSet, r: int) -> ZeroWitness | None:
    """Construct a nontrivial zero when some weight matrix is singular.

    Takes a kernel vector of the first numerically singular W_i and pulls it
    back through the earlier layers, alternating invertible solves with
    coordinate-wise principal complex r-th roots.  Returns None when every
    matrix is numerically invertible (the network then has only the trivial
    zero).
    """
    if w.field.kind != "complex_float":
        raise UnsupportedFieldError("zero witness runs over complex floats")
    mats = [np.array(m, dtype=complex) for m in w.matrices]
    d = mats[0].shape[1]
    for i, m in enumerate(mats):
        if m.shape != (d, d):
            raise ShapeError(
                f"W_{i + 1} is {m.shape[0]}x{m.shape[1]}; the zero-witness "
                f"recipe needs an equi-width architecture (all {d}x{d})")
    if r < 1:
        raise ValueError(f"activation degree must be >= 1, got {r}")

    singular_index = None
    kernel_vec = None
    for i, m in enumerate(mats):
        _, sigma, vh = np.linalg.svd(m)
        if sigma[-1] < SINGULAR_RTOL * sigma[0]:
            singular_index = i + 1
            kernel_vec = vh[-1].conj()
            break
    if singular_index is None:
        return None

    point = kernel_vec
    for j in range(singular_index - 1, 0, -1):
        point = point.astype(complex) ** (1.0 / r)
        if np.linalg.cond(mats[j - 1]) > CONDITION_LIMIT:
            raise ConditioningError(
                f"W_{j} is too ill-conditioned to invert reliably")
        point = np.linalg.solve(mats[j - 1], point)
    scale_at = int(np.argmax(np.abs(point)))
    if np.abs(point[scale_at]) == 0.0:
        raise ComputationError("pullback collapsed to the zero vector")
    point = point / point[scale_at]

    arch = Architecture((d,) * (len(mats) + 1), r)
    polys = forward(arch, w).polys
    coeff_scale = max((abs(c) for p in polys for c in p.coeffs), default=0.0)
    residual = max(abs(evaluate(p, tuple(point))) for p in polys)
    if coeff_scale > 0.0 and residual > RESIDUAL_RTOL * coeff_scale:
        raise ComputationError(
            f"constructed point has residual {residual:.3e}, above tolerance")
    return ZeroWitness(
        point=tuple(complex(z) for z in point),
        residual=float(residual),
        singular_layer_index=singular_index,
    )
