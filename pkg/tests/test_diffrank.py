import random
from fractions import Fraction

import numpy as np
import pytest
import sympy

from neurovariety import (
    Architecture,
    COMPLEX,
    HomPoly,
    RATIONAL,
    TangentPoly,
    WeightSet,
    ambient_dim,
    apply_homogeneity,
    forward,
    generic_rank,
    jacobian,
    param_count,
    poly_mul,
    poly_pow,
    prime_field,
    random_weights,
    rank,
    row_dependency,
    schwartz_zippel_bound,
    vectorize,
)


class TestJacobianEntries:
    def test_scalar_chain_by_hand(self):
        # p = w2 * w1^2 * x^2, so dp/dw1 = 2 w2 w1 x^2 and dp/dw2 = w1^2 x^2.
        f = prime_field()
        arch = Architecture((1, 1, 1), 2)
        w1, w2 = 1234567, 7654321
        w = WeightSet(f, (((w1,),), ((w2,),)))
        j = jacobian(arch, w)
        assert j == [[(2 * w2 * w1) % f.prime, (w1 * w1) % f.prime]]

    def test_final_layer_columns_are_activated_outputs(self):
        # For (2,1,1) the single W2 column is (w11 x + w12 y)^2.
        f = prime_field()
        arch = Architecture((2, 1, 1), 2)
        w = random_weights(arch, f, 8)
        j = jacobian(arch, w)
        w11, w12 = w.matrices[0][0]
        hidden = HomPoly(f, 2, 1, (w11, w12))
        expected = poly_pow(hidden, 2).coeffs
        assert tuple(row[2] for row in j) == expected

    def test_matches_central_finite_differences(self):
        arch = Architecture((2, 2, 2), 2)
        w = random_weights(arch, COMPLEX, 3)
        analytic = np.array(jacobian(arch, w), dtype=complex)
        h = 1e-6
        cols = []
        flat_positions = [(layer, i, j)
                          for layer, m in enumerate(w.matrices)
                          for i in range(len(m))
                          for j in range(len(m[0]))]
        for layer, i, j in flat_positions:
            def shifted(delta):
                mats = [list(list(row) for row in m) for m in w.matrices]
                mats[layer][i][j] += delta
                shifted_w = WeightSet(COMPLEX, tuple(
                    tuple(tuple(row) for row in m) for m in mats))
                return np.array(vectorize(forward(arch, shifted_w)),
                                dtype=complex)
            cols.append((shifted(h) - shifted(-h)) / (2 * h))
        numeric = np.stack(cols, axis=1)
        for c in range(analytic.shape[1]):
            denom = max(np.max(np.abs(analytic[:, c])), 1e-12)
            err = np.max(np.abs(analytic[:, c] - numeric[:, c])) / denom
            assert err < 1e-6

    def test_column_order_is_layer_then_row_major(self):
        f = prime_field()
        arch = Architecture((2, 1, 1), 2)
        w = random_weights(arch, f, 5)
        assert len(jacobian(arch, w)[0]) == param_count(arch) == 3


class TestTangentPoly:
    def test_product_rule_against_power_rule(self):
        # Dual-number repeated squaring must agree with r * p^(r-1) * dp.
        f = prime_field()
        rng = random.Random(99)
        for trial in range(50):
            num_vars = rng.choice((1, 2, 3))
            coeffs = lambda: tuple(f.random_scalar(rng)
                                   for _ in range(num_vars))
            p = HomPoly(f, num_vars, 1, coeffs())
            dp = HomPoly(f, num_vars, 1, coeffs())
            r = rng.randrange(2, 6)
            jet = TangentPoly(p, dp).pow(r)
            closed = poly_mul(poly_pow(p, r - 1), dp).scale(f.from_int(r))
            assert jet.value == poly_pow(p, r)
            assert jet.tangent == closed

    def test_shape_mismatch_rejected(self):
        f = prime_field()
        p = HomPoly(f, 2, 1, (1, 2))
        q = HomPoly(f, 2, 2, (1, 2, 3))
        with pytest.raises(ValueError):
            TangentPoly(p, q)


class TestRankEngines:
    def test_identity(self, fp):
        assert rank([[1, 0, 0], [0, 1, 0], [0, 0, 1]], fp) == 3

    def test_permuted_triangular(self, fp):
        assert rank([[1, 0, 0], [0, 0, 1], [1, 2, 1]], fp) == 3

    def test_proportional_rows(self, fp):
        assert rank([[1, 2], [2, 4]], fp) == 1

    def test_rational_rows(self):
        rows = [[Fraction(1, 2), Fraction(1, 3)],
                [Fraction(3, 2), Fraction(1)],
                [Fraction(2), Fraction(4, 3)]]
        assert rank(rows, RATIONAL) == 1

    def test_float_svd_rank(self):
        rows = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]]
        assert rank(rows, COMPLEX) == 2

    def test_zero_matrix(self, fp):
        assert rank([[0, 0], [0, 0]], fp) == 0

    def test_wide_matrix_memory_pattern(self, fp):
        # Many rows, few columns: the pivot basis stays at <= ncols rows.
        rng = random.Random(0)
        rows = [[rng.randrange(fp.prime) for _ in range(4)] for _ in range(200)]
        assert rank(rows, fp) == 4

    def test_against_sympy_on_random_integer_matrices(self, fp):
        rng = random.Random(21)
        for trial in range(10):
            m = rng.randrange(2, 6)
            n = rng.randrange(2, 6)
            entries = [[rng.randrange(-6, 7) for _ in range(n)]
                       for _ in range(m)]
            expected = sympy.Matrix(entries).rank()
            assert rank([[Fraction(x) for x in row] for row in entries],
                        RATIONAL) == expected
            assert rank([[x % fp.prime for x in row] for row in entries],
                        fp) == expected


class TestRowDependency:
    def test_certificate_kills_the_rows(self, fp):
        rows = [[1, 0], [0, 1], [3, 5]]
        rk, cert = row_dependency(rows, fp)
        assert rk == 2 and cert is not None
        combo = [0, 0]
        for a, row in zip(cert, rows):
            combo = [(c + a * x) % fp.prime for c, x in zip(combo, row)]
        assert combo == [0, 0]

    def test_independent_rows_have_no_certificate(self, fp):
        rk, cert = row_dependency([[1, 0], [0, 1]], fp)
        assert rk == 2 and cert is None


class TestGenericRank:
    def test_scalar_network(self):
        assert generic_rank(Architecture((1, 1, 1), 2), prime_field()).rank == 1

    def test_rank_one_quadrics_hypersurface(self):
        # Image is the rank-<=1 binary quadrics, a surface in 3-space.
        assert generic_rank(Architecture((2, 1, 1), 2), prime_field()).rank == 2

    def test_two_layer_equi_width(self):
        assert generic_rank(Architecture((2, 2, 2), 2), prime_field()).rank == 6

    def test_per_trial_ranks_bounded(self):
        arch = Architecture((2, 3, 2), 2)
        res = generic_rank(arch, prime_field(), trials=4, seed=1)
        bound = min(param_count(arch), ambient_dim(arch))
        assert all(r <= bound for r in res.per_trial_ranks)
        assert res.rank == max(res.per_trial_ranks)

    def test_rank_invariant_along_the_fiber(self):
        f = prime_field()
        arch = Architecture((2, 2, 2), 2)
        rng = random.Random(31)
        for trial in range(5):
            w = random_weights(arch, f, 100 + trial)
            base_rank = rank(jacobian(arch, w), f)
            d1 = [rng.randrange(1, f.prime) for _ in range(2)]
            perm = [1, 0] if trial % 2 else [0, 1]
            moved = apply_homogeneity(w, [d1], [perm], 2)
            assert rank(jacobian(arch, moved), f) == base_rank

    def test_rank_bounded_by_params_minus_hidden(self):
        # Fiber directions are in the kernel at every sample point.
        f = prime_field()
        for widths, r in (((2, 2, 2), 2), ((2, 3, 2), 3), ((3, 2, 2, 2), 2)):
            arch = Architecture(widths, r)
            w = random_weights(arch, f, 77)
            hidden = sum(widths[1:-1])
            assert rank(jacobian(arch, w), f) <= param_count(arch) - hidden

    def test_failure_bound_value(self):
        arch = Architecture((2, 2, 2), 2)
        f = prime_field()
        res = generic_rank(arch, f)
        # min(8, 6) = 6 and the coefficient weight-degree is 1 + r = 3.
        assert res.failure_bound == Fraction(12, f.prime)
        assert schwartz_zippel_bound(arch, COMPLEX) is None

    def test_failure_bound_degree_one_network(self):
        # r = 1: weight degree is L, and a single layer is exact (bound 0).
        f = prime_field()
        assert schwartz_zippel_bound(Architecture((2, 2), 1), f) == 0
        assert schwartz_zippel_bound(Architecture((2, 2, 2), 1), f) == \
            Fraction(4, f.prime)

    def test_float_field_generic_rank(self):
        assert generic_rank(Architecture((2, 2, 2), 2), COMPLEX).rank == 6

    def test_more_trials_never_decrease(self):
        arch = Architecture((2, 3, 1), 2)
        f = prime_field()
        r3 = generic_rank(arch, f, trials=3, seed=0)
        r5 = generic_rank(arch, f, trials=5, seed=0)
        assert r5.rank >= r3.rank
