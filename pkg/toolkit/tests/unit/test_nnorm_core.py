import math

import numpy as np
from django.test import SimpleTestCase, override_settings
from hypothesis import given, settings as hypothesis_settings, strategies as st
from hypothesis.extra.numpy import arrays

from toolkit.exceptions import (
    DimensionMismatchError,
    InvalidParameterError,
    NonFiniteInputError,
    NumericalBreakdownError,
)
from toolkit.nnorm_core import (
    AXIOM_NAMES,
    NormParams,
    check_axioms,
    gram_2_norm,
    is_linearly_independent,
    lp_n_norm,
    ordered_tuple_n_norm,
)

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


def params_for(rows, p=2.0):
    return NormParams.for_vectors(rows, p)


class LpNNormTests(SimpleTestCase):

    def test_orthonormal_pair_has_unit_norm(self):
        rows = [[1.0, 0.0], [0.0, 1.0]]
        self.assertEqual(lp_n_norm(rows, params_for(rows)), 1.0)

    def test_single_determinant_at_p1(self):
        rows = [[1.0, 2.0], [3.0, 4.0]]
        self.assertAlmostEqual(lp_n_norm(rows, params_for(rows, 1.0)), 2.0, places=12)

    def test_all_minors_are_summed(self):
        rows = [[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]
        self.assertAlmostEqual(lp_n_norm(rows, params_for(rows)), math.sqrt(2.0), places=12)

    def test_dependent_rows_give_zero(self):
        rows = [[1.0, 2.0], [2.0, 4.0]]
        self.assertEqual(lp_n_norm(rows, params_for(rows)), 0.0)

    def test_one_vector_is_the_usual_norm(self):
        rows = [[3.0, 4.0]]
        self.assertAlmostEqual(lp_n_norm(rows, params_for(rows)), 5.0, places=12)

    def test_ordered_tuple_form_agrees(self):
        rng = np.random.default_rng(3)
        for n, d, p in [(2, 3, 1.0), (2, 4, 2.0), (3, 5, 3.0), (3, 3, 1.5)]:
            rows = rng.standard_normal((n, d))
            params = NormParams(n=n, p=p, d=d)
            self.assertAlmostEqual(
                lp_n_norm(rows, params) / ordered_tuple_n_norm(rows, params), 1.0, places=9,
            )

    def test_larger_n_uses_the_general_determinant(self):
        rows = np.eye(5)[:4] * 2.0
        self.assertAlmostEqual(lp_n_norm(rows, NormParams(n=4, p=2.0, d=5)), 16.0, places=10)

    def test_wrong_shape_is_rejected(self):
        with self.assertRaises(DimensionMismatchError):
            lp_n_norm([[1.0, 0.0]], NormParams(n=2, p=2.0, d=2))

    def test_non_finite_entries_are_rejected(self):
        with self.assertRaises(NonFiniteInputError):
            lp_n_norm([[1.0, float('nan')], [0.0, 1.0]], NormParams(n=2, p=2.0, d=2))

    def test_large_entries_do_not_overflow_the_minors(self):
        rows = [[1e200, 1e200], [1e200, 1e200]]
        self.assertEqual(lp_n_norm(rows, params_for(rows)), 0.0)
        rows = [[1e200, 0.0], [0.0, 1e-200]]
        self.assertAlmostEqual(lp_n_norm(rows, params_for(rows)), 1.0, places=12)

    def test_value_beyond_the_float_range_is_a_breakdown(self):
        rows = [[1e200, 0.0], [0.0, 1e200]]
        with self.assertRaises(NumericalBreakdownError):
            lp_n_norm(rows, params_for(rows))


class NormParamsTests(SimpleTestCase):

    def test_p_below_one_is_rejected(self):
        with self.assertRaises(InvalidParameterError):
            NormParams(n=2, p=0.5, d=3)

    def test_infinite_p_is_rejected(self):
        with self.assertRaises(InvalidParameterError):
            NormParams(n=2, p=math.inf, d=3)

    def test_n_above_d_is_rejected(self):
        with self.assertRaises(DimensionMismatchError):
            NormParams(n=3, p=2.0, d=2)

    @override_settings(NNORM_REL_TOL=1e-6, NNORM_ABS_TOL=1e-8)
    def test_from_settings_reads_tolerances(self):
        params = NormParams.from_settings(2, 2.0, 3)
        self.assertEqual((params.rel_tol, params.abs_tol), (1e-6, 1e-8))

    def test_with_exponent_keeps_everything_else(self):
        params = NormParams(n=2, p=2.0, d=3, rel_tol=1e-7)
        changed = params.with_exponent(3.0)
        self.assertEqual((changed.n, changed.d, changed.rel_tol, changed.p), (2, 3, 1e-7, 3.0))


class GramNormTests(SimpleTestCase):

    def test_identity_gram(self):
        self.assertEqual(gram_2_norm([[1.0, 0.0], [0.0, 1.0]]), 1.0)

    def test_hand_computed_gram(self):
        self.assertAlmostEqual(gram_2_norm([[1.0, 2.0], [3.0, 4.0]]), 2.0, places=10)

    def test_rank_deficient_gram(self):
        self.assertEqual(gram_2_norm([[2.0, 0.0], [2.0, 0.0]]), 0.0)

    def test_large_entries(self):
        self.assertAlmostEqual(gram_2_norm([[1e200, 0.0], [0.0, 1e-200]]), 1.0, places=12)
        self.assertEqual(gram_2_norm([[1e200, 1e200], [1e200, 1e200]]), 0.0)
        with self.assertRaises(NumericalBreakdownError):
            gram_2_norm([[1e200, 0.0], [0.0, 1e200]])

    def test_matches_the_determinant_form_at_p2(self):
        rng = np.random.default_rng(11)
        for n, d in [(1, 4), (2, 5), (3, 6)]:
            rows = rng.standard_normal((n, d))
            self.assertAlmostEqual(gram_2_norm(rows) / lp_n_norm(rows, NormParams(n=n, p=2.0, d=d)), 1.0, places=9)

    def test_agrees_unsquared_within_relative_tolerance(self):
        rng = np.random.default_rng(6)
        for n in range(1, 4):
            for d in range(n, 7):
                for _ in range(20):
                    rows = rng.standard_normal((n, d))
                    euclidean = lp_n_norm(rows, NormParams(n=n, p=2.0, d=d))
                    gram = gram_2_norm(rows)
                    self.assertLessEqual(abs(euclidean - gram), 1e-9 * max(euclidean, gram), (n, d))


class IndependenceTests(SimpleTestCase):

    def test_basis_is_independent(self):
        rows = [[1.0, 0.0], [0.0, 1.0]]
        self.assertTrue(is_linearly_independent(rows, params_for(rows)))

    def test_collinear_rows_are_dependent(self):
        rows = [[1.0, 2.0], [2.0, 4.0]]
        self.assertFalse(is_linearly_independent(rows, params_for(rows)))

    def test_nearly_collinear_rows_are_dependent(self):
        rows = [[1.0, 0.0, 0.0], [1.0, 1e-15, 0.0]]
        self.assertFalse(is_linearly_independent(rows, params_for(rows)))

    def test_threshold_is_scale_invariant(self):
        rows = [[1e-8, 0.0], [0.0, 1e-8]]
        self.assertTrue(is_linearly_independent(rows, params_for(rows)))
        rows = [[1e-200, 0.0], [0.0, 1e-200]]
        self.assertTrue(is_linearly_independent(rows, params_for(rows)))
        rows = [[1e200, 0.0], [0.0, 1e200]]
        self.assertTrue(is_linearly_independent(rows, params_for(rows)))


class AxiomCheckTests(SimpleTestCase):

    def test_axioms_hold_on_seeded_samples(self):
        report = check_axioms(NormParams(n=2, p=2.0, d=4), 200, seed=7)
        self.assertTrue(report.passed)
        self.assertEqual([tally.name for tally in report.tallies], list(AXIOM_NAMES))
        self.assertTrue(all(tally.checked == 200 for tally in report.tallies))

    def test_same_seed_same_report(self):
        params = NormParams(n=3, p=1.0, d=4)
        first = check_axioms(params, 40, seed=5)
        second = check_axioms(params, 40, seed=5)
        self.assertEqual(
            [(t.checked, t.violations, t.worst) for t in first.tallies],
            [(t.checked, t.violations, t.worst) for t in second.tallies],
        )

    def test_worker_count_does_not_change_the_report(self):
        params = NormParams(n=2, p=3.0, d=8)
        with override_settings(NNORM_WORKERS=1):
            serial = check_axioms(params, 30, seed=9)
        with override_settings(NNORM_WORKERS=4):
            threaded = check_axioms(params, 30, seed=9)
        self.assertEqual(serial.worst_violation, threaded.worst_violation)
        self.assertEqual(serial.violations, threaded.violations)

    def test_sample_count_must_be_positive(self):
        with self.assertRaises(InvalidParameterError):
            check_axioms(NormParams(n=2, p=2.0, d=4), 0, seed=1)


class AxiomPropertyTests(SimpleTestCase):

    @hypothesis_settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, (2, 3), elements=finite))
    def test_swapping_arguments_keeps_the_value(self, rows):
        params = NormParams(n=2, p=2.0, d=3)
        self.assertEqual(lp_n_norm(rows, params), lp_n_norm(rows[::-1], params))

    @hypothesis_settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, (2, 3), elements=finite), st.floats(min_value=-5, max_value=5))
    def test_first_argument_is_absolutely_homogeneous(self, rows, alpha):
        params = NormParams(n=2, p=3.0, d=3)
        scaled = rows.copy()
        scaled[0] *= alpha
        expected = abs(alpha) * lp_n_norm(rows, params)
        self.assertLessEqual(abs(lp_n_norm(scaled, params) - expected), 1e-9 * expected + 1e-9)

    @hypothesis_settings(max_examples=60, deadline=None)
    @given(arrays(np.float64, (3, 4), elements=finite), arrays(np.float64, (4,), elements=finite))
    def test_triangle_inequality_in_the_first_argument(self, rows, other):
        params = NormParams(n=3, p=1.5, d=4)
        summed = rows.copy()
        summed[0] += other
        swapped = rows.copy()
        swapped[0] = other
        bound = lp_n_norm(rows, params) + lp_n_norm(swapped, params)
        self.assertLessEqual(lp_n_norm(summed, params), bound * (1 + 1e-9) + 1e-9)

    def test_scaling_by_minus_three_triples_the_value(self):
        rows = np.array([[1.0, 2.0, 0.5], [0.0, 1.0, 3.0]])
        params = NormParams(n=2, p=2.0, d=3)
        scaled = rows.copy()
        scaled[0] *= -3.0
        self.assertAlmostEqual(lp_n_norm(scaled, params), 3.0 * lp_n_norm(rows, params), places=12)
