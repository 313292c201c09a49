import math

import numpy as np
from django.test import SimpleTestCase

from toolkit.exceptions import InvalidParameterError
from toolkit.lp_equivalence import (
    CSV_FIELDS,
    chain_consistent,
    check_corollary_combined,
    check_prop1,
    check_theorem_equivalent,
    corollary_upper_constant,
    lower_constant,
    star_p_norm,
    upper_constant,
    usual_lp_norm,
    verify_equivalence_batch,
)
from toolkit.quotient import AnchorSet, random_anchor_set


class NormTests(SimpleTestCase):

    def test_usual_norm(self):
        self.assertAlmostEqual(usual_lp_norm([3.0, 4.0], 2), 5.0, places=12)
        self.assertAlmostEqual(usual_lp_norm([1.0, 1.0, 1.0], 1), 3.0, places=12)
        self.assertAlmostEqual(usual_lp_norm([1.0, 2.0, 2.0], 2), 3.0, places=12)

    def test_infinite_p_is_rejected(self):
        with self.assertRaises(InvalidParameterError):
            usual_lp_norm([1.0], math.inf)

    def test_star_norm(self):
        Y = AnchorSet.standard(2)
        self.assertAlmostEqual(star_p_norm([3.0, 4.0], Y, 2), 5.0, places=12)
        self.assertAlmostEqual(star_p_norm(Y.vectors[0], Y, 3), 1.0, places=12)
        self.assertEqual(star_p_norm([0.0, 0.0], Y, 2), 0.0)

    def test_constants_for_the_standard_basis(self):
        Y = AnchorSet.standard(2)
        self.assertAlmostEqual(lower_constant(Y, 2), 1.0 / 3.0, places=12)
        self.assertAlmostEqual(upper_constant(Y, 2), 2.0, places=12)
        self.assertAlmostEqual(corollary_upper_constant(Y, 2), 2.0 * math.sqrt(2.0), places=12)


class CheckTests(SimpleTestCase):

    def setUp(self):
        self.Y = AnchorSet.standard(2)
        self.x = [3.0, 4.0]

    def test_theorem_check(self):
        entry = check_theorem_equivalent(self.x, self.Y, 2)
        self.assertAlmostEqual(entry.lower_constant, 1.0 / 3.0, places=12)
        self.assertAlmostEqual(entry.upper_constant, 2.0, places=12)
        self.assertEqual(entry.d, 2)
        self.assertAlmostEqual(entry.lower, 5.0 / 3.0, places=12)
        self.assertAlmostEqual(entry.mid, 5.0, places=12)
        self.assertAlmostEqual(entry.upper, 10.0, places=12)
        self.assertTrue(entry.passed)

    def test_prop_check(self):
        entry = check_prop1(self.x, self.Y, 2)
        self.assertEqual(entry.lower_constant, 1.0)
        self.assertAlmostEqual(entry.upper_constant, math.sqrt(2.0), places=12)
        self.assertAlmostEqual(entry.lower, 5.0, places=12)
        self.assertAlmostEqual(entry.mid, 7.0, places=12)
        self.assertAlmostEqual(entry.upper, 5.0 * math.sqrt(2.0), places=12)
        self.assertTrue(entry.passed)

    def test_prop_check_collapses_at_p1(self):
        entry = check_prop1([0.3, -1.2], self.Y, 1)
        self.assertAlmostEqual(entry.lower, entry.upper, places=12)
        self.assertAlmostEqual(entry.mid, entry.upper, places=12)
        self.assertTrue(entry.passed)

    def test_corollary_check(self):
        entry = check_corollary_combined(self.x, self.Y, 2)
        self.assertAlmostEqual(entry.mid, 7.0, places=12)
        self.assertAlmostEqual(entry.upper, 10.0 * math.sqrt(2.0), places=12)
        self.assertTrue(entry.passed)

    def test_zero_vector_passes_every_check(self):
        for check in (check_theorem_equivalent, check_prop1, check_corollary_combined):
            entry = check([0.0, 0.0], self.Y, 2)
            self.assertEqual((entry.lower, entry.mid, entry.upper), (0.0, 0.0, 0.0))
            self.assertTrue(entry.passed)

    def test_scaling_scales_every_value(self):
        base = check_theorem_equivalent(self.x, self.Y, 2)
        scaled = check_theorem_equivalent([21.0, 28.0], self.Y, 2)
        for name in ('lower', 'mid', 'upper'):
            self.assertAlmostEqual(getattr(scaled, name), 7.0 * getattr(base, name), places=10)
        self.assertTrue(scaled.passed)

    def test_chain_holds_for_an_anchor(self):
        entries = [check(self.Y.vectors[0], self.Y, 2) for check in
                   (check_theorem_equivalent, check_prop1, check_corollary_combined)]
        self.assertTrue(all(entry.passed for entry in entries))
        self.assertTrue(chain_consistent(*entries, self.Y))

    def test_random_anchors(self):
        rng = np.random.default_rng(17)
        for n, d, p in [(2, 5, 1.0), (3, 4, 2.5), (4, 6, 4.0)]:
            Y = random_anchor_set(rng, n, d, p)
            x = rng.standard_normal(d)
            entries = [check(x, Y, p) for check in (check_theorem_equivalent, check_prop1, check_corollary_combined)]
            self.assertTrue(all(entry.passed for entry in entries), entries)
            self.assertTrue(chain_consistent(*entries, Y))


class BatchTests(SimpleTestCase):

    def test_small_batch_passes(self):
        report = verify_equivalence_batch(2, 2.0, 40, seed=7)
        self.assertTrue(report.passed)
        self.assertEqual(report.dims, [2, 4, 8])
        self.assertEqual(len(report.rows), 120)
        self.assertEqual(report.checked, {'theorem': 120, 'prop': 120, 'corollary': 120})
        self.assertEqual(set(report.rows[0]), set(CSV_FIELDS))
        self.assertTrue(all(report.max_slack[check] >= 0 for check in report.max_slack))

    def test_batch_is_reproducible(self):
        first = verify_equivalence_batch(3, 1.5, 12, seed=4, dims=[3, 5])
        second = verify_equivalence_batch(3, 1.5, 12, seed=4, dims=[3, 5])
        self.assertEqual(first.rows, second.rows)

    def test_max_slack_is_the_tightest_margin(self):
        report = verify_equivalence_batch(2, 1.5, 20, seed=3, dims=[2, 3])
        for check in ('theorem', 'prop', 'corollary'):
            entries = report.entries[check]
            self.assertEqual(len(entries), 40)
            self.assertEqual(report.max_slack[check], min(entry.slack for entry in entries))
            self.assertEqual(report.loosest_slack[check], max(entry.slack for entry in entries))
            self.assertLessEqual(report.max_slack[check], report.loosest_slack[check])
        self.assertEqual([entry.d for entry in report.entries['prop']], [2] * 20 + [3] * 20)
        combined = [(row['lower'], row['mid'], row['upper']) for row in report.rows]
        self.assertEqual(combined, [(entry.lower, entry.mid, entry.upper) for entry in report.entries['corollary']])

    def test_dimension_below_n_is_rejected(self):
        with self.assertRaises(InvalidParameterError):
            verify_equivalence_batch(3, 2.0, 5, seed=1, dims=[2])

    def test_sample_count_must_be_positive(self):
        with self.assertRaises(InvalidParameterError):
            verify_equivalence_batch(2, 2.0, 0, seed=1)
