import numpy as np
from django.test import SimpleTestCase, override_settings

from toolkit.exceptions import (
    DimensionMismatchError,
    DivergenceError,
    InvalidParameterError,
    NoInformativePairsError,
    NonFiniteIterateError,
)
from toolkit.fixedpoint import (
    AffineMapping,
    RegisteredMapping,
    ScalingMapping,
    banach_solve,
    certify_contraction,
    estimate_contraction,
    fixed_point_oracle,
    random_affine_contraction,
    uniqueness_probe,
    verify_class_propagation,
)
from toolkit.quotient import AnchorSet, IndexSubset, random_anchor_set
from toolkit.sampling import DomainSampler


class MappingTests(SimpleTestCase):

    def test_affine_map(self):
        T = AffineMapping(A=[[0.5, 0.0], [0.0, 0.25]], b=[1.0, -1.0])
        np.testing.assert_allclose(T([2.0, 4.0]), [2.0, 0.0])
        self.assertEqual(T.to_dict(), {'kind': 'affine', 'A': [[0.5, 0.0], [0.0, 0.25]], 'b': [1.0, -1.0]})

    def test_affine_shapes_are_checked(self):
        with self.assertRaises(DimensionMismatchError):
            AffineMapping(A=[[1.0, 2.0]], b=[0.0])
        with self.assertRaises(DimensionMismatchError):
            AffineMapping(A=np.eye(2), b=[0.0, 0.0, 0.0])

    def test_unknown_registered_map(self):
        with self.assertRaises(InvalidParameterError):
            RegisteredMapping('half_exp')

    def test_registered_map(self):
        np.testing.assert_allclose(RegisteredMapping('half_sine')([0.0, np.pi / 2]), [0.0, 0.5])

    def test_oracle(self):
        np.testing.assert_allclose(fixed_point_oracle(0.5 * np.eye(2), [1.0, 1.0]), [2.0, 2.0])


class EstimateContractionTests(SimpleTestCase):

    def setUp(self):
        self.Y = AnchorSet.standard(2)
        self.sampler = DomainSampler(center=np.zeros(2), radius=2.0)

    def test_halving_map_has_constant_one_half(self):
        estimate = estimate_contraction(ScalingMapping(0.5), self.sampler, self.Y, 1, 100, seed=1)
        for value in estimate.per_subset_C.values():
            self.assertAlmostEqual(value, 0.5, places=12)
        self.assertFalse(estimate.is_certified)
        self.assertEqual(estimate.pairs_used, 100)

    def test_identity_has_constant_one(self):
        estimate = estimate_contraction(RegisteredMapping('identity'), self.sampler, self.Y, 2, 50, seed=1)
        self.assertAlmostEqual(estimate.C_hat, 1.0, places=12)

    def test_diagonal_map_is_driven_by_its_largest_factor(self):
        T = AffineMapping(A=np.diag([0.5, 0.25]), b=[0.0, 0.0])
        estimate = estimate_contraction(T, self.sampler, self.Y, 1, 200, seed=4)
        self.assertAlmostEqual(estimate.C_hat, 0.5, places=9)
        self.assertAlmostEqual(estimate.per_subset_C[IndexSubset.of(2)], 0.25, places=9)

    def test_same_seed_same_estimate(self):
        T = RegisteredMapping('half_tanh')
        first = estimate_contraction(T, self.sampler, self.Y, 1, 64, seed=9)
        with override_settings(NNORM_WORKERS=1):
            second = estimate_contraction(T, self.sampler, self.Y, 1, 64, seed=9)
        self.assertEqual(first.per_subset_C, second.per_subset_C)

    def test_vanishing_differences_are_not_informative(self):
        sampler = DomainSampler(center=np.zeros(2), radius=1e-14)
        with self.assertRaises(NoInformativePairsError):
            estimate_contraction(ScalingMapping(0.5), sampler, self.Y, 1, 20, seed=1)

    def test_pair_count_must_be_positive(self):
        with self.assertRaises(InvalidParameterError):
            estimate_contraction(ScalingMapping(0.5), self.sampler, self.Y, 1, 0, seed=1)


class CertifyContractionTests(SimpleTestCase):

    def test_scaling_is_certified(self):
        estimate = certify_contraction(ScalingMapping(-0.75), AnchorSet.standard(3), 2)
        self.assertTrue(estimate.is_certified)
        self.assertEqual(estimate.C_hat, 0.75)
        self.assertEqual(len(estimate.per_subset_C), 3)

    def test_diagonal_affine_map(self):
        T = AffineMapping(A=np.diag([0.5, 0.25]), b=[3.0, 1.0])
        estimate = certify_contraction(T, AnchorSet.standard(2), 1)
        self.assertEqual(estimate.per_subset_C, {IndexSubset.of(1): 0.5, IndexSubset.of(2): 0.25})
        self.assertEqual(certify_contraction(T, AnchorSet.standard(2), 2).C_hat, 0.5)

    def test_anchor_diagonal_map_on_random_anchors(self):
        rng = np.random.default_rng(12)
        Y = random_anchor_set(rng, 3, 3, 2.0)
        T = random_affine_contraction(rng, Y, max_factor=0.8)
        estimate = certify_contraction(T, Y, 1)
        self.assertIsNotNone(estimate)
        self.assertLess(estimate.C_hat, 0.8 + 1e-9)

    def test_mixing_map_is_not_certified_below_full_class(self):
        swap = AffineMapping(A=[[0.0, 0.5], [0.5, 0.0]], b=[0.0, 0.0])
        Y = AnchorSet.standard(2)
        self.assertIsNone(certify_contraction(swap, Y, 1))
        self.assertAlmostEqual(certify_contraction(swap, Y, 2).C_hat, 0.5)

    def test_no_certificate_without_spanning_anchors(self):
        Y = AnchorSet.from_vectors([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        self.assertIsNone(certify_contraction(AffineMapping(A=0.5 * np.eye(3), b=np.zeros(3)), Y, 1))

    def test_no_certificate_for_registered_maps(self):
        self.assertIsNone(certify_contraction(RegisteredMapping('half_sine'), AnchorSet.standard(2), 1))


class PropagationTests(SimpleTestCase):

    def test_halving_map(self):
        Y = AnchorSet.standard(3)
        report = verify_class_propagation(ScalingMapping(0.5), DomainSampler(center=np.zeros(3)), Y, 2, 100, seed=2)
        self.assertTrue(report.holds)
        self.assertEqual(report.multiplicity, 2)
        for value in (report.C1, report.Cm, report.Cn):
            self.assertAlmostEqual(value, 0.5, places=12)

    def test_diagonal_map_full_class(self):
        T = AffineMapping(A=np.diag([0.5, 0.25]), b=[1.0, 1.0])
        report = verify_class_propagation(T, DomainSampler(center=np.zeros(2)), AnchorSet.standard(2), 2, 200, seed=5)
        self.assertTrue(report.holds)
        self.assertLessEqual(report.Cm, report.C1 + 1e-9)

    def test_identity_sits_on_the_boundary(self):
        report = verify_class_propagation(
            RegisteredMapping('identity'), DomainSampler(center=np.ones(2)), AnchorSet.standard(2), 1, 50, seed=3,
        )
        self.assertTrue(report.holds)
        self.assertEqual(report.C1, 1.0)


class BanachSolveTests(SimpleTestCase):

    def setUp(self):
        self.Y = AnchorSet.standard(2)

    def test_halving_map_from_eight(self):
        result = banach_solve(ScalingMapping(0.5), [8.0, 8.0], self.Y, 1, 1e-6, 200)
        self.assertTrue(result.converged)
        self.assertEqual(result.iterations, 23)
        np.testing.assert_allclose(result.solution, [0.0, 0.0], atol=2e-6)
        self.assertTrue(all(value <= 1e-6 for value in result.residual_per_subset.values()))

    def test_affine_map_matches_the_linear_solve(self):
        T = AffineMapping(A=0.5 * np.eye(2), b=[1.0, 1.0])
        result = banach_solve(T, [0.0, 0.0], self.Y, 2, 1e-10, 500)
        np.testing.assert_allclose(result.solution, fixed_point_oracle(T.A, T.b), atol=1e-9)

    def test_identity_stops_after_one_step(self):
        result = banach_solve(RegisteredMapping('identity'), [3.0, -2.0], self.Y, 1, 1e-9, 10)
        self.assertTrue(result.converged)
        self.assertEqual(result.iterations, 1)
        np.testing.assert_array_equal(result.solution, [3.0, -2.0])

    def test_apriori_bounds_follow_the_certified_constant(self):
        T = ScalingMapping(0.5)
        estimate = certify_contraction(T, self.Y, 1)
        result = banach_solve(T, [8.0, 8.0], self.Y, 1, 1e-6, 200, estimate=estimate)
        self.assertTrue(result.certified)
        self.assertEqual(len(result.apriori_bound_trace), result.iterations)
        self.assertAlmostEqual(result.first_step_bound, 4.0)
        self.assertAlmostEqual(result.apriori_bound_trace[0], 4.0)
        error = np.max(np.abs(result.solution))
        self.assertLessEqual(error, result.apriori_bound_trace[-1] * (1 + 1e-9))

    def test_growing_map_diverges(self):
        with self.assertRaises(DivergenceError) as context:
            banach_solve(ScalingMapping(2.0), [1.0, 1.0], self.Y, 1, 1e-6, 1000)
        self.assertFalse(context.exception.result.converged)
        self.assertEqual(context.exception.result.iterations, 11)

    def test_overflow_is_reported(self):
        with self.assertRaises(NonFiniteIterateError) as context:
            banach_solve(ScalingMapping(1e300), [1.0, 1.0], self.Y, 1, 1e-6, 50)
        self.assertEqual(context.exception.result.iterations, 1)

    def test_iteration_cap(self):
        result = banach_solve(ScalingMapping(0.5), [8.0, 8.0], self.Y, 1, 1e-6, 5)
        self.assertFalse(result.converged)
        self.assertEqual(result.iterations, 5)
        self.assertEqual(len(result.residual_per_subset), 2)

    def test_box_projection(self):
        T = AffineMapping(A=0.5 * np.eye(2), b=[10.0, 10.0])
        result = banach_solve(T, [0.0, 0.0], self.Y, 1, 1e-9, 100, box=([0.0, 0.0], [5.0, 5.0]))
        self.assertTrue(result.converged)
        np.testing.assert_array_equal(result.solution, [5.0, 5.0])
        self.assertEqual(result.projections, 2)

    def test_invalid_arguments(self):
        with self.assertRaises(InvalidParameterError):
            banach_solve(ScalingMapping(0.5), [1.0, 1.0], self.Y, 1, 0.0, 10)
        with self.assertRaises(InvalidParameterError):
            banach_solve(ScalingMapping(0.5), [1.0, 1.0], self.Y, 1, 1e-6, 0)
        with self.assertRaises(InvalidParameterError):
            banach_solve(ScalingMapping(0.5), [1.0, 1.0], self.Y, 1, 1e-6, 10, box=([1.0, 1.0], [0.0, 0.0]))

    def test_restart_from_the_fixed_point_stops_at_once(self):
        T = AffineMapping(A=0.5 * np.eye(2), b=[1.0, 1.0])
        result = banach_solve(T, fixed_point_oracle(T.A, T.b), self.Y, 1, 1e-9, 10)
        self.assertTrue(result.converged)
        self.assertLessEqual(result.iterations, 1)

        rng = np.random.default_rng(5)
        for n in (2, 3):
            Y = random_anchor_set(rng, n, n, 2.0, margin=1e6)
            T = random_affine_contraction(rng, Y, max_factor=0.6)
            for m in range(1, n + 1):
                first = banach_solve(T, rng.standard_normal(n), Y, m, 1e-9, 500)
                self.assertTrue(first.converged)
                again = banach_solve(T, first.solution, Y, m, 1e-9, 500)
                self.assertTrue(again.converged)
                self.assertLessEqual(again.iterations, 1)

    def test_certified_contraction_never_lengthens_a_step(self):
        rng = np.random.default_rng(9)
        for n in (2, 3, 4):
            Y = random_anchor_set(rng, n, n, 2.0, margin=1e6)
            T = random_affine_contraction(rng, Y, max_factor=0.9)
            for m in range(1, n + 1):
                estimate = certify_contraction(T, Y, m)
                self.assertIsNotNone(estimate)
                result = banach_solve(T, 10.0 * rng.standard_normal(n), Y, m, 1e-9, 2000, estimate=estimate)
                trace = result.difference_trace
                for before, after in zip(trace, trace[1:]):
                    self.assertLessEqual(after, before * (1 + 1e-9) + 1e-12)


class UniquenessTests(SimpleTestCase):

    def setUp(self):
        self.Y = AnchorSet.standard(2)

    def test_halving_map_has_one_fixed_point(self):
        report = uniqueness_probe(ScalingMapping(0.5), [[1.0, 0.0], [0.0, 1.0], [5.0, 5.0]], self.Y, 1, 1e-8, 200)
        self.assertEqual(report.status, 'pass')
        self.assertLessEqual(report.max_distance, report.threshold)
        self.assertEqual(len(report.solutions), 3)

    def test_random_affine_contraction(self):
        rng = np.random.default_rng(21)
        T = random_affine_contraction(rng, self.Y, max_factor=0.6)
        starts = rng.uniform(-10.0, 10.0, size=(4, 2))
        report = uniqueness_probe(T, list(starts), self.Y, 2, 1e-10, 500)
        self.assertEqual(report.status, 'pass')
        oracle = fixed_point_oracle(T.A, T.b)
        for solution in report.solutions:
            np.testing.assert_allclose(solution, oracle, atol=1e-8)

    def test_repeated_start(self):
        report = uniqueness_probe(ScalingMapping(0.5), [[2.0, 3.0], [2.0, 3.0]], self.Y, 1, 1e-8, 200)
        self.assertEqual(report.max_distance, 0.0)

    def test_divergent_runs_are_inconclusive(self):
        report = uniqueness_probe(ScalingMapping(2.0), [[1.0, 0.0], [0.0, 1.0]], self.Y, 1, 1e-8, 100)
        self.assertEqual(report.status, 'inconclusive')

    def test_needs_two_starts(self):
        with self.assertRaises(InvalidParameterError):
            uniqueness_probe(ScalingMapping(0.5), [[1.0, 0.0]], self.Y, 1, 1e-8, 10)
