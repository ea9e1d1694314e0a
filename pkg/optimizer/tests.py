import math

import numpy as np
from django.test import SimpleTestCase, tag

from analytic.curve import entropy_s, multiplier_for_lambda, rate_r1
from bloch.exceptions import PreconditionError
from bloch.partition import build_partition

from .channel import (
    DiscreteChannel,
    discrete_mutual_information,
    discrete_posterior_entropy,
    discretize_analytic_channel,
    uniform_channel,
)
from .solver import (
    consistency_exponent,
    distance_to_curve,
    fixed_point_solve,
    fixed_point_step,
    row_exponent_fit,
    sweep_multiplier,
)

SEED = 20010601


class DiscreteChannelTests(SimpleTestCase):
    def test_rejects_non_stochastic_rows(self):
        part = build_partition(2)
        with self.assertRaises(PreconditionError):
            DiscreteChannel(part, np.array([[0.5, 0.4], [0.5, 0.5]]))
        with self.assertRaises(PreconditionError):
            DiscreteChannel(part, np.array([[1.5, -0.5], [0.5, 0.5]]))
        with self.assertRaises(PreconditionError):
            DiscreteChannel(part, np.eye(3))
        with self.assertRaises(PreconditionError):
            DiscreteChannel(part, np.eye(2), states="sharp")

    def test_marginal_and_posteriors(self):
        part = build_partition(2)
        ch = DiscreteChannel(part, np.array([[0.75, 0.25], [0.25, 0.75]]))
        np.testing.assert_allclose(ch.marginal, [0.5, 0.5])
        np.testing.assert_allclose(ch.posteriors(), [[0.75, 0.25], [0.25, 0.75]])
        np.testing.assert_allclose(ch.joint().sum(), 1.0)
        self.assertEqual(len(ch.posterior_states), 2)

    def test_identity_channel_information(self):
        part = build_partition(48)
        ch = DiscreteChannel(part, np.eye(48))
        self.assertAlmostEqual(discrete_mutual_information(ch), math.log2(48), places=10)

    def test_independent_channel(self):
        part = build_partition(48)
        ch = uniform_channel(part)
        self.assertAlmostEqual(discrete_mutual_information(ch), 0.0, places=12)
        self.assertAlmostEqual(discrete_posterior_entropy(ch), 1.0, places=9)
        centroid = uniform_channel(part, states="centroid")
        self.assertGreater(discrete_posterior_entropy(centroid), 0.999)

    def test_hemisphere_posterior_entropy(self):
        ch = DiscreteChannel(build_partition(2), np.eye(2))
        self.assertAlmostEqual(discrete_posterior_entropy(ch), 0.8112781244591328, places=10)
        pure = DiscreteChannel(build_partition(2), np.eye(2), states="centroid")
        self.assertAlmostEqual(discrete_posterior_entropy(pure), 0.0, places=10)


class DiscretizeTests(SimpleTestCase):
    def test_small_lambda_rows_equal_weights(self):
        part = build_partition(48)
        ch = discretize_analytic_channel(part, 1e-6)
        np.testing.assert_allclose(ch.q_matrix, np.tile(part.weights, (48, 1)), rtol=1e-5)

    def test_row_maximum_on_diagonal(self):
        ch = discretize_analytic_channel(build_partition(48), 2.0)
        np.testing.assert_array_equal(ch.q_matrix.argmax(axis=1), np.arange(48))

    def test_depends_only_on_centroid_overlap(self):
        part = build_partition(48)
        ch = discretize_analytic_channel(part, 2.0)
        c = part.centroid_vectors
        u = (1.0 + np.clip(c @ c.T, -1.0, 1.0)) / 2.0
        ratio = ch.q_matrix / np.diag(ch.q_matrix)[:, None]
        np.testing.assert_allclose(ratio, np.exp(2.0 * (u - 1.0)), rtol=1e-12)

    def test_matches_analytic_curve_on_fine_partition(self):
        ch = discretize_analytic_channel(build_partition(500), 1.0)
        self.assertAlmostEqual(discrete_mutual_information(ch), rate_r1(1.0), delta=0.02)
        self.assertAlmostEqual(discrete_posterior_entropy(ch), entropy_s(1.0), delta=0.01)


class FixedPointTests(SimpleTestCase):
    def test_preconditions(self):
        part = build_partition(24)
        with self.assertRaises(PreconditionError):
            fixed_point_solve(part, 0.0)
        with self.assertRaises(PreconditionError):
            fixed_point_solve(part, 1.0, tol=0.0)
        with self.assertRaises(PreconditionError):
            fixed_point_solve(part, 1.0, init="bogus")
        with self.assertRaises(PreconditionError):
            fixed_point_solve(part, 2.0, init="analytic")

    def test_small_multiplier_goes_uniform(self):
        part = build_partition(48)
        ch, report = fixed_point_solve(part, 1e-3, init="random(7)", tol=1e-12, max_iters=200)
        self.assertTrue(report.converged)
        self.assertLess(report.mutual_info_bits, 1e-9)
        self.assertGreater(report.posterior_entropy_bits, 0.999)
        self.assertEqual(report.init, "random(7)")

    def test_rows_stay_stochastic_and_lagrangian_descends(self):
        part = build_partition(48)
        ch, report = fixed_point_solve(
            part, 3.5, init=f"random({SEED})", tol=1e-14, max_iters=60, debug=True
        )
        np.testing.assert_allclose(ch.q_matrix.sum(axis=1), 1.0, atol=1e-12)
        self.assertLessEqual(report.lagrangian_value, report.lagrangian_start + 1e-9)
        self.assertLessEqual(report.iterations, 60)

    def test_singular_posteriors_are_regularized(self):
        pure = DiscreteChannel(build_partition(2), np.eye(2), states="centroid")
        self.assertTrue(fixed_point_step(pure, 3.0).regularized)
        mixed = DiscreteChannel(build_partition(2), np.eye(2))
        self.assertFalse(fixed_point_step(mixed, 3.0).regularized)

    def test_uniform_is_a_fixed_point(self):
        step = fixed_point_step(uniform_channel(build_partition(48)), 5.0)
        self.assertLess(step.residual, 1e-12)

    def test_sweep_is_deterministic(self):
        part = build_partition(24)
        a = sweep_multiplier(part, [1.0, 4.0], tol=1e-8, max_iters=40, seed=5, restarts=2)
        b = sweep_multiplier(part, [1.0, 4.0], tol=1e-8, max_iters=40, seed=5, restarts=2, workers=2)
        self.assertEqual(a, b)
        with self.assertRaises(PreconditionError):
            sweep_multiplier(part, [4.0, 1.0])


@tag("slow")
class ExtremumTests(SimpleTestCase):
    lam = 2.0

    def test_analytic_channel_is_nearly_stationary(self):
        mu = multiplier_for_lambda(self.lam)
        residuals = []
        for caps in (200, 500, 2000):
            part = build_partition(caps)
            step = fixed_point_step(discretize_analytic_channel(part, self.lam), mu)
            residuals.append(step.residual)
            if caps == 500:
                self.assertLessEqual(step.relative_residual, part.diameter_bound)
        self.assertGreater(residuals[0], residuals[1])
        self.assertGreater(residuals[1], residuals[2])

    def test_row_update_is_exponential_in_overlap(self):
        mu = multiplier_for_lambda(self.lam)
        ch, _ = fixed_point_solve(build_partition(500), mu, init="analytic", max_iters=20)
        expected = consistency_exponent(ch, mu)
        for row in (0, 123, 250):
            slope, _, worst = row_exponent_fit(ch, row)
            self.assertLess(abs(slope / expected - 1.0), 0.05)
            self.assertLess(worst, 0.05)

    def test_random_start_lands_on_curve(self):
        mu = multiplier_for_lambda(self.lam)
        _, report = fixed_point_solve(build_partition(500), mu, init=f"random({SEED})")
        self.assertTrue(report.converged, report.residual)
        self.assertLess(abs(distance_to_curve(report)), 0.03)

    def test_sweep_traces_frontier(self):
        reports = sweep_multiplier(
            build_partition(200), [0.5, 3.2, 4.0, 6.0], max_iters=2000, seed=SEED, restarts=2
        )
        entropies = [r.posterior_entropy_bits for r in reports]
        for a, b in zip(entropies, entropies[1:]):
            self.assertLessEqual(b, a + 1e-6)
        self.assertGreater(entropies[0], 0.999)
        self.assertLess(reports[0].mutual_info_bits, 1e-6)
        for r in reports:
            self.assertLess(abs(distance_to_curve(r)), 0.03)
