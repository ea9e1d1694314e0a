import math

import numpy as np
from django.test import SimpleTestCase

from bloch.exceptions import PreconditionError
from bloch.states import NORTH, BlochPoint, DensityMatrix, von_neumann_entropy

from .curve import (
    LAMBDA_MAX,
    LAMBDA_MIN,
    RATE_SERIES_CUTOFF,
    SERIES_CUTOFF,
    LambdaParam,
    curve_diagnostics,
    default_lambda_grid,
    emit_curve,
    entropy_s,
    lambda_for_entropy,
    lambda_for_multiplier,
    multiplier_for_lambda,
    p_lambda,
    q_lambda_density,
    rate_r1,
    rate_r1_nats,
    resource_point,
    tradeoff_point,
)
from .quadrature import (
    mutual_information_at,
    mutual_information_quadrature,
    posterior_state,
    posterior_state_with_diagnostics,
    q_lambda_normalization,
)


class ClosedFormTests(SimpleTestCase):
    def test_reference_values_lambda_one(self):
        self.assertAlmostEqual(rate_r1(1.0), 0.0587, delta=1e-3)
        self.assertAlmostEqual(entropy_s(1.0), 0.9806, delta=1e-3)

    def test_reference_values_lambda_two(self):
        self.assertAlmostEqual(rate_r1_nats(2.0), 0.15174, delta=1e-4)
        self.assertAlmostEqual(p_lambda(2.0), 0.34348, delta=1e-4)
        self.assertAlmostEqual(entropy_s(2.0), 0.928, delta=1e-3)

    def test_near_zero_limits(self):
        self.assertLess(rate_r1(LAMBDA_MIN), 1e-12)
        self.assertAlmostEqual(entropy_s(LAMBDA_MIN), 1.0, places=12)
        point = tradeoff_point(LAMBDA_MIN)
        self.assertAlmostEqual(point.b_bits, 2.0, places=9)
        self.assertAlmostEqual(point.e_ebits, 1.0, places=9)

    def test_series_matches_closed_form_at_cutoff(self):
        below = SERIES_CUTOFF * (1.0 - 1e-9)
        above = SERIES_CUTOFF * (1.0 + 1e-9)
        self.assertAlmostEqual(p_lambda(below), p_lambda(above), places=12)
        below = RATE_SERIES_CUTOFF * (1.0 - 1e-12)
        above = RATE_SERIES_CUTOFF * (1.0 + 1e-12)
        self.assertLess(abs(rate_r1_nats(below) / rate_r1_nats(above) - 1.0), 1e-10)
        self.assertAlmostEqual(rate_r1_nats(1e-2), 1e-4 / 24.0 - 1e-8 / 960.0, places=15)

    def test_p_lambda_range(self):
        for lam in (1e-6, 1e-3, 0.5, 3.0, 40.0, 1e3):
            p = p_lambda(lam)
            self.assertGreater(p, 0.0)
            self.assertLess(p, 0.5)

    def test_large_lambda_is_finite(self):
        self.assertTrue(math.isfinite(rate_r1(LAMBDA_MAX)))
        self.assertAlmostEqual(p_lambda(LAMBDA_MAX), 1.0 / LAMBDA_MAX, places=12)

    def test_lambda_param_validation_and_clamp(self):
        with self.assertRaises(PreconditionError):
            LambdaParam(0.0)
        with self.assertRaises(PreconditionError):
            LambdaParam(float("nan"))
        self.assertEqual(LambdaParam(1e5).clamped, LAMBDA_MAX)
        self.assertEqual(LambdaParam(1e-9).clamped, LAMBDA_MIN)
        self.assertEqual(rate_r1(1e5), rate_r1(LAMBDA_MAX))

    def test_q_lambda_density_peaks_on_input(self):
        x = BlochPoint(1.0, 2.0)
        far = BlochPoint(math.pi - 1.0, 2.0 + math.pi)
        self.assertGreater(q_lambda_density(x, x, 2.0), q_lambda_density(far, x, 2.0))
        expected = 2.0 / math.expm1(2.0) * math.exp(2.0) / (4.0 * math.pi)
        self.assertAlmostEqual(q_lambda_density(x, x, 2.0), expected, places=12)

    def test_multiplier(self):
        self.assertAlmostEqual(multiplier_for_lambda(1e-5), 3.0, places=6)
        self.assertAlmostEqual(multiplier_for_lambda(2.0), 3.0872, delta=1e-3)
        self.assertGreater(multiplier_for_lambda(10.0), multiplier_for_lambda(2.0))

    def test_multiplier_inversion(self):
        for lam in (0.5, 2.0, 20.0):
            got = float(lambda_for_multiplier(multiplier_for_lambda(lam)))
            self.assertLess(abs(got / lam - 1.0), 1e-7, msg=f"lambda={lam}")
        with self.assertRaises(PreconditionError):
            lambda_for_multiplier(2.5)

    def test_resource_point(self):
        self.assertEqual(resource_point(0.25, 0.5), (1.25, 0.5))


class InversionTests(SimpleTestCase):
    def test_round_trip(self):
        for lam in (0.01, 0.1, 1.0, 2.0, 10.0, 100.0):
            got = float(lambda_for_entropy(entropy_s(lam)))
            self.assertLess(abs(got / lam - 1.0), 1e-8, msg=f"lambda={lam}")

    def test_out_of_range_is_clamped_with_warning(self):
        with self.assertLogs("analytic.curve", level="WARNING"):
            got = lambda_for_entropy(1.0 - 1e-16)
        self.assertEqual(float(got), LAMBDA_MIN)
        with self.assertLogs("analytic.curve", level="WARNING"):
            got = lambda_for_entropy(1e-6)
        self.assertEqual(float(got), LAMBDA_MAX)

    def test_rejects_invalid_targets(self):
        for bad in (0.0, 1.0, -0.2, 1.5, float("nan")):
            with self.assertRaises(PreconditionError):
                lambda_for_entropy(bad)


class CurveTests(SimpleTestCase):
    def test_default_grid_shape(self):
        points = emit_curve(default_lambda_grid())
        self.assertEqual(len(points), 200)
        diag = curve_diagnostics(points)
        self.assertTrue(diag["ok"], diag)
        for p in points:
            self.assertGreaterEqual(p.b_bits, 2.0 * p.e_ebits)

    def test_grid_order_is_kept_with_workers(self):
        grid = default_lambda_grid(1e-3, 20.0, 40)
        serial = emit_curve(grid)
        threaded = emit_curve(grid, workers=4)
        self.assertEqual(serial, threaded)
        self.assertEqual([p.lam for p in serial], grid)

    def test_rejects_bad_grids(self):
        with self.assertRaises(PreconditionError):
            emit_curve([])
        with self.assertRaises(PreconditionError):
            emit_curve([1.0, 1.0])
        with self.assertRaises(PreconditionError):
            emit_curve([2.0, 1.0])
        with self.assertRaises(PreconditionError):
            emit_curve([1.0, 5e3])

    def test_as_dict_columns(self):
        row = tradeoff_point(2.0).as_dict()
        self.assertEqual(list(row), ["lambda", "rate_bits", "entropy_bits", "b_bits", "e_ebits"])


class QuadratureTests(SimpleTestCase):
    def test_mutual_information_matches_closed_form(self):
        for lam in (1e-3, 0.3, 1.0, 2.0, 10.0, 200.0, LAMBDA_MAX):
            quad = mutual_information_quadrature(lam)
            exact = rate_r1(lam)
            self.assertLessEqual(abs(quad - exact), 1e-8 * max(1.0, exact), msg=f"lambda={lam}")

    def test_normalization(self):
        for lam in (1e-3, 1.0, 30.0, 500.0):
            self.assertAlmostEqual(q_lambda_normalization(lam), 1.0, delta=1e-9)

    def test_normalization_on_sphere(self):
        self.assertAlmostEqual(q_lambda_normalization(1.0, BlochPoint(0.7, 1.3)), 1.0, delta=1e-8)

    def test_isotropy(self):
        reference = mutual_information_quadrature(1.0)
        for x in (NORTH, BlochPoint(2.0, 4.0)):
            self.assertAlmostEqual(mutual_information_at(x, 1.0), reference, delta=1e-7)

    def test_posterior_state_spectrum(self):
        for lam in (0.5, 1.0, 2.0, 10.0):
            rho, debug = posterior_state_with_diagnostics(lam)
            p = p_lambda(lam)
            np.testing.assert_allclose(rho.eigenvalues, [p, 1.0 - p], atol=1e-8)
            self.assertAlmostEqual(von_neumann_entropy(rho), entropy_s(lam), delta=1e-8)
            self.assertAlmostEqual(debug["trace_before_normalization"], 1.0, delta=1e-10)
            self.assertLess(debug["offdiag_abs"], 1e-10)

    def test_posterior_state_returns_density_matrix(self):
        for lam in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0):
            rho = posterior_state(lam)
            self.assertIsInstance(rho, DensityMatrix)
            self.assertAlmostEqual(von_neumann_entropy(rho), entropy_s(lam), delta=1e-8)
