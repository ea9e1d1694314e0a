import math
from unittest import mock

import numpy as np
from django.test import SimpleTestCase, tag
from scipy.stats import chi2

from analytic.curve import entropy_s, p_lambda, rate_r1
from bloch.exceptions import PreconditionError, ResourceLimitError
from bloch.partition import build_partition
from bloch.states import BlochPoint, sample_uniform
from optimizer.channel import discretize_analytic_channel

from .codebook import Codebook, code_size, encode, generate_codebook
from .montecarlo import as_seed_sequence, chunk_sizes, map_chunks
from .simulation import (
    channel_pooling_oracle,
    estimate_posterior_entropy,
    lo_hemisphere_example,
    sample_channel_outputs,
)
from .typicality import TypicalityParams, is_jointly_typical, is_typical

SEED = 20010601
HEMISPHERE_ENTROPY = 0.8112781244591328


class TypicalityTests(SimpleTestCase):
    def test_params_validation(self):
        part = build_partition(2)
        with self.assertRaises(PreconditionError):
            TypicalityParams(0.0, part, 4)
        with self.assertRaises(PreconditionError):
            TypicalityParams(0.1, part, 0)
        with self.assertRaises(PreconditionError):
            TypicalityParams(0.1, part, 4, mode="robust")

    def test_strong_mode_counts(self):
        params = TypicalityParams(0.1, build_partition(2), 4, mode="strong")
        self.assertTrue(is_typical([0, 1, 0, 1], [0.5, 0.5], params))
        self.assertFalse(is_typical([0, 0, 0, 0], [0.5, 0.5], params))

    def test_bad_inputs(self):
        params = TypicalityParams(0.1, build_partition(2), 4)
        with self.assertRaises(PreconditionError):
            is_typical([0, 1, 0], [0.5, 0.5], params)
        with self.assertRaises(PreconditionError):
            is_typical([0, 1, 0, 2], [0.5, 0.5], params)
        with self.assertRaises(PreconditionError):
            is_typical([0, 1, 0, 1], [0.6, 0.6], params)

    def test_iid_sequence_is_typical(self):
        rng = np.random.default_rng(SEED)
        dist = np.array([0.3, 0.2, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05])
        params = TypicalityParams(0.05, build_partition(8), 10_000)
        hits = sum(is_typical(rng.choice(8, 10_000, p=dist), dist, params) for _ in range(20))
        self.assertGreaterEqual(hits, 19)

    def test_joint_pairs_from_channel_are_typical(self):
        part = build_partition(8)
        joint = discretize_analytic_channel(part, 2.0).joint()
        params = TypicalityParams(0.1, part, 10_000)
        rng = np.random.default_rng(SEED)
        cells = rng.choice(64, 10_000, p=joint.ravel())
        x, y = np.divmod(cells, 8)
        self.assertTrue(is_jointly_typical(x, y, joint, params))
        self.assertTrue(is_typical(x, joint.sum(axis=1), params))
        self.assertTrue(is_typical(y, joint.sum(axis=0), params))

    def test_independent_draws_are_not_jointly_typical(self):
        part = build_partition(8)
        joint = discretize_analytic_channel(part, 50.0).joint()
        params = TypicalityParams(0.1, part, 1000)
        rng = np.random.default_rng(SEED)
        x = rng.choice(8, 1000, p=joint.sum(axis=1))
        y = rng.choice(8, 1000, p=joint.sum(axis=0))
        self.assertFalse(is_jointly_typical(x, y, joint, params))
        strong = TypicalityParams(0.1, part, 1000, mode="strong")
        self.assertFalse(is_jointly_typical(x, y, joint, strong))


class CodebookTests(SimpleTestCase):
    def test_code_size(self):
        self.assertEqual(code_size(8, 0.0), 1)
        self.assertEqual(code_size(4, 1.0), 16)
        self.assertEqual(code_size(8, 0.419), 10)
        with self.assertRaises(ResourceLimitError):
            code_size(30, 1.0)
        with self.assertRaises(PreconditionError):
            code_size(4, -0.5)

    def test_codebook_shape_checks(self):
        with self.assertRaises(PreconditionError):
            Codebook(np.array([[0, 2]]), 2)
        book = Codebook(np.array([[0, 1], [1, 1]]), 2)
        self.assertEqual((book.size, book.n), (2, 2))
        self.assertAlmostEqual(book.rate_bits, 0.5)

    def test_letter_frequencies_follow_marginal(self):
        marginal = np.array([0.3, 0.2, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05])
        params = TypicalityParams(0.1, build_partition(8), 8)
        book = generate_codebook(params, 1.5, marginal, SEED)
        self.assertEqual(book.size, 4096)
        counts = np.bincount(book.codewords.ravel(), minlength=8)
        expected = marginal * counts.sum()
        stat = float(((counts - expected) ** 2 / expected).sum())
        self.assertGreater(chi2.sf(stat, df=7), 1e-3)

    def test_same_seed_same_codebook(self):
        params = TypicalityParams(0.1, build_partition(8), 6)
        marginal = np.full(8, 1 / 8)
        a = generate_codebook(params, 1.0, marginal, 7)
        b = generate_codebook(params, 1.0, marginal, 7)
        c = generate_codebook(params, 1.0, marginal, 8)
        np.testing.assert_array_equal(a.codewords, b.codewords)
        self.assertFalse(np.array_equal(a.codewords, c.codewords))


class EncodeTests(SimpleTestCase):
    def setUp(self):
        self.part = build_partition(2)
        self.params = TypicalityParams(0.1, self.part, 1)
        self.joint = discretize_analytic_channel(self.part, 50.0).joint()

    def test_letter_pairs_with_its_own_hemisphere(self):
        book = Codebook(np.array([[0], [1]]), 2)
        self.assertEqual(encode([BlochPoint(0.3, 1.0)], book, self.joint, self.params), 0)
        self.assertEqual(encode([BlochPoint(2.8, 4.0)], book, self.joint, self.params), 1)

    def test_failure_is_none(self):
        book = Codebook(np.array([[1]]), 2)
        self.assertIsNone(encode([BlochPoint(0.3, 1.0)], book, self.joint, self.params))

    def test_block_length_must_match(self):
        book = Codebook(np.array([[0], [1]]), 2)
        with self.assertRaises(PreconditionError):
            encode([BlochPoint(0.3, 1.0)] * 2, book, self.joint, self.params)


class MonteCarloTests(SimpleTestCase):
    def test_chunk_sizes(self):
        self.assertEqual(chunk_sizes(25, 10), [10, 10, 5])
        self.assertEqual(chunk_sizes(20, 10), [10, 10])
        with self.assertRaises(PreconditionError):
            chunk_sizes(0, 10)

    def test_seed_validation(self):
        with self.assertRaises(PreconditionError):
            as_seed_sequence(-1)
        with self.assertRaises(PreconditionError):
            as_seed_sequence(2 ** 64)

    def test_results_do_not_depend_on_workers(self):
        def draw(rng, size):
            return rng.random(size).sum()

        one = map_chunks(draw, 50_000, SEED, chunk_size=7_000)
        four = map_chunks(draw, 50_000, SEED, chunk_size=7_000, workers=4)
        self.assertEqual(one, four)

    def test_channel_sampler_mean_overlap(self):
        rng = np.random.default_rng(SEED)
        y = sample_uniform(rng, 100_000)
        x = sample_channel_outputs(rng, y, 2.0)
        np.testing.assert_allclose(np.linalg.norm(x, axis=1), 1.0, atol=1e-12)
        u = (1.0 + np.einsum("ij,ij->i", x, y)) / 2.0
        self.assertAlmostEqual(float(u.mean()), 1.0 - p_lambda(2.0), delta=0.005)


class PoolingOracleTests(SimpleTestCase):
    def test_reproduces_posterior_eigenvalues(self):
        report = channel_pooling_oracle(2.0, 20_000, SEED)
        self.assertLess(report.z_score, 3.0)
        self.assertAlmostEqual(report.estimated_eigenvalues[0], p_lambda(2.0), delta=0.01)

    def test_detects_broken_rotation(self):
        def identity(vectors):
            return np.zeros_like(np.asarray(vectors, dtype=float).reshape(-1, 3))

        with mock.patch("bloch.rotations.north_rotvecs", side_effect=identity):
            report = channel_pooling_oracle(2.0, 20_000, SEED)
        self.assertGreater(report.z_score, 10.0)
        self.assertAlmostEqual(report.estimated_eigenvalues[0], 0.5, delta=0.02)

class EstimateTests(SimpleTestCase):
    def setUp(self):
        self.params = TypicalityParams(0.2, build_partition(8), 4)

    def test_small_run_is_valid(self):
        est = estimate_posterior_entropy(2.0, self.params, 1.0, 2000, SEED, chunk_size=500)
        self.assertTrue(est.valid)
        self.assertEqual(est.codebook_size, 16)
        self.assertAlmostEqual(est.rate_bits, 1.0)
        self.assertGreaterEqual(est.encoder_failure_rate, 0.0)
        self.assertLessEqual(est.encoder_failure_rate, 1.0)
        self.assertEqual(
            est.samples_used, round(est.num_samples * (1.0 - est.encoder_failure_rate))
        )
        self.assertGreaterEqual(est.pooled_rotated_entropy, 0.0)
        self.assertLessEqual(est.pooled_rotated_entropy, 1.0)
        self.assertGreaterEqual(est.confidence_halfwidth, 0.0)
        self.assertGreater(est.mean_overlap, 0.5)
        self.assertAlmostEqual(est.analytic_entropy, entropy_s(2.0))

    def test_deterministic_across_workers(self):
        a = estimate_posterior_entropy(2.0, self.params, 1.0, 2000, SEED, chunk_size=500)
        b = estimate_posterior_entropy(
            2.0, self.params, 1.0, 2000, SEED, chunk_size=500, workers=3
        )
        self.assertEqual(a.as_dict(), b.as_dict())

    def test_preconditions(self):
        with self.assertRaises(PreconditionError):
            estimate_posterior_entropy(2.0, self.params, 1.0, 10, SEED)
        wrong = Codebook(np.zeros((2, 3), dtype=int), 8)
        with self.assertRaises(PreconditionError):
            estimate_posterior_entropy(2.0, self.params, 1.0, 2000, SEED, codebook=wrong)

    def test_hemisphere_code_reproduces_hemisphere_entropy(self):
        params = TypicalityParams(0.1, build_partition(2), 1)
        book = Codebook(np.array([[0], [1]]), 2)
        est = estimate_posterior_entropy(50.0, params, 1.0, 20_000, SEED, codebook=book)
        self.assertEqual(est.encoder_failure_rate, 0.0)
        self.assertAlmostEqual(est.pooled_rotated_entropy, HEMISPHERE_ENTROPY, delta=0.01)
        self.assertAlmostEqual(est.exact_block_entropy, HEMISPHERE_ENTROPY, delta=0.01)
        self.assertEqual(est.block_entropy_codewords, 2)

    def test_failures_are_counted(self):
        params = TypicalityParams(0.1, build_partition(2), 1)
        book = Codebook(np.array([[1]]), 2)
        est = estimate_posterior_entropy(50.0, params, 0.0, 2000, SEED, codebook=book)
        # blocos do hemisfério norte não têm palavra típica
        self.assertTrue(est.valid)
        self.assertAlmostEqual(est.encoder_failure_rate, 0.5, delta=0.05)

    def test_all_failures_give_invalid_estimate(self):
        params = TypicalityParams(0.1, build_partition(2), 1, mode="strong")
        book = Codebook(np.array([[0], [1]]), 2)
        est = estimate_posterior_entropy(50.0, params, 1.0, 2000, SEED, codebook=book)
        self.assertFalse(est.valid)
        self.assertEqual(est.encoder_failure_rate, 1.0)
        self.assertIsNone(est.pooled_rotated_entropy)
        self.assertEqual(est.samples_used, 0)


class HemisphereExampleTests(SimpleTestCase):
    def test_exact_value(self):
        report = lo_hemisphere_example(20_000, SEED)
        self.assertAlmostEqual(report.exact, HEMISPHERE_ENTROPY, places=9)
        self.assertLess(report.gap, 0.01)
        self.assertAlmostEqual(report.north_entropy, HEMISPHERE_ENTROPY, delta=0.02)
        self.assertAlmostEqual(report.south_entropy, HEMISPHERE_ENTROPY, delta=0.02)

    @tag("slow")
    def test_monte_carlo_converges(self):
        report = lo_hemisphere_example(1_000_000, SEED, workers=4)
        self.assertLess(report.gap, 0.003)


@tag("slow")
class CodingTrendTests(SimpleTestCase):
    lam = 2.0
    caps = 48
    delta = 0.1

    def run_estimate(self, n, margin, samples=20_000, caps=None):
        params = TypicalityParams(self.delta, build_partition(caps or self.caps), n)
        return estimate_posterior_entropy(
            self.lam, params, rate_r1(self.lam) + margin, samples, SEED, workers=4
        )

    @staticmethod
    def standard_error(est):
        f = est.encoder_failure_rate
        return math.sqrt(max(f * (1.0 - f), 1e-12) / est.num_samples)

    def assert_non_increasing(self, estimates):
        for a, b in zip(estimates, estimates[1:]):
            noise = 2.0 * math.hypot(self.standard_error(a), self.standard_error(b))
            self.assertLessEqual(b.encoder_failure_rate, a.encoder_failure_rate + noise)

    def test_failure_rate_falls_with_blocklength(self):
        self.assert_non_increasing([self.run_estimate(n, 0.2) for n in (4, 8, 12)])

    def test_failure_rate_falls_with_rate_margin(self):
        self.assert_non_increasing([self.run_estimate(8, m) for m in (0.0, 0.1, 0.2, 0.4)])

    def test_failure_rate_grows_below_the_curve(self):
        estimates = [self.run_estimate(n, -0.15) for n in (4, 8, 12)]
        self.assert_non_increasing(estimates[::-1])

    def test_pooled_entropy_near_curve(self):
        est = self.run_estimate(8, 0.2, samples=100_000)
        self.assertTrue(est.valid)
        corrected = est.pooled_rotated_entropy - est.coarse_graining_bias
        self.assertLess(abs(corrected - entropy_s(self.lam)), 0.05)
        self.assertLessEqual(
            est.exact_block_entropy, est.pooled_rotated_entropy + est.confidence_halfwidth
        )

    def test_bias_shrinks_with_caps(self):
        biases = [
            abs(self.run_estimate(8, 0.2, samples=2000, caps=c).coarse_graining_bias)
            for c in (48, 192, 768)
        ]
        self.assertGreater(biases[0], biases[1])
        self.assertGreater(biases[1], biases[2])

    def test_pooled_entropy_approaches_curve_with_caps(self):
        target = entropy_s(self.lam)
        estimates = [self.run_estimate(8, 0.2, caps=c) for c in (48, 192, 768)]
        for est in estimates:
            self.assertTrue(est.valid)
        for a, b in zip(estimates, estimates[1:]):
            noise = math.hypot(a.confidence_halfwidth, b.confidence_halfwidth)
            self.assertLessEqual(
                abs(b.pooled_rotated_entropy - target),
                abs(a.pooled_rotated_entropy - target) + noise,
            )

    def test_pooling_oracle(self):
        report = channel_pooling_oracle(self.lam, 1_000_000, SEED, workers=4)
        self.assertLess(report.z_score, 3.0)
        self.assertAlmostEqual(report.exact_eigenvalues[0], p_lambda(self.lam))
