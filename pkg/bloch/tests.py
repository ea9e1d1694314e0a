import math

import numpy as np
from django.test import SimpleTestCase
from scipy.spatial.transform import Rotation as SO3
from scipy.stats import qmc

from .exceptions import InvalidStateError, PreconditionError
from .partition import build_partition
from .rotations import Rotation, rotate_each_to_north, rotation_to_north
from .states import (
    NORTH,
    SOUTH,
    TWO_PI,
    BlochPoint,
    DensityMatrix,
    binary_entropy,
    mix,
    mix_vectors,
    overlap,
    overlap_amplitude,
    pure_density,
    sample_uniform,
    von_neumann_entropy,
)

SEED = 20010601


class BlochPointTests(SimpleTestCase):
    def test_validation(self):
        with self.assertRaises(PreconditionError):
            BlochPoint(-0.1, 0.0)
        with self.assertRaises(PreconditionError):
            BlochPoint(math.pi + 1e-9, 0.0)
        with self.assertRaises(PreconditionError):
            BlochPoint(1.0, float("inf"))

    def test_phi_wraps_and_poles_are_canonical(self):
        self.assertAlmostEqual(BlochPoint(1.0, TWO_PI + 0.5).phi, 0.5)
        self.assertAlmostEqual(BlochPoint(1.0, -0.5).phi, TWO_PI - 0.5)
        self.assertEqual(BlochPoint(0.0, 3.0), NORTH)
        self.assertEqual(BlochPoint(math.pi, 1.0), SOUTH)

    def test_vector_round_trip(self):
        p = BlochPoint(1.2, 4.0)
        q = BlochPoint.from_vector(p.vector * 3.0)
        self.assertAlmostEqual(q.theta, p.theta, places=12)
        self.assertAlmostEqual(q.phi, p.phi, places=12)


class OverlapTests(SimpleTestCase):
    def test_examples(self):
        self.assertAlmostEqual(overlap(NORTH, NORTH), 1.0)
        self.assertAlmostEqual(overlap(NORTH, SOUTH), 0.0)
        self.assertAlmostEqual(overlap(NORTH, BlochPoint(math.pi / 2, 0.3)), 0.5)

    def test_dot_product_and_amplitude_agree(self):
        rng = np.random.default_rng(SEED)
        vectors = sample_uniform(rng, 50)
        points = [BlochPoint.from_vector(v) for v in vectors]
        for a, b in zip(points, points[1:]):
            u = overlap(a, b)
            self.assertGreaterEqual(u, 0.0)
            self.assertLessEqual(u, 1.0)
            self.assertAlmostEqual(u, overlap_amplitude(a, b), places=12)
            self.assertAlmostEqual(u, overlap(b, a), places=15)


class DensityMatrixTests(SimpleTestCase):
    def test_pure_state(self):
        rho = pure_density(BlochPoint(0.8, 2.0))
        self.assertAlmostEqual(von_neumann_entropy(rho), 0.0, places=10)
        np.testing.assert_allclose(rho.bloch_vector, BlochPoint(0.8, 2.0).vector, atol=1e-12)

    def test_rejects_invalid_matrices(self):
        with self.assertRaises(InvalidStateError):
            DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))
        with self.assertRaises(InvalidStateError):
            DensityMatrix(np.eye(2))
        with self.assertRaises(InvalidStateError):
            DensityMatrix(np.diag([1.5, -0.5]))
        with self.assertRaises(InvalidStateError):
            DensityMatrix(np.eye(3) / 3.0)

    def test_entries_are_read_only(self):
        rho = DensityMatrix.maximally_mixed()
        with self.assertRaises(ValueError):
            rho.entries[0, 0] = 1.0

    def test_maximally_mixed_entropy(self):
        self.assertAlmostEqual(von_neumann_entropy(DensityMatrix.maximally_mixed()), 1.0)
        self.assertAlmostEqual(von_neumann_entropy(DensityMatrix.maximally_mixed(4)), 2.0)

    def test_unitary_invariance(self):
        rho = DensityMatrix.from_bloch_vector([0.3, -0.2, 0.5])
        rot = Rotation(SO3.from_rotvec([0.4, 1.1, -0.7]))
        u = rot.unitary()
        turned = DensityMatrix(u @ rho.entries @ u.conj().T)
        self.assertAlmostEqual(von_neumann_entropy(turned), von_neumann_entropy(rho), places=12)
        np.testing.assert_allclose(
            turned.bloch_vector, rot.apply_vectors(rho.bloch_vector), atol=1e-12
        )


class MixTests(SimpleTestCase):
    def test_weights_must_sum_to_one(self):
        with self.assertRaises(PreconditionError):
            mix([(NORTH, 0.5), (SOUTH, 0.4)])
        with self.assertRaises(PreconditionError):
            mix([(NORTH, 1.5), (SOUTH, -0.5)])
        with self.assertRaises(PreconditionError):
            mix([])

    def test_poles_mix_to_identity(self):
        rho = mix([(NORTH, 0.5), (SOUTH, 0.5)])
        np.testing.assert_allclose(rho.entries, np.eye(2) / 2.0, atol=1e-15)

    def test_grid_mixture_is_maximally_mixed(self):
        rho = mix_vectors(build_partition(200).centroid_vectors)
        np.testing.assert_allclose(rho.entries, np.eye(2) / 2.0, atol=1e-2)
        self.assertGreater(von_neumann_entropy(rho), 0.999)

    def test_hemisphere_mixture(self):
        rho = mix_vectors(build_partition(2).mean_vectors[:1])
        np.testing.assert_allclose(rho.eigenvalues, [0.25, 0.75], atol=1e-12)

        rng = np.random.default_rng(SEED)
        v = sample_uniform(rng, 100_000)
        v = v[v[:, 2] >= 0.0]
        np.testing.assert_allclose(mix_vectors(v).eigenvalues, [0.25, 0.75], atol=1e-2)


class BinaryEntropyTests(SimpleTestCase):
    def test_values(self):
        self.assertEqual(binary_entropy(0.0), 0.0)
        self.assertEqual(binary_entropy(1.0), 0.0)
        self.assertAlmostEqual(binary_entropy(0.5), 1.0)
        self.assertAlmostEqual(binary_entropy(0.25), 0.8112781244591328)
        np.testing.assert_allclose(binary_entropy(np.array([0.5, 0.0])), [1.0, 0.0])

    def test_rejects_out_of_range(self):
        with self.assertRaises(PreconditionError):
            binary_entropy(1.1)
        with self.assertRaises(PreconditionError):
            binary_entropy(np.array([0.2, -0.1]))


class RotationTests(SimpleTestCase):
    def test_to_north(self):
        for y in (BlochPoint(1.0, 2.0), SOUTH, NORTH, BlochPoint(math.pi / 2, 0.0)):
            moved = rotation_to_north(y).apply(y)
            self.assertAlmostEqual(moved.theta, 0.0, places=7)

    def test_preserves_overlaps(self):
        y = BlochPoint(2.2, 5.0)
        rot = rotation_to_north(y)
        a, b = BlochPoint(0.3, 1.0), BlochPoint(2.5, 3.3)
        self.assertAlmostEqual(overlap(rot.apply(a), rot.apply(b)), overlap(a, b), places=12)
        back = rot.inverse().apply(rot.apply(a))
        self.assertAlmostEqual(overlap(back, a), 1.0, places=12)

    def test_batched_rotation(self):
        rng = np.random.default_rng(SEED)
        anchors = sample_uniform(rng, 100)
        moved = rotate_each_to_north(anchors, anchors)
        np.testing.assert_allclose(moved, np.tile([0.0, 0.0, 1.0], (100, 1)), atol=1e-12)
        self.assertEqual(rotate_each_to_north(np.empty((0, 3)), np.empty((0, 3))).shape, (0, 3))


class PartitionTests(SimpleTestCase):
    def test_rejects_small_or_fractional_counts(self):
        for bad in (1, 0, -3, 2.5):
            with self.assertRaises(PreconditionError):
                build_partition(bad)

    def test_two_caps_are_hemispheres(self):
        part = build_partition(2)
        self.assertEqual(part.cap_count, 2)
        self.assertEqual(part.centroids, (NORTH, SOUTH))
        np.testing.assert_allclose(part.weights, [0.5, 0.5])
        np.testing.assert_allclose(part.mean_vectors, [[0, 0, 0.5], [0, 0, -0.5]], atol=1e-15)

    def test_sizes(self):
        for n in (3, 5, 10, 48, 100, 500):
            part = build_partition(n)
            self.assertEqual(part.cap_count, n)
            self.assertEqual(int(part.sectors.sum()), n)
            self.assertEqual(len(part.centroids), n)
            self.assertAlmostEqual(float(part.weights.sum()), 1.0, places=12)
            self.assertTrue(np.all(np.linalg.norm(part.mean_vectors, axis=1) <= 1.0))
            self.assertEqual(part.cap_bounds(n - 1)[3], TWO_PI)

    def test_diameter_shrinks_like_inverse_sqrt(self):
        # célula quase quadrada de área 4π/N: diagonal √(8π/N)
        for n in (48, 192, 768):
            part = build_partition(n)
            bound = 1.06 * math.sqrt(8.0 * math.pi / n)
            self.assertLessEqual(part.diameter_bound, bound, msg=f"N={n}")
        self.assertLess(build_partition(48).diameter_bound, 0.77)
        self.assertLess(build_partition(500).diameter_bound, build_partition(48).diameter_bound)

    def test_polar_caps_are_equal_area_disks(self):
        part = build_partition(48)
        disk = 4.0 * math.asin(math.sqrt(1.0 / 48))
        self.assertAlmostEqual(float(part.diameters[0]), disk, places=12)
        self.assertAlmostEqual(float(part.diameters[-1]), disk, places=12)
        self.assertGreaterEqual(part.diameter_bound, disk)

    def test_centroid_kets_are_normalized(self):
        kets = build_partition(48).centroid_kets
        np.testing.assert_allclose(np.sum(np.abs(kets) ** 2, axis=1), 1.0, atol=1e-12)

    def test_cover_and_disjointness(self):
        part = build_partition(48)
        rng = np.random.default_rng(SEED)
        v = sample_uniform(rng, 20_000)
        v = np.vstack([v, [[0, 0, 1.0], [0, 0, -1.0], [1.0, 0, 0]]])
        membership = np.array([part.contains(i, v) for i in range(part.cap_count)])
        np.testing.assert_array_equal(membership.sum(axis=0), 1)
        np.testing.assert_array_equal(membership.argmax(axis=0), part.locate(v))

    def test_equal_area(self):
        part = build_partition(48)
        rng = np.random.default_rng(SEED + 1)
        samples = 20_000
        counts = np.bincount(part.locate(sample_uniform(rng, samples)), minlength=48)
        expected = samples / 48
        sigma = math.sqrt(samples * (1 / 48) * (47 / 48))
        self.assertLess(float(np.max(np.abs(counts - expected))), 5.0 * sigma)

    def test_equal_area_million_samples(self):
        part = build_partition(48)
        # 2^20 pontos uniformes (Sobol embaralhado) em (z, φ), que preserva área
        uv = qmc.Sobol(d=2, scramble=True, seed=SEED).random_base2(m=20)
        z = 1.0 - 2.0 * uv[:, 0]
        phi = TWO_PI * uv[:, 1]
        r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        v = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])

        samples = v.shape[0]
        counts = np.bincount(part.locate(v), minlength=48)
        expected = samples * part.weights
        se = np.sqrt(samples * part.weights * (1.0 - part.weights))
        self.assertTrue(np.all(np.abs(counts - expected) < 3.0 * se), counts - expected)

    def test_contains_rejects_bad_index(self):
        with self.assertRaises(PreconditionError):
            build_partition(4).contains(4, np.zeros((1, 3)))
