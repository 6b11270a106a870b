import unittest

import numpy as np

from analysis.correlation import cross_correlation, torus_embedding


class TestCorrelation(unittest.TestCase):
    def test_embedding_shape_and_periodicity(self):
        x = np.array([[0.1, 0.3], [1.1, -0.7]])
        emb = torus_embedding(x)
        self.assertEqual(emb.shape, (2, 4))
        np.testing.assert_allclose(emb[0], emb[1], atol=1e-12)

    def test_perfect_and_anti_correlation(self):
        a = np.arange(10.0)[:, None]
        b = np.column_stack([2 * a[:, 0] + 1, -a[:, 0]])
        np.testing.assert_allclose(cross_correlation(a, b), [[1.0, -1.0]])

    def test_constant_column_gives_zero(self):
        a = np.ones((5, 1))
        b = np.arange(5.0)[:, None]
        np.testing.assert_array_equal(cross_correlation(a, b), [[0.0]])

    def test_row_mismatch(self):
        with self.assertRaises(ValueError):
            cross_correlation(np.zeros((3, 1)), np.zeros((4, 1)))
