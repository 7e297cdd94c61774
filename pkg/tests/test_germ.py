import unittest
import random
import sys
import os
from collections import Counter

# Add src to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from errors import DomainError
from services.germ_service import DecoratedGerm, GermService
from services.plumbing_service import PlumbingGraph, PlumbingService


def random_tree(rng, size, extra=2):
    edges = [(rng.randrange(k), k) for k in range(1, size)]
    valency = Counter(v for edge in edges for v in edge)
    vertices = [(v, -max(2, valency[v] + rng.randint(0, extra))) for v in range(size)]
    return PlumbingGraph.build(vertices, edges)


class TestGermService(unittest.TestCase):

    def setUp(self):
        self.service = GermService()
        self.plumbing = PlumbingService()
        self.single = PlumbingGraph.build([(0, -3)])
        self.chain = PlumbingGraph.build([(0, -2), (1, -3), (2, -2)], [(0, 1), (1, 2)])

    def test_single_vertex_germ(self):
        for ext in self.plumbing.enumerate_extensions(self.single):
            germ = self.service.derive_germ(ext)
            self.assertEqual(germ.weights, (2, 2))
            self.assertEqual(germ.tangency, ((0, 1), (1, 0)))

    def test_chain_germ(self):
        first = self.plumbing.enumerate_extensions(self.chain)[0]
        germ = self.service.derive_germ(first)
        self.assertEqual(germ.weights, (3, 4))
        self.assertEqual(germ.tang(1, 2), 2)
        self.assertEqual(germ.t(1), 2)
        self.assertEqual(self.service.blowdown_oracle(first), germ)

    def test_oracle_agrees_on_random_trees(self):
        rng = random.Random(3)
        for _ in range(200):
            graph = random_tree(rng, rng.randint(1, 12), extra=1)
            for ext in self.plumbing.enumerate_extensions(graph):
                germ = self.service.derive_germ(ext)
                self.assertEqual(self.service.blowdown_oracle(ext), germ)
                self.assertTrue(self.service.validate_germ(germ).ok)
                self.assertEqual(germ.m, len(ext.curvetta_labels))

    def test_validate_germ(self):
        self.assertTrue(self.service.validate_germ(DecoratedGerm(2, (2, 2), ((0, 1), (1, 0)))).ok)

        heavy = self.service.validate_germ(DecoratedGerm(2, (1, 2), ((0, 1), (1, 0))))
        self.assertFalse(heavy.checks["weights"])

        not_ultrametric = DecoratedGerm(3, (5, 5, 5), ((0, 3, 1), (3, 0, 3), (1, 3, 0)))
        report = self.service.validate_germ(not_ultrametric)
        self.assertFalse(report.checks["ultrametric"])
        self.assertFalse(report.ok)

        asymmetric = DecoratedGerm(2, (3, 3), ((0, 1), (2, 0)))
        self.assertFalse(self.service.validate_germ(asymmetric).checks["symmetric_positive"])

    def test_germ_shape(self):
        with self.assertRaises(DomainError):
            DecoratedGerm(2, (2, 2, 2), ((0, 1), (1, 0)))

    def test_level_classes(self):
        germ = DecoratedGerm(
            4, (4, 4, 3, 2),
            ((0, 3, 2, 1), (3, 0, 2, 1), (2, 2, 0, 1), (1, 1, 1, 0)),
        )
        self.assertEqual(self.service.tangency_level_classes(germ, 1), [[1, 2, 3, 4]])
        self.assertEqual(self.service.tangency_level_classes(germ, 2), [[1, 2, 3], [4]])
        self.assertEqual(self.service.tangency_level_classes(germ, 3), [[1, 2], [3], [4]])

    def test_reorder(self):
        germ = DecoratedGerm(3, (4, 3, 2), ((0, 2, 1), (2, 0, 1), (1, 1, 0)))
        moved = germ.reorder([3, 1, 2])
        self.assertEqual(moved.weights, (2, 4, 3))
        self.assertEqual(moved.tang(2, 3), 2)
        self.assertEqual(moved.tang(1, 2), 1)


if __name__ == '__main__':
    unittest.main()
