import unittest
import random
import sys
import os
from collections import Counter

import numpy as np

# Add src to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from errors import DomainError, StructuralError
from services.plumbing_service import PlumbingGraph, PlumbingService


def random_tree(rng, size, extra=2):
    edges = [(rng.randrange(k), k) for k in range(1, size)]
    valency = Counter(v for edge in edges for v in edge)
    vertices = [(v, -max(2, valency[v] + rng.randint(0, extra))) for v in range(size)]
    return PlumbingGraph.build(vertices, edges)


class TestPlumbingService(unittest.TestCase):

    def setUp(self):
        self.service = PlumbingService()
        self.single = PlumbingGraph.build([(0, -3)])
        self.chain = PlumbingGraph.build([(0, -2), (1, -3), (2, -2)], [(0, 1), (1, 2)])

    def test_single_vertex(self):
        report = self.service.validate_reduced_cycle(self.single)
        self.assertTrue(report.ok)
        self.assertEqual(self.service.fundamental_cycle(self.single), ({0: 1}, 3))
        self.assertEqual(self.service.branch_count(self.single), 2)

    def test_chain(self):
        coefficients, multiplicity = self.service.fundamental_cycle(self.chain)
        self.assertEqual(coefficients, {0: 1, 1: 1, 2: 1})
        self.assertEqual(multiplicity, 3)
        self.assertEqual(self.service.slot_carriers(self.chain), [0, 1, 2])

    def test_extensions(self):
        extensions = self.service.enumerate_extensions(self.chain)
        self.assertEqual(len(extensions), 3)
        self.assertEqual([ext.outer_slot for ext in extensions], [1, 2, 3])
        self.assertEqual([ext.root() for ext in extensions], [0, 1, 2])
        first = extensions[0]
        self.assertEqual(first.m, 2)
        self.assertEqual([first.carrier(1), first.carrier(2)], [1, 2])
        self.assertEqual(self.service.length_overlap(first, 1, 2), (2, 2))
        with self.assertRaises(DomainError):
            first.carrier(3)

    def test_extension_by_slot(self):
        self.assertEqual(self.service.extension(self.chain, 2).outer_slot, 2)
        with self.assertRaises(DomainError):
            self.service.extension(self.chain, 4)

    def test_group_extensions(self):
        self.assertEqual(
            self.service.group_extensions(self.service.enumerate_extensions(self.chain)),
            [[0, 2], [1]],
        )
        self.assertEqual(
            self.service.group_extensions(self.service.enumerate_extensions(self.single)),
            [[0, 1, 2]],
        )

    def test_invalid_graphs(self):
        not_definite = PlumbingGraph.build([(0, 0)])
        self.assertFalse(self.service.validate_reduced_cycle(not_definite).checks["negative_definite"])

        cycle = PlumbingGraph.build([(0, -3), (1, -3), (2, -3)], [(0, 1), (1, 2), (0, 2)])
        report = self.service.validate_reduced_cycle(cycle)
        self.assertFalse(report.checks["tree"])
        self.assertFalse(report.ok)

        crowded = PlumbingGraph.build([(0, -2), (1, -2), (2, -2), (3, -2)], [(0, 1), (0, 2), (0, 3)])
        self.assertFalse(self.service.validate_reduced_cycle(crowded).checks["reduced_cycle"])
        with self.assertRaises(DomainError):
            self.service.enumerate_extensions(crowded)

    def test_minus_one_vertex(self):
        graph = PlumbingGraph.build([(0, -1)])
        self.assertTrue(self.service.validate_reduced_cycle(graph).ok)
        with self.assertRaises(DomainError):
            self.service.enumerate_extensions(graph)

    def test_structural_errors(self):
        with self.assertRaises(StructuralError):
            PlumbingGraph.build([(0, -2), (0, -3)])
        with self.assertRaises(StructuralError):
            PlumbingGraph.build([(0, -2)], [(0, 0)])
        with self.assertRaises(StructuralError):
            PlumbingGraph.build([(0, -2), (1, -2)], [(0, 1), (1, 0)])
        with self.assertRaises(StructuralError):
            PlumbingGraph.build([(0, -2)], [(0, 5)])

    def test_definiteness_matches_eigenvalues(self):
        rng = random.Random(11)
        for _ in range(60):
            size = rng.randint(1, 7)
            edges = [(rng.randrange(k), k) for k in range(1, size)]
            vertices = [(v, rng.randint(-4, -1)) for v in range(size)]
            graph = PlumbingGraph.build(vertices, edges)
            matrix = np.array(graph.intersection_matrix().tolist(), dtype=float)
            expected = bool(np.linalg.eigvalsh(matrix).max() < -1e-9)
            self.assertEqual(self.service.is_negative_definite(graph), expected)

    def test_random_trees_have_reduced_cycle(self):
        rng = random.Random(5)
        for _ in range(30):
            graph = random_tree(rng, rng.randint(1, 7))
            self.assertTrue(self.service.validate_reduced_cycle(graph).ok)
            _, multiplicity = self.service.fundamental_cycle(graph)
            extensions = self.service.enumerate_extensions(graph)
            self.assertEqual(len(extensions), multiplicity)
            for ext in extensions:
                self.assertEqual(ext.m, multiplicity - 1)
                ext.validate()


if __name__ == '__main__':
    unittest.main()
