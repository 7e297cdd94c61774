import unittest
import random
import sys
import os
from collections import Counter
from itertools import combinations

# Add src to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from errors import DomainError, StructuralError
from services.germ_service import DecoratedGerm
from services.lefschetz_service import LefschetzService
from services.mcg_service import McgService
from services.plumbing_service import PlumbingGraph, PlumbingService
from services.scott_service import LaminarFamily, ScottService


def random_tree(rng, size, extra=1):
    edges = [(rng.randrange(k), k) for k in range(1, size)]
    valency = Counter(v for edge in edges for v in edge)
    vertices = [(v, -max(2, valency[v] + rng.randint(0, extra))) for v in range(size)]
    return PlumbingGraph.build(vertices, edges)


class TestScottService(unittest.TestCase):

    def setUp(self):
        self.service = ScottService()
        self.lefschetz = LefschetzService()
        self.mcg = McgService()
        self.d3 = DecoratedGerm(2, (2, 2), ((0, 1), (1, 0)))
        self.five = DecoratedGerm(
            5, (4, 4, 3, 5, 5),
            (
                (0, 3, 2, 1, 1),
                (3, 0, 2, 1, 1),
                (2, 2, 0, 1, 1),
                (1, 1, 1, 0, 4),
                (1, 1, 1, 4, 0),
            ),
        )

    def test_d3_deformation(self):
        family, fibration, matrix = self.service.scott_deformation(self.d3)
        self.assertEqual(family.order, (1, 2))
        self.assertEqual([c.holes for c in fibration.cycles], [(1, 2), (1,), (2,)])
        self.assertEqual(matrix.rows, ((1, 1, 0), (1, 0, 1)))
        self.assertEqual(self.lefschetz.invariants(matrix).intersection_form, [[-3]])

    def test_five_branch_blocks(self):
        blocks = self.service.scott_blocks(self.five)
        self.assertEqual(blocks, [
            (1, frozenset({1, 2, 3, 4, 5})),
            (2, frozenset({1, 2, 3})),
            (2, frozenset({4, 5})),
            (3, frozenset({1, 2})),
            (3, frozenset({4, 5})),
            (4, frozenset({4, 5})),
        ])
        self.assertEqual(self.service.scott_order(self.five), [1, 2, 3, 4, 5])

    def test_five_branch_deformation(self):
        family, fibration, matrix = self.service.scott_deformation(self.five)
        self.assertEqual(family.free, ((1, 1), (2, 1), (3, 1), (4, 1), (5, 1)))
        self.assertEqual(fibration.n, 11)
        self.assertEqual(matrix.row_sums(), (4, 4, 3, 5, 5))
        self.assertEqual(sum(1 for c in matrix.columns() if 4 in c and len(c) > 1), 4)
        self.assertTrue(all(c.conjugator.is_identity for c in fibration.cycles))
        for a, b in combinations(fibration.cycles, 2):
            self.assertTrue(self.mcg.curves_disjoint(a, b))

    def test_order_follows_tangency_tree(self):
        germ = DecoratedGerm(3, (3, 2, 3), ((0, 1, 2), (1, 0, 1), (2, 1, 0)))
        family, fibration, matrix = self.service.scott_deformation(germ)
        self.assertEqual(family.order, (1, 3, 2))
        self.assertEqual(matrix.row_sums(), (3, 3, 2))
        self.assertIn((1, 2), matrix.columns())

    def test_invalid_germ(self):
        with self.assertRaises(DomainError):
            self.service.scott_deformation(DecoratedGerm(2, (1, 2), ((0, 1), (1, 0))))

    def test_laminar_family_needs_intervals(self):
        with self.assertRaises(StructuralError):
            LaminarFamily(3, (1, 2, 3), ((1, {1, 3}),), ())
        with self.assertRaises(StructuralError):
            LaminarFamily(3, (1, 1, 3), (), ())

    def test_gay_mark_single_vertex(self):
        G = PlumbingGraph.build([(0, -3)])
        for slot in (1, 2, 3):
            family = self.service.gay_mark(G, slot)
            self.assertEqual(Counter(family.sets), Counter([frozenset({1, 2}), frozenset({1}), frozenset({2})]))
        with self.assertRaises(DomainError):
            self.service.gay_mark(G, 4)

    def test_gay_mark_chain(self):
        G = PlumbingGraph.build([(0, -2), (1, -3), (2, -2)], [(0, 1), (1, 2)])
        family = self.service.gay_mark(G, 1)
        self.assertEqual(
            Counter(family.sets),
            Counter([frozenset({1, 2}), frozenset({1, 2}), frozenset({2}), frozenset({1}), frozenset({2})]),
        )
        self.assertTrue(family.is_laminar())

    def test_agreement_on_small_graphs(self):
        single = PlumbingGraph.build([(0, -3)])
        chain = PlumbingGraph.build([(0, -2), (1, -3), (2, -2)], [(0, 1), (1, 2)])
        self.assertTrue(self.service.artin_agreement(single))
        self.assertTrue(self.service.artin_agreement(chain))
        report = self.service.artin_agreement_report(chain)
        self.assertEqual([entry["slot"] for entry in report], [1, 2, 3])

    def test_agreement_on_random_trees(self):
        rng = random.Random(29)
        for _ in range(100):
            G = random_tree(rng, rng.randint(1, 10))
            for entry in self.service.artin_agreement_report(G):
                self.assertTrue(entry["records_equal"], f"records differ on {G} at slot {entry['slot']}")
                self.assertTrue(entry["matrices_equivalent"], f"matrices differ on {G} at slot {entry['slot']}")
                self.assertTrue(entry["round_trip"], f"graph not recovered from {G} at slot {entry['slot']}")

    def test_scott_cycles_are_disjoint_on_random_trees(self):
        rng = random.Random(31)
        plumbing = PlumbingService()
        germs = self.service.germs
        for _ in range(100):
            G = random_tree(rng, rng.randint(1, 10))
            extended = plumbing.enumerate_extensions(G)[0]
            _, fibration, _ = self.service.scott_deformation(germs.derive_germ(extended))
            for a, b in combinations(fibration.cycles, 2):
                self.assertTrue(self.mcg.curves_disjoint(a, b), f"crossing cycles {a.holes}, {b.holes} on {G}")


if __name__ == '__main__':
    unittest.main()
