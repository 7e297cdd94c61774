import unittest
import random
import sys
import os
from math import prod

import numpy as np
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form as sympy_smith_normal_form

# Add src to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from errors import DomainError, PreconditionError
from services.lefschetz_service import (
    IncidenceMatrix,
    LefschetzFibration,
    LefschetzService,
    NestedFamily,
)
from services.mcg_service import Curve, McgService


def random_matrix(rng, m, n):
    columns = []
    for _ in range(n):
        size = rng.randint(1, m)
        columns.append(rng.sample(range(1, m + 1), size))
    return IncidenceMatrix.from_columns(m, columns)


class TestLefschetzService(unittest.TestCase):

    def setUp(self):
        self.service = LefschetzService()
        self.mcg = McgService()
        self.rng = random.Random(17)
        self.d3 = IncidenceMatrix(((1, 1, 0), (1, 0, 1)))

    def test_d3_invariants(self):
        result = self.service.invariants(self.d3)
        self.assertEqual(result.h1_torsion, [])
        self.assertEqual(result.h1_rank, 0)
        self.assertEqual(result.h2_rank, 1)
        self.assertEqual(result.h2_basis, [[1, -1, -1]])
        self.assertEqual(result.intersection_form, [[-3]])
        self.assertEqual(result.c1, [-1])
        self.assertEqual(result.euler, 2)
        self.assertTrue(result.b1_zero)
        self.assertEqual(result.discriminant_torsion, [3])
        self.assertEqual(result.to_dict()["discriminant"], {"torsion": [3], "rank": 0})

    def test_identity_matrix_is_a_ball(self):
        result = self.service.invariants(IncidenceMatrix(((1, 0, 0), (0, 1, 0), (0, 0, 1))))
        self.assertEqual(result.h2_rank, 0)
        self.assertEqual(result.euler, 1)
        self.assertEqual(result.intersection_form, [])
        self.assertEqual(result.discriminant_torsion, [])

    def test_torsion_in_h1(self):
        result = self.service.invariants(IncidenceMatrix(((1, 1), (1, 1))))
        self.assertEqual(result.h1_rank, 1)
        self.assertFalse(result.b1_zero)
        self.assertEqual(result.h2_basis, [[1, -1]])
        self.assertEqual(result.intersection_form, [[-2]])

    def test_smith_normal_form(self):
        D, U, V = self.service.smith_normal_form(Matrix([[2, 0], [0, 3]]))
        self.assertEqual(D, Matrix([[1, 0], [0, 6]]))
        self.assertEqual(U * Matrix([[2, 0], [0, 3]]) * V, D)

    def test_smith_normal_form_is_unimodular_and_divisible(self):
        for _ in range(20):
            rows = [[self.rng.randint(-6, 6) for _ in range(3)] for _ in range(4)]
            M = Matrix(rows)
            D, U, V = self.service.smith_normal_form(M)
            self.assertEqual(U * M * V, D)
            self.assertEqual(abs(U.det()), 1)
            self.assertEqual(abs(V.det()), 1)
            self.assertEqual(D, sympy_smith_normal_form(M, domain=ZZ))
            nonzero = [D[k, k] for k in range(3) if D[k, k] != 0]
            for a, b in zip(nonzero, nonzero[1:]):
                self.assertEqual(b % a, 0)

    def test_form_is_negative_definite(self):
        for _ in range(20):
            matrix = random_matrix(self.rng, self.rng.randint(2, 4), self.rng.randint(3, 7))
            result = self.service.invariants(matrix)
            if not result.intersection_form:
                continue
            form = np.array(result.intersection_form, dtype=float)
            self.assertLess(np.linalg.eigvalsh(form).max(), 0)
            self.assertEqual(len(result.h2_basis), result.h2_rank)

    def test_basis_spans_the_kernel(self):
        for _ in range(20):
            matrix = random_matrix(self.rng, self.rng.randint(2, 5), self.rng.randint(3, 9))
            result = self.service.invariants(matrix)
            for row in result.h2_basis:
                self.assertEqual(list(matrix.to_matrix() * Matrix(row)), [0] * matrix.m)
            if result.h2_basis:
                self.assertEqual(Matrix(result.h2_basis).rank(), result.h2_rank)

    def test_discriminant_order_is_the_determinant(self):
        for _ in range(30):
            matrix = random_matrix(self.rng, self.rng.randint(2, 5), self.rng.randint(3, 9))
            result = self.service.invariants(matrix)
            if not result.intersection_form:
                continue
            self.assertEqual(result.discriminant_rank, 0)
            expected = abs(Matrix(result.intersection_form).det())
            self.assertEqual(prod(result.discriminant_torsion), expected)
            direct = [d for d in sympy_smith_normal_form(Matrix(result.intersection_form), domain=ZZ).diagonal()]
            self.assertEqual(result.discriminant_torsion, [abs(d) for d in direct if abs(d) > 1])

    def test_invariants_ignore_column_order(self):
        I1 = IncidenceMatrix.from_columns(3, [(1, 2, 3), (1, 2), (1,), (2,), (3,), (3,)])
        I2 = IncidenceMatrix.from_columns(3, [(3,), (1,), (1, 2), (3,), (1, 2, 3), (2,)])
        self.assertTrue(self.service.matrices_equivalent(I1, I2))
        a, b = self.service.invariants(I1), self.service.invariants(I2)
        self.assertEqual(a.euler, b.euler)
        self.assertEqual(a.h1_torsion, b.h1_torsion)
        self.assertEqual(a.discriminant_torsion, b.discriminant_torsion)

    def test_incidence_matrix_shape(self):
        with self.assertRaises(DomainError):
            IncidenceMatrix(((1, 0), (0, 0)))
        with self.assertRaises(DomainError):
            IncidenceMatrix(((1, 2),))
        self.assertEqual(self.d3.columns(), [(1, 2), (1,), (2,)])
        self.assertEqual(self.d3.row_sums(), (2, 2))

    def test_simply_connected_sufficient(self):
        self.assertTrue(self.service.simply_connected_sufficient(self.d3))
        self.assertFalse(self.service.simply_connected_sufficient(IncidenceMatrix(((1,), (1,)))))

    def test_lantern_substitute(self):
        I = IncidenceMatrix.from_columns(3, [(1, 2, 3), (1,), (2,), (3,)])
        J = self.service.lantern_substitute(I, 0)
        self.assertEqual(J.columns(), [(1, 2), (1, 3), (2, 3)])
        self.assertEqual(self.service.invariants(J).euler, self.service.invariants(I).euler - 1)

    def test_lantern_preconditions(self):
        with self.assertRaises(PreconditionError):
            self.service.lantern_substitute(IncidenceMatrix.from_columns(3, [(1, 2, 3), (1,), (2,)]), 0)
        with self.assertRaises(PreconditionError):
            self.service.lantern_substitute(self.d3, 0)
        with self.assertRaises(PreconditionError):
            self.service.lantern_substitute(self.d3, 5)

    def test_lantern_on_cycles_keeps_monodromy(self):
        cycles = [Curve.convex(4, (4,)), Curve.convex(4, (1, 2, 3))] + [Curve.convex(4, (h,)) for h in (1, 2, 3)]
        L = LefschetzFibration(4, tuple(cycles))
        substituted = self.service.lantern_substitute_cycles(L, 1)
        self.assertEqual(substituted.n, L.n - 1)
        self.assertTrue(self.mcg.records_equal(
            self.mcg.product_record(L.cycles),
            self.mcg.product_record(substituted.cycles),
        ))
        self.assertTrue(self.service.matrices_equivalent(
            self.service.incidence_matrix(substituted),
            self.service.lantern_substitute(self.service.incidence_matrix(L), 1),
        ))

    def test_laminar_order(self):
        self.assertEqual(self.service.laminar_order(4, [{1, 3}, {2, 4}]), [1, 3, 2, 4])
        self.assertEqual(self.service.laminar_order(5, [{2, 5}, {1, 2, 5}, {3, 4}]), [1, 2, 5, 3, 4])
        with self.assertRaises(PreconditionError):
            self.service.laminar_order(3, [{1, 2}, {2, 3}])

    def test_nested_family_fibration(self):
        family = NestedFamily(4, ({1, 2, 3, 4}, {1, 3}, {1}, {2}, {3}, {4}))
        self.assertTrue(family.is_laminar())
        L = self.service.nested_fibration(family)
        self.assertTrue(all(c.conjugator.is_identity for c in L.cycles))
        self.assertEqual([c.holes for c in L.cycles], [(1, 2, 3, 4), (1, 2), (1,), (3,), (2,), (4,)])

    def test_nested_family_in_given_order(self):
        family = NestedFamily(3, ({1, 3}, {1}, {2}, {3}))
        L = self.service.nested_fibration(family, order=[1, 2, 3])
        self.assertEqual(L.cycles[0].holes, (1, 3))
        self.assertFalse(L.cycles[0].conjugator.is_identity)

    def test_artin_recognize_single_vertex(self):
        graph = self.service.artin_recognize(NestedFamily(2, ({1, 2}, {1}, {2})))
        self.assertEqual(graph.self_int, {0: -3})
        self.assertEqual(graph.edges, ())

    def test_artin_recognize_chain(self):
        graph = self.service.artin_recognize(NestedFamily(2, ({1, 2}, {1}, {1}, {2}, {2})))
        self.assertEqual(graph.self_int, {0: -3, 1: -2, 2: -2})
        self.assertEqual(graph.edges, ((0, 1), (0, 2)))

    def test_artin_recognize_preconditions(self):
        with self.assertRaises(PreconditionError):
            self.service.artin_recognize(NestedFamily(2, ({1}, {2})))
        with self.assertRaises(PreconditionError):
            self.service.artin_recognize(NestedFamily(2, ({1, 2}, {1})))
        with self.assertRaises(PreconditionError):
            self.service.artin_recognize(NestedFamily(3, ({1, 2, 3}, {1, 2}, {2, 3}, {1}, {2}, {3})))


if __name__ == '__main__':
    unittest.main()
