"""
Lefschetz fibrations with planar fiber, their incidence matrices and the algebraic
topology of the total space W.

The boundary map Z<p_j> → Z<Γ_i> of the handle decomposition is the incidence matrix,
so H₂(W) = ker I and H₁(W) = coker I. The intersection form on H₂(W) is the
restriction of the standard negative definite form on Z<p_j>.
"""

import dataclasses
import logging
from collections import Counter
from typing import Iterable, Optional, Sequence

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors, smith_normal_decomp
from sympy.polys.matrices import DomainMatrix

from errors import DomainError, InconsistencyError, PreconditionError
from services.mcg_service import McgService
from services.plumbing_service import PlumbingGraph, PlumbingService

logger = logging.getLogger("Curvetta.LefschetzService")


@dataclasses.dataclass(frozen=True)
class LefschetzFibration:
    """Fiber: disk with m holes. Cycles in the order the critical values are met."""
    m: int
    cycles: tuple

    def __post_init__(self):
        cycles = tuple(self.cycles)
        for c in cycles:
            if c.m != self.m:
                raise DomainError(f"Vanishing cycle on {c.m} holes in a fibration with {self.m} holes")
        object.__setattr__(self, "cycles", cycles)

    @property
    def n(self) -> int:
        return len(self.cycles)


@dataclasses.dataclass(frozen=True)
class IncidenceMatrix:
    """0/1 matrix: rows are holes (branches), columns are cycles (marked points)."""
    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.rows)
        if not rows:
            raise DomainError("An incidence matrix needs at least one row")
        width = len(rows[0])
        if any(len(row) != width for row in rows):
            raise DomainError("Incidence matrix rows have different lengths")
        if any(x not in (0, 1) for row in rows for x in row):
            raise DomainError("Incidence matrix entries must be 0 or 1")
        for j in range(width):
            if not any(row[j] for row in rows):
                raise DomainError(f"Column {j} of the incidence matrix is zero")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_columns(cls, m: int, columns: Iterable[Iterable[int]]) -> "IncidenceMatrix":
        """Columns given as 1-based hole sets."""
        columns = [set(c) for c in columns]
        return cls(tuple(tuple(1 if i in c else 0 for c in columns) for i in range(1, m + 1)))

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows[0])

    def columns(self) -> list:
        return [tuple(i + 1 for i in range(self.m) if self.rows[i][j]) for j in range(self.n)]

    def row_sums(self) -> tuple:
        return tuple(sum(row) for row in self.rows)

    def to_matrix(self) -> Matrix:
        return Matrix(self.rows)


@dataclasses.dataclass
class FillingInvariants:
    h1_torsion: list
    h1_rank: int
    h2_rank: int
    h2_basis: list
    intersection_form: list
    c1: list
    euler: int
    b1_zero: bool
    discriminant_torsion: list
    discriminant_rank: int

    def to_dict(self) -> dict:
        return {
            "h1": {"torsion": self.h1_torsion, "rank": self.h1_rank},
            "h2_rank": self.h2_rank,
            "h2_basis": self.h2_basis,
            "form": self.intersection_form,
            "c1": self.c1,
            "euler": self.euler,
            "b1_zero": self.b1_zero,
            "discriminant": {"torsion": self.discriminant_torsion, "rank": self.discriminant_rank},
        }


@dataclasses.dataclass(frozen=True)
class NestedFamily:
    """Vanishing cycles given as hole subsets (1-based labels); repeats are parallel copies."""
    m: int
    sets: tuple

    def __post_init__(self):
        sets = tuple(frozenset(s) for s in self.sets)
        for s in sets:
            if not s or min(s) < 1 or max(s) > self.m:
                raise DomainError(f"Hole set {sorted(s)} is not a non-empty subset of 1..{self.m}")
        object.__setattr__(self, "sets", sets)

    def is_laminar(self) -> bool:
        distinct = list(set(self.sets))
        for k, a in enumerate(distinct):
            for b in distinct[k + 1:]:
                if a & b and not (a <= b or b <= a):
                    return False
        return True

    def matrix(self) -> IncidenceMatrix:
        return IncidenceMatrix.from_columns(self.m, self.sets)


def _positive_leading(row: list) -> list:
    lead = next((x for x in row if x != 0), 0)
    return [-x for x in row] if lead < 0 else row


def _gram(rows: Matrix) -> Matrix:
    dm = DomainMatrix.from_Matrix(rows).convert_to(ZZ)
    return (dm * dm.transpose()).to_Matrix()


class LefschetzService:
    def __init__(self, mcg: Optional[McgService] = None, plumbing: Optional[PlumbingService] = None):
        self.mcg = mcg or McgService()
        self.plumbing = plumbing or PlumbingService()

    def incidence_matrix(self, L: LefschetzFibration) -> IncidenceMatrix:
        """Column j is the indicator of the holes enclosed by V_j."""
        return IncidenceMatrix.from_columns(L.m, [c.holes for c in L.cycles])

    def matrices_equivalent(self, I1: IncidenceMatrix, I2: IncidenceMatrix) -> bool:
        """Equal up to a permutation of the columns."""
        return I1.m == I2.m and Counter(I1.columns()) == Counter(I2.columns())

    def smith_normal_form(self, M) -> tuple:
        """
        Smith normal form D of an integer matrix with unimodular U, V such that U·M·V = D.

        The diagonal entries are non-negative and each divides the next; zeros come last.
        """
        D, U, V = smith_normal_decomp(Matrix(M), domain=ZZ)
        if U * Matrix(M) * V != D:
            raise InconsistencyError("Smith decomposition does not reproduce its diagonal")
        return D, U, V

    def invariants(self, I: IncidenceMatrix) -> FillingInvariants:
        """
        H₁, H₂ with its intersection form, c₁ and χ of the filling.

        The H₂ basis is the tail of the right Smith transform, so it is a Z-basis of
        ker I. Its discriminant group is read off the orthogonal complement, the
        saturated row space of I, which has the same discriminant inside the unimodular
        lattice Z<p_j>.
        """
        matrix = I.to_matrix()
        m, n = I.m, I.n
        D, U, V = self.smith_normal_form(matrix)
        diagonal = [abs(int(D[k, k])) for k in range(min(D.shape)) if D[k, k] != 0]
        rank = len(diagonal)

        basis = [_positive_leading([int(x) for x in V[:, j]]) for j in range(rank, n)]
        if basis:
            form = -_gram(Matrix(basis))
        else:
            form = Matrix.zeros(0, 0)
        c1 = [sum(row) for row in basis]

        if basis:
            reduced = U * matrix
            saturated = Matrix([[reduced[k, j] // diagonal[k] for j in range(n)] for k in range(rank)])
            factors = [abs(int(f)) for f in invariant_factors(_gram(saturated), domain=ZZ)]
            discriminant_torsion = [f for f in factors if f > 1]
            discriminant_rank = sum(1 for f in factors if f == 0)
        else:
            discriminant_torsion, discriminant_rank = [], 0

        result = FillingInvariants(
            h1_torsion=[d for d in diagonal if d > 1],
            h1_rank=m - rank,
            h2_rank=n - rank,
            h2_basis=basis,
            intersection_form=[[int(form[i, j]) for j in range(form.cols)] for i in range(form.rows)],
            c1=c1,
            euler=1 - m + n,
            b1_zero=rank == m,
            discriminant_torsion=discriminant_torsion,
            discriminant_rank=discriminant_rank,
        )
        logger.info(f"Invariants of a {m}x{n} incidence matrix: rank {rank}, chi {result.euler}")
        return result

    def simply_connected_sufficient(self, I: IncidenceMatrix) -> bool:
        """Every hole has a boundary-parallel cycle, so the thimbles kill every generator."""
        columns = set(I.columns())
        return all((i,) in columns for i in range(1, I.m + 1))

    def lantern_substitute(self, I: IncidenceMatrix, triple_col: int) -> IncidenceMatrix:
        """Replace a triple column and the free columns of its rows by the three pair columns."""
        columns = I.columns()
        if not 0 <= triple_col < len(columns):
            raise PreconditionError(f"Column {triple_col} does not exist")
        triple = columns[triple_col]
        if len(triple) != 3:
            raise PreconditionError(f"Column {triple_col} has {len(triple)} ones, expected 3")

        remaining = [c for k, c in enumerate(columns) if k != triple_col]
        for hole in triple:
            if (hole,) not in remaining:
                raise PreconditionError(f"No free column e_{hole} left for the lantern at column {triple_col}")
            remaining.remove((hole,))
        i, j, k = triple
        remaining.extend([(i, j), (i, k), (j, k)])
        return IncidenceMatrix.from_columns(I.m, remaining)

    def lantern_substitute_cycles(self, L: LefschetzFibration, index: int) -> LefschetzFibration:
        """
        The same substitution on vanishing cycles: the triple curve is replaced in place by
        its three lantern curves, and one boundary-parallel cycle per hole is dropped.
        """
        if not 0 <= index < L.n:
            raise PreconditionError(f"Cycle {index} does not exist")
        triple = L.cycles[index]
        if len(triple.core) != 3:
            raise PreconditionError(f"Cycle {index} encloses {len(triple.core)} holes, expected 3")

        dropped = set()
        for hole in triple.holes:
            k = next(
                (k for k, c in enumerate(L.cycles)
                 if k != index and k not in dropped and len(c.core) == 1 and c.holes == (hole,)),
                None,
            )
            if k is None:
                raise PreconditionError(f"No boundary-parallel cycle around hole {hole}")
            dropped.add(k)

        cycles = []
        for k, c in enumerate(L.cycles):
            if k == index:
                cycles.extend(self.mcg.lantern_curves(c))
            elif k not in dropped:
                cycles.append(c)
        return LefschetzFibration(L.m, tuple(cycles))

    def laminar_order(self, m: int, sets: Iterable) -> list:
        """
        Total order of 1..m in which every set of a laminar family is an interval.

        Recursive: the children of a set are its maximal proper subsets in the family plus
        its uncovered elements, visited by smallest element.
        """
        family = NestedFamily(m, tuple(sets))
        if not family.is_laminar():
            raise PreconditionError("Hole sets are not pairwise nested or disjoint")
        distinct = set(family.sets)

        def children(block):
            inner = [s for s in distinct if s < block]
            maximal = [s for s in inner if not any(s < t for t in inner)]
            covered = set().union(*maximal) if maximal else set()
            loose = [frozenset([x]) for x in block - covered]
            return sorted(maximal + loose, key=min)

        def walk(block):
            if len(block) == 1:
                return [next(iter(block))]
            order = []
            for child in children(block):
                order.extend(walk(child))
            return order

        return walk(frozenset(range(1, m + 1)))

    def nested_fibration(self, family: NestedFamily, order: Optional[Sequence[int]] = None) -> LefschetzFibration:
        """
        Place hole `order[k]` at position k+1 and draw every set as a curve around its
        positions. Without an order the laminar order is used, making every curve convex.
        """
        order = list(order) if order is not None else self.laminar_order(family.m, family.sets)
        position = {label: k + 1 for k, label in enumerate(order)}
        cycles = tuple(self.mcg.curve_around(family.m, {position[x] for x in s}) for s in family.sets)
        return LefschetzFibration(family.m, cycles)

    def artin_recognize(self, family: NestedFamily) -> PlumbingGraph:
        """
        Plumbing graph of a fibration with disjoint vanishing cycles.

        Cycles form a tree under inclusion (parallel copies nest in input order). Each
        region between a cycle and its children is a vertex with v·v = -(number of cycles
        on its boundary); the annuli next to the holes and to the outer boundary are
        collars and carry no vertex.
        """
        if not family.is_laminar():
            raise PreconditionError("Vanishing cycles are not pairwise nested or disjoint")
        everything = frozenset(range(1, family.m + 1))
        missing = [h for h in range(1, family.m + 1) if frozenset([h]) not in family.sets]
        if missing:
            raise PreconditionError(f"Holes {missing} have no boundary-parallel cycle")

        cycles = list(family.sets)
        placed = []
        parent = {}
        for k in sorted(range(len(cycles)), key=lambda k: (-len(cycles[k]), k)):
            containers = [p for p in placed if cycles[k] <= cycles[p]]
            parent[k] = max(containers, key=lambda p: (-len(cycles[p]), placed.index(p))) if containers else None
            placed.append(k)

        tops = [k for k in placed if parent[k] is None]
        if len(tops) != 1 or cycles[tops[0]] != everything:
            raise PreconditionError("The outer boundary has no boundary-parallel cycle")

        children = {k: [c for c in placed if parent[c] == k] for k in placed}
        collars = {k for k in placed if len(cycles[k]) == 1 and not children[k]}
        vertex_id = {}
        for k in placed:
            if k not in collars:
                vertex_id[k] = len(vertex_id)

        vertices = []
        edges = []
        for k, vid in vertex_id.items():
            self_int = -(1 + len(children[k]))
            if self_int > -2:
                raise DomainError(f"Region inside cycle {sorted(cycles[k])} gives a vertex with v·v = {self_int}")
            vertices.append((vid, self_int))
            for c in children[k]:
                if c in vertex_id:
                    edges.append((vid, vertex_id[c]))

        graph = PlumbingGraph.build(vertices, edges, root=vertex_id[tops[0]])
        report = self.plumbing.validate_reduced_cycle(graph)
        if not report.ok:
            raise InconsistencyError(f"Recognised graph fails validation: {'; '.join(report.problems)}")
        logger.info(f"Recognised a {len(vertices)}-vertex graph from {len(cycles)} disjoint cycles")
        return graph
