"""Builtin incidence structures and the lantern chain of the grid family."""

import logging
from itertools import combinations
from typing import Optional

from errors import DomainError, InconsistencyError
from services.arrangement_service import IncidenceStructure
from services.lefschetz_service import LefschetzService
from services.mcg_service import McgService
from services.wiring_service import WiringService

logger = logging.getLogger("Curvetta.ArrangementLibrary")

BUILTINS = ["pappus_P", "orevkov_Q", "pseudo_pappus", "classical_pappus", "grid_Qk:N:k"]

PAPPUS_BASE = [(1, 3, 4), (1, 5, 6), (1, 7, 8), (2, 5, 7), (2, 3, 8)]


def _complete(m: int, points: list) -> list:
    """Add a double point for every pair of lines not yet meeting."""
    covered = {pair for p in points for pair in combinations(sorted(p), 2)}
    doubles = [pair for pair in combinations(range(1, m + 1), 2) if pair not in covered]
    return [tuple(sorted(p)) for p in points] + doubles


def _grid_d_points(N: int) -> list:
    return [(0, 1), (1, 0)] + [(x, x) for x in range(2, N)]


def _triple_column(structure: IncidenceStructure, N: int, k: int) -> int:
    x, y = _grid_d_points(N)[k]
    target = (2 + x, 2 + N + y, 2 * N + 5)
    return structure.points.index(target)


class ArrangementLibrary:
    def __init__(
        self,
        lefschetz: Optional[LefschetzService] = None,
        wiring: Optional[WiringService] = None,
        mcg: Optional[McgService] = None,
    ):
        self.lefschetz = lefschetz or LefschetzService()
        self.wiring = wiring or WiringService(lefschetz=self.lefschetz)
        self.mcg = mcg or self.lefschetz.mcg

    def pappus_P(self) -> IncidenceStructure:
        """Ten lines: the Pappus line is replaced by two lines through the would-be collinear points."""
        points = PAPPUS_BASE + [(2, 4, 6, 9), (3, 5, 10), (4, 7, 10), (8, 9, 10), (1, 2), (6, 8)]
        return IncidenceStructure(10, tuple(_complete(10, points)))

    def classical_pappus(self) -> IncidenceStructure:
        points = PAPPUS_BASE + [(2, 4, 6), (3, 5, 9), (4, 7, 9), (6, 8, 9)]
        return IncidenceStructure(9, tuple(_complete(9, points)))

    def pseudo_pappus(self) -> IncidenceStructure:
        """Classical Pappus with the last triple point pulled apart into three double points."""
        points = PAPPUS_BASE + [(2, 4, 6), (3, 5, 9), (4, 7, 9), (6, 8), (6, 9), (8, 9)]
        return IncidenceStructure(9, tuple(_complete(9, points)))

    def orevkov_Q(self) -> IncidenceStructure:
        """Eleven lines ℓ₀..ℓ₁₀, stored as 1..11."""
        named = [
            (0, 1, 2, 3, 4), (0, 5, 6, 7), (0, 8, 9),
            (1, 5, 10), (1, 6), (1, 7, 8), (1, 9),
            (2, 5), (2, 6, 8), (2, 7, 9), (2, 10),
            (3, 5, 8), (3, 6, 9, 10), (3, 7),
            (4, 5, 9), (4, 6), (4, 7, 10), (4, 8),
            (0, 10), (8, 10),
        ]
        points = [tuple(x + 1 for x in p) for p in named]
        names = tuple(f"l{i}" for i in range(11))
        return IncidenceStructure(11, tuple(_complete(11, points)), (), names)

    def grid_Qk(self, N: int, k: int) -> IncidenceStructure:
        """
        2N + 5 curves: L0, the verticals V_x, the horizontals H_y and A, B, C, D, with
        every curve topped up by free points to weight 2N + 5. The first k triple
        points of D are pulled apart into double points.
        """
        if N < 4:
            raise DomainError(f"The grid family needs N >= 4, got {N}")
        if not 0 <= k <= N:
            raise DomainError(f"k must lie in 0..{N}, got {k}")

        L0 = 1
        V = [2 + x for x in range(N)]
        H = [2 + N + y for y in range(N)]
        A, B, C, D = 2 * N + 2, 2 * N + 3, 2 * N + 4, 2 * N + 5
        m = 2 * N + 5

        d_points = _grid_d_points(N)
        split = set(d_points[:k])
        c_points = {(0, 0), (2, 1), (3, 2)}

        points = [tuple([L0] + V), tuple([L0] + H), (L0, A, B, D)]
        for x in range(N):
            for y in range(N):
                p = [V[x], H[y]]
                if x + y == 2:
                    p.append(A)
                if x + y == 3:
                    p.append(B)
                if (x, y) in c_points:
                    p.append(C)
                if (x, y) in d_points and (x, y) not in split:
                    p.append(D)
                points.append(tuple(p))
        for x, y in d_points[:k]:
            points.extend([(V[x], D), (H[y], D)])

        points = _complete(m, points)
        structure = IncidenceStructure(m, tuple(points))
        free = []
        for line, weight in enumerate(structure.line_weights(), start=1):
            free.extend([line] * (m - weight))
        names = tuple(["L0"] + [f"V{x}" for x in range(N)] + [f"H{y}" for y in range(N)] + ["A", "B", "C", "D"])
        return IncidenceStructure(m, tuple(points), tuple(free), names)

    def grid_chain(self, N: int, records: bool = False) -> list:
        """
        The fillings W_0, ..., W_N of the grid family. Each step is a lantern substitution
        on the next triple point of D, so χ drops by one per step. With `records` the
        substitution is also replayed on the vanishing cycles and the monodromies compared.
        """
        chain = []
        previous = None
        for k in range(N + 1):
            structure = self.grid_Qk(N, k)
            matrix = structure.incidence_matrix()
            entry = {
                "k": k,
                "euler": self.lefschetz.invariants(matrix).euler,
                "matrix": matrix,
                "lantern_matches": None,
            }
            if previous is not None:
                prev_structure, prev_matrix = previous
                column = _triple_column(prev_structure, N, k - 1)
                substituted = self.lefschetz.lantern_substitute(prev_matrix, column)
                entry["lantern_matches"] = self.lefschetz.matrices_equivalent(substituted, matrix)
            chain.append(entry)
            previous = (structure, matrix)

        if records:
            structure = self.grid_Qk(N, 0)
            fibration = self.wiring.to_lefschetz(self.wiring.wiring_from_structure(structure))
            before = self.mcg.product_record(fibration.cycles, fibration.m)
            for step in range(N):
                column = _triple_column(structure, N, step)
                # Earlier substitutions shift the triple's column by two each
                fibration = self.lefschetz.lantern_substitute_cycles(fibration, column + 2 * step)
                after = self.mcg.product_record(fibration.cycles, fibration.m)
                chain[step + 1]["records_equal"] = self.mcg.records_equal(before, after)
                before = after

        for entry in chain[1:]:
            if entry["euler"] != chain[entry["k"] - 1]["euler"] - 1:
                raise InconsistencyError(f"Euler characteristic did not drop by one at step {entry['k']}")
        logger.info(f"Grid chain N = {N}: euler {[entry['euler'] for entry in chain]}")
        return chain

    def builtin(self, name: str) -> IncidenceStructure:
        fixed = {
            "pappus_P": self.pappus_P,
            "orevkov_Q": self.orevkov_Q,
            "pseudo_pappus": self.pseudo_pappus,
            "classical_pappus": self.classical_pappus,
        }
        if name in fixed:
            return fixed[name]()
        if name.startswith("grid_Qk:"):
            parts = name.split(":")
            if len(parts) != 3 or not parts[1].isdigit() or not parts[2].isdigit():
                raise DomainError(f"Grid builtin must look like grid_Qk:N:k, got {name}")
            return self.grid_Qk(int(parts[1]), int(parts[2]))
        raise DomainError(f"Unknown builtin {name}; choose from {', '.join(BUILTINS)}")
