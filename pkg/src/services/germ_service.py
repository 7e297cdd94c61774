import dataclasses
import logging
from collections import defaultdict

import networkx as nx

from errors import DomainError, InconsistencyError
from services.plumbing_service import ExtendedGraph, ValidationReport

logger = logging.getLogger("Curvetta.GermService")


@dataclasses.dataclass(frozen=True)
class DecoratedGerm:
    """Branch weights w_1..w_m and pairwise orders of tangency (diagonal unused, kept 0)."""
    m: int
    weights: tuple
    tangency: tuple

    def __post_init__(self):
        weights = tuple(int(w) for w in self.weights)
        tangency = tuple(tuple(int(x) for x in row) for row in self.tangency)
        if len(weights) != self.m or len(tangency) != self.m or any(len(row) != self.m for row in tangency):
            raise DomainError(f"Germ with m = {self.m} needs {self.m} weights and an {self.m}x{self.m} tangency matrix")
        tangency = tuple(tuple(0 if i == j else row[j] for j in range(self.m)) for i, row in enumerate(tangency))
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "tangency", tangency)

    def tang(self, i: int, j: int) -> int:
        """1-based."""
        return self.tangency[i - 1][j - 1]

    def t(self, i: int) -> int:
        """Highest order of tangency of branch i with another branch (0 if alone)."""
        others = [self.tangency[i - 1][j] for j in range(self.m) if j != i - 1]
        return max(others, default=0)

    @property
    def max_tangency(self) -> int:
        return max((self.t(i) for i in range(1, self.m + 1)), default=0)

    def reorder(self, order: list) -> "DecoratedGerm":
        """Germ whose k-th branch is branch order[k] of this one (1-based labels)."""
        index = [i - 1 for i in order]
        return DecoratedGerm(
            self.m,
            tuple(self.weights[i] for i in index),
            tuple(tuple(self.tangency[i][j] for j in index) for i in index),
        )


class BlowdownState:
    """
    Exceptional curves and curvettas of G′ with their intersection numbers.

    Blowing down a (-1) curve E changes a·b to a·b + (a·E)(b·E), self-intersections
    to a·a + (a·E)², and adds one to the weight of every curvetta meeting E.
    """

    def __init__(self, extended: ExtendedGraph):
        graph = extended.to_networkx()
        root = extended.root()
        self.depth = nx.single_source_shortest_path_length(graph, root)
        self.self_int = {v: graph.nodes[v]["self_int"] for v in graph.nodes}
        self.meet = defaultdict(int)
        for a, b in graph.edges:
            self.meet[frozenset((a, b))] = 1
        self.curvettas = [("C", label) for label in range(1, extended.m + 1)]
        for label, leaf in enumerate(extended.curvetta_labels, start=1):
            self.meet[frozenset((("C", label), leaf))] = 1
        self.weights = {c: 0 for c in self.curvettas}
        self.steps = 0

    def intersection(self, a, b) -> int:
        return self.meet.get(frozenset((a, b)), 0)

    def next_curve(self):
        candidates = [v for v, s in self.self_int.items() if s == -1]
        if not candidates:
            return None
        return max(candidates, key=lambda v: (self.depth[v], -v))

    def blow_down(self, e):
        others = [c for c in self.self_int if c != e] + self.curvettas
        with_e = {c: self.intersection(c, e) for c in others}
        for c in self.curvettas:
            if with_e[c] > 1:
                raise InconsistencyError(f"Curvetta {c[1]} meets exceptional curve {e} with multiplicity {with_e[c]}")
        for k, a in enumerate(others):
            if not with_e[a]:
                continue
            for b in others[k + 1:]:
                if with_e[b]:
                    self.meet[frozenset((a, b))] += with_e[a] * with_e[b]
        for a in self.self_int:
            if a != e:
                self.self_int[a] += with_e[a] ** 2
        for c in self.curvettas:
            if with_e[c]:
                self.weights[c] += 1
        del self.self_int[e]
        for key in [key for key in self.meet if e in key]:
            del self.meet[key]
        self.steps += 1
        logger.debug(f"Blew down {e}; {len(self.self_int)} exceptional curves remain")

    def run(self):
        while self.self_int:
            e = self.next_curve()
            if e is None:
                raise InconsistencyError(
                    f"Blow-down is stuck with {len(self.self_int)} exceptional curves and no (-1) curve"
                )
            self.blow_down(e)


class GermService:
    def validate_germ(self, g: DecoratedGerm) -> ValidationReport:
        problems = []
        weight_violations = []
        for i in range(1, g.m + 1):
            if g.weights[i - 1] <= g.t(i):
                weight_violations.append(i)
                problems.append(f"branch {i}: w = {g.weights[i - 1]} is not greater than t = {g.t(i)}")

        symmetric = True
        for i in range(g.m):
            for j in range(i + 1, g.m):
                if g.tangency[i][j] != g.tangency[j][i]:
                    symmetric = False
                    problems.append(f"tangency({i + 1},{j + 1}) != tangency({j + 1},{i + 1})")
                if g.tangency[i][j] < 1:
                    symmetric = False
                    problems.append(f"tangency({i + 1},{j + 1}) = {g.tangency[i][j]} is not positive")

        ultrametric_violations = []
        for i in range(g.m):
            for j in range(g.m):
                for k in range(g.m):
                    if len({i, j, k}) < 3:
                        continue
                    if g.tangency[i][k] < min(g.tangency[i][j], g.tangency[j][k]):
                        ultrametric_violations.append((i + 1, j + 1, k + 1))
        if ultrametric_violations:
            problems.append(f"ultrametric condition fails on triples {ultrametric_violations}")

        return ValidationReport(
            {
                "weights": not weight_violations,
                "symmetric_positive": symmetric,
                "ultrametric": not ultrametric_violations,
            },
            problems,
        )

    def tangency_level_classes(self, g: DecoratedGerm, level: int) -> list:
        """Classes of C_i ∼_l C_j (tangency at least `level`), sorted by smallest branch."""
        classes = []
        for i in range(1, g.m + 1):
            for cls in classes:
                if g.tang(i, cls[0]) >= level:
                    cls.append(i)
                    break
            else:
                classes.append([i])
        return classes

    def derive_germ(self, extended: ExtendedGraph) -> DecoratedGerm:
        """w_i = 1 + l(v₀, v_i) and tang(C_i, C_j) = ρ(v_i, v_j; v₀)."""
        extended.validate()
        root = extended.root()
        paths = nx.single_source_shortest_path(extended.base.to_networkx(), root)
        carriers = [paths[extended.carrier(i)] for i in range(1, extended.m + 1)]

        weights = tuple(1 + len(path) for path in carriers)
        tangency = []
        for path_i in carriers:
            row = []
            for path_j in carriers:
                overlap = 0
                for a, b in zip(path_i, path_j):
                    if a != b:
                        break
                    overlap += 1
                row.append(overlap)
            tangency.append(tuple(row))

        germ = DecoratedGerm(extended.m, weights, tuple(tangency))
        report = self.validate_germ(germ)
        if not report.ok:
            logger.error(f"Derived germ is invalid: {report.problems}")
            raise InconsistencyError(f"Derived germ violates its invariants: {'; '.join(report.problems)}")
        return germ

    def blowdown_oracle(self, extended: ExtendedGraph) -> DecoratedGerm:
        extended.validate()
        state = BlowdownState(extended)
        total = len(state.self_int)
        state.run()
        if state.steps != total:
            raise InconsistencyError(f"Performed {state.steps} blow-downs on a graph with {total} vertices")
        weights = tuple(state.weights[c] for c in state.curvettas)
        tangency = tuple(
            tuple(0 if a == b else state.intersection(a, b) for b in state.curvettas)
            for a in state.curvettas
        )
        return DecoratedGerm(extended.m, weights, tangency)
