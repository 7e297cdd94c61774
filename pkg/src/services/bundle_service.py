"""
Bundling: growing a line arrangement along rooted trees.

Each line i of an arrangement with weights w_i is a leg of the star graph G (center
-(m+1), leg i a chain of w_i - 2 vertices of -2 ending at u_i). Attaching a rooted
tree G_i at u_i gives a larger graph H, and line i is replaced by a bundle of curves
that all pass through every marked point of line i. Walking up G_i, a chain of r
(-2)-vertices ending at a (-s)-vertex splits the bundle into s - 1 subbundles that
share r extra points (r + 1 below the first split, plus one free point per curve at
the first split). A chain that runs out leaves a single curve with r free points.
"""

import dataclasses
import logging
from typing import Mapping, Optional, Sequence

import networkx as nx

from errors import DomainError, InconsistencyError
from services.arrangement_service import IncidenceStructure
from services.germ_service import DecoratedGerm, GermService
from services.lefschetz_service import FillingInvariants, IncidenceMatrix
from services.plumbing_service import PlumbingGraph, PlumbingService
from services.scott_service import ScottService
from services.wiring_service import WiringService

logger = logging.getLogger("Curvetta.BundleService")


@dataclasses.dataclass
class Bundle:
    """The curves replacing one line: tag vertex per curve, shared and free points."""
    tags: list = dataclasses.field(default_factory=list)
    shared: list = dataclasses.field(default_factory=list)
    free: list = dataclasses.field(default_factory=list)


@dataclasses.dataclass
class MarkedFilling:
    """
    A pseudoline arrangement marked up to the given line weights, next to the Artin
    filling of the star singularity with the same weights.
    """
    weights: tuple
    structure: IncidenceStructure
    germ: DecoratedGerm
    graph: PlumbingGraph
    matrix: IncidenceMatrix
    invariants: FillingInvariants
    strict: bool
    simply_connected: bool
    artin_matrix: IncidenceMatrix
    artin_invariants: FillingInvariants
    equivalent_to_artin: bool

    def to_dict(self) -> dict:
        return {
            "weights": list(self.weights),
            "free": list(self.structure.free),
            "center": self.graph.self_int[self.graph.root],
            "strict": self.strict,
            "simply_connected": self.simply_connected,
            "marked": {"n": self.matrix.n, "invariants": self.invariants.to_dict()},
            "artin": {"n": self.artin_matrix.n, "invariants": self.artin_invariants.to_dict()},
            "equivalent_to_artin": self.equivalent_to_artin,
        }


class BundleBuilder:
    def __init__(
        self,
        S: IncidenceStructure,
        trees: Mapping[int, PlumbingGraph],
        star: tuple,
        plumbing: PlumbingService,
    ):
        if not S.is_pseudoline():
            raise DomainError("Bundling needs an arrangement in which every two lines meet exactly once")
        self.S = S
        self.plumbing = plumbing
        graph, self.ends = star
        self.self_int = dict(graph.self_int)
        self.edges = list(graph.edges)
        self.children = {}
        self.next_id = max(self.self_int) + 1

        for line in sorted(trees):
            tree = trees[line]
            if tree is None or not tree.vertices:
                continue
            if not 1 <= line <= S.m:
                raise DomainError(f"Tree attached to unknown line {line}")
            if self.ends[line] == 0:
                raise DomainError(f"Line {line} has weight 2; its leaf slot sits on the center and cannot take a tree")
            self._attach(line, tree)

        self.graph = PlumbingGraph(dict(self.self_int), tuple(self.edges), 0)

    def _attach(self, line: int, tree: PlumbingGraph):
        if not self.plumbing.is_tree(tree) or not self.plumbing.is_negative_definite(tree):
            raise DomainError(f"Tree for line {line} is not a negative definite tree")
        bad = [v for v in tree.vertices if tree.self_int[v] > -2]
        if bad:
            raise DomainError(f"Tree for line {line} has vertices {bad} with self-intersection above -2")
        root = tree.root if tree.root is not None else tree.vertices[0]

        relabel = {}
        for v in tree.vertices:
            relabel[v] = self.next_id
            self.self_int[self.next_id] = tree.self_int[v]
            self.next_id += 1
        rooted = nx.bfs_tree(tree.to_networkx(), root)
        for parent, child in rooted.edges:
            self.edges.append((relabel[parent], relabel[child]))
            self.children.setdefault(relabel[parent], []).append(relabel[child])
        self.edges.append((self.ends[line], relabel[root]))
        self.children.setdefault(self.ends[line], []).append(relabel[root])

    def _grow(self, start: Optional[int], parent: int, stage: int, bundle: Bundle) -> list:
        """Curves (indices into bundle.tags) of the (sub)bundle for the tree starting at `start`."""
        if start is None:
            bundle.tags.append(parent)
            return [len(bundle.tags) - 1]

        chain, last, v = 0, parent, start
        while v is not None and self.self_int[v] == -2:
            kids = self.children.get(v, [])
            if len(kids) > 1:
                raise DomainError(f"Vertex {v} has self-intersection -2 but branches")
            chain += 1
            last, v = v, (kids[0] if kids else None)

        if v is None:
            bundle.tags.append(last)
            curve = len(bundle.tags) - 1
            bundle.free.extend([curve] * chain)
            return [curve]

        s = -self.self_int[v]
        kids = self.children.get(v, [])
        if len(kids) > s - 1:
            raise DomainError(f"Vertex {v} with v·v = {-s} has {len(kids)} children; at most {s - 1} fit")
        curves = []
        for kid in kids + [None] * (s - 1 - len(kids)):
            curves.extend(self._grow(kid, v, stage + 1, bundle))
        extra = chain if stage == 0 else chain + 1
        bundle.shared.extend([tuple(curves)] * extra)
        if stage == 0:
            bundle.free.extend(curves)
        return curves

    def bundle(self, line: int) -> Bundle:
        bundle = Bundle()
        end = self.ends[line]
        kids = self.children.get(end, []) if end != 0 else []
        # Leg ends have at most the attached tree as a child
        self._grow(kids[0] if kids else None, end, 0, bundle)
        return bundle


class BundleService:
    def __init__(
        self,
        plumbing: Optional[PlumbingService] = None,
        germs: Optional[GermService] = None,
        wiring: Optional[WiringService] = None,
        scott: Optional[ScottService] = None,
    ):
        self.plumbing = plumbing or PlumbingService()
        self.germs = germs or GermService()
        self.wiring = wiring or WiringService()
        self.scott = scott or ScottService(self.germs, self.plumbing, self.wiring.lefschetz)

    def star_graph(self, weights: Sequence[int]) -> tuple:
        """Returns (G rooted at the center 0, {line: vertex u_i}); u_i is 0 when w_i = 2."""
        m = len(weights)
        vertices = [(0, -(m + 1))]
        edges = []
        ends = {}
        next_id = 1
        for line, weight in enumerate(weights, start=1):
            if weight < 2:
                raise DomainError(f"Line {line} has weight {weight}; every line needs at least two points")
            previous = 0
            for _ in range(weight - 2):
                vertices.append((next_id, -2))
                edges.append((previous, next_id))
                previous = next_id
                next_id += 1
            ends[line] = previous
        return PlumbingGraph.build(vertices, edges, root=0), ends

    def structure_germ(self, S: IncidenceStructure) -> DecoratedGerm:
        counts = S.pair_counts()
        tangency = tuple(
            tuple(0 if i == j else counts[(min(i, j), max(i, j))] for j in range(1, S.m + 1))
            for i in range(1, S.m + 1)
        )
        return DecoratedGerm(S.m, S.line_weights(), tangency)

    def derived_germ(self, H: PlumbingGraph, tags: list) -> DecoratedGerm:
        """derive_germ of H with the outer slot on the center, relabelled to follow `tags`."""
        extended = self.plumbing.enumerate_extensions(H)[0]
        available = {}
        for label in range(1, extended.m + 1):
            available.setdefault(extended.carrier(label), []).append(label)
        order = []
        for tag in tags:
            if not available.get(tag):
                raise InconsistencyError(f"No curvetta slot left at vertex {tag} of H")
            order.append(available[tag].pop(0))
        if len(order) != extended.m:
            raise InconsistencyError(f"{len(order)} curves for {extended.m} curvetta slots of H")
        return self.germs.derive_germ(extended).reorder(order)

    def bundle_extend(self, S: IncidenceStructure, trees: Mapping[int, PlumbingGraph]) -> tuple:
        """
        Returns (structure, germ, H): the arrangement of bundles, its decorated germ (weights
        are marked points per curve, tangencies are common points) and the extended graph H.
        The germ is checked against the one derived from H.
        """
        builder = BundleBuilder(S, trees, self.star_graph(S.line_weights()), self.plumbing)
        bundles = {line: builder.bundle(line) for line in range(1, S.m + 1)}

        offset = {}
        names = []
        tags = []
        for line in range(1, S.m + 1):
            offset[line] = len(tags)
            count = len(bundles[line].tags)
            for k in range(count):
                names.append(S.line_names[line - 1] if count == 1 else f"{S.line_names[line - 1]}.{k + 1}")
            tags.extend(bundles[line].tags)

        def curves_of(line):
            return [offset[line] + k + 1 for k in range(len(bundles[line].tags))]

        points = []
        free = []
        for p in S.points:
            points.append(tuple(c for line in p for c in curves_of(line)))
        for line in S.free:
            group = curves_of(line)
            if len(group) == 1:
                free.append(group[0])
            else:
                points.append(tuple(group))
        for line in range(1, S.m + 1):
            for group in bundles[line].shared:
                points.append(tuple(offset[line] + c + 1 for c in group))
            free.extend(offset[line] + c + 1 for c in bundles[line].free)

        structure = IncidenceStructure(len(tags), tuple(points), tuple(free), tuple(names))
        germ = self.structure_germ(structure)

        derived = self.derived_germ(builder.graph, tags)
        if derived != germ:
            logger.error(f"Bundle germ {germ} differs from the germ of H {derived}")
            raise InconsistencyError("Bundled arrangement does not match the germ of the extended graph")
        logger.info(f"Bundled {S.m} lines into {structure.m} curves; H has {len(builder.graph.vertices)} vertices")
        return structure, germ, builder.graph

    def mark_weights(self, S: IncidenceStructure, weights: Sequence[int]) -> MarkedFilling:
        """
        Top every line k up to weights[k-1] marked points with free points. The marked
        arrangement is a germ of the star graph with these weights, its wiring diagram
        gives one filling and the Scott deformation of the same germ the Artin one.
        """
        weights = tuple(int(w) for w in weights)
        if not S.is_pseudoline():
            raise DomainError("Marking needs an arrangement in which every two lines meet exactly once")
        if len(weights) != S.m:
            raise DomainError(f"{len(weights)} weights for {S.m} lines")
        current = S.line_weights()
        low = [line for line in range(1, S.m + 1) if weights[line - 1] < current[line - 1]]
        if low:
            raise DomainError(f"Weights below the line weights {list(current)} on lines {low}")

        free = list(S.free)
        for line in range(1, S.m + 1):
            free.extend([line] * (weights[line - 1] - current[line - 1]))
        marked = IncidenceStructure(S.m, S.points, tuple(free), S.line_names)
        structure, germ, graph = self.bundle_extend(marked, {})
        if structure != marked:
            raise InconsistencyError("Marking without trees changed the arrangement")

        lefschetz = self.wiring.lefschetz
        fibration = self.wiring.to_lefschetz(self.wiring.wiring_from_structure(marked))
        matrix = lefschetz.incidence_matrix(fibration)
        if not lefschetz.matrices_equivalent(matrix, marked.incidence_matrix()):
            raise InconsistencyError("Wiring diagram does not reproduce the marked incidences")
        strict = all(w > b for w, b in zip(weights, current))

        _, _, artin_matrix = self.scott.scott_deformation(germ)
        result = MarkedFilling(
            weights=weights,
            structure=marked,
            germ=germ,
            graph=graph,
            matrix=matrix,
            invariants=lefschetz.invariants(matrix),
            strict=strict,
            simply_connected=lefschetz.simply_connected_sufficient(matrix),
            artin_matrix=artin_matrix,
            artin_invariants=lefschetz.invariants(artin_matrix),
            equivalent_to_artin=lefschetz.matrices_equivalent(matrix, artin_matrix),
        )
        logger.info(
            f"Marked {S.m} lines to weights {list(weights)}: chi {result.invariants.euler}, "
            f"Artin chi {result.artin_invariants.euler}"
        )
        return result
