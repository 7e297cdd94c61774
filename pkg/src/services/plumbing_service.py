"""
Resolution graphs of rational singularities with reduced fundamental cycle.

Vertices carry self-intersection numbers v·v; a(v) is the valency. A graph G is
extended to G″ by attaching -(v·v + a(v)) leaves of self-intersection -1 to every
vertex. Deleting one of those leaves (the outer slot) gives an extension G′ whose
remaining leaves carry the curvettas, labelled 1..m in slot order.
"""

import dataclasses
import logging
from typing import Iterable, Optional

import networkx as nx
from sympy import Matrix

from errors import DomainError, StructuralError

logger = logging.getLogger("Curvetta.PlumbingService")


@dataclasses.dataclass
class ValidationReport:
    checks: dict
    problems: list = dataclasses.field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {**self.checks, "valid": self.ok, "problems": list(self.problems)}


@dataclasses.dataclass(frozen=True)
class PlumbingGraph:
    """Weighted tree. `self_int` maps vertex id to v·v; edges are sorted id pairs."""
    self_int: dict
    edges: tuple = ()
    root: Optional[int] = None

    def __post_init__(self):
        seen = set()
        for a, b in self.edges:
            if a == b:
                raise StructuralError(f"Self-loop at vertex {a}")
            if a not in self.self_int or b not in self.self_int:
                raise StructuralError(f"Edge ({a}, {b}) references an unknown vertex")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise StructuralError(f"Multi-edge between {a} and {b}")
            seen.add(key)
        object.__setattr__(self, "edges", tuple(sorted(seen)))
        if self.root is not None and self.root not in self.self_int:
            raise StructuralError(f"Root {self.root} is not a vertex")

    @classmethod
    def build(cls, vertices: Iterable, edges: Iterable = (), root: Optional[int] = None) -> "PlumbingGraph":
        """From (id, self_int) pairs; duplicate ids are a structural error."""
        self_int = {}
        for vid, weight in vertices:
            if vid in self_int:
                raise StructuralError(f"Duplicate vertex id {vid}")
            self_int[vid] = weight
        return cls(self_int, tuple(tuple(e) for e in edges), root)

    @property
    def vertices(self) -> list:
        return sorted(self.self_int)

    def valency(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        for v in self.vertices:
            graph.add_node(v, self_int=self.self_int[v])
        graph.add_edges_from(self.edges)
        return graph

    def intersection_matrix(self) -> Matrix:
        order = self.vertices
        index = {v: k for k, v in enumerate(order)}
        matrix = Matrix.zeros(len(order), len(order))
        for v in order:
            matrix[index[v], index[v]] = self.self_int[v]
        for a, b in self.edges:
            matrix[index[a], index[b]] = 1
            matrix[index[b], index[a]] = 1
        return matrix

    def excess(self, v: int) -> int:
        """-(v·v + a(v)): the number of (-1)-leaves v receives in G″."""
        return -(self.self_int[v] + self.valency(v))


@dataclasses.dataclass(frozen=True)
class ExtendedGraph:
    """
    G′: the base graph plus (-1)-leaves, one per curvetta.

    `minus_one_leaves` holds (attached_to, leaf_id) pairs; `curvetta_labels[k]` is the
    leaf carrying curvetta k+1. `outer_slot` is the deleted slot of G″, if known.
    """
    base: PlumbingGraph
    minus_one_leaves: tuple
    curvetta_labels: tuple
    outer_slot: Optional[int] = None

    @property
    def m(self) -> int:
        return len(self.curvetta_labels)

    def to_networkx(self) -> nx.Graph:
        graph = self.base.to_networkx()
        for attached, leaf in self.minus_one_leaves:
            graph.add_node(leaf, self_int=-1)
            graph.add_edge(attached, leaf)
        return graph

    def valency(self, v: int) -> int:
        return self.base.valency(v) + sum(1 for attached, _ in self.minus_one_leaves if attached == v)

    def root(self) -> int:
        roots = [v for v in self.base.vertices if self.base.self_int[v] + self.valency(v) == -1]
        if len(roots) != 1:
            raise DomainError(f"Extended graph has {len(roots)} vertices with v·v + a(v) = -1")
        return roots[0]

    def carrier(self, label: int) -> int:
        """The base vertex whose (-1)-leaf carries curvetta `label`."""
        if not 1 <= label <= self.m:
            raise DomainError(f"Unknown curvetta label {label}; labels are 1..{self.m}")
        leaf = self.curvetta_labels[label - 1]
        return next(attached for attached, lid in self.minus_one_leaves if lid == leaf)

    def validate(self):
        roots = 0
        for v in self.base.vertices:
            total = self.base.self_int[v] + self.valency(v)
            if total == -1:
                roots += 1
            elif total != 0:
                raise DomainError(f"Vertex {v} has v·v + a(v) = {total} in the extended graph")
        if roots != 1:
            raise DomainError(f"Extended graph has {roots} roots, expected exactly one")



class PlumbingService:
    def is_tree(self, G: PlumbingGraph) -> bool:
        graph = G.to_networkx()
        return graph.number_of_nodes() > 0 and nx.is_tree(graph)

    def is_negative_definite(self, G: PlumbingGraph) -> bool:
        """Leading principal minors alternate in sign: (-1)^k det(M_k) > 0."""
        matrix = G.intersection_matrix()
        for k in range(1, matrix.rows + 1):
            minor = matrix[:k, :k].det(method="bareiss")
            if (-1) ** k * minor <= 0:
                return False
        return True

    def validate_reduced_cycle(self, G: PlumbingGraph) -> ValidationReport:
        problems = []
        tree = self.is_tree(G)
        if not tree:
            problems.append(f"{len(G.vertices)} vertices and {len(G.edges)} edges do not form a tree")
        definite = self.is_negative_definite(G) if G.vertices else False
        if not definite:
            problems.append("intersection matrix is not negative definite")
        inequality = True
        for v in G.vertices:
            if G.valency(v) > -G.self_int[v]:
                inequality = False
                problems.append(f"vertex {v}: a(v) = {G.valency(v)} > -v·v = {-G.self_int[v]}")
        report = ValidationReport(
            {"tree": tree, "negative_definite": definite, "reduced_cycle": tree and definite and inequality},
            problems,
        )
        logger.debug(f"Validated graph with {len(G.vertices)} vertices: {report.checks}")
        return report

    def _require_valid(self, G: PlumbingGraph):
        report = self.validate_reduced_cycle(G)
        if not report.ok:
            raise DomainError(f"Graph fails validation: {'; '.join(report.problems)}")

    def fundamental_cycle(self, G: PlumbingGraph) -> tuple:
        """
        Artin's fundamental cycle via Laufer's algorithm, and mult X = -Z_min².

        Returns ({vertex: coefficient}, multiplicity).
        """
        self._require_valid(G)
        order = G.vertices
        matrix = G.intersection_matrix()
        z = Matrix([1] * len(order))
        while True:
            products = matrix * z
            positive = [k for k in range(len(order)) if products[k] > 0]
            if not positive:
                break
            z[positive[0]] += 1
        multiplicity = -(z.T * matrix * z)[0, 0]
        coefficients = {v: int(z[k]) for k, v in enumerate(order)}
        expected = -sum(G.self_int[v] + G.valency(v) for v in order)
        if multiplicity != expected:
            raise DomainError(f"Fundamental cycle is not reduced: -Z² = {multiplicity}, expected {expected}")
        return coefficients, int(multiplicity)

    def slot_carriers(self, G: PlumbingGraph) -> list:
        """Vertex carrying each slot of G″, slot k at index k-1."""
        slots = []
        for v in G.vertices:
            slots.extend([v] * G.excess(v))
        return slots

    def branch_count(self, G: PlumbingGraph) -> int:
        """Number of curvettas of any extension: mult X - 1."""
        return len(self.slot_carriers(G)) - 1

    def enumerate_extensions(self, G: PlumbingGraph) -> list:
        """One extension per slot of G″, in slot order (vertex id, then leaf index)."""
        self._require_valid(G)
        minus_ones = [v for v in G.vertices if G.self_int[v] == -1]
        if minus_ones:
            raise DomainError(f"Vertices {minus_ones} have self-intersection -1; blow them down first")

        first_leaf = max(G.vertices) + 1
        leaves = [(v, first_leaf + k) for k, v in enumerate(self.slot_carriers(G))]

        extensions = []
        for deleted in range(len(leaves)):
            kept = tuple(leaf for k, leaf in enumerate(leaves) if k != deleted)
            extended = ExtendedGraph(
                base=dataclasses.replace(G, root=leaves[deleted][0]),
                minus_one_leaves=kept,
                curvetta_labels=tuple(leaf for _, leaf in kept),
                outer_slot=deleted + 1,
            )
            extended.validate()
            extensions.append(extended)
        logger.info(f"Enumerated {len(extensions)} extensions of a {len(G.vertices)}-vertex graph")
        return extensions

    def extension(self, G: PlumbingGraph, slot: int) -> ExtendedGraph:
        extensions = self.enumerate_extensions(G)
        if not 1 <= slot <= len(extensions):
            raise DomainError(f"Slot {slot} does not exist; the graph has slots 1..{len(extensions)}")
        return extensions[slot - 1]

    def group_extensions(self, extensions: list) -> list:
        """Group extensions whose extended graphs are isomorphic (self-intersections and root kept)."""
        def labelled(ext):
            graph = ext.to_networkx()
            root = ext.root()
            for v in graph.nodes:
                graph.nodes[v]["is_root"] = v == root
            return graph

        def match(a, b):
            return a["self_int"] == b["self_int"] and a.get("is_root") == b.get("is_root")

        graphs = [labelled(ext) for ext in extensions]
        groups = []
        for k, graph in enumerate(graphs):
            for group in groups:
                if nx.is_isomorphic(graphs[group[0]], graph, node_match=match):
                    group.append(k)
                    break
            else:
                groups.append([k])
        return groups

    def length_overlap(self, extended: ExtendedGraph, i: int, j: int) -> tuple:
        """(l(v₀, v_i), ρ(v_i, v_j; v₀)), both counted in vertices."""
        root = extended.root()
        graph = extended.base.to_networkx()
        path_i = nx.shortest_path(graph, root, extended.carrier(i))
        path_j = nx.shortest_path(graph, root, extended.carrier(j))
        overlap = 0
        for a, b in zip(path_i, path_j):
            if a != b:
                break
            overlap += 1
        return len(path_i), overlap
