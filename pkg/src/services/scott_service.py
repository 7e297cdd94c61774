"""
Artin fillings from both ends.

From the germ side, the Scott deformation separates branches level by level: at
level l every class of ∼_l with at least two branches becomes one multiple point,
and each branch keeps w_i - t(C_i) free points. From the graph side, the Gay–Mark
construction reads disjoint vanishing cycles straight off the plumbing tree.
"""

import dataclasses
import logging
from typing import Optional

import networkx as nx

from errors import DomainError, StructuralError
from services.germ_service import DecoratedGerm, GermService
from services.lefschetz_service import LefschetzService, NestedFamily
from services.plumbing_service import PlumbingGraph, PlumbingService

logger = logging.getLogger("Curvetta.ScottService")


@dataclasses.dataclass(frozen=True)
class LaminarFamily:
    """
    Multiple points of the Scott deformation as (level, branch set) blocks and free
    points as (branch, count). `order` lists the branches by hole position.
    """
    m: int
    order: tuple
    blocks: tuple
    free: tuple

    def __post_init__(self):
        order = tuple(self.order)
        if sorted(order) != list(range(1, self.m + 1)):
            raise StructuralError(f"Order {list(order)} is not a permutation of 1..{self.m}")
        blocks = tuple((int(level), frozenset(s)) for level, s in self.blocks)
        position = {label: k for k, label in enumerate(order)}
        for level, s in blocks:
            if level < 1 or len(s) < 2:
                raise StructuralError(f"Block {sorted(s)} at level {level} is not a multiple point")
            spots = sorted(position[x] for x in s)
            if spots[-1] - spots[0] + 1 != len(spots):
                raise StructuralError(f"Block {sorted(s)} is not an interval of the hole order")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "free", tuple((int(i), int(c)) for i, c in self.free))

    def hole_sets(self) -> list:
        """Blocks in level order, then the boundary-parallel cycles."""
        sets = [s for _, s in self.blocks]
        for label, count in self.free:
            sets.extend([frozenset([label])] * count)
        return sets

    def nested_family(self) -> NestedFamily:
        return NestedFamily(self.m, tuple(self.hole_sets()))

    def to_dict(self) -> dict:
        return {
            "order": list(self.order),
            "blocks": [{"level": level, "set": sorted(s)} for level, s in self.blocks],
            "free": [[label, count] for label, count in self.free],
        }


def _graph_match(a, b):
    return a["self_int"] == b["self_int"]


class ScottService:
    def __init__(
        self,
        germs: Optional[GermService] = None,
        plumbing: Optional[PlumbingService] = None,
        lefschetz: Optional[LefschetzService] = None,
    ):
        self.germs = germs or GermService()
        self.plumbing = plumbing or PlumbingService()
        self.lefschetz = lefschetz or LefschetzService(plumbing=self.plumbing)

    def scott_blocks(self, g: DecoratedGerm) -> list:
        blocks = []
        for level in range(1, g.max_tangency + 1):
            for cls in self.germs.tangency_level_classes(g, level):
                if len(cls) >= 2:
                    blocks.append((level, frozenset(cls)))
        return blocks

    def scott_order(self, g: DecoratedGerm) -> list:
        """Recursive laminar order of the branches; every block becomes an interval."""
        return self.lefschetz.laminar_order(g.m, [s for _, s in self.scott_blocks(g)])

    def scott_deformation(self, g: DecoratedGerm) -> tuple:
        """
        Returns (LaminarFamily, LefschetzFibration, IncidenceMatrix). The fibration and
        the matrix rows follow the hole order, so position k carries branch order[k-1].
        """
        report = self.germs.validate_germ(g)
        if not report.ok:
            raise DomainError(f"Germ fails validation: {'; '.join(report.problems)}")

        blocks = self.scott_blocks(g)
        order = self.lefschetz.laminar_order(g.m, [s for _, s in blocks])
        free = [(i, g.weights[i - 1] - g.t(i)) for i in range(1, g.m + 1)]
        family = LaminarFamily(g.m, tuple(order), tuple(blocks), tuple(free))
        fibration = self.lefschetz.nested_fibration(family.nested_family(), order)
        matrix = self.lefschetz.incidence_matrix(fibration)
        logger.info(f"Scott deformation: {len(blocks)} multiple points, {fibration.n} vanishing cycles")
        return family, fibration, matrix

    def gay_mark(self, G: PlumbingGraph, outer: int) -> NestedFamily:
        """
        Disjoint vanishing cycles of the planar fibration on the plumbing of G.

        Holes are the slots of G″ other than `outer`, labelled 1..m in slot order. The
        cycles are the outer boundary, one cycle per edge around the holes beyond it
        (tree rooted at the vertex of the outer slot), and one cycle per hole.
        """
        carriers = self.plumbing.slot_carriers(G)
        if not 1 <= outer <= len(carriers):
            raise DomainError(f"Outer slot {outer} does not exist; G″ has slots 1..{len(carriers)}")
        extended = self.plumbing.enumerate_extensions(G)[outer - 1]
        m = extended.m
        root = carriers[outer - 1]

        holes_at = {v: [] for v in G.vertices}
        for label in range(1, m + 1):
            holes_at[extended.carrier(label)].append(label)

        tree = nx.bfs_tree(G.to_networkx(), root)
        beyond = {}
        for v in reversed(list(nx.topological_sort(tree))):
            below = set(holes_at[v])
            for child in tree.successors(v):
                below |= beyond[child]
            beyond[v] = below

        sets = [frozenset(range(1, m + 1))]
        for _, child in nx.bfs_edges(G.to_networkx(), root):
            sets.append(frozenset(beyond[child]))
        sets.extend(frozenset([label]) for label in range(1, m + 1))
        logger.debug(f"Gay-Mark fibration for slot {outer}: {len(sets)} cycles on {m} holes")
        return NestedFamily(m, tuple(sets))

    def artin_agreement_report(self, G: PlumbingGraph) -> list:
        """One entry per outer slot comparing the Scott and Gay–Mark fibrations."""
        mcg = self.lefschetz.mcg
        entries = []
        for extended in self.plumbing.enumerate_extensions(G):
            slot = extended.outer_slot
            family, scott, scott_matrix = self.scott_deformation(self.germs.derive_germ(extended))
            gm_family = self.gay_mark(G, slot)
            gm = self.lefschetz.nested_fibration(gm_family, family.order)

            same_record = mcg.records_equal(
                mcg.product_record(scott.cycles, scott.m),
                mcg.product_record(gm.cycles, gm.m),
            )
            same_matrix = self.lefschetz.matrices_equivalent(scott_matrix, self.lefschetz.incidence_matrix(gm))
            recognised = self.lefschetz.artin_recognize(gm_family)
            round_trip = nx.is_isomorphic(recognised.to_networkx(), G.to_networkx(), node_match=_graph_match)
            entries.append({
                "slot": slot,
                "records_equal": same_record,
                "matrices_equivalent": same_matrix,
                "round_trip": round_trip,
            })
            if not (same_record and same_matrix and round_trip):
                logger.warning(f"Scott and Gay-Mark disagree at slot {slot}: {entries[-1]}")
        return entries

    def artin_agreement(self, G: PlumbingGraph) -> bool:
        return all(
            entry["records_equal"] and entry["matrices_equivalent"] and entry["round_trip"]
            for entry in self.artin_agreement_report(G)
        )
