"""
Braided wiring diagrams.

A diagram on m strands is the time-ordered sequence β₀, J₁, β₁, ..., J_n, β_n of
braids and marked-point events. Each J_k is a consecutive set of positions where
the wires meet; |J_k| = 1 is a free point on a single wire. A wire is named by the
position it starts at, which is also the hole it becomes in the fiber.
"""

import dataclasses
import logging
from typing import Iterable, Mapping, Optional

from errors import StructuralError
from services.arrangement_service import IncidenceStructure
from services.braid_service import BraidService, BraidWord, compose, consecutive_block, identity_perm
from services.lefschetz_service import LefschetzFibration, LefschetzService
from services.mcg_service import Curve, MappingClassRecord

logger = logging.getLogger("Curvetta.WiringService")


@dataclasses.dataclass(frozen=True)
class WiringDiagram:
    strands: int
    braids: tuple
    points: tuple

    def __post_init__(self):
        braids = tuple(b if isinstance(b, BraidWord) else BraidWord(self.strands, tuple(b)) for b in self.braids)
        points = tuple(consecutive_block(self.strands, p) for p in self.points)
        if len(braids) != len(points) + 1:
            raise StructuralError(f"{len(points)} events need {len(points) + 1} braids, got {len(braids)}")
        for b in braids:
            if b.strands != self.strands:
                raise StructuralError(f"Braid on {b.strands} strands in a diagram on {self.strands}")
        object.__setattr__(self, "braids", braids)
        object.__setattr__(self, "points", points)

    @classmethod
    def from_events(cls, strands: int, events: Iterable[Mapping]) -> "WiringDiagram":
        """
        Events in time order, each {"braid": [...]} or {"point": [...]}. Consecutive
        braids are concatenated and missing braids are empty.
        """
        braids = [[]]
        points = []
        for k, event in enumerate(events):
            if "braid" in event and "point" not in event:
                # Time order: a later braid ends up on the left
                braids[-1] = list(event["braid"]) + braids[-1]
            elif "point" in event and "braid" not in event:
                points.append(tuple(event["point"]))
                braids.append([])
            else:
                raise StructuralError(f"Event {k} must have exactly one of 'braid' or 'point'")
        return cls(strands, tuple(tuple(b) for b in braids), tuple(points))

    def to_events(self) -> list:
        events = []
        for k, point in enumerate(self.points):
            if self.braids[k].letters:
                events.append({"braid": list(self.braids[k].letters)})
            events.append({"point": list(point)})
        if self.braids[-1].letters:
            events.append({"braid": list(self.braids[-1].letters)})
        return events

    @property
    def n(self) -> int:
        return len(self.points)


class WiringService:
    def __init__(self, braids: Optional[BraidService] = None, lefschetz: Optional[LefschetzService] = None):
        self.braids = braids or BraidService()
        self.lefschetz = lefschetz or LefschetzService()

    def vanishing_cycles(self, W: WiringDiagram) -> list:
        """V_j = φ_j⁻¹(A_{J_j}) with φ₁ = β₀ and φ_{j+1} = β_j Δ_{J_j}⁻¹ φ_j."""
        m = W.strands
        phi = self.braids.normalize(W.braids[0])
        cycles = []
        for j, block in enumerate(W.points):
            cycles.append(Curve(m, phi.inverse(), block))
            half = self.braids.normalize(self.braids.half_twist(m, block))
            phi = self.braids.normalize(W.braids[j + 1]) * half.inverse() * phi
        logger.debug(f"Extracted {len(cycles)} vanishing cycles on {m} strands")
        return cycles

    def _wire_positions(self, W: WiringDiagram) -> list:
        """For each event, the 0-based permutation sending a wire's start to its position then."""
        m = W.strands
        flow = W.braids[0].permutation()
        positions = []
        for j, block in enumerate(W.points):
            positions.append(flow)
            reversal = self.braids.half_twist(m, block).permutation()
            flow = compose(W.braids[j + 1].permutation(), compose(reversal, flow))
        return positions

    def event_wires(self, W: WiringDiagram) -> list:
        """The starting labels of the wires meeting at each event."""
        result = []
        for flow, block in zip(self._wire_positions(W), W.points):
            result.append(tuple(sorted(h + 1 for h in range(W.strands) if flow[h] + 1 in block)))
        return result

    def circumnavigation_monodromy(self, W: WiringDiagram) -> MappingClassRecord:
        """
        Monodromy around all critical values, read off the diagram itself:
        β₀⁻¹Δ₁β₁⁻¹ ... Δ_{n-1}β_{n-1}⁻¹ Δ_n² β_{n-1}Δ_{n-1} ... β₁Δ₁β₀.
        Each wire meeting an event gains one boundary twist.
        """
        m = W.strands
        if not W.points:
            return MappingClassRecord.identity(m)

        n = W.n
        deltas = [self.braids.half_twist(m, block) for block in W.points]
        word = BraidWord.identity(m)
        for j in range(n - 1):
            word = word * W.braids[j].inverse() * deltas[j]
        word = word * W.braids[n - 1].inverse() * deltas[n - 1] * deltas[n - 1] * W.braids[n - 1]
        for j in range(n - 2, -1, -1):
            word = word * deltas[j] * W.braids[j]

        counts = [0] * m
        for wires in self.event_wires(W):
            for h in wires:
                counts[h - 1] += 1
        logger.debug(f"Circumnavigation word of length {len(word)} over {n} events")
        return MappingClassRecord(m, self.braids.normalize(word), tuple(counts))

    def to_lefschetz(self, W: WiringDiagram) -> LefschetzFibration:
        return LefschetzFibration(W.strands, tuple(self.vanishing_cycles(W)))

    def hole_weights(self, W: WiringDiagram) -> tuple:
        """Marked points per wire: the row sums of the incidence matrix."""
        if not W.points:
            return (0,) * W.strands
        return self.lefschetz.incidence_matrix(self.to_lefschetz(W)).row_sums()

    def structure_from_wiring(self, W: WiringDiagram) -> IncidenceStructure:
        """Incidence structure carried by the diagram; lines are the starting wire labels."""
        points = []
        free = []
        for wires in self.event_wires(W):
            if len(wires) == 1:
                free.append(wires[0])
            else:
                points.append(wires)
        return IncidenceStructure(W.strands, tuple(points), tuple(free))

    def wiring_from_structure(self, S: IncidenceStructure) -> WiringDiagram:
        """
        A diagram realising the structure: before each multiple point a positive braid
        gathers its wires into a block, and the event reverses them. Free points follow
        as single-wire events with no braiding.
        """
        m = S.m
        position = list(identity_perm(m))
        braids = []
        points = []
        for lines in S.points:
            swaps, block = self.braids.gather_positions([position[label - 1] + 1 for label in lines])
            at = {p: label for label, p in enumerate(position)}
            for a in swaps:
                x, y = at[a - 1], at[a]
                position[x], position[y] = a, a - 1
                at[a - 1], at[a] = y, x
            braids.append(tuple(reversed(swaps)))
            points.append(block)
            low, high = block[0] - 1, block[-1] - 1
            at = {p: label for label, p in enumerate(position)}
            for p in range(low, high + 1):
                position[at[p]] = low + high - p
        for label in S.free:
            braids.append(())
            points.append((position[label - 1] + 1,))
        braids.append(())
        logger.info(f"Built a wiring diagram with {len(points)} events for {m} lines")
        return WiringDiagram(m, tuple(braids), tuple(points))
