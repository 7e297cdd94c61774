"""
Planar mapping classes of the disk with m holes, rel boundary.

A mapping class is recorded as a pair (pure braid, per-hole twist counts). The
Dehn twist about the curve β(A_J) maps to (βΔ_J²β⁻¹, indicator of the holes it
encloses). Boundary twists have trivial braid part, so they only show up in the
counts.
"""

import dataclasses
import logging
from functools import cached_property
from typing import Iterable, Optional, Sequence

from errors import DomainError, InconsistencyError
from services.braid_service import BraidService, BraidWord, NormalForm, consecutive_block

logger = logging.getLogger("Curvetta.McgService")


@dataclasses.dataclass(frozen=True)
class Curve:
    """The image β(A_J) of the convex curve around the consecutive holes J."""
    m: int
    conjugator: NormalForm
    core: tuple

    def __post_init__(self):
        if self.conjugator.strands != self.m:
            raise DomainError(
                f"Conjugator lives on {self.conjugator.strands} strands, curve on {self.m} holes"
            )
        object.__setattr__(self, "core", consecutive_block(self.m, self.core))

    @classmethod
    def of(cls, m: int, beta: Sequence[int] = (), core: Iterable[int] = ()) -> "Curve":
        """Build from a braid word given as signed generator indices."""
        return cls(m, NormalForm.from_word(BraidWord(m, tuple(beta))), tuple(core))

    @classmethod
    def convex(cls, m: int, core: Iterable[int]) -> "Curve":
        return cls(m, NormalForm.identity(m), tuple(core))

    @cached_property
    def twist(self) -> NormalForm:
        """βΔ_J²β⁻¹."""
        full_twist = NormalForm.from_word(BraidWord.half_twist(self.m, self.core))
        full_twist = full_twist * full_twist
        return self.conjugator * full_twist * self.conjugator.inverse()

    @cached_property
    def holes(self) -> tuple:
        return self.conjugator.carry(self.core)


@dataclasses.dataclass(frozen=True)
class MappingClassRecord:
    m: int
    braid: NormalForm
    twist_counts: tuple

    def __post_init__(self):
        if len(self.twist_counts) != self.m:
            raise DomainError(f"Expected {self.m} twist counts, got {len(self.twist_counts)}")
        object.__setattr__(self, "twist_counts", tuple(self.twist_counts))

    @classmethod
    def identity(cls, m: int) -> "MappingClassRecord":
        return cls(m, NormalForm.identity(m), (0,) * m)

    def compose(self, other: "MappingClassRecord") -> "MappingClassRecord":
        """(b, n)(b', n') = (bb', n + n')."""
        if self.m != other.m:
            raise DomainError(f"Cannot compose records on {self.m} and {other.m} holes")
        counts = tuple(a + b for a, b in zip(self.twist_counts, other.twist_counts))
        return MappingClassRecord(self.m, self.braid * other.braid, counts)


class McgService:
    def __init__(self, braids: Optional[BraidService] = None):
        self.braids = braids or BraidService()

    def enclosed_holes(self, c: Curve) -> tuple:
        return c.holes

    def twist_braid(self, c: Curve) -> NormalForm:
        return c.twist

    def _same_surface(self, c1: Curve, c2: Curve):
        if c1.m != c2.m:
            raise DomainError(f"Curves live on disks with {c1.m} and {c2.m} holes")

    def curve_equal(self, c1: Curve, c2: Curve) -> bool:
        """Isotopy test. Curves around one hole carry trivial twists, so they compare by hole."""
        self._same_surface(c1, c2)
        if len(c1.core) != len(c2.core):
            return False
        if len(c1.core) == 1:
            return c1.holes == c2.holes
        return c1.twist == c2.twist

    def curves_disjoint(self, c1: Curve, c2: Curve) -> bool:
        """Disjoint (after isotopy) iff the two Dehn twists commute."""
        self._same_surface(c1, c2)
        return c1.twist * c2.twist == c2.twist * c1.twist

    def curve_around(self, m: int, holes: Iterable[int]) -> Curve:
        """
        A curve enclosing exactly the given holes.

        Consecutive holes get the convex curve; otherwise the conjugator is the positive
        braid that slides the holes down onto a block starting at the smallest one.
        """
        holes = tuple(sorted(set(holes)))
        if not holes or holes[0] < 1 or holes[-1] > m:
            raise DomainError(f"Hole set {list(holes)} is not a non-empty subset of 1..{m}")
        word, block = self.braids.positive_sorting_word(m, holes)
        curve = Curve(m, self.braids.normalize(word), block)
        if curve.holes != holes:
            raise InconsistencyError(f"curve_around({m}, {list(holes)}) encloses {list(curve.holes)}")
        return curve

    def lantern_curves(self, c: Curve) -> list:
        """
        The three curves that replace a curve around three holes in the lantern relation.

        For J = {a, a+1, a+2} the list is [β(A_{a+1,a+2}), βσ_{a+1}(A_{a,a+1}), β(A_{a,a+1})];
        the product of their twists, last one applied last, equals the twist about β(A_J)
        composed with the three boundary twists.
        """
        if len(c.core) != 3:
            raise DomainError(f"Lantern needs a curve around three holes, got core {list(c.core)}")
        a = c.core[0]
        middle = c.conjugator * self.braids.normalize(BraidWord(c.m, (a + 1,)))
        return [
            Curve(c.m, c.conjugator, (a + 1, a + 2)),
            Curve(c.m, middle, (a, a + 1)),
            Curve(c.m, c.conjugator, (a, a + 1)),
        ]

    def dehn_twist_record(self, c: Curve) -> MappingClassRecord:
        braid = c.twist
        if not self.braids.is_pure(braid):
            raise InconsistencyError(f"Twist about curve with core {list(c.core)} is not pure")
        counts = [0] * c.m
        for hole in c.holes:
            counts[hole - 1] = 1
        return MappingClassRecord(c.m, braid, tuple(counts))

    def product_record(self, cycles: Sequence[Curve], m: Optional[int] = None) -> MappingClassRecord:
        """τ_{V_n} ∘ ... ∘ τ_{V_1}: the first curve of the list is twisted first."""
        if not cycles:
            if m is None:
                raise DomainError("An empty product needs the hole count")
            return MappingClassRecord.identity(m)
        holes = cycles[0].m if m is None else m
        record = MappingClassRecord.identity(holes)
        for c in cycles:
            if c.m != holes:
                raise DomainError(f"Curve on {c.m} holes in a product on {holes} holes")
            record = self.dehn_twist_record(c).compose(record)
        return record

    def records_equal(self, r1: MappingClassRecord, r2: MappingClassRecord) -> bool:
        return (
            r1.m == r2.m
            and self.braids.braids_equal(r1.braid, r2.braid)
            and r1.twist_counts == r2.twist_counts
        )

    def identity_record(self, m: int) -> MappingClassRecord:
        return MappingClassRecord.identity(m)
