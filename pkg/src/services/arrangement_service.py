"""
Incidence structures of line and pseudoline arrangements.

Lines are labelled 1..m. A multi-point is the set of lines through it (at least two);
a free point lies on a single line and only adds to that line's weight.

Unexpectedness is certified in two halves. The degenerate stratum is scanned
pointwise: merging two points and closing under "two lines meet once" must end
either in a pencil or in a coarsening that lines fail to realise. The generic
configuration is tested by exact construction over Q from random integer seeds;
failing on every seed is evidence, not proof.
"""

import dataclasses
import logging
import random
from collections import Counter
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Iterable, Optional

from config import Config
from errors import DomainError, StructuralError
from services.lefschetz_service import IncidenceMatrix

logger = logging.getLogger("Curvetta.ArrangementService")

REALIZABLE = "REALIZABLE"
GENERIC_FAIL = "GENERIC_FAIL"
UNKNOWN = "UNKNOWN"

UNEXPECTED = "UNEXPECTED"
NOT_UNEXPECTED = "NOT_UNEXPECTED"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclasses.dataclass(frozen=True)
class IncidenceStructure:
    m: int
    points: tuple
    free: tuple = ()
    line_names: tuple = ()

    def __post_init__(self):
        if self.m < 1:
            raise StructuralError(f"An incidence structure needs at least one line, got {self.m}")
        points = []
        for p in self.points:
            lines = tuple(sorted(set(int(x) for x in p)))
            if len(lines) < 2:
                raise StructuralError(f"Multi-point {list(p)} must lie on at least two lines")
            if lines[0] < 1 or lines[-1] > self.m:
                raise StructuralError(f"Multi-point {list(p)} references lines outside 1..{self.m}")
            points.append(lines)
        free = tuple(int(x) for x in self.free)
        if any(not 1 <= x <= self.m for x in free):
            raise StructuralError(f"Free points {list(free)} reference lines outside 1..{self.m}")
        names = tuple(self.line_names) or tuple(f"l{i}" for i in range(1, self.m + 1))
        if len(names) != self.m:
            raise StructuralError(f"{len(names)} line names for {self.m} lines")
        object.__setattr__(self, "points", tuple(points))
        object.__setattr__(self, "free", free)
        object.__setattr__(self, "line_names", names)

    def line_weights(self) -> tuple:
        weights = [0] * self.m
        for p in self.points:
            for line in p:
                weights[line - 1] += 1
        for line in self.free:
            weights[line - 1] += 1
        return tuple(weights)

    def incidence_matrix(self) -> IncidenceMatrix:
        """Multi-points first, then free points, in input order."""
        return IncidenceMatrix.from_columns(self.m, list(self.points) + [(x,) for x in self.free])

    def pair_counts(self) -> Counter:
        return Counter(pair for p in self.points for pair in combinations(p, 2))

    def is_pseudoline(self) -> bool:
        """Every pair of lines shares exactly one point."""
        counts = self.pair_counts()
        return all(counts[pair] == 1 for pair in combinations(range(1, self.m + 1), 2))

    def pair_map(self) -> dict:
        """(i, j) with i < j -> indices of the multi-points containing both."""
        result = {}
        for k, p in enumerate(self.points):
            for pair in combinations(p, 2):
                result.setdefault(pair, []).append(k)
        return result

    def is_pencil(self) -> bool:
        return any(len(p) == self.m for p in self.points) and self.m >= 2

    def to_dict(self) -> dict:
        return {
            "lines": self.m,
            "points": [list(p) for p in self.points],
            "free": [[x] for x in self.free],
            "names": list(self.line_names),
        }


@dataclasses.dataclass
class CoarseningReport:
    """
    One (p, q, pencil) entry per pair of multi-points. `statuses` maps each non-pencil
    merge to the realizability status of its coarsening once that has been tested.
    """
    merges: list
    all_collapse: bool
    statuses: dict = dataclasses.field(default_factory=dict)

    @property
    def degenerate_excluded(self) -> bool:
        """Every merge collapses to a pencil or gives a coarsening that fails realization."""
        return all(pencil or self.statuses.get((p, q)) == GENERIC_FAIL for p, q, pencil in self.merges)

    def to_dict(self) -> dict:
        return {
            "all_collapse": self.all_collapse,
            "degenerate_excluded": self.degenerate_excluded,
            "merges": [
                {"points": [p, q], "pencil": pencil, "coarsening": self.statuses.get((p, q))}
                for p, q, pencil in self.merges
            ],
        }


@dataclasses.dataclass
class RealizabilityVerdict:
    status: str
    trials: int = 0
    failures: dict = dataclasses.field(default_factory=dict)
    witness: Optional[list] = None
    order: list = dataclasses.field(default_factory=list)
    diagnostic: str = ""

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "trials": self.trials,
            "failures": dict(sorted(self.failures.items())),
            "witness": self.witness,
            "order": self.order,
            "diagnostic": self.diagnostic,
        }


@dataclasses.dataclass
class Certificate:
    verdict: str
    evidence: list
    all_collapse: bool
    realizability: RealizabilityVerdict
    witness: Optional[list] = None
    coarsening: Optional[list] = None
    degenerate_excluded: bool = False

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "evidence": self.evidence,
            "all_collapse": self.all_collapse,
            "degenerate_excluded": self.degenerate_excluded,
            "realizability": self.realizability.to_dict(),
            "witness": self.witness,
            "coarsening": self.coarsening,
        }


class _Classes:
    """Union-find over multi-point indices."""

    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, k: int) -> int:
        while self.parent[k] != k:
            self.parent[k] = self.parent[self.parent[k]]
            k = self.parent[k]
        return k

    def union(self, a: int, b: int) -> bool:
        a, b = self.find(a), self.find(b)
        if a == b:
            return False
        self.parent[max(a, b)] = min(a, b)
        return True


def _checks(x: int, mask: int, point_masks: list) -> int:
    determined = sum(1 for pm in point_masks[x] if bin(pm & mask).count("1") >= 2)
    return max(0, determined - 2)


def _cross(u: tuple, v: tuple) -> tuple:
    w = (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])
    g = gcd(*w)
    return tuple(x // g for x in w) if g else w


def _dot(u: tuple, v: tuple) -> int:
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _is_zero(u: tuple) -> bool:
    return not any(u)


def _random_vector(rng: random.Random, bound: int, affine: bool) -> tuple:
    x, y = rng.randint(-bound, bound), rng.randint(-bound, bound)
    return (x, y, 1) if affine else (x, y, rng.randint(-bound, bound))


def _attempt(S: IncidenceStructure, order: list, rng: random.Random, bound: int) -> tuple:
    """One construction over Z in P². Returns (lines, failure reason or None)."""
    placed = {}
    for x in order:
        through = [p for p in S.points if x in p]
        determined = []
        for p in through:
            known = [line for line in p if line in placed]
            if len(known) >= 2:
                point = _cross(placed[known[0]], placed[known[1]])
                if _is_zero(point):
                    return placed, "forced coincidence"
                determined.append(point)

        if len(determined) >= 2:
            line = _cross(determined[0], determined[1])
            if _is_zero(line):
                return placed, "forced coincidence"
            if any(_dot(line, point) != 0 for point in determined[2:]):
                return placed, "checked incidence fails"
        elif len(determined) == 1:
            line = _cross(determined[0], _random_vector(rng, bound, affine=True))
        else:
            line = _random_vector(rng, bound, affine=False)
        if _is_zero(line):
            return placed, "forced coincidence"
        placed[x] = line

    pair_map = S.pair_map()
    for i, j in combinations(range(1, S.m + 1), 2):
        point = _cross(placed[i], placed[j])
        if _is_zero(point):
            return placed, "coincident lines"
        expected = set(S.points[pair_map[(i, j)][0]])
        for k in range(1, S.m + 1):
            if k not in expected and _dot(placed[k], point) == 0:
                return placed, "extra incidence"
            if k in expected and _dot(placed[k], point) != 0:
                return placed, "checked incidence fails"
    return placed, None


def _normalised(line: tuple) -> list:
    lead = next(x for x in line if x != 0)
    return [str(Fraction(x, lead)) for x in line]


def _describe(verdict: RealizabilityVerdict) -> str:
    if verdict.status == GENERIC_FAIL:
        return f"generic realizability: all {verdict.trials} seeds fail {verdict.failures}"
    if verdict.status == REALIZABLE:
        return f"generic realizability: realised on trial {verdict.trials}"
    return f"generic realizability: unknown ({verdict.diagnostic})"


class ArrangementService:
    def __init__(
        self,
        trials: Optional[int] = None,
        seed: Optional[int] = None,
        bound: Optional[int] = None,
        limit: Optional[int] = None,
    ):
        self.trials = Config.TRIALS if trials is None else trials
        self.seed = Config.SEED if seed is None else seed
        self.bound = Config.COORD_BOUND if bound is None else bound
        self.limit = Config.ORDER_SEARCH_LIMIT if limit is None else limit

    def collapse_closure(self, S: IncidenceStructure, merges: Iterable = ()) -> tuple:
        """
        Merge the given pairs of multi-points, then keep merging: every two lines through
        a merged point meet only there. Returns (merged structure, is_pencil).
        """
        classes = _Classes(len(S.points))
        for p, q in merges:
            if not (0 <= p < len(S.points) and 0 <= q < len(S.points)):
                raise DomainError(f"Merge ({p}, {q}) references a point outside 0..{len(S.points) - 1}")
            classes.union(p, q)

        pair_map = S.pair_map()
        changed = True
        while changed:
            changed = False
            lines = {}
            for k, p in enumerate(S.points):
                lines.setdefault(classes.find(k), set()).update(p)
            for root, through in lines.items():
                for pair in combinations(sorted(through), 2):
                    for k in pair_map.get(pair, ()):
                        if classes.union(root, k):
                            changed = True
                            logger.debug(f"Closure merged point {k} into class {classes.find(root)}")

        merged = {}
        for k, p in enumerate(S.points):
            merged.setdefault(classes.find(k), set()).update(p)
        points = tuple(tuple(sorted(merged[root])) for root in sorted(merged))
        structure = IncidenceStructure(S.m, points, S.free, S.line_names)
        return structure, structure.is_pencil()

    def coarsening_scan(self, S: IncidenceStructure) -> CoarseningReport:
        merges = []
        for p, q in combinations(range(len(S.points)), 2):
            _, pencil = self.collapse_closure(S, [(p, q)])
            merges.append((p, q, pencil))
        all_collapse = bool(merges) and all(pencil for _, _, pencil in merges)
        logger.info(
            f"Coarsening scan: {sum(1 for *_, pencil in merges if pencil)} of {len(merges)} merges collapse to a pencil"
        )
        return CoarseningReport(merges, all_collapse)

    def construction_order(self, S: IncidenceStructure, limit: Optional[int] = None) -> tuple:
        """
        Order of the lines minimising the number of incidences that must be checked
        rather than imposed. Exact subset search up to `limit` lines, greedy beyond.

        Returns (order, checks).
        """
        limit = self.limit if limit is None else limit
        m = S.m
        point_masks = [[] for _ in range(m)]
        for p in S.points:
            pm = sum(1 << (line - 1) for line in p)
            for line in p:
                point_masks[line - 1].append(pm)

        if m > limit:
            logger.warning(f"{m} lines exceed the order search limit {limit}; using a greedy order")
            order, mask, total = [], 0, 0
            for _ in range(m):
                x = min((x for x in range(m) if not mask >> x & 1), key=lambda x: (_checks(x, mask, point_masks), x))
                total += _checks(x, mask, point_masks)
                order.append(x + 1)
                mask |= 1 << x
            return order, total

        full = (1 << m) - 1
        best = [None] * (full + 1)
        choice = [None] * (full + 1)
        best[0] = 0
        for mask in range(full + 1):
            if best[mask] is None:
                continue
            for x in range(m):
                if mask >> x & 1:
                    continue
                nxt = mask | 1 << x
                cost = best[mask] + _checks(x, mask, point_masks)
                if best[nxt] is None or cost < best[nxt]:
                    best[nxt] = cost
                    choice[nxt] = x
        order = []
        mask = full
        while mask:
            x = choice[mask]
            order.append(x + 1)
            mask &= ~(1 << x)
        order.reverse()
        return order, best[full]

    def generic_realizability(
        self,
        S: IncidenceStructure,
        trials: Optional[int] = None,
        seed: Optional[int] = None,
    ) -> RealizabilityVerdict:
        """
        Try to realise S by complex (here rational) lines with exactly the given
        incidences. Trial k uses random.Random(seed + k).
        """
        trials = self.trials if trials is None else trials
        seed = self.seed if seed is None else seed

        if trials <= 0:
            return RealizabilityVerdict(UNKNOWN, diagnostic="no trials requested")
        if not S.is_pseudoline():
            return RealizabilityVerdict(UNKNOWN, diagnostic="some pair of lines does not meet exactly once")
        if S.m == 1:
            return RealizabilityVerdict(REALIZABLE, trials=0, witness=[["0", "0", "1"]], order=[1])

        order, checks = self.construction_order(S)
        failures = Counter()
        for k in range(trials):
            placed, reason = _attempt(S, order, random.Random(seed + k), self.bound)
            if reason is None:
                witness = [_normalised(placed[i]) for i in range(1, S.m + 1)]
                logger.info(f"Realised {S.m} lines on trial {k + 1} with {checks} checked incidences")
                return RealizabilityVerdict(REALIZABLE, k + 1, dict(failures), witness, order)
            failures[reason] += 1
            logger.debug(f"Trial {k + 1} (seed {seed + k}) failed: {reason}")

        logger.info(f"All {trials} trials failed for {S.m} lines: {dict(failures)}")
        return RealizabilityVerdict(
            GENERIC_FAIL, trials, dict(failures), None, order,
            diagnostic=f"{checks} incidences checked per trial; failure on every seed is evidence, not proof",
        )

    def unexpected_certify(
        self,
        S: IncidenceStructure,
        trials: Optional[int] = None,
        seed: Optional[int] = None,
    ) -> Certificate:
        """
        UNEXPECTED needs both halves: the generic structure fails on every seed, and
        every point merge either collapses to a pencil or gives a coarsening that fails
        on every seed as well. A realised structure or coarsening is NOT_UNEXPECTED.
        """
        if S.is_pencil():
            raise DomainError("A pencil cannot be unexpected")

        direct = self.generic_realizability(S, trials, seed)
        if direct.status == REALIZABLE:
            return Certificate(
                NOT_UNEXPECTED, ["the structure itself is realised by lines"], False, direct, direct.witness
            )

        scan = self.coarsening_scan(S)
        pencils = sum(1 for *_, pencil in scan.merges if pencil)
        evidence = [
            f"coarsening scan: {pencils} of {len(scan.merges)} point merges collapse to a pencil",
            _describe(direct),
        ]

        tested = {}
        for p, q, pencil in scan.merges:
            if pencil:
                continue
            coarse, _ = self.collapse_closure(S, [(p, q)])
            if coarse.points not in tested:
                tested[coarse.points] = self.generic_realizability(coarse, trials, seed)
            verdict = tested[coarse.points]
            scan.statuses[(p, q)] = verdict.status
            if verdict.status == REALIZABLE:
                evidence.append(f"merging points {p} and {q} gives a realisable non-pencil coarsening")
                logger.info(f"Coarsening from merge ({p}, {q}) is realisable")
                return Certificate(
                    NOT_UNEXPECTED, evidence, scan.all_collapse, verdict, verdict.witness,
                    [list(point) for point in coarse.points], False,
                )

        excluded = scan.degenerate_excluded
        if tested:
            failed = sum(1 for v in tested.values() if v.status == GENERIC_FAIL)
            evidence.append(
                f"{len(scan.merges) - pencils} merges give {len(tested)} distinct non-pencil coarsenings, "
                f"{failed} of them fail on every seed"
            )
        evidence.append(f"degenerate stratum {'excluded' if excluded else 'not excluded'}")

        if excluded and direct.status == GENERIC_FAIL:
            return Certificate(UNEXPECTED, evidence, scan.all_collapse, direct, degenerate_excluded=True)
        return Certificate(INCONCLUSIVE, evidence, scan.all_collapse, direct, degenerate_excluded=excluded)
