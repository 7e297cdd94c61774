"""
Exact braid group engine on m strands.

A braid is stored in its left Garside normal form Δ^p x_1 ... x_k. Each canonical
factor x_i is a permutation (a positive braid in which every pair of strands crosses
at most once), kept as a 0-based one-line tuple. Permutations compose as functions:
(a∘b)[i] = a[b[i]]. Words follow the functional convention as well: the word
[a, b] is σ_a σ_b, and σ_b acts first. Accordingly perm(β₁β₂) = perm(β₁)∘perm(β₂).
"""

import dataclasses
import logging
from functools import lru_cache
from typing import Iterable, Sequence, Union

from errors import DomainError, StructuralError

logger = logging.getLogger("Curvetta.BraidService")

Perm = tuple


def identity_perm(m: int) -> Perm:
    return tuple(range(m))


def longest_perm(m: int) -> Perm:
    return tuple(range(m - 1, -1, -1))


def compose(a: Perm, b: Perm) -> Perm:
    return tuple(a[i] for i in b)


def invert(a: Perm) -> Perm:
    inverse = [0] * len(a)
    for i, x in enumerate(a):
        inverse[x] = i
    return tuple(inverse)


def swap_positions(a: Perm, i: int) -> Perm:
    """a∘s_i for the 0-based adjacent transposition s_i = (i i+1)."""
    b = list(a)
    b[i], b[i + 1] = b[i + 1], b[i]
    return tuple(b)


def swap_values(b: Perm, i: int) -> Perm:
    """s_i∘b."""
    return tuple(i + 1 if x == i else i if x == i + 1 else x for x in b)


def tau(x: Perm) -> Perm:
    """Conjugation by the half twist: Δ x Δ⁻¹ = w0∘x∘w0."""
    m = len(x)
    return tuple(m - 1 - x[m - 1 - i] for i in range(m))


def right_descents(a: Perm) -> set:
    return {i for i in range(len(a) - 1) if a[i] > a[i + 1]}


def left_descents(b: Perm) -> set:
    return right_descents(invert(b))


@lru_cache(maxsize=1 << 16)
def left_weight(a: Perm, b: Perm) -> tuple:
    """
    Rewrite the pair of simple factors (a, b) so that L(b) ⊆ R(a).

    Letters move from the front of b to the back of a one at a time; the product ab
    is unchanged.
    """
    while True:
        finishing = right_descents(a)
        movable = [i for i in sorted(left_descents(b)) if i not in finishing]
        if not movable:
            return a, b
        i = movable[0]
        a = swap_positions(a, i)
        b = swap_values(b, i)


def simple_word(x: Perm) -> list:
    """A positive reduced word (1-based letters) for the simple element x."""
    letters = []
    while True:
        descents = right_descents(x)
        if not descents:
            break
        i = min(descents)
        x = swap_positions(x, i)
        letters.append(i + 1)
    letters.reverse()
    return letters


def consecutive_block(m: int, block: Iterable[int]) -> tuple:
    """Validate a consecutive set {i, ..., i+l} inside {1..m} and return it sorted."""
    block = tuple(sorted(set(block)))
    if not block:
        raise DomainError("A consecutive set must not be empty")
    if block[0] < 1 or block[-1] > m:
        raise DomainError(f"Set {list(block)} does not fit on {m} strands")
    if block[-1] - block[0] + 1 != len(block):
        raise DomainError(f"Set {list(block)} is not consecutive")
    return block


def _carry(perm: Perm, holes: Iterable[int]) -> tuple:
    return tuple(sorted(perm[h - 1] + 1 for h in holes))


@dataclasses.dataclass(frozen=True)
class BraidWord:
    """A word in the Artin generators: +i is σ_i, -i is σ_i⁻¹."""
    strands: int
    letters: tuple = ()

    def __post_init__(self):
        if self.strands < 1:
            raise StructuralError(f"A braid needs at least one strand, got {self.strands}")
        letters = tuple(self.letters)
        for letter in letters:
            if not isinstance(letter, int) or letter == 0 or abs(letter) >= self.strands:
                raise StructuralError(
                    f"Generator {letter!r} is not valid on {self.strands} strands"
                )
        object.__setattr__(self, "letters", letters)

    @classmethod
    def identity(cls, m: int) -> "BraidWord":
        return cls(m, ())

    @classmethod
    def half_twist(cls, m: int, block: Iterable[int]) -> "BraidWord":
        """
        Δ_J for J = {i, ..., i+l} as the descending product of ascending runs:
        (σ_i ... σ_{i+l-1})(σ_i ... σ_{i+l-2}) ... (σ_i).
        """
        block = consecutive_block(m, block)
        start = block[0]
        letters = []
        for run in range(len(block) - 1, 0, -1):
            letters.extend(range(start, start + run))
        return cls(m, tuple(letters))

    def __mul__(self, other: "BraidWord") -> "BraidWord":
        if self.strands != other.strands:
            raise DomainError(f"Cannot multiply braids on {self.strands} and {other.strands} strands")
        return BraidWord(self.strands, self.letters + other.letters)

    def inverse(self) -> "BraidWord":
        return BraidWord(self.strands, tuple(-x for x in reversed(self.letters)))

    def permutation(self) -> Perm:
        perm = identity_perm(self.strands)
        for letter in self.letters:
            perm = swap_positions(perm, abs(letter) - 1)
        return perm

    def carry(self, holes: Iterable[int]) -> tuple:
        return _carry(self.permutation(), holes)

    def __len__(self):
        return len(self.letters)


@dataclasses.dataclass(frozen=True)
class NormalForm:
    """Left Garside normal form Δ^infimum · factors[0] · ... · factors[-1]."""
    strands: int
    infimum: int = 0
    factors: tuple = ()

    @classmethod
    def identity(cls, m: int) -> "NormalForm":
        return cls(m, 0, ())

    @classmethod
    def delta_power(cls, m: int, k: int) -> "NormalForm":
        return cls(m, k if m > 1 else 0, ())

    @classmethod
    def from_word(cls, word: BraidWord) -> "NormalForm":
        """Left normal form of a word; equal braids have equal normal forms."""
        form = cls.identity(word.strands)
        for letter in word.letters:
            form = form * _letter_form(word.strands, letter)
        return form

    @property
    def is_identity(self) -> bool:
        return self.infimum == 0 and not self.factors

    @property
    def canonical_length(self) -> int:
        return len(self.factors)

    def __mul__(self, other: "NormalForm") -> "NormalForm":
        """Δ^p A · Δ^q B = Δ^(p+q) τ^q(A) B."""
        if self.strands != other.strands:
            raise DomainError(f"Cannot multiply braids on {self.strands} and {other.strands} strands")
        m = self.strands
        if m <= 1:
            return NormalForm(m, 0, ())
        head = list(self.factors)
        if other.infimum % 2:
            head = [tau(x) for x in head]
        infimum = self.infimum + other.infimum
        tail = list(other.factors)
        if not head or not tail:
            return _strip(m, infimum, head + tail)

        # Both halves are normal; the only violation sits at the seam. Repair it, comb
        # backwards, then move the seam one step right until a pair is left unchanged.
        factors = head + tail
        for i in range(len(head) - 1, len(factors) - 1):
            x, y = left_weight(factors[i], factors[i + 1])
            if x == factors[i]:
                break
            factors[i], factors[i + 1] = x, y
            for j in range(i - 1, -1, -1):
                x, y = left_weight(factors[j], factors[j + 1])
                if x == factors[j]:
                    break
                factors[j], factors[j + 1] = x, y
        return _strip(m, infimum, factors)

    def inverse(self) -> "NormalForm":
        m = self.strands
        if m <= 1:
            return self
        w0 = longest_perm(m)
        k = len(self.factors)
        # x⁻¹ = ∂x · Δ⁻¹ with ∂x = x⁻¹Δ; every Δ⁻¹ is pushed to the front through τ
        factors = []
        for position, x in enumerate(reversed(self.factors)):
            complement = compose(invert(x), w0)
            if (k - position) % 2:
                complement = tau(complement)
            factors.append(complement)
        if self.infimum % 2:
            factors = [tau(y) for y in factors]
        return _normalise(m, -k - self.infimum, factors)

    def permutation(self) -> Perm:
        m = self.strands
        perm = longest_perm(m) if self.infimum % 2 else identity_perm(m)
        for x in self.factors:
            perm = compose(perm, x)
        return perm

    def carry(self, holes: Iterable[int]) -> tuple:
        """Sorted images of 1-based holes under the underlying permutation."""
        return _carry(self.permutation(), holes)

    def to_word(self) -> BraidWord:
        m = self.strands
        letters = []
        if m > 1 and self.infimum:
            delta = BraidWord.half_twist(m, range(1, m + 1)).letters
            if self.infimum < 0:
                delta = tuple(-x for x in reversed(delta))
            letters.extend(delta * abs(self.infimum))
        for x in self.factors:
            letters.extend(simple_word(x))
        return BraidWord(m, tuple(letters))


def _strip(m: int, infimum: int, factors: list) -> NormalForm:
    w0 = longest_perm(m)
    ident = identity_perm(m)
    start, end = 0, len(factors)
    while start < end and factors[start] == w0:
        start += 1
    while start < end and factors[end - 1] == ident:
        end -= 1
    return NormalForm(m, infimum + start, tuple(factors[start:end]))


def _normalise(m: int, infimum: int, seq: Sequence[Perm]) -> NormalForm:
    """Normalise an arbitrary sequence of simple factors behind Δ^infimum."""
    if m <= 1:
        return NormalForm(m, 0, ())
    factors = list(seq)
    for i in range(len(factors) - 1):
        for j in range(i, -1, -1):
            x, y = left_weight(factors[j], factors[j + 1])
            if x == factors[j]:
                break
            factors[j], factors[j + 1] = x, y
    return _strip(m, infimum, factors)


@lru_cache(maxsize=4096)
def _letter_form(m: int, letter: int) -> NormalForm:
    i = abs(letter) - 1
    if letter > 0:
        return NormalForm(m, 0, (swap_positions(identity_perm(m), i),))
    # σ_i⁻¹ = Δ⁻¹ · (Δ σ_i⁻¹), and Δ σ_i⁻¹ is the simple element w0∘s_i
    return _strip(m, -1, [swap_positions(longest_perm(m), i)])


BraidLike = Union[BraidWord, NormalForm]


def _free_reduce(letters: Iterable[int]) -> list:
    reduced = []
    for x in letters:
        if reduced and reduced[-1] == -x:
            reduced.pop()
        else:
            reduced.append(x)
    return reduced


def _generator_images(letter: int) -> dict:
    i = abs(letter)
    if letter > 0:
        return {i: (i, i + 1, -i), i + 1: (i,)}
    return {i: (i + 1,), i + 1: (-(i + 1), i, i + 1)}


class BraidService:
    def normalize(self, word: BraidWord) -> NormalForm:
        return NormalForm.from_word(word)

    def as_form(self, braid: BraidLike) -> NormalForm:
        return braid if isinstance(braid, NormalForm) else NormalForm.from_word(braid)

    def multiply(self, a: BraidLike, b: BraidLike) -> NormalForm:
        return self.as_form(a) * self.as_form(b)

    def inverse(self, braid: BraidLike) -> NormalForm:
        return self.as_form(braid).inverse()

    def braids_equal(self, a: BraidLike, b: BraidLike) -> bool:
        return self.as_form(a) == self.as_form(b)

    def half_twist(self, m: int, block: Iterable[int]) -> BraidWord:
        return BraidWord.half_twist(m, block)

    def permutation(self, braid: BraidLike) -> tuple:
        """Underlying permutation of {1..m}, 1-based one-line notation."""
        return tuple(x + 1 for x in braid.permutation())

    def is_pure(self, braid: BraidLike) -> bool:
        return braid.permutation() == identity_perm(braid.strands)

    def apply_permutation(self, braid: BraidLike, holes: Iterable[int]) -> tuple:
        return braid.carry(holes)

    def gather_positions(self, positions: Iterable[int]) -> tuple:
        """
        Adjacent swaps that slide a set of positions down into a consecutive block.

        Returns (swaps, block). Applying s_a for a in swaps, in order, maps the set onto
        block = {h, ..., h+k-1} with h = min(positions). The braid σ_{a_1}...σ_{a_k}
        therefore carries block back onto the original positions.
        """
        current = set(positions)
        if not current:
            raise DomainError("Cannot gather an empty set of positions")
        low = min(current)
        swaps = []
        while True:
            step = next((q for q in sorted(current) if q - 1 >= low and q - 1 not in current), None)
            if step is None:
                break
            current.remove(step)
            current.add(step - 1)
            swaps.append(step - 1)
        return swaps, tuple(sorted(current))

    def positive_sorting_word(self, m: int, positions: Iterable[int]) -> tuple:
        """Positive braid β and block J with β(J) equal to the given positions: (BraidWord, block)."""
        swaps, block = self.gather_positions(positions)
        return BraidWord(m, tuple(swaps)), block

    def free_group_image(self, word: BraidWord) -> tuple:
        """
        Images of the free generators x_1..x_m under the Artin action of the braid.

        Two words are equal in the braid group iff their images agree; this is the
        brute-force oracle for the word problem.
        """
        images = []
        for j in range(1, word.strands + 1):
            current = [j]
            for letter in reversed(word.letters):
                substitution = _generator_images(letter)
                expanded = []
                for x in current:
                    image = substitution.get(abs(x), (abs(x),))
                    expanded.extend(image if x > 0 else tuple(-y for y in reversed(image)))
                current = _free_reduce(expanded)
            images.append(tuple(current))
        logger.debug(f"Free group image of a {len(word)}-letter word on {word.strands} strands")
        return tuple(images)
