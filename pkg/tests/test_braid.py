import unittest
import random
import sys
import os

# Add src to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '../src')))

from errors import DomainError, StructuralError
from services.braid_service import BraidService, BraidWord, NormalForm, consecutive_block


def random_word(rng, m, length):
    letters = []
    for _ in range(length):
        letter = rng.randint(1, m - 1)
        letters.append(letter if rng.random() < 0.5 else -letter)
    return BraidWord(m, tuple(letters))


class TestBraidService(unittest.TestCase):

    def setUp(self):
        self.service = BraidService()
        self.rng = random.Random(7)

    def test_braid_relation(self):
        self.assertTrue(self.service.braids_equal(BraidWord(3, (1, 2, 1)), BraidWord(3, (2, 1, 2))))
        self.assertFalse(self.service.braids_equal(BraidWord(3, (1, 2)), BraidWord(3, (2, 1))))

    def test_far_generators_commute(self):
        self.assertEqual(
            self.service.normalize(BraidWord(4, (1, 3))),
            self.service.normalize(BraidWord(4, (3, 1))),
        )

    def test_generator_times_inverse_is_identity(self):
        self.assertTrue(self.service.normalize(BraidWord(4, (2, -2, -3, 3))).is_identity)

    def test_full_twist_is_central(self):
        full = self.service.normalize(self.service.half_twist(4, (1, 2, 3, 4)))
        full = full * full
        for letter in (1, 2, 3, -1, -3):
            generator = self.service.normalize(BraidWord(4, (letter,)))
            self.assertEqual(full * generator, generator * full)

    def test_half_twist_word(self):
        self.assertEqual(self.service.half_twist(4, (2, 3)).letters, (2,))
        self.assertEqual(self.service.half_twist(4, (1, 2, 3)).letters, (1, 2, 1))
        self.assertEqual(self.service.half_twist(4, (3,)).letters, ())
        self.assertEqual(NormalForm.from_word(BraidWord.half_twist(3, (1, 2, 3))), NormalForm.delta_power(3, 1))

    def test_product_and_inverse_match_words(self):
        normalize = self.service.normalize
        for _ in range(40):
            m = self.rng.randint(2, 5)
            a = random_word(self.rng, m, self.rng.randint(0, 8))
            b = random_word(self.rng, m, self.rng.randint(0, 8))
            self.assertEqual(normalize(a) * normalize(b), normalize(a * b))
            self.assertEqual(self.service.multiply(a, b), normalize(a * b))
            self.assertEqual(self.service.inverse(a), normalize(a.inverse()))
            self.assertTrue((normalize(a) * normalize(a).inverse()).is_identity)

    def test_normal_form_agrees_with_free_group_action(self):
        image = self.service.free_group_image
        for _ in range(60):
            m = self.rng.randint(2, 4)
            a = random_word(self.rng, m, self.rng.randint(0, 7))
            b = random_word(self.rng, m, self.rng.randint(0, 7))
            self.assertEqual(image(self.service.normalize(a).to_word()), image(a))
            self.assertEqual(
                self.service.normalize(a) == self.service.normalize(b),
                image(a) == image(b),
            )

    def test_free_group_image_of_generator(self):
        self.assertEqual(self.service.free_group_image(BraidWord(2, (1,))), ((1, 2, -1), (1,)))
        self.assertEqual(self.service.free_group_image(BraidWord(2, (-1,))), ((2,), (-2, 1, 2)))

    def test_permutation(self):
        self.assertEqual(self.service.permutation(BraidWord(3, (1,))), (2, 1, 3))
        self.assertEqual(
            self.service.permutation(self.service.normalize(BraidWord(3, (1, 2)))),
            self.service.permutation(BraidWord(3, (1, 2))),
        )
        self.assertTrue(self.service.is_pure(BraidWord(3, (1, 1))))
        self.assertFalse(self.service.is_pure(BraidWord(3, (1, 2))))
        self.assertEqual(self.service.apply_permutation(BraidWord(4, (2,)), (3, 4)), (2, 4))

    def test_gather_positions(self):
        swaps, block = self.service.gather_positions([2, 4])
        self.assertEqual(swaps, [3])
        self.assertEqual(block, (2, 3))
        word, block = self.service.positive_sorting_word(5, [1, 3, 5])
        self.assertEqual(self.service.apply_permutation(word, block), (1, 3, 5))

    def test_invalid_words(self):
        with self.assertRaises(StructuralError):
            BraidWord(3, (0,))
        with self.assertRaises(StructuralError):
            BraidWord(3, (3,))
        with self.assertRaises(DomainError):
            BraidWord(3, (1,)) * BraidWord(4, (1,))

    def test_consecutive_block(self):
        self.assertEqual(consecutive_block(4, [3, 2]), (2, 3))
        with self.assertRaises(DomainError):
            consecutive_block(4, [1, 3])
        with self.assertRaises(DomainError):
            consecutive_block(4, [4, 5])


if __name__ == '__main__':
    unittest.main()
