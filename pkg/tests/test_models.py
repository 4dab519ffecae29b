import unittest
from fractions import Fraction
from drham.algebra import Ring
from drham.drk2 import check_homogeneity
from drham.fault import UnsupportedInputError
from drham.models import (BUILTINS, ShiftSeries, bernoulli_operator, builtin, coth_operator, cp1, cp1_ring,
                          cp1_variational, density, divide_by_eps, exp_of_series_field, genus1_g_from_potential,
                          kdv, rspin3, rspin4, rspin_homogeneity, skew_complete, toda_pair)
from drham.operators import ScalarDiffOp
from drham.variational import as_functional
from tests import R1, R2, DRHamTestCase, c, eps, u


class TestShiftSeries(unittest.TestCase):
    def test_s_coefficients(self):
        s = ShiftSeries.S(4)
        self.assertEqual(s.coeff(0), 1)
        self.assertEqual(s.coeff(1), 0)
        self.assertEqual(s.coeff(2), Fraction(1, 24))
        self.assertEqual(s.coeff(4), Fraction(1, 1920))

    def test_products(self):
        one = ShiftSeries({0: 1}, 4)
        self.assertEqual(ShiftSeries.S(4) * ShiftSeries.S_inverse(4), one)
        self.assertEqual(ShiftSeries.shift(1, 4) * ShiftSeries.shift(-1, 4), one)
        self.assertEqual(ShiftSeries.shift(1, 4) - ShiftSeries.shift(1, 4), ShiftSeries({}, 4))

    def test_apply_to_field(self):
        ring = Ring(1, max_eps=2)
        expected = u(ring) + eps(ring) * u(ring, 1, 1) + eps(ring, 2) * u(ring, 1, 2) / 2
        self.assertEqual(ShiftSeries.shift(1, 2).apply_to_field(ring, 1), expected)

    def test_exponent_must_start_with_the_field(self):
        with self.assertRaises(UnsupportedInputError):
            exp_of_series_field(cp1_ring(2), ShiftSeries({1: 1}, 2), 2, "E")

    def test_bernoulli_matches_coth(self):
        ring = Ring(1, max_eps=6)
        self.assertEqual(bernoulli_operator(ring), coth_operator(ring))
        self.assertEqual(bernoulli_operator(ring).coeff(3), eps(ring, 2) / 6)
        self.assertEqual(bernoulli_operator(ring).coeff(5), -eps(ring, 4) / 360)


class TestHelpers(unittest.TestCase):
    def test_density(self):
        self.assertEqual(density(R1, ("1/6", 0, ((1, 0),) * 3)), u(R1) ** 3 / 6)
        self.assertEqual(density(R2, (2, 0, ((1, 1), (2, 0)))), u(R2, 1, 1) * u(R2, 2) * 2)

    def test_skew_complete(self):
        k = skew_complete(R2, {(1, 2): ScalarDiffOp(R2, {1: u(R2, 1)})})
        self.assertEqual(k.entry(2, 1), ScalarDiffOp(R2, {0: u(R2, 1, 1), 1: u(R2, 1)}))
        self.assertTrue(k.is_skew())

    def test_divide_by_eps(self):
        ring = Ring(1, max_eps=3)
        op = ScalarDiffOp(ring, {1: eps(ring), 3: eps(ring, 3)})
        lowered = divide_by_eps(op, R1.truncated(2))
        self.assertEqual(lowered.coeff(1), 1)
        with self.assertRaises(UnsupportedInputError):
            divide_by_eps(ScalarDiffOp(ring, {1: c(ring, 1)}), R1.truncated(2))


class TestBuiltins(DRHamTestCase):
    def test_homogeneity(self):
        for m in (kdv(), rspin3(), rspin4(), cp1(2)):
            self.assertTrue(check_homogeneity(m), m.name)

    def test_rspin_charges(self):
        h = rspin_homogeneity(4)
        self.assertEqual(h.q, (0, Fraction(1, 4), Fraction(1, 2)))
        self.assertEqual(h.delta, Fraction(1, 2))
        self.assertEqual(h.eta[0][2], 1)

    def test_lookup(self):
        self.assertEqual(set(BUILTINS), {'trivial', 'kdv', '3spin', '4spin', 'cp1'})
        self.assertEqual(builtin('kdv', 2).ring, Ring(1, max_eps=2))
        with self.assertRaises(UnsupportedInputError):
            builtin('5spin')
        with self.assertRaises(UnsupportedInputError):
            cp1(1)

    def test_toda_pair_lives_beside_the_models(self):
        self.assertNotIn('toda', BUILTINS)
        with self.assertRaises(UnsupportedInputError):
            builtin('toda')
        pair = toda_pair(2)
        self.assertEqual(pair.k1.ring, builtin('cp1', 2).ring)

    def test_cp1_variational(self):
        m = cp1(4)
        self.assertEqual(as_functional(m.g).gradient(), cp1_variational(m.ring))

    def test_genus_one_from_potential(self):
        m = kdv(2)
        self.assertFunctionalEqual(genus1_g_from_potential(m.F, [[1]]), m.g)
        with self.assertRaises(UnsupportedInputError):
            genus1_g_from_potential(u(R1, 1, 1), [[1]])

    def test_toda_k1_is_skew(self):
        pair = toda_pair(2)
        self.assertTrue(pair.k1.is_skew())
        self.assertEqual(pair.miura.compose(pair.inverse), pair.miura.identity(pair.k1.ring))
        ring = pair.k1.ring
        self.assertEqual(pair.k1.coeff(1, 2, 1), 1)
        self.assertEqual(pair.k1.coeff(1, 2, 2), eps(ring) / 2)
