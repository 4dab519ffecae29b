import unittest
from fractions import Fraction
import sympy
from drham.algebra import Ring
from drham.central import (central_invariant_scalar, central_invariant_value, eps2_expected, eps2_tensor_check,
                           eps2_tensor_residual, symbol_coefficient, to_sympy)
from drham.fault import PreconditionError, UnsupportedInputError
from drham.models import cp1, kdv, kdv_k2_reference, rspin3, rspin4
from drham.operators import ScalarDiffOp
from tests import R2, eps, u

RING = Ring(1, max_eps=2)
DX = ScalarDiffOp.dx_power(RING)


class TestScalarInvariant(unittest.TestCase):
    def test_kdv(self):
        self.assertEqual(central_invariant_value(DX, kdv_k2_reference(RING)), Fraction(1, 24))

    def test_dispersionless(self):
        p2 = ScalarDiffOp(RING, {1: u(RING), 0: u(RING, 1, 1) / 2})
        self.assertEqual(central_invariant_value(DX, p2), 0)

    def test_non_constant(self):
        p2 = ScalarDiffOp(RING, {1: u(RING) ** 2, 0: u(RING) * u(RING, 1, 1), 3: eps(RING, 2)})
        self.assertIsNone(central_invariant_value(DX, p2))
        self.assertEqual(central_invariant_scalar(DX, p2), 1 / (12 * sympy.Symbol('u') ** 2))

    def test_degenerate_pencils(self):
        with self.assertRaises(PreconditionError):
            central_invariant_scalar(DX, DX.scale(2))
        with self.assertRaises(PreconditionError):
            central_invariant_scalar(ScalarDiffOp(RING, {3: eps(RING, 2)}), DX)

    def test_symbol_coefficient(self):
        self.assertEqual(symbol_coefficient(kdv_k2_reference(RING), 2, 3), Fraction(1, 8))
        self.assertEqual(symbol_coefficient(kdv_k2_reference(RING), 0, 1), u(RING))


class TestSympyBridge(unittest.TestCase):
    def test_polynomial(self):
        x = sympy.Symbol('u')
        self.assertEqual(to_sympy(u(RING) ** 2 + 3), x ** 2 + 3)

    def test_rejects_jets_and_systems(self):
        with self.assertRaises(UnsupportedInputError):
            to_sympy(u(RING, 1, 1))
        with self.assertRaises(UnsupportedInputError):
            to_sympy(u(R2))


class TestEps2Tensor(unittest.TestCase):
    def test_builtins(self):
        for m in (kdv(), rspin3(), rspin4(), cp1(2)):
            self.assertTrue(eps2_tensor_check(m), m.name)

    def test_kdv_value(self):
        expected = eps2_expected(kdv(2))
        self.assertEqual(expected, {(1, 1): Fraction(1, 8)})

    def test_wrong_genus_one_term(self):
        m = kdv()
        broken = m._replace(g=m.g + eps(m.ring, 2) * u(m.ring) * u(m.ring, 1, 2))
        self.assertIn((1, 1), eps2_tensor_residual(broken))

    def test_needs_potential(self):
        with self.assertRaises(PreconditionError):
            eps2_expected(kdv()._replace(F=None))
