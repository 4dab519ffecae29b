import unittest
from fractions import Fraction
from hypothesis import given
from drham.fault import NotAGradientError, UnsupportedInputError
from drham.operators import ScalarDiffOp
from drham.strategies import diff_polys, nonconstant_polys
from drham.variational import (L_op, LocalFunctional, MultiVector, antiderivative, as_functional, evolutionary,
                               frechet, functional_equal, functional_from_variational, helmholtz_defect,
                               higher_euler, omega_hat, var_derivative)
from drham.algebra import DiffPoly
from tests import R1, R2, DRHamTestCase, c, u


class TestVariationalDerivative(DRHamTestCase):
    def test_second_order(self):
        self.assertEqual(var_derivative(u(R1) * u(R1, 1, 2), 1), u(R1, 1, 2) * 2)

    def test_two_fields(self):
        f = u(R2, 1) * u(R2, 2, 1)
        self.assertEqual(var_derivative(f, 1), u(R2, 2, 1))
        self.assertEqual(var_derivative(f, 2), -u(R2, 1, 1))

    def test_theta_derivative(self):
        density = DiffPoly.theta(R1, 1) * DiffPoly.theta(R1, 1, 1)
        self.assertEqual(var_derivative(density, 1, 'theta'), DiffPoly.theta(R1, 1, 1) * 2)

    @given(diff_polys(R2))
    def test_kills_total_derivatives(self, p):
        for alpha in R2.fields:
            self.assertFalse(var_derivative(p.dx(), alpha))

    def test_higher_euler_zero_is_variational(self):
        f = u(R1) * u(R1, 1, 1) ** 2
        self.assertEqual(higher_euler(f, 1, 0), var_derivative(f, 1))

    def test_higher_euler_shift(self):
        f = u(R1) * u(R1, 1, 2)
        self.assertEqual(higher_euler(f.dx(), 1, 1), higher_euler(f, 1, 0))

    def test_functional_equality(self):
        self.assertFunctionalEqual(u(R1) * u(R1, 1, 2), -(u(R1, 1, 1) ** 2))
        self.assertFunctionalEqual(u(R1, 1, 3) + 7, DiffPoly.zero(R1))
        self.assertFalse(functional_equal(u(R1) ** 2, u(R1) ** 3))


class TestOperatorsOfDensities(unittest.TestCase):
    def test_l_operator(self):
        self.assertEqual(L_op(u(R1) ** 2, 1), ScalarDiffOp.multiplication(u(R1) * 2))
        f = u(R1) * u(R1, 1, 1)
        self.assertEqual(L_op(f, 1), ScalarDiffOp(R1, {0: u(R1, 1, 1), 1: u(R1)}))
        self.assertEqual(L_op(f, 1, 1), ScalarDiffOp.multiplication(u(R1)))

    def test_frechet_row(self):
        row = frechet(u(R2, 1) * u(R2, 2))
        self.assertEqual(row, (ScalarDiffOp.multiplication(u(R2, 2)), ScalarDiffOp.multiplication(u(R2, 1))))

    def test_evolutionary(self):
        self.assertEqual(evolutionary([u(R1, 1, 1)], u(R1) ** 2), u(R1) * u(R1, 1, 1) * 2)

    def test_omega_hat_of_cubic(self):
        omega = omega_hat((u(R1) ** 3) / 6, 0, [[1]])
        self.assertEqual(omega.entry(1, 1), ScalarDiffOp.multiplication(u(R1)))
        self.assertTrue(omega_hat((u(R1) ** 3) / 6, 1, [[1]]).is_zero())

    def test_theta_input_rejected(self):
        with self.assertRaises(UnsupportedInputError):
            L_op(DiffPoly.theta(R1, 1), 1)
        with self.assertRaises(UnsupportedInputError):
            LocalFunctional(DiffPoly.theta(R1, 1))


class TestReconstruction(DRHamTestCase):
    def test_antiderivative(self):
        self.assertEqual(antiderivative(u(R1) * u(R1, 1, 1)), (u(R1) ** 2) / 2)
        self.assertEqual(antiderivative(u(R1, 1, 3)), u(R1, 1, 2))

    def test_antiderivative_failure(self):
        with self.assertRaises(NotAGradientError):
            antiderivative(u(R1) ** 2)
        with self.assertRaises(NotAGradientError):
            antiderivative(c(R1, 1))

    @given(nonconstant_polys(R2))
    def test_antiderivative_inverts_dx(self, p):
        h = antiderivative(p.dx())
        self.assertEqual(h.dx(), p.dx())

    def test_homotopy(self):
        h = functional_from_variational([u(R1) ** 2])
        self.assertEqual(h.density, (u(R1) ** 3) / 3)

    @given(nonconstant_polys(R2, max_terms=3))
    def test_homotopy_round_trip(self, f):
        h = functional_from_variational(as_functional(f).gradient())
        self.assertFunctionalEqual(h.density, f)

    def test_helmholtz(self):
        self.assertTrue(helmholtz_defect([u(R1, 1, 1)]))
        self.assertFalse(helmholtz_defect([u(R1, 1, 2)]))
        with self.assertRaises(NotAGradientError):
            functional_from_variational([u(R1, 1, 1)])


class TestMultiVector(unittest.TestCase):
    def test_equality_modulo_dx(self):
        a = MultiVector(DiffPoly.theta(R1, 1) * DiffPoly.theta(R1, 1, 1))
        b = MultiVector(a.density + (DiffPoly.theta(R1, 1) * DiffPoly.theta(R1, 1, 2)).dx())
        self.assertEqual(a, b)
        self.assertEqual(a.degree, 2)
        self.assertTrue((a - b).is_zero())

    def test_gradient(self):
        f = as_functional((u(R2, 1) ** 2) * u(R2, 2))
        self.assertEqual(f.gradient(), (u(R2, 1) * u(R2, 2) * 2, u(R2, 1) ** 2))
        self.assertEqual(f.scale(Fraction(1, 2)).var_u(2), (u(R2, 1) ** 2) / 2)
