import unittest
from fractions import Fraction
from hypothesis import given
from drham.algebra import DiffPoly, Ring
from drham.fault import NotSkewError, SignatureError, TruncationError
from drham.operators import (MatDiffOp, MiuraMap, ScalarDiffOp, coeff_extract, embed_eps, embed_eps_density,
                             miura_functional, miura_op, poisson_bracket)
from drham.strategies import diff_polys, mat_ops, scalar_ops, skew_ops
from drham.variational import as_functional
from tests import R1, R2, c, eps, u

DX = ScalarDiffOp.dx_power(R1)


def kdv_k2(ring: Ring) -> MatDiffOp:
    """u dx + 1/2 u_x, the dispersionless second KdV structure."""
    return MatDiffOp(ring, [[ScalarDiffOp(ring, {0: u(ring, 1, 1) / 2, 1: u(ring)})]])


class TestScalarOperators(unittest.TestCase):
    def test_compose(self):
        mult = ScalarDiffOp.multiplication(u(R1))
        self.assertEqual(DX.compose(mult), ScalarDiffOp(R1, {0: u(R1, 1, 1), 1: u(R1)}))
        self.assertEqual(DX @ DX, ScalarDiffOp.dx_power(R1, 2))

    def test_adjoint(self):
        op = ScalarDiffOp(R1, {1: u(R1)})
        self.assertEqual(op.adjoint(), ScalarDiffOp(R1, {0: -u(R1, 1, 1), 1: -u(R1)}))
        self.assertEqual(DX.adjoint(), -DX)

    def test_apply(self):
        op = ScalarDiffOp(R1, {0: u(R1, 1, 1) / 2, 1: u(R1)})
        self.assertEqual(op.apply(u(R1)), (u(R1) * u(R1, 1, 1)).scale(Fraction(3, 2)))

    def test_str(self):
        self.assertEqual(str(ScalarDiffOp.zero(R1)), "0")
        self.assertEqual(str(ScalarDiffOp(R1, {0: u(R1, 1, 1), 1: c(R1, 1), 3: u(R1)})), "u1_1 + dx + (u1)*dx^3")

    def test_ring_mismatch(self):
        with self.assertRaises(SignatureError):
            DX.compose(ScalarDiffOp.dx_power(R2))

    @given(scalar_ops(R1))
    def test_adjoint_is_an_involution(self, op):
        self.assertEqual(op.adjoint().adjoint(), op)

    @given(scalar_ops(R1, max_order=2), scalar_ops(R1, max_order=2))
    def test_adjoint_reverses_composition(self, a, b):
        self.assertEqual(a.compose(b).adjoint(), b.adjoint().compose(a.adjoint()))


class TestMatrixOperators(unittest.TestCase):
    def test_skew(self):
        self.assertTrue(kdv_k2(R1).is_skew())
        self.assertTrue(MatDiffOp.constant(R2, [[0, 1], [1, 0]], 1).is_skew())
        with self.assertRaises(NotSkewError):
            MatDiffOp(R1, [[ScalarDiffOp.multiplication(u(R1))]]).check_skew()

    @given(mat_ops(R2))
    def test_antisymmetrization_is_skew(self, k):
        self.assertTrue((k - k.adjoint()).is_skew())

    def test_entries_are_one_based(self):
        k = MatDiffOp.constant(R2, [[0, 1], [1, 0]], 1)
        self.assertEqual(k.entry(1, 2), ScalarDiffOp.dx_power(R2))
        self.assertEqual(k[2, 2], ScalarDiffOp.zero(R2))
        self.assertEqual(k.coeff(2, 1, 1), 1)

    def test_not_square(self):
        with self.assertRaises(SignatureError):
            MatDiffOp(R2, [[ScalarDiffOp.zero(R2)], [ScalarDiffOp.zero(R2)]])

    def test_coeff_extract(self):
        ring = Ring(1, max_eps=2)
        k = MatDiffOp(ring, [[ScalarDiffOp(ring, {1: c(ring, 1), 3: eps(ring, 2) / 8})]])
        self.assertEqual(coeff_extract(k, 2, 1, 1, 3), Fraction(1, 8))
        self.assertEqual(coeff_extract(k, 0, 1, 1, 3), 0)
        self.assertEqual(k.degree_part(0), MatDiffOp.constant(ring, [[1]], 1))

    def test_bracket_of_casimir(self):
        bracket = poisson_bracket(as_functional(u(R1)), as_functional(u(R1) ** 2 / 2), MatDiffOp.constant(R1, [[1]], 1))
        self.assertTrue(bracket.is_zero())

    def test_bracket_needs_skew_operator(self):
        with self.assertRaises(NotSkewError):
            poisson_bracket(as_functional(u(R1)), as_functional(u(R1)), MatDiffOp.constant(R1, [[1]], 0))

    @given(skew_ops(R2, 1), diff_polys(R2, 3), diff_polys(R2, 3))
    def test_bracket_antisymmetry(self, k, f, g):
        self.assertEqual(poisson_bracket(f, g, k), -poisson_bracket(g, f, k))


class TestMiura(unittest.TestCase):
    ring = Ring(1, max_eps=3)

    def test_inverse_of_near_identity(self):
        ring = self.ring
        m = MiuraMap([u(ring) + eps(ring) * u(ring, 1, 2)])
        expected = MiuraMap([
            u(ring) - eps(ring) * u(ring, 1, 2) + eps(ring, 2) * u(ring, 1, 4) - eps(ring, 3) * u(ring, 1, 6)
        ])
        inverse = m.inverse()
        self.assertEqual(inverse, expected)
        self.assertEqual(m.compose(inverse), MiuraMap.identity(ring))
        self.assertTrue(m.is_close_to_identity)

    def test_non_terminating_inverse(self):
        m = MiuraMap([u(R1) + u(R1, 1, 1) ** 2])
        with self.assertRaises(TruncationError):
            m.inverse(max_iterations=3)

    def test_identity_leaves_operators_alone(self):
        k = kdv_k2(self.ring)
        self.assertEqual(miura_op(k, MiuraMap.identity(self.ring)), k)

    def test_shift_moves_functionals(self):
        ring = self.ring
        m = MiuraMap([u(ring) + eps(ring) * u(ring, 1, 1)])
        self.assertEqual(miura_functional(u(ring) ** 2, m), (u(ring) - eps(ring) * u(ring, 1, 1)
                                                              + eps(ring, 2) * u(ring, 1, 2)
                                                              - eps(ring, 3) * u(ring, 1, 3)) ** 2)

    def test_ring_mismatch(self):
        with self.assertRaises(SignatureError):
            miura_op(kdv_k2(R1), MiuraMap.identity(self.ring))


class TestEpsEmbedding(unittest.TestCase):
    def test_density(self):
        ring = Ring(1, max_eps=2)
        g = u(R1) ** 3 / 6 + u(R1) * u(R1, 1, 2) / 24 + u(R1, 1, 4)
        self.assertEqual(embed_eps_density(g, ring), u(ring) ** 3 / 6 + eps(ring, 2) * u(ring) * u(ring, 1, 2) / 24)

    def test_operator(self):
        ring = Ring(1, max_eps=2)
        k = MatDiffOp(R1, [[ScalarDiffOp(R1, {0: u(R1, 1, 3) / 4, 1: u(R1) * 2, 3: c(R1, 1) / 2})]])
        expected = MatDiffOp(ring, [[ScalarDiffOp(ring, {
            0: eps(ring, 2) * u(ring, 1, 3) / 4, 1: u(ring) * 2, 3: eps(ring, 2) / 2
        })]])
        self.assertEqual(embed_eps(k, ring), expected)
