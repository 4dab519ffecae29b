import unittest
from fractions import Fraction
from hypothesis import given, strategies as st
from drham.algebra import DiffPoly, Ring
from drham.fault import NotSkewError, UnsupportedInputError
from drham.multivector import (bivector_of_op, commutator_VQ_BK, compatible, components_of_vector_field,
                               hamiltonian_vector_field, is_poisson, op_of_bivector, schouten, vector_field)
from drham.operators import MatDiffOp, ScalarDiffOp
from drham.strategies import diff_polys, multivectors, skew_ops
from drham.variational import as_functional
from tests import R1, R2, c, eps, u


def dispersionless_kdv(ring: Ring) -> MatDiffOp:
    return MatDiffOp(ring, [[ScalarDiffOp(ring, {0: u(ring, 1, 1) / 2, 1: u(ring)})]])


class TestBivectors(unittest.TestCase):
    def test_constant_bivector(self):
        b = bivector_of_op(MatDiffOp.constant(R1, [[1]], 1))
        expected = (DiffPoly.theta(R1, 1) * DiffPoly.theta(R1, 1, 1)).scale(Fraction(1, 2))
        self.assertEqual(b.density, expected)
        self.assertEqual(b.degree, 2)

    @given(skew_ops(R2))
    def test_operator_round_trip(self, k):
        self.assertEqual(op_of_bivector(bivector_of_op(k)), k)

    def test_needs_skew_operator(self):
        with self.assertRaises(NotSkewError):
            bivector_of_op(MatDiffOp(R1, [[ScalarDiffOp.multiplication(u(R1))]]))

    def test_vector_field_components(self):
        q = (u(R2, 1, 1), u(R2, 1) * u(R2, 2))
        self.assertEqual(components_of_vector_field(vector_field(q)), q)
        with self.assertRaises(UnsupportedInputError):
            vector_field(())


class TestSchouten(unittest.TestCase):
    def test_vector_field_on_functional(self):
        bracket = schouten(vector_field([u(R1, 1, 2)]), u(R1) ** 2 / 2)
        self.assertEqual(bracket, as_functional(-(u(R1, 1, 1) ** 2)))

    def test_poisson_operators(self):
        ring = Ring(1, max_eps=2)
        dispersive = dispersionless_kdv(ring) + MatDiffOp(ring, [[ScalarDiffOp(ring, {3: eps(ring, 2) / 8})]])
        self.assertTrue(is_poisson(MatDiffOp.constant(R1, [[1]], 1)))
        self.assertTrue(is_poisson(dispersionless_kdv(R1)))
        self.assertTrue(is_poisson(dispersive))
        self.assertTrue(is_poisson(MatDiffOp.constant(R2, [[0, 1], [1, 0]], 1)))

    def test_compatible_pair(self):
        self.assertTrue(compatible(MatDiffOp.constant(R1, [[1]], 1), dispersionless_kdv(R1)))
        self.assertTrue(compatible(MatDiffOp.constant(R1, [[1]], 1), MatDiffOp.constant(R1, [[1]], 3)))

    @given(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2), st.data())
    def test_graded_jacobi(self, p, q, r, data):
        a, b, c_ = (data.draw(multivectors(R1, d, 2, 1)) for d in (p, q, r))
        total = (schouten(schouten(a, b), c_).scale((-1) ** (p * r))
                 + schouten(schouten(c_, a), b).scale((-1) ** (r * q))
                 + schouten(schouten(b, c_), a).scale((-1) ** (q * p)))
        self.assertTrue(total.is_zero())

    @given(st.integers(1, 2).flatmap(lambda d: multivectors(R2, d)))
    def test_flat_operator_double_bracket(self, r):
        b = bivector_of_op(MatDiffOp.constant(R2, [[0, 1], [1, 0]], 1))
        self.assertTrue(schouten(schouten(r, b), b).is_zero())


class TestFlows(unittest.TestCase):
    def test_hamiltonian_vector_field(self):
        dx = MatDiffOp.constant(R1, [[1]], 1)
        self.assertEqual(hamiltonian_vector_field(u(R1) ** 2 / 2, dx), (u(R1, 1, 1),))
        self.assertEqual(hamiltonian_vector_field(u(R1), dispersionless_kdv(R1)), (u(R1, 1, 1) / 2,))
        self.assertEqual(hamiltonian_vector_field(c(R1, 3), dx), (DiffPoly.zero(R1),))

    def test_translation_preserves_operator(self):
        self.assertTrue(commutator_VQ_BK([u(R1, 1, 1)], dispersionless_kdv(R1)).is_zero())

    def test_scaling_commutator(self):
        # Q = u: L(Q) = 1, so K~ = 2K - (u d/du)K
        k = dispersionless_kdv(R1)
        self.assertEqual(commutator_VQ_BK([u(R1)], k), k)

    @given(st.lists(diff_polys(R2, 2, 2, 2), min_size=2, max_size=2), skew_ops(R2, 1))
    def test_commutator_matches_schouten(self, q, k):
        direct = schouten(vector_field(q), bivector_of_op(k))
        self.assertEqual(bivector_of_op(commutator_VQ_BK(q, k)), -direct)
