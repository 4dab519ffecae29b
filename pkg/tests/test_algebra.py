import unittest
from fractions import Fraction
from hypothesis import given, strategies as st
from drham.algebra import DiffPoly, ExtGen, Monomial, Ring, dilation_D, euler_Ehat
from drham.drk2 import HomogeneityData
from drham.fault import SignatureError, UnsupportedInputError
from drham.strategies import diff_polys, homogeneity_data, monomials
from tests import R1, R2, R1_EPS4, c, eps, u

EXP_RING = Ring(1, generators=(ExtGen("E", 1, Fraction(1)),), max_eps=2)


class TestDiffPolyArithmetic(unittest.TestCase):
    def test_total_derivative(self):
        self.assertEqual((u(R1) ** 2).dx(), u(R1) * u(R1, 1, 1) * 2)
        self.assertEqual(u(R1, 1, 1).dx(2), u(R1, 1, 3))

    def test_constants_lift(self):
        self.assertEqual(u(R1) + 1 - 1, u(R1))
        self.assertEqual((u(R1) * 3) / 3, u(R1))
        self.assertEqual(c(R1, 0), 0)
        self.assertFalse(DiffPoly.zero(R1))

    def test_odd_variables_anticommute(self):
        t0, t1 = DiffPoly.theta(R1, 1, 0), DiffPoly.theta(R1, 1, 1)
        self.assertEqual(t0 * t0, 0)
        self.assertEqual(t0 * t1, -(t1 * t0))
        self.assertEqual(t0.dx(), t1)
        self.assertEqual((t0 * t1).dx(), t0 * DiffPoly.theta(R1, 1, 2))

    def test_eps_truncation(self):
        ring = Ring(1, max_eps=2)
        self.assertEqual(eps(ring, 3), 0)
        self.assertEqual(eps(ring) * eps(ring, 2), 0)
        self.assertEqual(eps(ring) * eps(ring), eps(ring, 2))

    def test_ring_mismatch(self):
        with self.assertRaises(SignatureError):
            u(R1) + u(R2)
        with self.assertRaises(SignatureError):
            u(R1, 2)

    def test_str(self):
        self.assertEqual(str(DiffPoly.zero(R1)), "0")
        self.assertEqual(str(u(R1, 1, 1)), "u1_1")
        self.assertEqual(str(-u(R2, 2, 0, 2)), "-u2^2")
        self.assertEqual(str((eps(R1, 2) * u(R1, 1, 2)).scale(Fraction(1, 8))), "1/8*eps^2*u1_2")

    @given(diff_polys(R2), diff_polys(R2))
    def test_leibniz(self, a, b):
        self.assertEqual((a * b).dx(), a.dx() * b + a * b.dx())

    @given(diff_polys(R1, max_terms=3), diff_polys(R1, max_terms=3), diff_polys(R1, max_terms=3))
    def test_distributive(self, a, b, x):
        self.assertEqual(x * (a + b), x * a + x * b)

    @given(st.integers(0, 3), st.integers(0, 3), st.data())
    def test_supercommutative(self, p, q, data):
        a = data.draw(monomials(R2, thetas=p))
        b = data.draw(monomials(R2, thetas=q))
        self.assertEqual(a * b, (b * a).scale(-1 if p * q % 2 else 1))

    @given(st.integers(0, 3), diff_polys(R2, 3, max_eps=3), diff_polys(R2, 3, max_eps=3))
    def test_eps_truncation_is_a_homomorphism(self, k, a, b):
        self.assertEqual((a * b).eps_truncate(k), (a.eps_truncate(k) * b.eps_truncate(k)).eps_truncate(k))

    @given(st.integers(0, 2), st.data())
    def test_dx_raises_standard_degree(self, thetas, data):
        m = data.draw(monomials(R2, max_eps=2, thetas=thetas))
        derivative = m.dx()
        if derivative:
            self.assertEqual(derivative.standard_degree, m.standard_degree + 1)
            self.assertEqual(derivative.theta_degree, thetas)
            self.assertTrue(derivative.is_homogeneous())


class TestGenerators(unittest.TestCase):
    def test_derivative_of_exponential(self):
        e = DiffPoly.gen(EXP_RING, "E")
        self.assertEqual(e.dx(), u(EXP_RING, 1, 1) * e)
        self.assertEqual(e.partial(0, 1, 0), e)

    def test_expand_generators(self):
        e = DiffPoly.gen(EXP_RING, "E")
        plain = EXP_RING.without_generators()
        expected = c(plain, 1) + u(plain) + (u(plain) ** 2).scale(Fraction(1, 2))
        self.assertEqual(e.expand_generators(2), expected)
        self.assertEqual((u(EXP_RING) * e).expand_generators(1), u(plain))

    def test_truncate_degree_needs_expansion(self):
        with self.assertRaises(UnsupportedInputError):
            DiffPoly.gen(EXP_RING, "E").truncate_degree(2)

    def test_integrate_field(self):
        e = DiffPoly.gen(EXP_RING, "E")
        # int_0^s t e^t dt = (s - 1) e^s + 1
        self.assertEqual((u(EXP_RING) * e).integrate_field(1), u(EXP_RING) * e - e + 1)
        self.assertEqual((u(EXP_RING) ** 2).integrate_field(1), (u(EXP_RING) ** 3).scale(Fraction(1, 3)))

    def test_substitute_into_exponential(self):
        ring = EXP_RING
        e = DiffPoly.gen(ring, "E")
        image = u(ring) + eps(ring) * u(ring, 1, 1)
        shifted = e.substitute({(0, 1): image})
        expected = e * (c(ring, 1) + eps(ring) * u(ring, 1, 1) + (eps(ring, 2) * u(ring, 1, 1) ** 2) / 2)
        self.assertEqual(shifted, expected)


class TestSubstitution(unittest.TestCase):
    def test_jets_follow_images(self):
        image = u(R1_EPS4) + eps(R1_EPS4) * u(R1_EPS4, 1, 2)
        result = (u(R1_EPS4) ** 2).substitute({(0, 1): image})
        expected = u(R1_EPS4) ** 2 + (eps(R1_EPS4) * u(R1_EPS4) * u(R1_EPS4, 1, 2)) * 2 \
            + eps(R1_EPS4, 2) * u(R1_EPS4, 1, 2) ** 2
        self.assertEqual(result, expected)
        self.assertEqual(u(R1_EPS4, 1, 1).substitute({(0, 1): image}), image.dx())

    def test_theta_input_rejected(self):
        with self.assertRaises(UnsupportedInputError):
            DiffPoly.theta(R1, 1).substitute({(0, 1): u(R1)})


class TestEulerFields(unittest.TestCase):
    def test_dilation(self):
        self.assertEqual(dilation_D(u(R1) * u(R1, 1, 1)), (u(R1) * u(R1, 1, 1)) * 3)
        self.assertEqual(dilation_D(c(R1, 5)), 0)

    def test_euler_hat_trivial(self):
        h = HomogeneityData.build([[1]], [1], [0], 0)
        g = (u(R1) ** 3) / 6 + (eps(R1, 2) * u(R1) * u(R1, 1, 2)) / 24
        self.assertEqual(euler_Ehat(g, h), g * 3)

    def test_euler_hat_shift(self):
        h = HomogeneityData.build([[0, 1], [1, 0]], [1, 0], [0, 1], 1, r=[0, 2])
        self.assertEqual(euler_Ehat(u(R2, 2), h), c(R2, 2))
        self.assertEqual(euler_Ehat(u(R2, 1), h), u(R2, 1))

    @given(diff_polys(R1))
    def test_dilation_commutes_with_dx_up_to_identity(self, p):
        self.assertEqual(dilation_D(p.dx()), dilation_D(p).dx() + p.dx())

    @given(homogeneity_data(2), diff_polys(R2, 3, max_eps=2), diff_polys(R2, 3, max_eps=2))
    def test_euler_fields_are_derivations(self, h, a, b):
        self.assertEqual(euler_Ehat(a * b, h), euler_Ehat(a, h) * b + a * euler_Ehat(b, h))
        self.assertEqual(dilation_D(a * b), dilation_D(a) * b + a * dilation_D(b))


class TestEpsHandling(unittest.TestCase):
    def test_eps_part(self):
        p = u(R1_EPS4) + eps(R1_EPS4, 2) * u(R1_EPS4, 1, 2)
        self.assertEqual(p.eps_part(2), u(R1_EPS4, 1, 2))
        self.assertEqual(p.eps_truncate(1), u(R1_EPS4))
        self.assertEqual(p.at_origin(), 0)
        self.assertEqual((p + eps(R1_EPS4) + 3).at_origin(), eps(R1_EPS4) + 3)

    def test_exp_nilpotent(self):
        ring = Ring(1, max_eps=2)
        x = eps(ring) * u(ring)
        self.assertEqual(x.exp_nilpotent(), c(ring, 1) + x + (x * x) / 2)
        with self.assertRaises(UnsupportedInputError):
            u(ring).exp_nilpotent()

    def test_standard_degree(self):
        self.assertEqual((eps(R1, 2) * u(R1, 1, 3)).standard_degree, 1)
        self.assertEqual(Monomial(eps=1).standard_degree, -1)
        self.assertIsNone((u(R1) + u(R1, 1, 1)).standard_degree)

    def test_gradations(self):
        self.assertEqual((eps(R1, 2) * u(R1) * u(R1, 1, 2)).gradations(), [(0, 0)])
        theta = DiffPoly.theta(R2, 1) * DiffPoly.theta(R2, 2, 3)
        self.assertEqual(theta.gradations(), [(3, 2)])
        self.assertEqual(u(R1).gradations(), [(0, 0)])
        self.assertTrue((u(R1, 1, 2) + u(R1, 1, 1) ** 2).is_homogeneous())
        self.assertFalse((u(R1) + u(R1, 1, 1)).is_homogeneous())
