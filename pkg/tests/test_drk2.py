import unittest
from fractions import Fraction
from unittest import mock
from drham.drk2 import (ORIGIN_CASIMIR, ORIGIN_GENERATED, HomogeneityData, build_K2, casimir,
                        check_homogeneity, commutation_check, d_minus_one_reduced_check, genus0_check,
                        genus0_table, k1, k2_genus0, lemma_check, lemma_split_check, recursion_check,
                        noncommuting_pair, recursion_factor, recursion_generate, representative_change_check,
                        seed_table, structure_constants)
from drham.fault import RecursionFailure, UnsupportedInputError
from drham.models import cp1, kdv, kdv_k2_reference, rspin3, rspin3_k2_reference
from drham.operators import MatDiffOp
from tests import DRHamTestCase, u


class TestHomogeneityData(unittest.TestCase):
    def test_derived_quantities(self):
        h = HomogeneityData.build([[0, 1], [1, 0]], [1, 0], [0, "2/3"], "2/3")
        self.assertEqual(h.mu, (Fraction(-1, 3), Fraction(1, 3)))
        self.assertEqual(h.eta_inv, ((0, 1), (1, 0)))
        self.assertEqual(recursion_factor(h, 2, 0), Fraction(11, 6))

    def test_rejects_asymmetric_eta(self):
        with self.assertRaises(UnsupportedInputError):
            HomogeneityData.build([[1, 2], [3, 1]], [1, 0], [0, 0])

    def test_rejects_inconsistent_delta(self):
        with self.assertRaises(UnsupportedInputError):
            HomogeneityData.build([[1]], [1], [0], 1)

    def test_rejects_charged_unit(self):
        with self.assertRaises(UnsupportedInputError):
            HomogeneityData.build([[0, 1], [1, 0]], [0, 1], [0, 1], 1)
        with self.assertRaises(UnsupportedInputError):
            HomogeneityData.build([[1]], [0], [0])

    def test_rejects_wrong_lengths(self):
        with self.assertRaises(UnsupportedInputError):
            HomogeneityData.build([[1]], [1], [0, 0])


class TestKdVOperator(DRHamTestCase):
    def test_homogeneity(self):
        self.assertTrue(check_homogeneity(kdv()))
        broken = kdv()._replace(g=kdv().g + u(kdv().ring) ** 4)
        self.assertFalse(check_homogeneity(broken))

    def test_k2_display(self):
        m = kdv()
        self.assertEqual(build_K2(m), kdv_k2_reference(m.ring))

    def test_forms_agree(self):
        for m in (kdv(), rspin3()):
            self.assertEqual(build_K2(m, "alternative"), build_K2(m, "defining"))
        with self.assertRaises(UnsupportedInputError):
            build_K2(kdv(), "other")

    def test_rspin3_display(self):
        m = rspin3()
        self.assertEqual(build_K2(m), rspin3_k2_reference(m.ring))

    def test_k1(self):
        m = kdv()
        self.assertEqual(k1(m), MatDiffOp.constant(m.ring, [[1]], 1))
        with self.assertRaises(UnsupportedInputError):
            k1(m.homogeneity)

    def test_casimir_and_seed(self):
        m = kdv()
        self.assertEqual(casimir(m, 1), u(m.ring))
        table = seed_table(m)
        self.assertEqual(table[(1, 0)], m.g.partial(0, 1, 0))
        self.assertIn((1, 1), table)


class TestLemma(unittest.TestCase):
    def test_schouten_and_commutator(self):
        for m in (kdv(), rspin3()):
            self.assertTrue(lemma_check(m))
            self.assertTrue(lemma_check(m, via="commutator"))

    def test_summands(self):
        self.assertEqual(lemma_split_check(kdv()), {1: True, 2: True, 3: True})

    def test_other_density(self):
        m = kdv()
        self.assertTrue(lemma_check(m, density=u(m.ring) * u(m.ring, 1, 1) ** 2))

    def test_representative_change(self):
        m = rspin3()
        ring = m.ring
        self.assertTrue(representative_change_check(m, u(ring, 1) * u(ring, 2, 1) * u(ring, 2)))
        self.assertTrue(representative_change_check(kdv(), u(kdv().ring) ** 3))

    def test_reduced_minus_one(self):
        self.assertTrue(d_minus_one_reduced_check(kdv()))
        self.assertTrue(d_minus_one_reduced_check(rspin3()))


class TestRecursion(DRHamTestCase):
    def test_factor(self):
        self.assertEqual(recursion_factor(kdv().homogeneity, 1, -1), Fraction(1, 2))

    def test_generate_and_check(self):
        m = kdv(4)
        k2 = build_K2(m)
        generated = recursion_generate(m, k2, 2)
        self.assertEqual(generated.failures, ())
        self.assertEqual(generated.entries[(1, -1)].origin, ORIGIN_CASIMIR)
        self.assertEqual(generated.entries[(1, 2)].origin, ORIGIN_GENERATED)
        self.assertFunctionalEqual(generated.entries[(1, 0)].density, m.g.partial(0, 1, 0))
        self.assertFunctionalEqual(generated.entries[(1, 1)].density, m.known()[(1, 1)])
        table = generated.densities()
        entries = recursion_check(m, k2, table, [(1, d) for d in (-1, 0, 1)])
        self.assertTrue(all(e.passed for e in entries))
        self.assertTrue(commutation_check(table, k1(m)))

    def test_wrong_operator_fails(self):
        m = kdv(4)
        k2 = kdv_k2_reference(m.ring) + MatDiffOp.constant(m.ring, [[1]], 3)
        entries = recursion_check(m, k2, seed_table(m), [(1, -1), (1, 0)])
        self.assertFalse(entries[1].passed)
        self.assertTrue(entries[1].residual)

    def test_generators_need_a_cap(self):
        m = cp1(2)
        with self.assertRaises(UnsupportedInputError):
            recursion_generate(m, build_K2(m), 0)

    def test_rspin3_hamiltonians_commute(self):
        m = rspin3()
        k2 = build_K2(m)
        generated = recursion_generate(m, k2, 1)
        self.assertEqual(generated.failures, ())
        table = generated.densities()
        self.assertIn((2, 1), table)
        self.assertTrue(commutation_check(table, k1(m)))
        self.assertTrue(commutation_check(table, k2))

    def test_noncommuting_pair(self):
        m = kdv()
        dx = MatDiffOp.constant(m.ring, [[1]], 1)
        table = {(1, 0): u(m.ring) ** 3, (1, 1): u(m.ring) * u(m.ring, 1, 2)}
        self.assertEqual(noncommuting_pair(table, dx), ((1, 1), (1, 0)))
        self.assertFalse(commutation_check(table, dx))
        self.assertIsNone(noncommuting_pair({(1, 0): u(m.ring) ** 3, (1, 1): u(m.ring) ** 2}, dx))

    def test_generation_reports_noncommuting_levels(self):
        m = kdv(4)
        with mock.patch("drham.drk2.noncommuting_pair", return_value=((1, 1), (1, 0))):
            generated = recursion_generate(m, build_K2(m), 1)
        failure, = generated.failures
        self.assertIsInstance(failure, RecursionFailure)
        self.assertEqual((failure.alpha, failure.d), (1, 1))
        self.assertIn("do not commute", failure.reason)


class TestGenusZero(DRHamTestCase):
    def test_structure_constants(self):
        m = kdv()
        self.assertEqual(structure_constants(m.F, m.homogeneity.eta)[(1, 1, 1)], 1)

    def test_table(self):
        m = kdv()
        ring = m.ring
        table = genus0_table(m, 1)
        self.assertEqual(table.hamiltonians[(1, -1)], u(ring))
        self.assertEqual(table.hamiltonians[(1, 0)], u(ring) ** 2 / 2)
        self.assertEqual(table.hamiltonians[(1, 1)], u(ring) ** 3 / 6)

    def test_k2(self):
        m = kdv()
        self.assertEqual(k2_genus0(m), kdv_k2_reference(m.ring).degree_part(0))

    def test_checks_pass(self):
        self.assertTrue(genus0_check(kdv(), 2).passed)
        self.assertTrue(genus0_check(rspin3(), 1).passed)

    def test_needs_potential(self):
        m = kdv()._replace(F=None)
        with self.assertRaises(UnsupportedInputError):
            genus0_table(m, 0)
