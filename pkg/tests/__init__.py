import typing
import unittest
from fractions import Fraction
from hypothesis import HealthCheck, settings
from drham.algebra import DiffPoly, Ring

settings.register_profile(
    "drham", deadline=None, derandomize=True, max_examples=25, database=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large]
)
settings.load_profile("drham")

R1 = Ring(1)
R2 = Ring(2)
R1_EPS4 = Ring(1, max_eps=4)


def u(ring: Ring, alpha: int = 1, order: int = 0, power: int = 1) -> DiffPoly:
    return DiffPoly.field(ring, alpha, order, power)


def c(ring: Ring, value: typing.Union[int, str, Fraction]) -> DiffPoly:
    return DiffPoly.constant(ring, Fraction(value))


def eps(ring: Ring, power: int = 1) -> DiffPoly:
    return DiffPoly.eps(ring, power)


class DRHamTestCase(unittest.TestCase):
    maxDiff = None

    def assertFunctionalEqual(self, a: DiffPoly, b: DiffPoly) -> None:
        from drham.variational import functional_equal
        if not functional_equal(a, b):
            self.fail(f"int {a} dx != int {b} dx")
