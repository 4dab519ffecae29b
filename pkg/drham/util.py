import functools
import math
import typing
from fractions import Fraction
import sympy
from drham.fault import SingularMetricError

Scalar = typing.Union[int, Fraction]
Matrix = typing.Tuple[typing.Tuple[Fraction, ...], ...]


def to_fraction(value: typing.Union[int, str, Fraction, sympy.Rational]) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def format_fraction(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def binomial(top: Scalar, k: int) -> Fraction:
    """
    Generalized binomial coefficient top*(top-1)*...*(top-k+1)/k!, valid for
    negative and rational tops.
    """
    if k < 0:
        return Fraction(0)
    result = Fraction(1)
    for i in range(k):
        result *= Fraction(top) - i
    return result / math.factorial(k)


def r_factorial(n: int, r: int) -> int:
    result = 1
    while n > 0:
        result *= n
        n -= r
    return result


def bernoulli(n: int) -> Fraction:
    if n == 1:
        return Fraction(-1, 2)
    return to_fraction(sympy.bernoulli(n))


def matrix(rows: typing.Iterable[typing.Iterable[typing.Union[int, str, Fraction]]]) -> Matrix:
    return tuple(tuple(to_fraction(x) for x in row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m)) if m else ()


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    cols = transpose(b)
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in cols) for row in a)


def is_symmetric(m: Matrix) -> bool:
    return m == transpose(m)


@functools.lru_cache(maxsize=None)
def invert(m: Matrix) -> Matrix:
    sym = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in m])
    if sym.det() == 0:
        raise SingularMetricError(f"matrix {[[format_fraction(x) for x in row] for row in m]} is singular")
    inv = sym.inv()
    return tuple(tuple(to_fraction(inv[i, j]) for j in range(len(m))) for i in range(len(m)))
