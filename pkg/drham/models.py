import logging
import math
import typing
from fractions import Fraction
import sympy
from drham.algebra import DiffPoly, ExtGen, Ring, U, dilation_D
from drham.constants import DEFAULT_GENUS
from drham.drk2 import CohFTModel, HomogeneityData, structure_constants
from drham.fault import UnsupportedInputError
from drham.operators import MatDiffOp, MiuraMap, ScalarDiffOp
from drham.util import Matrix, bernoulli, matrix, to_fraction

log = logging.getLogger(__name__)

z = sympy.Symbol('z')

# (coefficient, eps power, factors); a factor (alpha, i) is one power of u^alpha_i
Term = typing.Tuple[typing.Union[int, str, Fraction], int, typing.Tuple[typing.Tuple[int, int], ...]]

CP1_GENERATOR = ExtGen("E", 2, Fraction(1))


def density(ring: Ring, *terms: Term) -> DiffPoly:
    total = DiffPoly.zero(ring)
    for coeff, eps, factors in terms:
        piece = DiffPoly.eps(ring, eps) if eps else DiffPoly.one(ring)
        for alpha, order in factors:
            piece = piece * DiffPoly.field(ring, alpha, order)
        total = total + piece.scale(to_fraction(coeff))
    return total


def operator(ring: Ring, coeffs: typing.Mapping[int, DiffPoly]) -> ScalarDiffOp:
    return ScalarDiffOp(ring, coeffs)


def skew_complete(ring: Ring, upper: typing.Mapping[typing.Tuple[int, int], ScalarDiffOp]) -> MatDiffOp:
    """Fill K^(ba) = -(K^(ab))^dagger for the entries not given."""
    def entry(a: int, b: int) -> ScalarDiffOp:
        if (a, b) in upper:
            return upper[(a, b)]
        if (b, a) in upper:
            return -upper[(b, a)].adjoint()
        return ScalarDiffOp.zero(ring)
    return MatDiffOp.from_function(ring, entry)


class ShiftSeries:
    """
    A power series in z = eps*dx truncated at z^order. Constant-coefficient
    operators commute, so composition is the product of series.
    """
    __slots__ = ('coefficients', 'order')

    def __init__(self, coefficients: typing.Mapping[int, Fraction], order: int) -> None:
        self.order = order
        self.coefficients = {k: Fraction(c) for k, c in coefficients.items() if c and k <= order}

    @classmethod
    def from_expression(cls, expr: sympy.Expr, order: int) -> 'ShiftSeries':
        expansion = sympy.series(expr, z, 0, order + 1).removeO()
        poly = sympy.Poly(sympy.expand(expansion), z)
        return cls({k: to_fraction(c) for (k,), c in poly.terms()}, order)

    @classmethod
    def shift(cls, a: typing.Union[int, Fraction], order: int) -> 'ShiftSeries':
        """e^(a*eps*dx)"""
        a = Fraction(a)
        return cls.from_expression(sympy.exp(sympy.Rational(a.numerator, a.denominator) * z), order)

    @classmethod
    def S(cls, order: int) -> 'ShiftSeries':
        return cls.from_expression((sympy.exp(z / 2) - sympy.exp(-z / 2)) / z, order)

    @classmethod
    def S_tilde(cls, order: int) -> 'ShiftSeries':
        return cls.from_expression((sympy.exp(z / 2) + sympy.exp(-z / 2)) / 2, order)

    @classmethod
    def S_inverse(cls, order: int) -> 'ShiftSeries':
        return cls.from_expression(z / (sympy.exp(z / 2) - sympy.exp(-z / 2)), order)

    def coeff(self, k: int) -> Fraction:
        return self.coefficients.get(k, Fraction(0))

    def __eq__(self, other: typing.Any) -> bool:
        if not isinstance(other, ShiftSeries):
            return NotImplemented
        return self.order == other.order and self.coefficients == other.coefficients

    __hash__ = None  # type: ignore

    def __add__(self, other: 'ShiftSeries') -> 'ShiftSeries':
        order = min(self.order, other.order)
        keys = set(self.coefficients) | set(other.coefficients)
        return ShiftSeries({k: self.coeff(k) + other.coeff(k) for k in keys}, order)

    def __sub__(self, other: 'ShiftSeries') -> 'ShiftSeries':
        return self + other.scale(-1)

    def scale(self, c: typing.Union[int, Fraction]) -> 'ShiftSeries':
        return ShiftSeries({k: v * c for k, v in self.coefficients.items()}, self.order)

    def __mul__(self, other: 'ShiftSeries') -> 'ShiftSeries':
        order = min(self.order, other.order)
        out: typing.Dict[int, Fraction] = {}
        for i, a in self.coefficients.items():
            for j, b in other.coefficients.items():
                if i + j <= order:
                    out[i + j] = out.get(i + j, Fraction(0)) + a * b
        return ShiftSeries(out, order)

    def to_operator(self, ring: Ring, extra_dx: int = 0) -> ScalarDiffOp:
        """sum_k c_k eps^k dx^(k + extra_dx)"""
        return ScalarDiffOp(ring, {
            k + extra_dx: DiffPoly.eps(ring, k).scale(c) for k, c in self.coefficients.items()
        })

    def apply_to_field(self, ring: Ring, alpha: int) -> DiffPoly:
        """sum_k c_k eps^k u^alpha_k"""
        total = DiffPoly.zero(ring)
        for k, c in self.coefficients.items():
            total = total + (DiffPoly.eps(ring, k) * DiffPoly.field(ring, alpha, k)).scale(c)
        return total

    def __repr__(self) -> str:
        return f"ShiftSeries({dict(sorted(self.coefficients.items()))}, order={self.order})"


def exp_of_series_field(ring: Ring, series: ShiftSeries, alpha: int, generator: str) -> DiffPoly:
    """exp(series(eps*dx) u^alpha) for a series with constant term 1, as E * exp(remainder)."""
    if series.coeff(0) != 1:
        raise UnsupportedInputError("the exponent must start with u^alpha")
    remainder = series.apply_to_field(ring, alpha) - DiffPoly.field(ring, alpha)
    result = DiffPoly.gen(ring, generator)
    return result * remainder.exp_nilpotent() if remainder else result


def divide_by_eps(k: ScalarDiffOp, target: Ring) -> ScalarDiffOp:
    """eps^-1 K for K without eps-free terms, computed one order up and moved to target."""
    def lower(a: DiffPoly) -> DiffPoly:
        if a.eps_part(0):
            raise UnsupportedInputError("eps^-1 of an operator with an eps-free part")
        return DiffPoly(target, {m._replace(eps=m.eps - 1): c for m, c in a.terms.items()})
    return k.map_coefficients(lower, target)


# homogeneity data


def trivial_homogeneity() -> HomogeneityData:
    return HomogeneityData.build([[1]], [1], [0], 0)


def rspin_homogeneity(r: int) -> HomogeneityData:
    n = r - 1
    return HomogeneityData.build(
        [[int(a + b == r) for b in range(1, n + 1)] for a in range(1, n + 1)],
        [1] + [0] * (n - 1),
        [Fraction(a - 1, r) for a in range(1, n + 1)],
        Fraction(r - 2, r)
    )


def cp1_homogeneity() -> HomogeneityData:
    return HomogeneityData.build([[0, 1], [1, 0]], [1, 0], [0, 1], 1, r=[0, 2], A=[[2, 0], [0, 2]])


def default_max_eps(genus: int = DEFAULT_GENUS) -> int:
    return 2 * genus


def _with_dilation(m: CohFTModel) -> CohFTModel:
    """Ship g_(1,1) = (D - 2)g."""
    return m._replace(hamiltonians=(((1, 1), dilation_D(m.g) - m.g.scale(2)),))


def kdv(max_eps: typing.Optional[int] = None) -> CohFTModel:
    ring = Ring(1, max_eps=max_eps)
    g = density(ring, ("1/6", 0, ((1, 0),) * 3), ("1/48", 2, ((1, 0), (1, 2))))
    f = density(ring, ("1/6", 0, ((1, 0),) * 3))
    return _with_dilation(CohFTModel("kdv", trivial_homogeneity(), g, f))


def rspin3(max_eps: typing.Optional[int] = None) -> CohFTModel:
    ring = Ring(2, max_eps=max_eps)
    f = density(ring, ("1/2", 0, ((1, 0), (1, 0), (2, 0))), ("1/72", 0, ((2, 0),) * 4))
    g = f + density(
        ring,
        ("1/144", 2, ((2, 0), (2, 0), (2, 2))),
        ("1/24", 2, ((1, 0), (1, 2))),
        ("1/1728", 4, ((2, 0), (2, 4))),
    )
    return _with_dilation(CohFTModel("3spin", rspin_homogeneity(3), g, f))


def rspin4(max_eps: typing.Optional[int] = None) -> CohFTModel:
    ring = Ring(3, max_eps=max_eps)
    f = density(
        ring,
        ("1/2", 0, ((1, 0), (1, 0), (3, 0))),
        ("1/2", 0, ((1, 0), (2, 0), (2, 0))),
        ("1/16", 0, ((2, 0), (2, 0), (3, 0), (3, 0))),
        ("1/960", 0, ((3, 0),) * 5),
    )
    g = f + density(
        ring,
        ("1/16", 2, ((1, 0), (1, 2))),
        ("1/192", 2, ((3, 2), (2, 0), (2, 0))),
        ("1/48", 2, ((3, 0), (2, 0), (2, 2))),
        ("1/192", 2, ((1, 2), (3, 0), (3, 0))),
        ("1/768", 2, ((3, 0), (3, 0), (3, 0), (3, 2))),
        ("1/640", 4, ((2, 0), (2, 4))),
        ("1/4096", 4, ((3, 0), (3, 0), (3, 4))),
        ("3/2560", 4, ((1, 0), (3, 4))),
        ("1/49152", 6, ((3, 0), (3, 6))),
    )
    return _with_dilation(CohFTModel("4spin", rspin_homogeneity(4), g, f))


def cp1_ring(max_eps: int) -> Ring:
    return Ring(2, generators=(CP1_GENERATOR,), max_eps=max_eps)


def cp1_exponential(ring: Ring) -> DiffPoly:
    """e^(S(eps dx) u^2)"""
    return exp_of_series_field(ring, ShiftSeries.S(ring.max_eps), 2, CP1_GENERATOR.name)


def cp1(max_eps: int = default_max_eps()) -> CohFTModel:
    """
    g = int ((u^1)^2 u^2/2 + sum_(g>=1) eps^2g B_2g/(2g (2g)!) u^1 u^1_2g + e^(S(eps dx) u^2) - u^2 - (u^2)^2/2) dx,
    truncated at eps^max_eps.
    """
    if max_eps is None or max_eps < 2:
        raise UnsupportedInputError("the CP1 model needs an eps truncation of at least 2")
    ring = cp1_ring(max_eps)
    u1, u2 = DiffPoly.field(ring, 1), DiffPoly.field(ring, 2)
    polynomial = (u1 * u1 * u2).scale(Fraction(1, 2)) - u2 - (u2 * u2).scale(Fraction(1, 2))
    f = polynomial + DiffPoly.gen(ring, CP1_GENERATOR.name)
    bernoulli_tail = DiffPoly.zero(ring)
    for genus in range(1, max_eps // 2 + 1):
        c = bernoulli(2 * genus) / (2 * genus * math.factorial(2 * genus))
        bernoulli_tail = bernoulli_tail + (DiffPoly.eps(ring, 2 * genus) * u1 * DiffPoly.field(ring, 1, 2 * genus)).scale(c)
    g = polynomial + bernoulli_tail + cp1_exponential(ring)
    return _with_dilation(CohFTModel("cp1", cp1_homogeneity(), g, f, exact=False))


BUILTINS: typing.Dict[str, typing.Callable[..., CohFTModel]] = {
    'trivial': kdv,
    'kdv': kdv,
    '3spin': rspin3,
    '4spin': rspin4,
    'cp1': cp1,
}


def builtin(name: str, max_eps: typing.Optional[int] = None) -> CohFTModel:
    """
    A builtin CohFT model by name. The extended Toda hierarchy is not a model
    but a pair of operators on the CP^1 ring and is built by toda_pair.
    """
    if name not in BUILTINS:
        raise UnsupportedInputError(f"unknown builtin model {name}, expected one of {sorted(BUILTINS)}")
    log.debug("building the %s model truncated at eps^%s", name, max_eps)
    if name == 'cp1':
        return cp1(max_eps if max_eps is not None else default_max_eps())
    return BUILTINS[name](max_eps)


# displayed reference data


def kdv_k2_reference(ring: Ring) -> MatDiffOp:
    """u dx + 1/2 u_x + eps^2/8 dx^3"""
    return MatDiffOp(ring, [[operator(ring, {
        1: DiffPoly.field(ring, 1),
        0: DiffPoly.field(ring, 1, 1).scale(Fraction(1, 2)),
        3: DiffPoly.eps(ring, 2).scale(Fraction(1, 8)),
    })]])


def rspin3_k2_reference(ring: Ring) -> MatDiffOp:
    k11 = operator(ring, {
        1: density(ring, ("2/9", 0, ((2, 0), (2, 0))), ("1/12", 2, ((2, 2),))),
        0: density(ring, ("2/9", 0, ((2, 0), (2, 1))), ("1/54", 2, ((2, 3),))),
        3: density(ring, ("5/54", 2, ((2, 0),))),
        2: density(ring, ("5/36", 2, ((2, 1),))),
        5: density(ring, ("1/162", 4, ())),
    })
    k12 = operator(ring, {1: density(ring, (1, 0, ((1, 0),))), 0: density(ring, ("1/3", 0, ((1, 1),)))})
    k21 = operator(ring, {1: density(ring, (1, 0, ((1, 0),))), 0: density(ring, ("2/3", 0, ((1, 1),)))})
    k22 = operator(ring, {
        1: density(ring, ("2/3", 0, ((2, 0),))),
        0: density(ring, ("1/3", 0, ((2, 1),))),
        3: density(ring, ("2/9", 2, ())),
    })
    return MatDiffOp(ring, [[k11, k12], [k21, k22]])


def rspin4_k2_reference(ring: Ring) -> MatDiffOp:
    """The six displayed entries, completed by skew-symmetry."""
    k11 = operator(ring, {
        1: density(ring, ("1/32", 0, ((3, 0),) * 3), ("3/16", 0, ((2, 0), (2, 0))),
                   ("5/128", 2, ((3, 1), (3, 1))), ("13/256", 2, ((3, 0), (3, 2))), ("1/24", 2, ((1, 2),)),
                   ("47/9216", 4, ((3, 4),))),
        0: density(ring, ("3/16", 0, ((2, 0), (2, 1))), ("3/64", 0, ((3, 0), (3, 0), (3, 1))),
                   ("3/128", 2, ((3, 1), (3, 2))), ("1/64", 2, ((1, 3),)), ("3/256", 2, ((3, 0), (3, 3))),
                   ("1/1536", 4, ((3, 5),))),
        3: density(ring, ("7/256", 2, ((3, 0), (3, 0))), ("1/48", 2, ((1, 0),)), ("91/4608", 4, ((3, 2),))),
        2: density(ring, ("1/32", 2, ((1, 1),)), ("21/256", 2, ((3, 0), (3, 1))), ("133/9216", 4, ((3, 3),))),
        5: density(ring, ("7/1152", 4, ((3, 0),))),
        4: density(ring, ("35/2304", 4, ((3, 1),))),
        7: density(ring, ("17/36864", 6, ())),
    })
    k12 = operator(ring, {
        1: density(ring, ("5/16", 0, ((2, 0), (3, 0))), ("17/192", 2, ((2, 2),))),
        0: density(ring, ("1/8", 0, ((3, 0), (2, 1))), ("1/8", 0, ((2, 0), (3, 1))), ("1/48", 2, ((2, 3),))),
        3: density(ring, ("7/64", 2, ((2, 0),))),
        2: density(ring, ("7/48", 2, ((2, 1),))),
    })
    k13 = operator(ring, {
        1: density(ring, (1, 0, ((1, 0),))),
        0: density(ring, ("1/4", 0, ((1, 1),))),
        3: density(ring, ("7/192", 2, ((3, 0),))),
        2: density(ring, ("7/192", 2, ((3, 1),))),
        5: density(ring, ("7/768", 4, ())),
    })
    k22 = operator(ring, {
        1: density(ring, ("1/8", 0, ((3, 0), (3, 0))), (1, 0, ((1, 0),)), ("1/12", 2, ((3, 2),))),
        0: density(ring, ("1/2", 0, ((1, 1),)), ("1/8", 0, ((3, 0), (3, 1))), ("1/96", 2, ((3, 3),))),
        3: density(ring, ("1/8", 2, ((3, 0),))),
        2: density(ring, ("3/16", 2, ((3, 1),))),
        5: density(ring, ("1/64", 4, ())),
    })
    k23 = operator(ring, {1: density(ring, ("3/4", 0, ((2, 0),))), 0: density(ring, ("1/4", 0, ((2, 1),)))})
    k33 = operator(ring, {
        1: density(ring, ("1/2", 0, ((3, 0),))),
        0: density(ring, ("1/4", 0, ((3, 1),))),
        3: density(ring, ("5/16", 2, ())),
    })
    return skew_complete(ring, {(1, 1): k11, (1, 2): k12, (1, 3): k13, (2, 2): k22, (2, 3): k23, (3, 3): k33})


def bernoulli_operator(ring: Ring) -> ScalarDiffOp:
    """sum_(g>=0) eps^2g 2 B_2g/(2g)! dx^(2g+1)"""
    terms = {}
    for genus in range(0, (ring.max_eps or 0) // 2 + 1):
        terms[2 * genus + 1] = DiffPoly.eps(ring, 2 * genus).scale(2 * bernoulli(2 * genus) / math.factorial(2 * genus))
    return ScalarDiffOp(ring, terms)


def coth_operator(ring: Ring) -> ScalarDiffOp:
    """(e^(eps dx) + 1)/(e^(eps dx) - 1) eps dx^2"""
    series = ShiftSeries.from_expression((sympy.exp(z) + 1) / (sympy.exp(z) - 1) * z, ring.max_eps or 0)
    return series.to_operator(ring, 1)


def cp1_k2_reference(ring: Ring) -> MatDiffOp:
    """
    [[S dx o e^(S u^2) S~ + S~ o e^(S u^2) S dx, u^1 dx],
     [dx o u^1, sum eps^2g 2B_2g/(2g)! dx^(2g+1)]]
    """
    order = ring.max_eps
    s_dx = ShiftSeries.S(order).to_operator(ring, 1)
    st_op = ShiftSeries.S_tilde(order).to_operator(ring)
    exp_s = ScalarDiffOp.multiplication(cp1_exponential(ring))
    u1 = DiffPoly.field(ring, 1)
    k11 = s_dx.compose(exp_s).compose(st_op) + st_op.compose(exp_s).compose(s_dx)
    k12 = ScalarDiffOp(ring, {1: u1})
    k21 = ScalarDiffOp(ring, {1: u1, 0: u1.dx()})
    return MatDiffOp(ring, [[k11, k12], [k21, bernoulli_operator(ring)]])


def cp1_k11_shift_form(ring: Ring) -> ScalarDiffOp:
    """eps^-1 (e^(((e^z - 1)/z) u^2) e^(eps dx) - e^(((1 - e^-z)/z) u^2) e^(-eps dx))"""
    order = ring.max_eps + 1
    wide = ring.truncated(order)
    plus = exp_of_series_field(wide, ShiftSeries.from_expression((sympy.exp(z) - 1) / z, order), 2,
                               CP1_GENERATOR.name)
    minus = exp_of_series_field(wide, ShiftSeries.from_expression((1 - sympy.exp(-z)) / z, order), 2,
                                CP1_GENERATOR.name)
    total = ShiftSeries.shift(1, order).to_operator(wide).left(plus) \
        - ShiftSeries.shift(-1, order).to_operator(wide).left(minus)
    return divide_by_eps(total, ring)


def cp1_variational(ring: Ring) -> typing.Tuple[DiffPoly, DiffPoly]:
    """
    dg/du^1 = u^1 u^2 + sum_(g>=1) eps^2g B_2g/(g (2g)!) u^1_2g,
    dg/du^2 = (u^1)^2/2 + S(eps dx) e^(S(eps dx) u^2) - 1 - u^2
    """
    u1, u2 = DiffPoly.field(ring, 1), DiffPoly.field(ring, 2)
    first = u1 * u2
    for genus in range(1, ring.max_eps // 2 + 1):
        c = bernoulli(2 * genus) / (genus * math.factorial(2 * genus))
        first = first + (DiffPoly.eps(ring, 2 * genus) * DiffPoly.field(ring, 1, 2 * genus)).scale(c)
    second = (u1 * u1).scale(Fraction(1, 2)) - 1 - u2 \
        + ShiftSeries.S(ring.max_eps).to_operator(ring).apply(cp1_exponential(ring))
    return first, second


def cp1_g11_display(ring: Ring) -> DiffPoly:
    """(u^1)^2 u^2/2 + sum eps^2g B_2g/(2g)! u^1 u^1_2g + (S~(eps dx) u^2 - 2) e^(S u^2) + u^2"""
    u1, u2 = DiffPoly.field(ring, 1), DiffPoly.field(ring, 2)
    total = (u1 * u1 * u2).scale(Fraction(1, 2)) + u2
    for genus in range(1, ring.max_eps // 2 + 1):
        c = bernoulli(2 * genus) / math.factorial(2 * genus)
        total = total + (DiffPoly.eps(ring, 2 * genus) * u1 * DiffPoly.field(ring, 1, 2 * genus)).scale(c)
    tilde = ShiftSeries.S_tilde(ring.max_eps).apply_to_field(ring, 2)
    return total + (tilde - 2) * cp1_exponential(ring)


# extended Toda


class TodaPair(typing.NamedTuple):
    k1: MatDiffOp
    k2: MatDiffOp
    miura: MiuraMap
    inverse: MiuraMap


def toda_pair(max_eps: int = default_max_eps()) -> TodaPair:
    """
    K1 = [[0, eps^-1 (e^(eps dx) - 1)], [eps^-1 (1 - e^(-eps dx)), 0]],
    K2 = [[eps^-1 (e^(eps dx) o e^(v^2) - e^(v^2) e^(-eps dx)), eps^-1 v^1 (e^(eps dx) - 1)],
          [eps^-1 (1 - e^(-eps dx)) o v^1, eps^-1 (e^(eps dx) - e^(-eps dx))]]
    with the Miura u^1 = e^(-eps dx/2) v^1, u^2 = S(eps dx)^-1 v^2 onto the DR variables.
    """
    ring = cp1_ring(max_eps)
    order = max_eps + 1
    forward = ShiftSeries.from_expression((sympy.exp(z) - 1) / z, order).to_operator(ring, 1)
    backward = ShiftSeries.from_expression((1 - sympy.exp(-z)) / z, order).to_operator(ring, 1)
    zero = ScalarDiffOp.zero(ring)
    k1 = MatDiffOp(ring, [[zero, forward], [backward, zero]])
    wide = ring.truncated(order)
    exp_v2 = ScalarDiffOp.multiplication(DiffPoly.gen(wide, CP1_GENERATOR.name))
    k11 = divide_by_eps(
        ShiftSeries.shift(1, order).to_operator(wide).compose(exp_v2)
        - exp_v2.compose(ShiftSeries.shift(-1, order).to_operator(wide)), ring
    )
    v1 = DiffPoly.field(ring, 1)
    k12 = forward.left(v1)
    k21 = backward.compose(ScalarDiffOp.multiplication(v1))
    k22 = ShiftSeries.from_expression((sympy.exp(z) - sympy.exp(-z)) / z, order).to_operator(ring, 1)
    k2 = MatDiffOp(ring, [[k11, k12], [k21, k22]])
    miura = MiuraMap([
        ShiftSeries.shift(Fraction(-1, 2), max_eps).apply_to_field(ring, 1),
        ShiftSeries.S_inverse(max_eps).apply_to_field(ring, 2),
    ])
    inverse = MiuraMap([
        ShiftSeries.shift(Fraction(1, 2), max_eps).apply_to_field(ring, 1),
        ShiftSeries.S(max_eps).apply_to_field(ring, 2),
    ])
    return TodaPair(k1, k2, miura, inverse)


# generic genus <= 1


def genus1_g_from_potential(f: DiffPoly, eta: Matrix, target: typing.Optional[Ring] = None) -> DiffPoly:
    """g = F - eps^2/48 c^t_(tx) c^x_(ab) u^a_x u^b_x + O(eps^4)"""
    if f.has_thetas() or any(m.eps or any(v.order for v, _ in m.jets) for m in f.terms):
        raise UnsupportedInputError("the genus 0 potential must be a function of u only")
    target = target or f.ring.truncated(2 if f.ring.max_eps is None else min(2, f.ring.max_eps))
    f = f.rehome(target)
    c = structure_constants(f, matrix(eta))
    ring = f.ring
    trace = {xi: sum((c[(t, t, xi)] for t in ring.fields), DiffPoly.zero(ring)) for xi in ring.fields}
    correction = DiffPoly.zero(ring)
    for a in ring.fields:
        for b in ring.fields:
            coeff = sum((trace[xi] * c[(xi, a, b)] for xi in ring.fields), DiffPoly.zero(ring))
            if coeff:
                correction = correction + coeff * DiffPoly.field(ring, a, 1) * DiffPoly.field(ring, b, 1)
    return f - (DiffPoly.eps(ring, 2) * correction).scale(Fraction(1, 48))
