"""
Hypothesis strategies for random differential polynomials, operators,
multivectors and homogeneity data, shared by the property suites and the tests.
"""
import typing
from fractions import Fraction
from hypothesis import strategies as st
from drham.algebra import DiffPoly, Ring
from drham.drk2 import HomogeneityData
from drham.operators import MatDiffOp, MiuraMap, ScalarDiffOp
from drham.variational import MultiVector


def rationals(max_numerator: int = 5, max_denominator: int = 3, nonzero: bool = False) -> st.SearchStrategy:
    numerators = st.integers(-max_numerator, max_numerator)
    if nonzero:
        numerators = numerators.filter(bool)
    return st.builds(Fraction, numerators, st.integers(1, max_denominator))


def rings(max_n: int = 2, max_eps: typing.Optional[int] = None) -> st.SearchStrategy:
    return st.integers(1, max_n).map(lambda n: Ring(n, max_eps=max_eps))


@st.composite
def monomials(draw: typing.Callable, ring: Ring, max_order: int = 2, max_factors: int = 3, max_eps: int = 0,
              thetas: int = 0) -> DiffPoly:
    """A single product of jet variables with a rational coefficient, times thetas_count thetas."""
    term = DiffPoly.constant(ring, draw(rationals(nonzero=True)))
    for _ in range(draw(st.integers(0, max_factors))):
        term = term * DiffPoly.field(ring, draw(st.integers(1, ring.n)), draw(st.integers(0, max_order)))
    eps = draw(st.integers(0, max_eps))
    if eps:
        term = term * DiffPoly.eps(ring, eps)
    for _ in range(thetas):
        term = term * DiffPoly.theta(ring, draw(st.integers(1, ring.n)), draw(st.integers(0, max_order)))
    return term


@st.composite
def diff_polys(draw: typing.Callable, ring: Ring, max_terms: int = 4, max_order: int = 2, max_factors: int = 3,
               max_eps: int = 0, thetas: int = 0) -> DiffPoly:
    total = DiffPoly.zero(ring)
    for _ in range(draw(st.integers(0, max_terms))):
        total = total + draw(monomials(ring, max_order, max_factors, max_eps, thetas))
    return total


@st.composite
def nonconstant_polys(draw: typing.Callable, ring: Ring, max_terms: int = 4, max_order: int = 2,
                      max_factors: int = 3) -> DiffPoly:
    """Densities with every term of u-degree at least one."""
    total = DiffPoly.zero(ring)
    for _ in range(draw(st.integers(1, max_terms))):
        term = draw(monomials(ring, max_order, max_factors))
        total = total + term * DiffPoly.field(ring, draw(st.integers(1, ring.n)), draw(st.integers(0, max_order)))
    return total


def multivectors(ring: Ring, degree: int, max_terms: int = 3, max_order: int = 2) -> st.SearchStrategy:
    return diff_polys(ring, max_terms=max_terms, max_order=max_order, max_factors=2, thetas=degree).map(MultiVector)


@st.composite
def scalar_ops(draw: typing.Callable, ring: Ring, max_order: int = 3, max_terms: int = 2) -> ScalarDiffOp:
    return ScalarDiffOp(ring, {
        s: draw(diff_polys(ring, max_terms=max_terms, max_order=2, max_factors=2)) for s in range(max_order + 1)
    })


@st.composite
def mat_ops(draw: typing.Callable, ring: Ring, max_order: int = 2) -> MatDiffOp:
    return MatDiffOp(ring, [[draw(scalar_ops(ring, max_order)) for _ in ring.fields] for _ in ring.fields])


def skew_ops(ring: Ring, max_order: int = 2) -> st.SearchStrategy:
    """K - K^dagger"""
    return mat_ops(ring, max_order).map(lambda k: k - k.adjoint())


@st.composite
def homogeneity_data(draw: typing.Callable, n: int) -> HomogeneityData:
    """
    Antidiagonal eta with q_a + q_(n+1-a) = delta, so that mu eta + eta mu = 0,
    the unit along e_1 with q_1 = 0 and a random symmetric A.
    """
    delta = draw(rationals(4, 3))
    q: typing.List[Fraction] = [Fraction(0)] * n
    q[n - 1] = delta
    for a in range(1, n // 2):
        q[a] = draw(rationals(4, 3))
        q[n - 1 - a] = delta - q[a]
    if n % 2 and n > 1:
        q[n // 2] = delta / 2
    if n == 1:
        delta = Fraction(0)
        q = [Fraction(0)]
    a_matrix = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            a_matrix[i][j] = a_matrix[j][i] = draw(rationals(3, 2))
    eta = [[int(i + j == n - 1) for j in range(n)] for i in range(n)]
    return HomogeneityData.build(eta, [1] + [0] * (n - 1), q, delta, A=a_matrix)


@st.composite
def miura_maps(draw: typing.Callable, ring: Ring, max_order: int = 2) -> MiuraMap:
    """u^a + eps * P^a(u) in an eps-truncated ring, invertible by iteration."""
    if ring.max_eps is None:
        raise ValueError("random Miura maps need an eps-truncated ring")
    images = []
    for a in ring.fields:
        perturbation = draw(diff_polys(ring, max_terms=2, max_order=max_order, max_factors=2, max_eps=ring.max_eps))
        images.append(DiffPoly.field(ring, a) + DiffPoly.eps(ring) * perturbation)
    return MiuraMap(images)
