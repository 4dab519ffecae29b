"""
Named property suites run from the command line. Each suite is a list of
hypothesis-driven properties; a run is deterministic for a fixed seed and
reports the shrunk counterexample of every failing property.
"""
import contextlib
import logging
import time
import typing
from fractions import Fraction
from unittest import mock
from hypothesis import HealthCheck, given, seed as hypothesis_seed, settings, strategies as st
from hypothesis.reporting import with_reporter
from drham import strategies
from drham.algebra import DiffPoly, Ring, dilation_D, euler_Ehat
from drham.constants import MUTATIONS, SCOPE_EXACT, VERDICT_ERROR, VERDICT_FAIL, VERDICT_PASS, eps_scope
from drham.drk2 import CohFTModel, lemma_check
from drham.fault import ConfigurationError
from drham.gd import PseudoDiffOp, pdo_root
from drham.models import ShiftSeries
from drham.multivector import bivector_of_op, commutator_VQ_BK, schouten, vector_field
from drham.operators import MatDiffOp, ScalarDiffOp, miura_op, poisson_bracket
from drham.serialization.model import dumps_model, loads_model
from drham.serialization.report import CheckResult
from drham.variational import L_op, MultiVector, antiderivative, functional_equal, functional_from_variational, \
    higher_euler, omega_hat, var_derivative

log = logging.getLogger(__name__)


class Property(typing.NamedTuple):
    name: str
    strategy: st.SearchStrategy
    test: typing.Callable[..., None]
    scope: str = SCOPE_EXACT


def _ring_and(inner: typing.Callable[[Ring], st.SearchStrategy], max_n: int = 2,
              max_eps: typing.Optional[int] = None) -> st.SearchStrategy:
    return strategies.rings(max_n, max_eps).flatmap(lambda ring: st.tuples(st.just(ring), inner(ring)))


# algebra


def _leibniz(args: typing.Tuple[Ring, typing.Tuple[DiffPoly, DiffPoly]]) -> None:
    _, (p, q) = args
    assert (p * q).dx() == p.dx() * q + p * q.dx(), f"dx(pq) != dx(p) q + p dx(q) for p = {p}, q = {q}"


def _associative(args: typing.Tuple[Ring, typing.Tuple[DiffPoly, DiffPoly, DiffPoly]]) -> None:
    _, (p, q, r) = args
    assert (p * q) * r == p * (q * r), f"product is not associative on {p}, {q}, {r}"


def _odd_square(args: typing.Tuple[Ring, DiffPoly]) -> None:
    _, p = args
    assert not p * p, f"an odd element squares to {p * p}"


def _supercommutative(args: typing.Tuple[Ring, typing.Tuple[int, int, DiffPoly, DiffPoly]]) -> None:
    _, (p, q, a, b) = args
    sign = -1 if (p * q) % 2 else 1
    assert a * b == (b * a).scale(sign), f"ab != (-1)^({p}{q}) ba for a = {a}, b = {b}"


def _supercommutative_cases(ring: Ring) -> st.SearchStrategy:
    return st.tuples(st.integers(0, 3), st.integers(0, 3)).flatmap(
        lambda pq: st.tuples(st.just(pq[0]), st.just(pq[1]),
                             strategies.monomials(ring, thetas=pq[0]), strategies.monomials(ring, thetas=pq[1]))
    )


def _euler_derivations(args: typing.Tuple[typing.Any, DiffPoly, DiffPoly]) -> None:
    homogeneity, a, b = args
    for name, op in (("E-hat", lambda p: euler_Ehat(p, homogeneity)), ("D", dilation_D)):
        assert op(a * b) == op(a) * b + a * op(b), f"{name}(ab) != {name}(a) b + a {name}(b) for a = {a}, b = {b}"


def _euler_derivation_cases() -> st.SearchStrategy:
    def build(n: int) -> st.SearchStrategy:
        ring = Ring(n)
        return st.tuples(strategies.homogeneity_data(n), strategies.diff_polys(ring, 3, max_eps=2),
                         strategies.diff_polys(ring, 3, max_eps=2))
    return st.integers(1, 2).flatmap(build)


def _truncation_homomorphism(args: typing.Tuple[Ring, typing.Tuple[int, DiffPoly, DiffPoly]]) -> None:
    _, (k, a, b) = args
    left = (a * b).eps_truncate(k)
    right = (a.eps_truncate(k) * b.eps_truncate(k)).eps_truncate(k)
    assert left == right, f"truncating {a} * {b} at eps^{k} depends on the order"


def _truncation_cases(ring: Ring) -> st.SearchStrategy:
    return st.tuples(st.integers(0, 3), strategies.diff_polys(ring, 3, max_eps=3),
                     strategies.diff_polys(ring, 3, max_eps=3))


def _dx_grading(args: typing.Tuple[Ring, DiffPoly]) -> None:
    _, m = args
    derivative = m.dx()
    if not derivative:
        return
    assert derivative.standard_degree == m.standard_degree + 1, f"dx({m}) = {derivative} is not of degree +1"
    assert derivative.theta_degree == m.theta_degree, f"dx({m}) = {derivative} changes the theta degree"


def _dx_grading_cases(ring: Ring) -> st.SearchStrategy:
    return st.integers(0, 2).flatmap(lambda t: strategies.monomials(ring, max_eps=2, thetas=t))


ALGEBRA = [
    Property("leibniz", _ring_and(lambda r: st.tuples(strategies.diff_polys(r), strategies.diff_polys(r))), _leibniz),
    Property("associative", _ring_and(lambda r: st.tuples(
        strategies.diff_polys(r, 3), strategies.diff_polys(r, 3), strategies.diff_polys(r, 3))), _associative),
    Property("odd square", _ring_and(lambda r: strategies.monomials(r, thetas=1)), _odd_square),
    Property("supercommutative", _ring_and(_supercommutative_cases), _supercommutative),
    Property("euler derivations", _euler_derivation_cases(), _euler_derivations),
    Property("eps truncation", _ring_and(_truncation_cases), _truncation_homomorphism),
    Property("dx grading", _ring_and(_dx_grading_cases), _dx_grading),
]


# variational


def _kills_derivatives(args: typing.Tuple[Ring, DiffPoly]) -> None:
    ring, h = args
    for alpha in ring.fields:
        assert not var_derivative(h.dx(), alpha), f"d/du^{alpha} of dx({h}) is nonzero"


def _functional_modulo_dx(args: typing.Tuple[Ring, typing.Tuple[DiffPoly, DiffPoly]]) -> None:
    _, (f, h) = args
    assert functional_equal(f, f + h.dx()), f"int {f} dx != int ({f} + dx {h}) dx"


VARIATIONAL = [
    Property("image of dx", _ring_and(strategies.diff_polys), _kills_derivatives),
    Property("functionals modulo dx", _ring_and(lambda r: st.tuples(strategies.diff_polys(r),
                                                                     strategies.diff_polys(r))),
             _functional_modulo_dx),
]


# omega


def _omega_symmetry(args: typing.Tuple[typing.Any, DiffPoly, int]) -> None:
    homogeneity, h, k = args
    omega = omega_hat(h, k, homogeneity.eta)
    expected = omega if k % 2 == 0 else -omega
    assert omega.adjoint() == expected, f"Omega^{k}({h})^dagger != (-1)^{k} Omega^{k}"


def _omega_cases() -> st.SearchStrategy:
    def build(n: int) -> st.SearchStrategy:
        ring = Ring(n)
        return st.tuples(strategies.homogeneity_data(n), strategies.diff_polys(ring), st.integers(0, 2))
    return st.integers(1, 2).flatmap(build)


OMEGA = [Property("adjoint symmetry", _omega_cases(), _omega_symmetry)]


# higher Euler operators and L^k


def _euler_shift(args: typing.Tuple[Ring, typing.Tuple[DiffPoly, int]]) -> None:
    ring, (f, k) = args
    for alpha in ring.fields:
        assert higher_euler(f.dx(), alpha, k + 1) == higher_euler(f, alpha, k), \
            f"T_({alpha},{k + 1}) o dx != T_({alpha},{k}) on {f}"


def _euler_zero(args: typing.Tuple[Ring, DiffPoly]) -> None:
    ring, f = args
    for alpha in ring.fields:
        assert higher_euler(f, alpha, 0) == var_derivative(f, alpha), f"T_({alpha},0) != d/du^{alpha} on {f}"


EULER = [
    Property("dx shift", _ring_and(lambda r: st.tuples(strategies.diff_polys(r), st.integers(0, 2))), _euler_shift),
    Property("variational derivative", _ring_and(strategies.diff_polys), _euler_zero),
]


def _l_shift(args: typing.Tuple[Ring, typing.Tuple[DiffPoly, int]]) -> None:
    ring, (f, k) = args
    for alpha in ring.fields:
        left = L_op(f.dx(), alpha, k)
        right = _dx_compose(L_op(f, alpha, k)) + L_op(f, alpha, k - 1)
        assert left == right, f"L^{k}(dx f) != dx o L^{k}(f) + L^{k - 1}(f) for f = {f}"


def _dx_compose(op: ScalarDiffOp) -> ScalarDiffOp:
    return ScalarDiffOp.dx_power(op.ring).compose(op)


LSHIFT = [
    Property("dx shift", _ring_and(lambda r: st.tuples(strategies.diff_polys(r), st.integers(1, 3))), _l_shift),
]


# operators


def _adjoint_involution(args: typing.Tuple[Ring, MatDiffOp]) -> None:
    _, k = args
    assert k.adjoint().adjoint() == k, "the adjoint is not an involution"


def _adjoint_antihomomorphism(args: typing.Tuple[Ring, typing.Tuple[MatDiffOp, MatDiffOp]]) -> None:
    _, (a, b) = args
    assert a.compose(b).adjoint() == b.adjoint().compose(a.adjoint()), "(AB)^dagger != B^dagger A^dagger"


def _apply_matches_compose(args: typing.Tuple[Ring, typing.Tuple[MatDiffOp, MatDiffOp]]) -> None:
    ring, (a, b) = args
    v = tuple(DiffPoly.field(ring, alpha, 1) * DiffPoly.field(ring, alpha) for alpha in ring.fields)
    assert a.compose(b).apply(v) == a.apply(b.apply(v)), "(AB)v != A(Bv)"


def _bracket_antisymmetry(args: typing.Tuple[Ring, typing.Tuple[MatDiffOp, DiffPoly, DiffPoly]]) -> None:
    _, (k, f, g) = args
    assert poisson_bracket(f, g, k) == -poisson_bracket(g, f, k), f"{{f,g}}_K != -{{g,f}}_K for f = {f}, g = {g}"


OPERATORS = [
    Property("adjoint involution", _ring_and(lambda r: strategies.mat_ops(r)), _adjoint_involution),
    Property("adjoint antihomomorphism", _ring_and(lambda r: st.tuples(
        strategies.mat_ops(r, 1), strategies.mat_ops(r, 1)), max_n=2), _adjoint_antihomomorphism),
    Property("composition", _ring_and(lambda r: st.tuples(strategies.mat_ops(r, 1), strategies.mat_ops(r, 1))),
             _apply_matches_compose),
    Property("poisson bracket antisymmetry", _ring_and(lambda r: st.tuples(
        strategies.skew_ops(r, 1), strategies.diff_polys(r, 3), strategies.diff_polys(r, 3))), _bracket_antisymmetry),
]


# Schouten bracket


def _graded_symmetry(args: typing.Tuple[Ring, typing.Tuple[int, int, MultiVector, MultiVector]]) -> None:
    _, (p, q, a, b) = args
    sign = -1 if (p * q) % 2 else 1
    assert schouten(a, b) == schouten(b, a).scale(sign), f"[P,Q] != (-1)^({p}{q}) [Q,P]"


def _symmetry_cases(ring: Ring) -> st.SearchStrategy:
    return st.tuples(st.integers(0, 2), st.integers(0, 2)).flatmap(
        lambda pq: st.tuples(st.just(pq[0]), st.just(pq[1]),
                             strategies.multivectors(ring, pq[0]), strategies.multivectors(ring, pq[1]))
    )


def _jacobi(args: typing.Tuple[Ring, typing.Tuple[int, int, int, MultiVector, MultiVector, MultiVector]]) -> None:
    _, (p, q, r, a, b, c) = args

    def signed(sign_degree: int, x: MultiVector, y: MultiVector, z: MultiVector) -> MultiVector:
        bracket = schouten(schouten(x, y), z)
        return bracket.scale(-1) if sign_degree % 2 else bracket

    total = signed(p * r, a, b, c) + signed(r * q, c, a, b) + signed(q * p, b, c, a)
    assert total.is_zero(), f"the signed cyclic sum of double brackets of degrees {p}, {q}, {r} does not vanish"


def _jacobi_cases(ring: Ring) -> st.SearchStrategy:
    degrees = st.integers(0, 2)
    return st.tuples(degrees, degrees, degrees).flatmap(lambda pqr: st.tuples(
        st.just(pqr[0]), st.just(pqr[1]), st.just(pqr[2]),
        strategies.multivectors(ring, pqr[0], 2, 1), strategies.multivectors(ring, pqr[1], 2, 1),
        strategies.multivectors(ring, pqr[2], 2, 1)
    ))


def _commutator(args: typing.Tuple[Ring, typing.Tuple[typing.List[DiffPoly], MatDiffOp]]) -> None:
    _, (q, k) = args
    direct = schouten(vector_field(q), bivector_of_op(k))
    assert bivector_of_op(commutator_VQ_BK(q, k)) == -direct, f"[V_Q, B_K] != -B_K~ for Q = {q}"


def _commutator_cases(ring: Ring) -> st.SearchStrategy:
    return st.tuples(st.lists(strategies.diff_polys(ring, 2, 2, 2), min_size=ring.n, max_size=ring.n),
                     strategies.skew_ops(ring, 1))


def _flat_double_bracket(args: typing.Tuple[Ring, MultiVector]) -> None:
    ring, r = args
    eta = [[int(i + j == ring.n - 1) for j in range(ring.n)] for i in range(ring.n)]
    b = bivector_of_op(MatDiffOp.constant(ring, eta, 1))
    assert schouten(schouten(r, b), b).is_zero(), f"[[R, B_K], B_K] != 0 for R = {r.density}"


SCHOUTEN = [
    Property("graded symmetry", _ring_and(_symmetry_cases), _graded_symmetry),
    Property("jacobi", _ring_and(_jacobi_cases, max_n=1), _jacobi),
    Property("commutator", _ring_and(_commutator_cases), _commutator),
    Property("double bracket", _ring_and(lambda r: st.integers(1, 2).flatmap(
        lambda d: strategies.multivectors(r, d))), _flat_double_bracket),
]


# homotopy formulas


def _homotopy_round_trip(args: typing.Tuple[Ring, DiffPoly]) -> None:
    _, f = args
    rebuilt = functional_from_variational(tuple(var_derivative(f, alpha) for alpha in f.ring.fields))
    assert functional_equal(rebuilt, f), f"homotopy reconstruction of {f} gives {rebuilt}"


def _antiderivative(args: typing.Tuple[Ring, DiffPoly]) -> None:
    _, h = args
    p = h.dx()
    if p:
        assert antiderivative(p).dx() == p, f"antiderivative of dx({h}) fails"


HOMOTOPY = [
    Property("gradient round trip", _ring_and(strategies.nonconstant_polys), _homotopy_round_trip),
    Property("antiderivative", _ring_and(strategies.nonconstant_polys), _antiderivative),
]


# pseudo-differential operators


def _root_repowering(r: int) -> None:
    ring = Ring(r - 1)
    lax = PseudoDiffOp(ring, {r: DiffPoly.one(ring), **{j: DiffPoly.field(ring, j + 1) for j in range(r - 1)}})
    depth = r + 2
    root = pdo_root(lax, r, depth)
    powered = root.power(r)
    for order in range(powered.low, r + 1):
        expected = lax.coeff(order) if order >= 0 else DiffPoly.zero(ring)
        assert powered.coeff(order) == expected, f"(L^(1/{r}))^{r} differs from L at dx^{order}"


def _root_commutes(r: int) -> None:
    ring = Ring(r - 1)
    lax = PseudoDiffOp(ring, {r: DiffPoly.one(ring), **{j: DiffPoly.field(ring, j + 1) for j in range(r - 1)}})
    root = pdo_root(lax, r, r + 2)
    floor = root.low + r
    commutator = root.compose(lax, floor) - lax.compose(root, floor)
    assert not commutator.terms, f"L^(1/{r}) does not commute with L down to dx^{floor}"


PDO = [
    Property("root re-powering", st.integers(2, 5), _root_repowering),
    Property("root commutes with L", st.integers(2, 4), _root_commutes),
]


# shift series


def _group_law(args: typing.Tuple[Fraction, Fraction, int]) -> None:
    a, b, order = args
    product = ShiftSeries.shift(a, order) * ShiftSeries.shift(b, order)
    assert product == ShiftSeries.shift(a + b, order), f"e^({a}z) e^({b}z) != e^({a + b}z) to z^{order}"


def _s_inverse(order: int) -> None:
    product = ShiftSeries.S(order) * ShiftSeries.S_inverse(order)
    assert product == ShiftSeries({0: Fraction(1)}, order), f"S(z) S(z)^-1 != 1 to z^{order}"


SHIFT = [
    Property("group law", st.tuples(strategies.rationals(3, 2), strategies.rationals(3, 2), st.integers(0, 6)),
             _group_law),
    Property("S inverse", st.integers(0, 6), _s_inverse),
]


# Miura transformations


def _miura_functorial(args: typing.Tuple[Ring, typing.Tuple[typing.Any, typing.Any, MatDiffOp]]) -> None:
    _, (first, second, k) = args
    stepwise = miura_op(miura_op(k, first), second)
    direct = miura_op(k, second.compose(first))
    assert stepwise == direct, "transforming twice differs from transforming by the composite"


def _miura_inverse(args: typing.Tuple[Ring, typing.Any]) -> None:
    ring, m = args
    identity = m.compose(m.inverse())
    assert all(img == DiffPoly.field(ring, a) for a, img in enumerate(identity.images, 1)), \
        "m o m^-1 is not the identity"


MIURA = [
    Property("functoriality", _ring_and(lambda r: st.tuples(
        strategies.miura_maps(r, 1), strategies.miura_maps(r, 1), strategies.skew_ops(r, 1)
    ), max_n=1, max_eps=2), _miura_functorial, eps_scope(2)),
    Property("inverse", _ring_and(lambda r: strategies.miura_maps(r), max_n=2, max_eps=3), _miura_inverse,
             eps_scope(3)),
]


# model files


def _file_round_trip(args: typing.Tuple[typing.Any, DiffPoly, typing.Optional[DiffPoly]]) -> None:
    homogeneity, g, f = args
    m = CohFTModel("random", homogeneity, g, f, (((1, 1), g.scale(2)),))
    assert loads_model(dumps_model(m)) == m, "a model does not survive a save and load"


def _file_cases() -> st.SearchStrategy:
    def build(n: int) -> st.SearchStrategy:
        ring = Ring(n)
        return st.tuples(strategies.homogeneity_data(n), strategies.diff_polys(ring, max_eps=2),
                         st.none() | strategies.diff_polys(ring, max_order=0))
    return st.integers(1, 3).flatmap(build)


FILE = [Property("round trip", _file_cases(), _file_round_trip)]


# the Schouten lemma on random data


def _lemma(args: typing.Tuple[typing.Any, DiffPoly]) -> None:
    homogeneity, g = args
    m = CohFTModel("random", homogeneity, g)
    assert lemma_check(m), f"B_(K2) != [V_R, B_(K1)] for g = {g}"


def _lemma_cases() -> st.SearchStrategy:
    def build(n: int) -> st.SearchStrategy:
        ring = Ring(n)
        return st.tuples(strategies.homogeneity_data(n), strategies.diff_polys(ring, 3, 2, 3))
    return st.integers(1, 2).flatmap(build)


LEMMA = [Property("schouten lemma", _lemma_cases(), _lemma)]


SUITES: typing.Dict[str, typing.List[Property]] = {
    'algebra': ALGEBRA,
    'variational': VARIATIONAL,
    'omega': OMEGA,
    'euler': EULER,
    'lshift': LSHIFT,
    'operators': OPERATORS,
    'schouten': SCHOUTEN,
    'homotopy': HOMOTOPY,
    'pdo': PDO,
    'shift': SHIFT,
    'miura': MIURA,
    'file': FILE,
    'lemma': LEMMA,
}


def _flipped_adjoint(original: typing.Callable[[MatDiffOp], MatDiffOp]) -> typing.Callable[[MatDiffOp], MatDiffOp]:
    def adjoint(self: MatDiffOp) -> MatDiffOp:
        return -original(self)
    return adjoint


@contextlib.contextmanager
def mutation(name: typing.Optional[str]) -> typing.Iterator[None]:
    """Inject a known defect, used as a negative control for the suites."""
    if name is None:
        yield
        return
    if name not in MUTATIONS:
        raise ConfigurationError(f"unknown mutation {name}, expected one of {', '.join(MUTATIONS)}")
    with mock.patch.object(MatDiffOp, 'adjoint', _flipped_adjoint(MatDiffOp.adjoint)):
        yield


def run_property(suite: str, prop: Property, cases: int, seed: int, timings: bool = False) -> CheckResult:
    name = f"{suite}: {prop.name}"
    report: typing.List[str] = []
    test = settings(
        max_examples=cases, deadline=None, database=None, derandomize=False, print_blob=False,
        suppress_health_check=list(HealthCheck)
    )(hypothesis_seed(seed)(given(prop.strategy)(prop.test)))
    started = time.perf_counter()
    try:
        with with_reporter(report.append):
            test()
    except AssertionError as err:
        notes = list(getattr(err, '__notes__', ()))
        detail = "\n".join(str(line) for line in report + notes if line)
        log.debug("property %s failed: %s", name, err)
        return CheckResult(name, prop.scope, VERDICT_FAIL, str(err), detail or None,
                           time.perf_counter() - started if timings else None)
    except Exception as err:
        log.exception("property %s raised", name)
        return CheckResult(name, prop.scope, VERDICT_ERROR, None, f"{type(err).__name__}: {err}",
                           time.perf_counter() - started if timings else None)
    return CheckResult(name, prop.scope, VERDICT_PASS, None, None,
                       time.perf_counter() - started if timings else None)


def suite_names(selected: typing.Optional[str]) -> typing.List[str]:
    if selected is None:
        return list(SUITES)
    if selected not in SUITES:
        raise ConfigurationError(f"unknown suite {selected}, expected one of {', '.join(SUITES)}")
    return [selected]


def run_suite(suite: str, cases: int, seed: int, mutate: typing.Optional[str] = None,
              timings: bool = False) -> typing.List[CheckResult]:
    results = []
    with mutation(mutate):
        for prop in SUITES[suite]:
            results.append(run_property(suite, prop, cases, seed, timings))
    return results
