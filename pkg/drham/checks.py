"""
Named checks of the bihamiltonian structure for the builtin theories, grouped in
verify targets. Each check is a callable returning an Outcome; heavy objects are
built once per process and shared by the checks of a target.
"""
import functools
import logging
import typing
from fractions import Fraction
from drham.algebra import DiffPoly, Ring
from drham.central import central_invariant_value, eps2_tensor_residual
from drham.constants import DEFAULT_D_MAX, SCOPE_EXACT, VERDICT_PASS, degree_scope, eps_scope
from drham.drk2 import (ORIGIN_GENERATED, CohFTModel, build_K2, check_homogeneity, d_minus_one_reduced_check, k1,
                        lemma_check, lemma_split_check, genus0_check, recursion_check, recursion_generate,
                        representative_change_check, seed_table)
from drham.fault import ConfigurationError
from drham.gd import RSpinPackage, miura_to_dr, rspin_package
from drham.models import (bernoulli_operator, builtin, coth_operator, cp1_g11_display, cp1_k11_shift_form,
                          cp1_k2_reference, cp1_variational, kdv_k2_reference, rspin3_k2_reference,
                          rspin4_k2_reference, toda_pair)
from drham.multivector import compatible, is_poisson
from drham.operators import MatDiffOp, ScalarDiffOp, miura_op
from drham.properties import run_suite
from drham.serialization.model import load_model
from drham.variational import functional_equal, var_derivative

if typing.TYPE_CHECKING:
    from drham.verify import RunConfig

log = logging.getLogger(__name__)

TARGETS = ('kdv', 'rspin3', 'rspin4', 'rspin5', 'cp1', 'genus0', 'central', 'lemma')


class Outcome(typing.NamedTuple):
    passed: bool
    residual: typing.Optional[str] = None
    detail: typing.Optional[str] = None


class Check(typing.NamedTuple):
    name: str
    scope: str
    run: typing.Callable[[], Outcome]


PASS = Outcome(True)


def _fail(detail: str, residual: typing.Any = None) -> Outcome:
    return Outcome(False, None if residual is None else str(residual), detail)


def _components(residual: typing.Sequence[DiffPoly]) -> str:
    return "\n".join(f"component {i}: {x}" for i, x in enumerate(residual, 1) if x)


def _ops_equal(actual: MatDiffOp, expected: MatDiffOp, what: str) -> Outcome:
    if actual == expected:
        return PASS
    return _fail(f"{what} differ", actual - expected)


def _truth(ok: bool, detail: str) -> Outcome:
    return PASS if ok else _fail(detail)


# shared builders, cached per worker process


@functools.lru_cache(maxsize=None)
def model(name: str, max_eps: typing.Optional[int] = None) -> CohFTModel:
    return builtin(name, max_eps)


@functools.lru_cache(maxsize=None)
def k2_of(name: str, max_eps: typing.Optional[int] = None, form: str = "alternative") -> MatDiffOp:
    return build_K2(model(name, max_eps), form)


@functools.lru_cache(maxsize=None)
def package(r: int, d_max: int, max_eps: typing.Optional[int] = None,
            depth: typing.Optional[int] = None) -> RSpinPackage:
    log.debug("building the %i-spin Gelfand-Dickey package up to d = %i", r, d_max + 1)
    return rspin_package(r, d_max, max_eps, depth)


@functools.lru_cache(maxsize=None)
def file_model(path: str) -> CohFTModel:
    return load_model(path)


def clear_caches() -> None:
    for fn in (model, k2_of, package, file_model):
        fn.cache_clear()


def _d_max(target: str, cfg: 'RunConfig') -> int:
    return cfg.d_max if cfg.d_max is not None else DEFAULT_D_MAX[target]


# check bodies


def recursion_outcome(m: CohFTModel, k2: MatDiffOp, d_max: int,
                      degree_cap: typing.Optional[int] = None) -> Outcome:
    """
    Generate g_(a,d) up to d_max + 1 from the Casimirs, compare generated levels with the
    Hamiltonians the model ships, then check the recursion for -1 <= d <= d_max.
    """
    generators = bool(m.ring.generators)
    generated = recursion_generate(m, k2, d_max + 1, degree_cap if generators else None)
    if generated.failures:
        return _fail(str(generated.failures[0]))
    seeded = seed_table(m)
    for level, entry in sorted(generated.entries.items()):
        if entry.origin != ORIGIN_GENERATED or level not in seeded:
            continue
        diff = entry.density - seeded[level]
        if generators and degree_cap is not None:
            diff = diff.expand_generators(degree_cap + 1)
        if not functional_equal(diff, DiffPoly.zero(diff.ring)):
            return _fail(f"generated g_{level} differs from the shipped Hamiltonian", diff)
    table = dict(seeded)
    for level, entry in generated.entries.items():
        table.setdefault(level, entry.density)
    compare = None
    if generators and degree_cap is not None:
        cap = degree_cap
        compare = lambda x: x.expand_generators(cap)  # noqa: E731
    levels = [(a, d) for d in range(-1, d_max + 1) for a in m.ring.fields]
    for entry in recursion_check(m, k2, table, levels, compare=compare):
        if not entry.passed:
            return _fail(f"recursion fails at (alpha={entry.alpha}, d={entry.d})", _components(entry.residual))
    return PASS


def dz_recursion_outcome(pkg: RSpinPackage, d_max: int) -> Outcome:
    for d in range(-1, d_max + 1):
        for alpha in range(1, pkg.r):
            residual = pkg.recursion_residual(alpha, d)
            if any(residual):
                return _fail(f"{pkg.r}-spin recursion fails at (alpha={alpha}, d={d})", _components(residual))
    return PASS


def eps2_outcome(m: CohFTModel) -> Outcome:
    residual = eps2_tensor_residual(m)
    if not residual:
        return PASS
    (a, b), diff = sorted(residual.items())[0]
    return _fail(f"eps^2 dx^3 coefficient of K2 mismatches the structure constants at ({a}, {b})", diff)


def central_outcome(p1: typing.Union[ScalarDiffOp, MatDiffOp], p2: typing.Union[ScalarDiffOp, MatDiffOp],
                    expected: Fraction) -> Outcome:
    value = central_invariant_value(p1, p2)
    if value == expected:
        return PASS
    return _fail(f"central invariant {value}, expected {expected}")


def _dispersionless_kdv() -> typing.Tuple[ScalarDiffOp, ScalarDiffOp]:
    ring = Ring(1)
    u = DiffPoly.field(ring, 1)
    p1 = ScalarDiffOp(ring, {1: DiffPoly.one(ring)})
    p2 = ScalarDiffOp(ring, {1: u, 0: u.dx().scale(Fraction(1, 2))})
    return p1, p2


# targets


def kdv_checks(cfg: 'RunConfig') -> typing.List[Check]:
    d_max = _d_max('kdv', cfg)

    def k2_display() -> Outcome:
        return _ops_equal(k2_of('kdv'), kdv_k2_reference(model('kdv').ring), "K2 and u dx + u_x/2 + eps^2/8 dx^3")

    def gd_pair() -> Outcome:
        pkg = package(2, d_max, None, cfg.depth)
        m = model('kdv')
        if pkg.k1 != k1(m):
            return _fail("the 2-spin K1 is not dx", pkg.k1 - k1(m))
        return _ops_equal(pkg.k2, k2_of('kdv'), "2-spin K2 and the KdV K2")

    return [
        Check("homogeneity", SCOPE_EXACT, lambda: _truth(check_homogeneity(model('kdv')), "E-hat g != 3 g")),
        Check("K2 display", SCOPE_EXACT, k2_display),
        Check("K2 forms agree", SCOPE_EXACT,
              lambda: _ops_equal(k2_of('kdv', None, "defining"), k2_of('kdv'), "defining and alternative K2")),
        Check("compatible pair", SCOPE_EXACT,
              lambda: _truth(compatible(k1(model('kdv')), k2_of('kdv')), "[B_K1, B_K2] != 0")),
        Check("Schouten lemma", SCOPE_EXACT,
              lambda: _truth(lemma_check(model('kdv')), "B_K2 != [V_R, B_K1]")),
        Check("reduced d = -1", SCOPE_EXACT,
              lambda: _truth(d_minus_one_reduced_check(model('kdv')), "reduced d = -1 identity fails")),
        Check(f"recursion d <= {d_max}", SCOPE_EXACT,
              lambda: recursion_outcome(model('kdv'), k2_of('kdv'), d_max)),
        Check("central invariant", SCOPE_EXACT,
              lambda: central_outcome(k1(model('kdv')), k2_of('kdv'), Fraction(1, 24))),
        Check("eps^2 tensor", eps_scope(2), lambda: eps2_outcome(model('kdv'))),
        Check("2-spin Gelfand-Dickey pair", SCOPE_EXACT, gd_pair),
    ]


def rspin3_checks(cfg: 'RunConfig') -> typing.List[Check]:
    d_max = _d_max('rspin3', cfg)
    m = lambda: model('3spin')  # noqa: E731
    k2 = lambda: k2_of('3spin')  # noqa: E731

    return [
        Check("homogeneity", SCOPE_EXACT, lambda: _truth(check_homogeneity(m()), "E-hat g != (3 - delta) g")),
        Check("K2 display", SCOPE_EXACT,
              lambda: _ops_equal(k2(), rspin3_k2_reference(m().ring), "K2 and the displayed 3-spin matrix")),
        Check("K2 forms agree", SCOPE_EXACT,
              lambda: _ops_equal(k2_of('3spin', None, "defining"), k2(), "defining and alternative K2")),
        Check("K2 Poisson", SCOPE_EXACT, lambda: _truth(is_poisson(k2()), "[B_K2, B_K2] != 0")),
        Check("compatible pair", SCOPE_EXACT,
              lambda: _truth(compatible(k1(m()), k2()), "[B_K1, B_K2] != 0")),
        Check(f"DR recursion d <= {d_max}", SCOPE_EXACT, lambda: recursion_outcome(m(), k2(), d_max)),
        Check("Gelfand-Dickey K2", SCOPE_EXACT,
              lambda: _ops_equal(package(3, d_max, None, cfg.depth).k2, miura_to_dr(3, k2()),
                                 "Gelfand-Dickey and DR K2")),
        Check(f"DZ recursion d <= {d_max}", SCOPE_EXACT,
              lambda: dz_recursion_outcome(package(3, d_max, None, cfg.depth), d_max)),
        Check("eps^2 tensor", eps_scope(2), lambda: eps2_outcome(m())),
    ]


def rspin4_checks(cfg: 'RunConfig') -> typing.List[Check]:
    d_max = _d_max('rspin4', cfg)
    m = lambda: model('4spin')  # noqa: E731
    pkg = lambda: package(4, d_max, None, cfg.depth)  # noqa: E731

    return [
        Check("homogeneity", SCOPE_EXACT, lambda: _truth(check_homogeneity(m()), "E-hat g != (3 - delta) g")),
        Check("Gelfand-Dickey K2 display", SCOPE_EXACT,
              lambda: _ops_equal(pkg().k2, rspin4_k2_reference(pkg().k2.ring),
                                 "Gelfand-Dickey K2 and the displayed 4-spin matrix")),
        Check("Miura match", SCOPE_EXACT,
              lambda: _ops_equal(miura_to_dr(4, k2_of('4spin')), pkg().k2, "Miura image of the DR K2 and the GD K2")),
        Check("compatible pair", SCOPE_EXACT,
              lambda: _truth(compatible(k1(m()), k2_of('4spin')), "[B_K1, B_K2] != 0")),
        Check(f"DZ recursion d <= {d_max}", SCOPE_EXACT, lambda: dz_recursion_outcome(pkg(), d_max)),
        Check("eps^2 tensor", eps_scope(2), lambda: eps2_outcome(m())),
    ]


def rspin5_checks(cfg: 'RunConfig') -> typing.List[Check]:
    d_max = _d_max('rspin5', cfg)
    checks = [
        Check("Gelfand-Dickey K2 skew", SCOPE_EXACT,
              lambda: _truth(package(5, d_max, None, cfg.depth).k2.is_skew(), "the 5-spin K2 is not skew")),
        Check(f"DZ recursion d <= {d_max}", SCOPE_EXACT,
              lambda: dz_recursion_outcome(package(5, d_max, None, cfg.depth), d_max)),
    ]
    if cfg.g_file is None:
        log.info("no g file given, skipping the DR side of the 5-spin comparison")
        return checks
    path = cfg.g_file

    def loaded() -> CohFTModel:
        m = file_model(path)
        if m.ring.n != 4:
            raise ConfigurationError(f"the 5-spin theory has 4 fields, {path} has {m.ring.n}")
        return m

    def miura_match() -> Outcome:
        m = loaded()
        pkg = package(5, d_max, m.ring.max_eps, cfg.depth)
        return _ops_equal(miura_to_dr(5, build_K2(m)), pkg.k2, "Miura image of the DR K2 and the GD K2")

    checks.extend([
        Check("file homogeneity", SCOPE_EXACT, lambda: _truth(check_homogeneity(loaded()), "E-hat g mismatch")),
        Check("Miura match", SCOPE_EXACT, miura_match),
    ])
    return checks


def cp1_checks(cfg: 'RunConfig') -> typing.List[Check]:
    d_max = _d_max('cp1', cfg)
    max_eps = cfg.max_eps
    cap = cfg.degree_cap
    scope = eps_scope(max_eps)
    m = lambda: model('cp1', max_eps)  # noqa: E731
    k2 = lambda: k2_of('cp1', max_eps)  # noqa: E731

    def variational() -> Outcome:
        expected = cp1_variational(m().ring)
        for alpha, e in enumerate(expected, 1):
            actual = var_derivative(m().g, alpha)
            if actual != e:
                return _fail(f"dg/du^{alpha} differs from the closed form", actual - e)
        return PASS

    def g11() -> Outcome:
        table = m().known()
        display = cp1_g11_display(m().ring)
        diff = table[(1, 1)] - display
        return PASS if functional_equal(diff, DiffPoly.zero(diff.ring)) else _fail("(D - 2) g differs", diff)

    def shift_form() -> Outcome:
        actual = k2().entry(1, 1)
        expected = cp1_k11_shift_form(m().ring)
        return PASS if actual == expected else _fail("K2^11 differs from the shift form", actual - expected)

    def coth() -> Outcome:
        ring = m().ring
        a, b = bernoulli_operator(ring), coth_operator(ring)
        return PASS if a == b else _fail("Bernoulli and coth forms of K2^22 differ", a - b)

    def toda_k1() -> Outcome:
        pair = toda_pair(max_eps)
        return _ops_equal(miura_op(pair.k1, pair.miura, pair.inverse), k1(m()), "Miura image of K1 Toda and eta^-1 dx")

    def toda_k2() -> Outcome:
        pair = toda_pair(max_eps)
        return _ops_equal(miura_op(pair.k2, pair.miura, pair.inverse), k2(), "Miura image of K2 Toda and K2")

    return [
        Check("homogeneity", scope, lambda: _truth(check_homogeneity(m()), "E-hat g mismatch")),
        Check("g_(1,1) display", scope, g11),
        Check("variational derivatives", scope, variational),
        Check("K2 closed form", scope,
              lambda: _ops_equal(k2(), cp1_k2_reference(m().ring), "K2 and the shift-operator closed form")),
        Check("K2^11 shift form", scope, shift_form),
        Check("K2^22 coth form", scope, coth),
        Check("Toda K1", scope, toda_k1),
        Check("Toda K2", scope, toda_k2),
        Check(f"recursion d <= {d_max}", degree_scope(max_eps, cap),
              lambda: recursion_outcome(m(), k2(), d_max, cap)),
        Check("eps^2 tensor", eps_scope(2), lambda: eps2_outcome(model('cp1', 2))),
    ]


def genus0_checks(cfg: 'RunConfig') -> typing.List[Check]:
    d_max = _d_max('genus0', cfg)

    def run(name: str) -> Outcome:
        report = genus0_check(model(name, 2 if name == 'cp1' else None), d_max)
        if report.passed:
            return PASS
        for entry in report.recursion:
            if not entry.passed:
                return _fail(f"genus 0 recursion fails at (alpha={entry.alpha}, d={entry.d})",
                             _components(entry.residual))
        gamma, alpha, d, _ = next(h for h in report.homogeneity if not h[3])
        return _fail(f"Omega_({gamma},0;{alpha},{d + 1}) is not homogeneous")

    return [
        Check(f"{name} genus 0", SCOPE_EXACT, functools.partial(run, name))
        for name in ('kdv', '3spin', '4spin', 'cp1')
    ]


def central_checks(cfg: 'RunConfig') -> typing.List[Check]:
    def eps2(name: str) -> Outcome:
        return eps2_outcome(model(name, 2 if name == 'cp1' else None))

    checks = [
        Check("KdV central invariant", SCOPE_EXACT,
              lambda: central_outcome(k1(model('kdv')), k2_of('kdv'), Fraction(1, 24))),
        Check("dispersionless central invariant", SCOPE_EXACT,
              lambda: central_outcome(*_dispersionless_kdv(), Fraction(0))),
    ]
    checks.extend(
        Check(f"{name} eps^2 tensor", eps_scope(2), functools.partial(eps2, name))
        for name in ('kdv', '3spin', '4spin', 'cp1')
    )
    return checks


def lemma_checks(cfg: 'RunConfig') -> typing.List[Check]:
    def split(name: str) -> Outcome:
        results = lemma_split_check(model(name))
        failing = [i for i, ok in sorted(results.items()) if not ok]
        return PASS if not failing else _fail(f"summands {failing} of K2 do not match R")

    def representative() -> Outcome:
        m = model('3spin')
        ring = m.ring
        h = DiffPoly.field(ring, 1) * DiffPoly.field(ring, 2, 1) * DiffPoly.field(ring, 2)
        return _truth(representative_change_check(m, h), "R does not move by K1 dh under g -> g + dx h")

    def random_suite() -> Outcome:
        results = run_suite('lemma', cfg.cases, cfg.seed)
        for result in results:
            if result.verdict != VERDICT_PASS:
                return Outcome(False, result.residual, result.detail or result.name)
        return PASS

    return [
        Check("kdv Schouten lemma", SCOPE_EXACT, lambda: _truth(lemma_check(model('kdv')), "B_K2 != [V_R, B_K1]")),
        Check("3spin Schouten lemma", SCOPE_EXACT,
              lambda: _truth(lemma_check(model('3spin')), "B_K2 != [V_R, B_K1]")),
        Check("cp1 Schouten lemma", eps_scope(2),
              lambda: _truth(lemma_check(model('cp1', 2), via="commutator"), "K2 != -[V_R, B_K1]")),
        Check("3spin summands", SCOPE_EXACT, functools.partial(split, '3spin')),
        Check("representative change", SCOPE_EXACT, representative),
        Check(f"random homogeneity data ({cfg.cases} cases)", SCOPE_EXACT, random_suite),
    ]


TARGET_CHECKS: typing.Dict[str, typing.Callable[['RunConfig'], typing.List[Check]]] = {
    'kdv': kdv_checks,
    'rspin3': rspin3_checks,
    'rspin4': rspin4_checks,
    'rspin5': rspin5_checks,
    'cp1': cp1_checks,
    'genus0': genus0_checks,
    'central': central_checks,
    'lemma': lemma_checks,
}


def checks_for(target: str, cfg: 'RunConfig') -> typing.List[Check]:
    if target == 'all':
        checks = []
        for name in TARGETS:
            checks.extend(c._replace(name=f"{name}: {c.name}") for c in TARGET_CHECKS[name](cfg))
        return checks
    if target not in TARGET_CHECKS:
        raise ConfigurationError(f"unknown target {target}, expected one of {', '.join(TARGETS + ('all',))}")
    return TARGET_CHECKS[target](cfg)
