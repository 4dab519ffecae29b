import logging
import typing
from fractions import Fraction
from drham.algebra import DiffPoly, Ring, U, euler_Ehat
from drham.constants import SCOPE_EXACT, eps_scope, degree_scope
from drham.fault import NotAGradientError, RecursionFailure, UnsupportedInputError
from drham.multivector import bivector_of_op, commutator_VQ_BK, schouten, vector_field
from drham.operators import MatDiffOp, ScalarDiffOp
from drham.util import Matrix, identity, invert, is_symmetric, matrix, mat_mul, to_fraction
from drham.variational import (antiderivative, as_functional, functional_equal,
                               functional_from_variational, higher_euler, omega_hat, var_derivative)

log = logging.getLogger(__name__)

HALF = Fraction(1, 2)
Level = typing.Tuple[int, int]
HamiltonianTable = typing.Dict[Level, DiffPoly]

ORIGIN_CASIMIR = "casimir"
ORIGIN_KNOWN = "known"
ORIGIN_GENERATED = "generated"


class HomogeneityData(typing.NamedTuple):
    eta: Matrix
    unit: typing.Tuple[Fraction, ...]
    q: typing.Tuple[Fraction, ...]
    r: typing.Tuple[Fraction, ...]
    delta: Fraction
    A: Matrix

    @classmethod
    def build(cls, eta: typing.Sequence[typing.Sequence[typing.Union[int, str, Fraction]]],
              unit: typing.Sequence[typing.Union[int, str, Fraction]],
              q: typing.Sequence[typing.Union[int, str, Fraction]],
              delta: typing.Union[int, str, Fraction] = 0,
              r: typing.Optional[typing.Sequence[typing.Union[int, str, Fraction]]] = None,
              A: typing.Optional[typing.Sequence[typing.Sequence[typing.Union[int, str, Fraction]]]] = None
              ) -> 'HomogeneityData':
        n = len(eta)
        data = cls(
            matrix(eta), tuple(to_fraction(x) for x in unit), tuple(to_fraction(x) for x in q),
            tuple(to_fraction(x) for x in (r if r is not None else [0] * n)), to_fraction(delta),
            matrix(A if A is not None else [[0] * n for _ in range(n)])
        )
        data.validate()
        return data

    @property
    def n(self) -> int:
        return len(self.eta)

    @property
    def mu(self) -> typing.Tuple[Fraction, ...]:
        return tuple(q - self.delta / 2 for q in self.q)

    @property
    def eta_inv(self) -> Matrix:
        return invert(self.eta)

    @property
    def A_up(self) -> Matrix:
        """A^b_a = eta^(b nu) A_(nu a), indexed [b][a]."""
        return mat_mul(self.eta_inv, self.A)

    @property
    def A_raised(self) -> Matrix:
        """eta^-1 A eta^-1"""
        return mat_mul(mat_mul(self.eta_inv, self.A), self.eta_inv)

    def validate(self) -> None:
        n = self.n
        for name, vector in (("unit", self.unit), ("q", self.q), ("r", self.r)):
            if len(vector) != n:
                raise UnsupportedInputError(f"{name} has {len(vector)} entries, expected {n}")
        if any(len(row) != n for row in self.eta) or any(len(row) != n for row in self.A):
            raise UnsupportedInputError("eta and A must be square of size N")
        if not is_symmetric(self.eta):
            raise UnsupportedInputError("eta is not symmetric")
        invert(self.eta)
        if not is_symmetric(self.A):
            raise UnsupportedInputError("A is not symmetric")
        mu = self.mu
        for a in range(n):
            for b in range(n):
                if (mu[a] + mu[b]) * self.eta[a][b]:
                    raise UnsupportedInputError(
                        f"mu eta + eta mu != 0 at ({a + 1}, {b + 1}); delta is inconsistent with the charges"
                    )
        if not any(self.unit):
            raise UnsupportedInputError("the unit vector vanishes")
        for a in range(n):
            if self.unit[a] and self.q[a]:
                raise UnsupportedInputError(f"the unit has a component along u{a + 1} of charge {self.q[a]}")


class CohFTModel(typing.NamedTuple):
    name: str
    homogeneity: HomogeneityData
    g: DiffPoly
    F: typing.Optional[DiffPoly] = None
    hamiltonians: typing.Tuple[typing.Tuple[Level, DiffPoly], ...] = ()
    exact: bool = True

    @property
    def ring(self) -> Ring:
        return self.g.ring

    @property
    def scope(self) -> str:
        if self.exact or self.ring.max_eps is None:
            return SCOPE_EXACT
        return eps_scope(self.ring.max_eps)

    def known(self) -> HamiltonianTable:
        return dict(self.hamiltonians)

    def at_genus(self, max_eps: int) -> 'CohFTModel':
        ring = self.ring.truncated(max_eps)
        return self._replace(
            g=self.g.rehome(ring), F=self.F.rehome(ring) if self.F is not None else None,
            hamiltonians=tuple((level, h.rehome(ring)) for level, h in self.hamiltonians)
        )


def casimir(m: CohFTModel, alpha: int) -> DiffPoly:
    """g_(alpha,-1) = int eta_(alpha beta) u^beta dx"""
    ring = m.ring
    row = m.homogeneity.eta[alpha - 1]
    return sum((DiffPoly.field(ring, b).scale(row[b - 1]) for b in ring.fields), DiffPoly.zero(ring))


def seed_table(m: CohFTModel) -> HamiltonianTable:
    """Casimirs, g_(alpha,0) = dg/du^alpha and whatever the model ships."""
    table: HamiltonianTable = {}
    for a in m.ring.fields:
        table[(a, -1)] = casimir(m, a)
        table[(a, 0)] = m.g.partial(U, a, 0)
    table.update(m.known())
    return table


def k1(m: typing.Union[CohFTModel, HomogeneityData], ring: typing.Optional[Ring] = None) -> MatDiffOp:
    """eta^-1 dx"""
    if isinstance(m, CohFTModel):
        return MatDiffOp.constant(ring or m.ring, m.homogeneity.eta_inv, 1)
    if ring is None:
        raise UnsupportedInputError("a ring is needed to build K1 from homogeneity data")
    return MatDiffOp.constant(ring, m.eta_inv, 1)


def check_homogeneity(m: CohFTModel) -> bool:
    """E-hat g = (3 - delta) g + int 1/2 A_(ab) u^a u^b dx"""
    h = m.homogeneity
    ring = m.ring
    quadratic = DiffPoly.zero(ring)
    for a in ring.fields:
        for b in ring.fields:
            if h.A[a - 1][b - 1]:
                quadratic = quadratic + (DiffPoly.field(ring, a) * DiffPoly.field(ring, b)).scale(h.A[a - 1][b - 1] / 2)
    return functional_equal(euler_Ehat(m.g, h), m.g.scale(3 - h.delta) + quadratic)


def _half_minus_mu(h: HomogeneityData) -> typing.List[Fraction]:
    return [HALF - mu for mu in h.mu]


def build_K2(m: CohFTModel, form: str = "alternative", density: typing.Optional[DiffPoly] = None,
             parts: typing.Sequence[int] = (1, 2, 3)) -> MatDiffOp:
    """
    defining:    E(Omega) o dx + Omega_x o (1/2 - mu) + dx o Omega^1 o dx
    alternative: dx o Omega o (1/2 - mu) + (1/2 - mu) o Omega o dx + eta^-1 A eta^-1 dx + dx o Omega^1 o dx
    `parts` selects summands of the alternative form.
    """
    h = m.homogeneity
    ring = m.ring
    g = density if density is not None else m.g
    dx = MatDiffOp.constant(ring, identity(ring.n), 1)
    shift = MatDiffOp.diagonal(ring, _half_minus_mu(h))
    omega = omega_hat(g, 0, h.eta)
    omega1 = omega_hat(g, 1, h.eta)
    if form == "defining":
        return omega.map_coefficients(lambda a: euler_Ehat(a, h)).compose(dx) \
            + omega.map_coefficients(lambda a: a.dx()).compose(shift) \
            + dx.compose(omega1).compose(dx)
    if form != "alternative":
        raise UnsupportedInputError(f"unknown K2 form {form}")
    result = MatDiffOp.zero(ring)
    if 1 in parts:
        result = result + dx.compose(omega).compose(shift) + shift.compose(omega).compose(dx)
    if 2 in parts:
        result = result + MatDiffOp.constant(ring, h.A_raised, 1)
    if 3 in parts:
        result = result + dx.compose(omega1).compose(dx)
    return result


def r_vector_field(m: CohFTModel, density: typing.Optional[DiffPoly] = None,
                   parts: typing.Sequence[int] = (1, 2, 3)) -> typing.Tuple[DiffPoly, ...]:
    """
    R^a = eta^(ab) ((-1/2 - mu_b) dg/du^b - 1/2 A_(bc) u^c + dx T_(b,1)(g)), split in
    the three summands selected by `parts`.
    """
    h = m.homogeneity
    ring = m.ring
    g = density if density is not None else m.g
    inner = []
    for b in ring.fields:
        piece = DiffPoly.zero(ring)
        if 1 in parts:
            piece = piece + var_derivative(g, b).scale(-HALF - h.mu[b - 1])
        if 2 in parts:
            for c in ring.fields:
                if h.A[b - 1][c - 1]:
                    piece = piece - DiffPoly.field(ring, c).scale(h.A[b - 1][c - 1] / 2)
        if 3 in parts:
            piece = piece + higher_euler(g, b, 1).dx()
        inner.append(piece)
    eta_inv = h.eta_inv
    return tuple(
        sum((inner[b].scale(eta_inv[a][b]) for b in range(ring.n) if eta_inv[a][b]), DiffPoly.zero(ring))
        for a in range(ring.n)
    )


def lemma_check(m: CohFTModel, density: typing.Optional[DiffPoly] = None, via: str = "schouten",
                parts: typing.Sequence[int] = (1, 2, 3)) -> bool:
    """B_(K2) = [V_R, B_(K1)], optionally restricted to summands of K2 and R."""
    k2 = build_K2(m, "alternative", density, parts)
    r = r_vector_field(m, density, parts)
    if via == "commutator":
        return -commutator_VQ_BK(r, k1(m)) == k2
    return functional_equal(bivector_of_op(k2), schouten(vector_field(r), bivector_of_op(k1(m))))


def lemma_split_check(m: CohFTModel, density: typing.Optional[DiffPoly] = None) -> typing.Dict[int, bool]:
    """Each summand of K2 against the matching summand of R; summands need not be skew alone."""
    return {i: lemma_check(m, density, via="commutator", parts=(i,)) for i in (1, 2, 3)}


def representative_change_check(m: CohFTModel, h: DiffPoly) -> bool:
    """g -> g + dx h moves R by K1 dh/du, so [V_R, B_(K1)] does not change."""
    before = r_vector_field(m, m.g)
    after = r_vector_field(m, m.g + h.dx())
    expected = k1(m).apply(as_functional(h).gradient())
    return all(b - a == e for a, b, e in zip(before, after, expected))


def recursion_factor(h: HomogeneityData, alpha: int, d: int) -> Fraction:
    return d + Fraction(3, 2) + h.mu[alpha - 1]


class RecursionEntry(typing.NamedTuple):
    alpha: int
    d: int
    passed: bool
    residual: typing.Tuple[DiffPoly, ...]
    scope: str


def _flow(k: MatDiffOp, density: DiffPoly) -> typing.Tuple[DiffPoly, ...]:
    return k.apply(as_functional(density).gradient())


def recursion_residual(m: CohFTModel, k2: MatDiffOp, table: HamiltonianTable, alpha: int, d: int,
                       k_1: typing.Optional[MatDiffOp] = None) -> typing.Tuple[DiffPoly, ...]:
    """
    K2 dg_(a,d)/du - (d + 3/2 + mu_a) K1 dg_(a,d+1)/du - A^b_a K1 dg_(b,d)/du
    """
    h = m.homogeneity
    if k_1 is None:
        k_1 = k1(m, k2.ring)
    lhs = _flow(k2, table[(alpha, d)])
    factor = recursion_factor(h, alpha, d)
    rhs = [DiffPoly.zero(k2.ring) for _ in lhs]
    if factor:
        rhs = [x + y.scale(factor) for x, y in zip(rhs, _flow(k_1, table[(alpha, d + 1)]))]
    a_up = h.A_up
    for b in k2.ring.fields:
        c = a_up[b - 1][alpha - 1]
        if c:
            rhs = [x + y.scale(c) for x, y in zip(rhs, _flow(k_1, table[(b, d)]))]
    return tuple(x - y for x, y in zip(lhs, rhs))


def recursion_check(m: CohFTModel, k2: MatDiffOp, table: HamiltonianTable,
                    levels: typing.Iterable[Level], scope: typing.Optional[str] = None,
                    k_1: typing.Optional[MatDiffOp] = None,
                    compare: typing.Optional[typing.Callable[[DiffPoly], DiffPoly]] = None
                    ) -> typing.List[RecursionEntry]:
    """
    One entry per (alpha, d). `compare` projects residual components before the zero
    test (eps-order or u-degree truncation).
    """
    entries = []
    for alpha, d in levels:
        residual = recursion_residual(m, k2, table, alpha, d, k_1)
        if compare is not None:
            residual = tuple(compare(x) for x in residual)
        passed = not any(residual)
        log.debug("recursion (alpha=%i, d=%i): %s", alpha, d, "pass" if passed else "fail")
        entries.append(RecursionEntry(alpha, d, passed, residual if not passed else (), scope or m.scope))
    return entries


class TableEntry(typing.NamedTuple):
    density: DiffPoly
    origin: str
    scope: str


class GeneratedTable(typing.NamedTuple):
    entries: typing.Dict[Level, TableEntry]
    failures: typing.Tuple[RecursionFailure, ...]

    def densities(self) -> HamiltonianTable:
        return {level: entry.density for level, entry in self.entries.items()}


def recursion_generate(m: CohFTModel, k2: MatDiffOp, d_max: int,
                       degree_cap: typing.Optional[int] = None) -> GeneratedTable:
    """
    Solve the bihamiltonian recursion level by level, starting from the Casimirs:
    W = (K2 dg_(a,d) - A^b_a K1 dg_(b,d)) / (d + 3/2 + mu_a), eta^-1 dx E = W,
    g_(a,d+1) the functional with gradient E and E(0) = 0. Generator-bearing input is
    expanded to u-degree <= degree_cap.
    """
    h = m.homogeneity
    ring = m.ring
    k_1 = k1(m)
    generators = bool(ring.generators)
    if generators and degree_cap is None:
        raise UnsupportedInputError("recursion generation with exponential generators needs a degree cap")
    scope = degree_scope(ring.max_eps or 0, degree_cap) if generators else m.scope
    known = m.known()
    entries: typing.Dict[Level, TableEntry] = {
        (a, -1): TableEntry(casimir(m, a), ORIGIN_CASIMIR, SCOPE_EXACT) for a in ring.fields
    }
    failures: typing.List[RecursionFailure] = []
    blocked: typing.Set[int] = set()
    for d in range(-1, d_max):
        for alpha in ring.fields:
            if alpha in blocked:
                continue
            target = (alpha, d + 1)
            factor = recursion_factor(h, alpha, d)
            if not factor:
                if target in known or d + 1 == 0:
                    density = known.get(target, m.g.partial(U, alpha, 0))
                    entries[target] = TableEntry(density, ORIGIN_KNOWN, m.scope)
                    continue
                failures.append(RecursionFailure(alpha, d, "vanishing recursion factor and no known Hamiltonian"))
                blocked.add(alpha)
                continue
            try:
                lhs = _flow(k2, entries[(alpha, d)].density)
                for b in ring.fields:
                    c = h.A_up[b - 1][alpha - 1]
                    if c:
                        lhs = tuple(x - y.scale(c) for x, y in zip(lhs, _flow(k_1, entries[(b, d)].density)))
                w = [x.scale(1 / factor) for x in lhs]
                if generators:
                    w = [x.expand_generators(degree_cap) for x in w]
                eta_w = [
                    sum((w[b].scale(h.eta[a][b]) for b in range(ring.n) if h.eta[a][b]), DiffPoly.zero(w[0].ring))
                    for a in range(ring.n)
                ]
                gradient = []
                for component in eta_w:
                    e = antiderivative(component) if component else component
                    gradient.append(e - e.at_origin())
                functional = functional_from_variational(gradient, degree_cap)
            except (NotAGradientError, UnsupportedInputError, KeyError) as err:
                failures.append(RecursionFailure(alpha, d, str(err)))
                blocked.add(alpha)
                continue
            density = functional.density
            if generators:
                density = density.rehome(ring)
            entries[target] = TableEntry(density, ORIGIN_GENERATED, scope)
            log.debug("generated g_(%i,%i) with %i terms", alpha, d + 1, len(density))
    if not failures:
        compare = None
        if generators:
            cap = typing.cast(int, degree_cap) - 1
            compare = lambda x: x.expand_generators(cap)  # noqa: E731
        pair = noncommuting_pair({level: e.density for level, e in entries.items()}, k_1, compare)
        if pair is not None:
            (alpha, d), other = pair
            failures.append(RecursionFailure(alpha, d, f"g_{other} and g_({alpha}, {d}) do not commute under K1"))
    return GeneratedTable(entries, tuple(failures))


def noncommuting_pair(table: HamiltonianTable, k: MatDiffOp,
                      compare: typing.Optional[typing.Callable[[DiffPoly], DiffPoly]] = None
                      ) -> typing.Optional[typing.Tuple[Level, Level]]:
    """The first pair of levels (later, earlier) with {g_later, g_earlier}_K != 0, if any."""
    levels = sorted(table)
    flows = {level: _flow(k, table[level]) for level in levels}
    for i, first in enumerate(levels):
        gradient = as_functional(table[first]).gradient()
        for second in levels[i + 1:]:
            density = sum((x * y for x, y in zip(gradient, flows[second])), DiffPoly.zero(k.ring))
            if compare is not None:
                density = compare(density)
            if not functional_equal(density, DiffPoly.zero(density.ring)):
                log.debug("Hamiltonians %s and %s do not commute", first, second)
                return second, first
    return None


def commutation_check(table: HamiltonianTable, k: MatDiffOp,
                      compare: typing.Optional[typing.Callable[[DiffPoly], DiffPoly]] = None) -> bool:
    """{g_(a,i), g_(b,j)}_K = 0 for all pairs of the table."""
    return noncommuting_pair(table, k, compare) is None


def d_minus_one_reduced_check(m: CohFTModel) -> bool:
    """Omega(g)_x^(b g) (1/2 - mu_g) eta_(g a) = (mu_a + 1/2) eta^(b g) dx dg_(a,0)/du^g"""
    h = m.homogeneity
    ring = m.ring
    omega = omega_hat(m.g, 0, h.eta)
    eta_inv = h.eta_inv
    for alpha in ring.fields:
        g0 = as_functional(m.g.partial(U, alpha, 0))
        for beta in ring.fields:
            lhs = ScalarDiffOp.zero(ring)
            for gamma in ring.fields:
                c = (HALF - h.mu[gamma - 1]) * h.eta[gamma - 1][alpha - 1]
                if c:
                    lhs = lhs + omega.entry(beta, gamma).map_coefficients(lambda a: a.dx()).scale(c)
            rhs = DiffPoly.zero(ring)
            for gamma in ring.fields:
                if eta_inv[beta - 1][gamma - 1]:
                    rhs = rhs + g0.var_u(gamma).dx().scale(eta_inv[beta - 1][gamma - 1])
            rhs = rhs.scale(h.mu[alpha - 1] + HALF)
            if lhs.apply(DiffPoly.one(ring)) != rhs:
                return False
    return True


# genus 0


def structure_constants(f: DiffPoly, eta: Matrix) -> typing.Dict[typing.Tuple[int, int, int], DiffPoly]:
    """c^m_(b g) = eta^(m n) F_(n b g), keyed (m, b, g)."""
    ring = f.ring
    eta_inv = invert(eta)
    third = {}
    for a in ring.fields:
        fa = f.partial(U, a, 0)
        for b in ring.fields:
            fab = fa.partial(U, b, 0)
            for c in ring.fields:
                third[(a, b, c)] = fab.partial(U, c, 0)
    result = {}
    for mu in ring.fields:
        for b in ring.fields:
            for c in ring.fields:
                result[(mu, b, c)] = sum(
                    (third[(nu, b, c)].scale(eta_inv[mu - 1][nu - 1]) for nu in ring.fields if eta_inv[mu - 1][nu - 1]),
                    DiffPoly.zero(ring)
                )
    return result


def integrate_gradient(gradient: typing.Sequence[DiffPoly]) -> DiffPoly:
    """f with df/du^b = G_b and f(0) = 0, integrating along the coordinate axes."""
    ring = gradient[0].ring
    n = ring.n
    result = DiffPoly.zero(ring)
    for b in range(1, n + 1):
        piece = gradient[b - 1]
        for later in range(b + 1, n + 1):
            piece = piece.set_field_zero(later)
        result = result + piece.integrate_field(b)
    for b in range(1, n + 1):
        if result.partial(U, b, 0) != gradient[b - 1]:
            raise NotAGradientError(f"the field {[str(x) for x in gradient]} is not a gradient")
    return result


class Genus0Table(typing.NamedTuple):
    omega: typing.Dict[typing.Tuple[int, int, int], DiffPoly]
    hamiltonians: HamiltonianTable


def genus0_table(m: CohFTModel, d_max: int) -> Genus0Table:
    """
    Omega_(g,0;a,d) for -1 <= d <= d_max + 2, keyed (g, a, d), built by
    d_b Omega_(g,0;a,d+1) = c^m_(b g) Omega_(m,0;a,d) with Omega(0) = 0, and the
    Hamiltonians h_(a,d) = int Omega_(1,0;a,d+1) for d <= d_max + 1.
    """
    if m.F is None:
        raise UnsupportedInputError(f"model {m.name} has no genus 0 potential")
    h = m.homogeneity
    f = m.F.eps_part(0)
    ring = f.ring
    c = structure_constants(f, h.eta)
    omega: typing.Dict[typing.Tuple[int, int, int], DiffPoly] = {}
    for gamma in ring.fields:
        for alpha in ring.fields:
            omega[(gamma, alpha, -1)] = DiffPoly.constant(ring, h.eta[gamma - 1][alpha - 1])
            omega[(gamma, alpha, 0)] = f.partial(U, gamma, 0).partial(U, alpha, 0)
    for d in range(0, d_max + 2):
        for gamma in ring.fields:
            for alpha in ring.fields:
                gradient = [
                    sum((c[(mu, b, gamma)] * omega[(mu, alpha, d)] for mu in ring.fields), DiffPoly.zero(ring))
                    for b in ring.fields
                ]
                omega[(gamma, alpha, d + 1)] = integrate_gradient(gradient)
    hamiltonians = {}
    for alpha in ring.fields:
        for d in range(-1, d_max + 2):
            density = sum(
                (omega[(gamma, alpha, d + 1)].scale(h.unit[gamma - 1]) for gamma in ring.fields if h.unit[gamma - 1]),
                DiffPoly.zero(ring)
            )
            for gamma in ring.fields:
                if density.partial(U, gamma, 0) != omega[(gamma, alpha, d)]:
                    raise NotAGradientError(f"string relation fails for (alpha={alpha}, d={d}, gamma={gamma})")
            hamiltonians[(alpha, d)] = density
    return Genus0Table(omega, hamiltonians)


def k2_genus0(m: CohFTModel) -> MatDiffOp:
    """g^(ab) dx + (dx Omega^(ab)) (1/2 - mu_b)"""
    if m.F is None:
        raise UnsupportedInputError(f"model {m.name} has no genus 0 potential")
    h = m.homogeneity
    f = m.F.eps_part(0)
    ring = f.ring
    eta_inv = h.eta_inv
    second = {(a, b): f.partial(U, a, 0).partial(U, b, 0) for a in ring.fields for b in ring.fields}

    def raised(fn: typing.Callable[[int, int], DiffPoly], a: int, b: int) -> DiffPoly:
        total = DiffPoly.zero(ring)
        for mu in ring.fields:
            for nu in ring.fields:
                coeff = eta_inv[a - 1][mu - 1] * eta_inv[b - 1][nu - 1]
                if coeff:
                    total = total + fn(mu, nu).scale(coeff)
        return total

    def entry(a: int, b: int) -> ScalarDiffOp:
        metric = raised(lambda mu, nu: euler_Ehat(second[(mu, nu)], h), a, b)
        omega = raised(lambda mu, nu: second[(mu, nu)], a, b)
        return ScalarDiffOp(ring, {1: metric, 0: omega.dx().scale(HALF - h.mu[b - 1])})
    return MatDiffOp.from_function(ring, entry)


def genus0_homogeneity_residual(m: CohFTModel, table: Genus0Table, gamma: int, alpha: int, d: int) -> DiffPoly:
    """
    ((1-q_n)u^n + r^n) d_n Omega_(g,0;a,d+1) - (d + 2 + mu_a + mu_g) Omega_(g,0;a,d+1)
    - Omega_(g,0;m,d) A^m_a
    """
    h = m.homogeneity
    current = table.omega[(gamma, alpha, d + 1)]
    lhs = euler_Ehat(current, h)
    rhs = current.scale(d + 2 + h.mu[alpha - 1] + h.mu[gamma - 1])
    a_up = h.A_up
    for mu in current.ring.fields:
        if a_up[mu - 1][alpha - 1]:
            rhs = rhs + table.omega[(gamma, mu, d)].scale(a_up[mu - 1][alpha - 1])
    return lhs - rhs


class Genus0Report(typing.NamedTuple):
    recursion: typing.List[RecursionEntry]
    homogeneity: typing.List[typing.Tuple[int, int, int, bool]]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.recursion) and all(ok for *_, ok in self.homogeneity)


def genus0_check(m: CohFTModel, d_max: int) -> Genus0Report:
    table = genus0_table(m, d_max)
    k2 = k2_genus0(m)
    ring = k2.ring
    g0_model = m._replace(g=m.F.eps_part(0), hamiltonians=())
    levels = [(a, d) for d in range(-1, d_max + 1) for a in ring.fields]
    recursion = recursion_check(g0_model, k2, table.hamiltonians, levels, SCOPE_EXACT,
                                MatDiffOp.constant(ring, m.homogeneity.eta_inv, 1))
    homogeneity = []
    for d in range(-1, d_max + 1):
        for gamma in ring.fields:
            for alpha in ring.fields:
                ok = not genus0_homogeneity_residual(m, table, gamma, alpha, d)
                homogeneity.append((gamma, alpha, d, ok))
    return Genus0Report(recursion, homogeneity)

