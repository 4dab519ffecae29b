import logging
import threading
import typing
from fractions import Fraction
from drham.algebra import DiffPoly, Monomial, U, AUX
from drham.fault import NotAGradientError, UnsupportedInputError
from drham.operators import MatDiffOp, ScalarDiffOp
from drham.util import Matrix, binomial, invert, matrix

log = logging.getLogger(__name__)

KIND_U = 'u'
KIND_THETA = 'theta'
KIND_AUX = 'aux'


def _alternating_sum(parts: typing.Mapping[int, DiffPoly], zero: DiffPoly) -> DiffPoly:
    """sum_i (-dx)^i parts[i]"""
    if not parts:
        return zero
    top = max(parts)
    result = parts[top]
    for i in range(top - 1, -1, -1):
        result = parts.get(i, zero) - result.dx()
    return result


def var_derivative(f: DiffPoly, alpha: int, kind: str = KIND_U) -> DiffPoly:
    zero = DiffPoly.zero(f.ring)
    if kind == KIND_THETA:
        return _alternating_sum(f.theta_partials(alpha), zero)
    return _alternating_sum(f.partials(AUX if kind == KIND_AUX else U, alpha), zero)


def higher_euler(f: DiffPoly, alpha: int, k: int) -> DiffPoly:
    if f.has_thetas():
        raise UnsupportedInputError("higher Euler operators act on theta degree 0")
    parts = f.partials(U, alpha)
    shifted = {n - k: p.scale(binomial(n, k)) for n, p in parts.items() if n >= k}
    return _alternating_sum(shifted, DiffPoly.zero(f.ring))


def L_op(f: DiffPoly, alpha: int, k: int = 0) -> ScalarDiffOp:
    """sum_(i>=k) C(i,k) df/du^alpha_i dx^(i-k)"""
    if f.has_thetas():
        raise UnsupportedInputError("L operators act on theta degree 0")
    parts = f.partials(U, alpha)
    return ScalarDiffOp(f.ring, {i - k: p.scale(binomial(i, k)) for i, p in parts.items() if i >= k})


def frechet(f: DiffPoly) -> typing.Tuple[ScalarDiffOp, ...]:
    return tuple(L_op(f, b) for b in f.ring.fields)


def evolutionary(q: typing.Sequence[DiffPoly], f: DiffPoly) -> DiffPoly:
    """sum_(gamma,p) (dx^p Q^gamma) df/du^gamma_p"""
    result = DiffPoly.zero(f.ring)
    for gamma, component in enumerate(q, 1):
        parts = f.partials(U, gamma)
        if not parts or not component:
            continue
        derivative = component
        for p in range(max(parts) + 1):
            if p in parts:
                result = result + derivative * parts[p]
            derivative = derivative.dx()
    return result


class MultiVector:
    """
    A density taken modulo constants and total x-derivatives. Variational derivatives
    are computed once and cached.
    """
    __slots__ = ('density', '_cache', '_lock')

    def __init__(self, density: DiffPoly) -> None:
        self.density = density
        self._cache: typing.Dict[typing.Tuple[str, int], DiffPoly] = {}
        self._lock = threading.Lock()

    @property
    def ring(self):
        return self.density.ring

    @property
    def degree(self) -> int:
        return self.density.theta_degree

    def _derivative(self, kind: str, alpha: int) -> DiffPoly:
        key = (kind, alpha)
        with self._lock:
            if key not in self._cache:
                self._cache[key] = var_derivative(self.density, alpha, kind)
            return self._cache[key]

    def var_u(self, alpha: int) -> DiffPoly:
        return self._derivative(KIND_U, alpha)

    def var_theta(self, alpha: int) -> DiffPoly:
        return self._derivative(KIND_THETA, alpha)

    def var_aux(self, alpha: int) -> DiffPoly:
        return self._derivative(KIND_AUX, alpha)

    def gradient(self) -> typing.Tuple[DiffPoly, ...]:
        return tuple(self.var_u(a) for a in self.ring.fields)

    def __eq__(self, other: typing.Any) -> bool:
        if not isinstance(other, MultiVector):
            return NotImplemented
        return functional_equal(self, other)

    __hash__ = None  # type: ignore

    def _wrap(self, density: DiffPoly) -> 'MultiVector':
        return type(self)(density)

    def __add__(self, other: 'MultiVector') -> 'MultiVector':
        return self._wrap(self.density + other.density)

    def __sub__(self, other: 'MultiVector') -> 'MultiVector':
        return self._wrap(self.density - other.density)

    def __neg__(self) -> 'MultiVector':
        return self._wrap(-self.density)

    def scale(self, c: typing.Union[int, Fraction]) -> 'MultiVector':
        return self._wrap(self.density.scale(c))

    def is_zero(self) -> bool:
        return functional_equal(self, self._wrap(DiffPoly.zero(self.ring)))

    def __reduce__(self) -> typing.Tuple[typing.Any, ...]:
        return type(self), (self.density,)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(int {self.density} dx)"


class LocalFunctional(MultiVector):
    __slots__ = ()

    def __init__(self, density: DiffPoly) -> None:
        if density.has_thetas():
            raise UnsupportedInputError("local functionals have theta degree 0")
        super().__init__(density)


def as_functional(f: typing.Union[DiffPoly, MultiVector]) -> MultiVector:
    if isinstance(f, MultiVector):
        return f
    if f.has_thetas():
        return MultiVector(f)
    return LocalFunctional(f)


def functional_equal(f: typing.Union[DiffPoly, MultiVector], g: typing.Union[DiffPoly, MultiVector]) -> bool:
    """Equality modulo constants and the image of dx, decided by vanishing variational derivatives."""
    a = f.density if isinstance(f, MultiVector) else f
    b = g.density if isinstance(g, MultiVector) else g
    diff = a - b
    if not diff:
        return True
    ring = diff.ring
    for alpha in ring.fields:
        if var_derivative(diff, alpha):
            return False
        if var_derivative(diff, alpha, KIND_THETA):
            return False
    for j in range(1, ring.aux + 1):
        if var_derivative(diff, j, KIND_AUX):
            return False
    return True


def omega_hat(h: typing.Union[DiffPoly, MultiVector], k: int, eta: Matrix) -> MatDiffOp:
    """Omega^k(h)^(ab) = eta^(a mu) eta^(b nu) L^k_nu(dh/du^mu)"""
    functional = as_functional(h)
    ring = functional.ring
    eta_inv = invert(matrix(eta))
    n = ring.n
    base = [[L_op(functional.var_u(mu), nu, k) for nu in ring.fields] for mu in ring.fields]

    def entry(a: int, b: int) -> ScalarDiffOp:
        total = ScalarDiffOp.zero(ring)
        for mu in range(n):
            if not eta_inv[a - 1][mu]:
                continue
            for nu in range(n):
                c = eta_inv[a - 1][mu] * eta_inv[b - 1][nu]
                if c and base[mu][nu]:
                    total = total + base[mu][nu].scale(c)
        return total
    return MatDiffOp.from_function(ring, entry)


def helmholtz_defect(e: typing.Sequence[DiffPoly],
                     degree_cap: typing.Optional[int] = None
                     ) -> typing.List[typing.Tuple[int, int, ScalarDiffOp]]:
    """
    Pairs (mu, nu) with L_nu(E_mu)^dagger != L_mu(E_nu). With a degree cap the
    comparison is made on u-degree <= cap - 1, the part a degree-capped E determines.
    """
    defects = []
    for mu in range(1, len(e) + 1):
        for nu in range(mu, len(e) + 1):
            residual = L_op(e[mu - 1], nu).adjoint() - L_op(e[nu - 1], mu)
            if degree_cap is not None:
                residual = residual.map_coefficients(lambda a: a.truncate_degree(degree_cap - 1))
            if residual:
                defects.append((mu, nu, residual))
    return defects


def functional_from_variational(e: typing.Sequence[DiffPoly],
                                degree_cap: typing.Optional[int] = None) -> LocalFunctional:
    """
    Homotopy reconstruction h = int_0^1 u^mu E_mu(lambda u) d lambda, normalized by
    h(0) = 0.
    """
    if any(component.has_generators() for component in e):
        raise UnsupportedInputError("homotopy reconstruction needs polynomial gradients")
    defects = helmholtz_defect(e, degree_cap)
    if defects:
        mu, nu, residual = defects[0]
        raise NotAGradientError(f"Helmholtz condition fails for ({mu}, {nu}): {residual}")
    ring = e[0].ring
    density = DiffPoly.zero(ring)
    for mu, component in enumerate(e, 1):
        scaled = DiffPoly(ring, {m: c / (m.u_degree + 1) for m, c in component.terms.items()})
        density = density + DiffPoly.field(ring, mu) * scaled
    if degree_cap is not None:
        density = density.truncate_degree(degree_cap + 1)
    return LocalFunctional(density)


def antiderivative(p: DiffPoly) -> DiffPoly:
    """h with dx(h) = p, by the homotopy formula applied degree by degree."""
    if p.has_generators() or p.has_thetas():
        raise UnsupportedInputError("antiderivatives are computed for polynomial densities only")
    ring = p.ring
    by_degree: typing.Dict[int, typing.Dict[Monomial, Fraction]] = {}
    for mono, c in p.terms.items():
        degree = sum(e for _, e in mono.jets)
        by_degree.setdefault(degree, {})[mono] = c
    if 0 in by_degree:
        raise NotAGradientError(f"{DiffPoly(ring, by_degree[0])} is a nonzero constant")
    variables = [(U, a) for a in ring.fields] + [(AUX, j) for j in range(1, ring.aux + 1)]
    result = DiffPoly.zero(ring)
    for degree, terms in sorted(by_degree.items()):
        part = DiffPoly(ring, terms)
        total = DiffPoly.zero(ring)
        for kind, index in variables:
            for k, derivative in part.partials(kind, index).items():
                for j in range(k):
                    n = k - 1 - j
                    moved = derivative.dx(n)
                    total = total + DiffPoly.var(ring, kind, index, j) * (moved if n % 2 == 0 else -moved)
        result = result + total.scale(Fraction(1, degree))
    if result.dx() != p:
        raise NotAGradientError(f"{p} is not a total x-derivative")
    return result
