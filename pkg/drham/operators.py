import logging
import typing
from fractions import Fraction
from drham.algebra import DiffPoly, JetVar, Ring, Monomial, U
from drham.constants import MIURA_MAX_ITERATIONS
from drham.fault import NotSkewError, SignatureError, SingularMetricError, TruncationError, UnsupportedInputError
from drham.util import Matrix, Scalar, binomial, invert

if typing.TYPE_CHECKING:
    from drham.variational import LocalFunctional, MultiVector

log = logging.getLogger(__name__)


class ScalarDiffOp:
    """sum_s a_s dx^s with differential polynomial coefficients a_s."""
    __slots__ = ('ring', 'terms', '_hash')

    def __init__(self, ring: Ring, terms: typing.Optional[typing.Mapping[int, DiffPoly]] = None) -> None:
        self.ring = ring
        self.terms: typing.Dict[int, DiffPoly] = {}
        for s, a in (terms or {}).items():
            if s < 0:
                raise UnsupportedInputError("differential operators have non-negative orders only")
            if a.ring != ring:
                raise SignatureError(f"coefficient of dx^{s} lives in {a.ring}, expected {ring}")
            if a:
                self.terms[s] = a
        self._hash: typing.Optional[int] = None

    @classmethod
    def zero(cls, ring: Ring) -> 'ScalarDiffOp':
        return cls(ring)

    @classmethod
    def multiplication(cls, a: DiffPoly) -> 'ScalarDiffOp':
        return cls(a.ring, {0: a})

    @classmethod
    def dx_power(cls, ring: Ring, s: int = 1, coeff: Scalar = 1) -> 'ScalarDiffOp':
        return cls(ring, {s: DiffPoly.constant(ring, coeff)})

    @classmethod
    def series(cls, ring: Ring, coeffs: typing.Mapping[int, DiffPoly]) -> 'ScalarDiffOp':
        return cls(ring, coeffs)

    @property
    def order(self) -> int:
        return max(self.terms, default=-1)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def coeff(self, s: int) -> DiffPoly:
        return self.terms.get(s, DiffPoly.zero(self.ring))

    def __eq__(self, other: typing.Any) -> bool:
        if not isinstance(other, ScalarDiffOp):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __reduce__(self) -> typing.Tuple[typing.Any, ...]:
        return ScalarDiffOp, (self.ring, self.terms)

    def __add__(self, other: 'ScalarDiffOp') -> 'ScalarDiffOp':
        if other.ring != self.ring:
            raise SignatureError(f"incompatible rings {self.ring} and {other.ring}")
        terms = dict(self.terms)
        for s, a in other.terms.items():
            terms[s] = terms[s] + a if s in terms else a
        return ScalarDiffOp(self.ring, terms)

    def __neg__(self) -> 'ScalarDiffOp':
        return ScalarDiffOp(self.ring, {s: -a for s, a in self.terms.items()})

    def __sub__(self, other: 'ScalarDiffOp') -> 'ScalarDiffOp':
        return self + (-other)

    def scale(self, c: Scalar) -> 'ScalarDiffOp':
        return ScalarDiffOp(self.ring, {s: a.scale(c) for s, a in self.terms.items()})

    def left(self, a: DiffPoly) -> 'ScalarDiffOp':
        """a o K"""
        return ScalarDiffOp(self.ring, {s: a * b for s, b in self.terms.items()})

    def compose(self, other: 'ScalarDiffOp') -> 'ScalarDiffOp':
        if other.ring != self.ring:
            raise SignatureError(f"incompatible rings {self.ring} and {other.ring}")
        if not self.terms or not other.terms:
            return ScalarDiffOp.zero(self.ring)
        top = self.order
        derivatives = {}
        for t, b in other.terms.items():
            chain = [b]
            for _ in range(top):
                chain.append(chain[-1].dx())
            derivatives[t] = chain
        out: typing.Dict[int, DiffPoly] = {}
        for s, a in self.terms.items():
            for t, chain in derivatives.items():
                for l in range(s + 1):
                    if not chain[l]:
                        continue
                    piece = (a * chain[l]).scale(binomial(s, l))
                    k = s - l + t
                    out[k] = out[k] + piece if k in out else piece
        return ScalarDiffOp(self.ring, out)

    __matmul__ = compose

    def adjoint(self) -> 'ScalarDiffOp':
        out: typing.Dict[int, DiffPoly] = {}
        for j, a in self.terms.items():
            derivative = a
            for l in range(j + 1):
                piece = derivative.scale(binomial(j, l) * (-1) ** j)
                out[j - l] = out[j - l] + piece if j - l in out else piece
                derivative = derivative.dx()
        return ScalarDiffOp(self.ring, out)

    def apply(self, v: DiffPoly) -> DiffPoly:
        result = DiffPoly.zero(self.ring)
        if not self.terms:
            return result
        derivative = v
        for s in range(self.order + 1):
            if s in self.terms:
                result = result + self.terms[s] * derivative
            derivative = derivative.dx()
        return result

    def map_coefficients(self, fn: typing.Callable[[DiffPoly], DiffPoly],
                         ring: typing.Optional[Ring] = None) -> 'ScalarDiffOp':
        return ScalarDiffOp(ring or self.ring, {s: fn(a) for s, a in self.terms.items()})

    def eps_part(self, k: int) -> 'ScalarDiffOp':
        return self.map_coefficients(lambda a: a.eps_part(k))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for s in sorted(self.terms):
            a = self.terms[s]
            if s == 0:
                parts.append(str(a))
            else:
                d = "dx" if s == 1 else f"dx^{s}"
                parts.append(d if a == 1 else f"({a})*{d}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"ScalarDiffOp({self})"


class MatDiffOp:
    """N x N matrix of differential operators, entries addressed with 1-based indices."""
    __slots__ = ('ring', 'rows', '_hash')

    def __init__(self, ring: Ring, rows: typing.Sequence[typing.Sequence[ScalarDiffOp]]) -> None:
        self.ring = ring
        self.rows: typing.Tuple[typing.Tuple[ScalarDiffOp, ...], ...] = tuple(tuple(row) for row in rows)
        n = len(self.rows)
        for row in self.rows:
            if len(row) != n:
                raise SignatureError("operator matrices must be square")
            for entry in row:
                if entry.ring != ring:
                    raise SignatureError(f"operator entry lives in {entry.ring}, expected {ring}")
        self._hash: typing.Optional[int] = None

    @classmethod
    def zero(cls, ring: Ring, n: typing.Optional[int] = None) -> 'MatDiffOp':
        size = ring.n if n is None else n
        return cls(ring, [[ScalarDiffOp.zero(ring) for _ in range(size)] for _ in range(size)])

    @classmethod
    def from_function(cls, ring: Ring, fn: typing.Callable[[int, int], ScalarDiffOp],
                      n: typing.Optional[int] = None) -> 'MatDiffOp':
        size = ring.n if n is None else n
        return cls(ring, [[fn(a, b) for b in range(1, size + 1)] for a in range(1, size + 1)])

    @classmethod
    def constant(cls, ring: Ring, m: Matrix, s: int = 0) -> 'MatDiffOp':
        """The constant matrix m times dx^s."""
        return cls.from_function(ring, lambda a, b: ScalarDiffOp.dx_power(ring, s, m[a - 1][b - 1]), len(m))

    @classmethod
    def diagonal(cls, ring: Ring, values: typing.Sequence[Scalar]) -> 'MatDiffOp':
        return cls.from_function(
            ring, lambda a, b: ScalarDiffOp.dx_power(ring, 0, values[a - 1] if a == b else 0), len(values)
        )

    @property
    def n(self) -> int:
        return len(self.rows)

    def entry(self, alpha: int, beta: int) -> ScalarDiffOp:
        return self.rows[alpha - 1][beta - 1]

    def __getitem__(self, key: typing.Tuple[int, int]) -> ScalarDiffOp:
        return self.entry(*key)

    def coeff(self, alpha: int, beta: int, s: int) -> DiffPoly:
        return self.entry(alpha, beta).coeff(s)

    @property
    def order(self) -> int:
        return max((e.order for row in self.rows for e in row), default=-1)

    def __eq__(self, other: typing.Any) -> bool:
        if not isinstance(other, MatDiffOp):
            return NotImplemented
        return self.ring == other.ring and self.rows == other.rows

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.rows)
        return self._hash

    def __reduce__(self) -> typing.Tuple[typing.Any, ...]:
        return MatDiffOp, (self.ring, self.rows)

    def _check(self, other: 'MatDiffOp') -> None:
        if other.ring != self.ring or other.n != self.n:
            raise SignatureError("operator matrices of different shape or ring")

    def __add__(self, other: 'MatDiffOp') -> 'MatDiffOp':
        self._check(other)
        return MatDiffOp(self.ring, [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)])

    def __neg__(self) -> 'MatDiffOp':
        return MatDiffOp(self.ring, [[-a for a in row] for row in self.rows])

    def __sub__(self, other: 'MatDiffOp') -> 'MatDiffOp':
        return self + (-other)

    def scale(self, c: Scalar) -> 'MatDiffOp':
        return MatDiffOp(self.ring, [[a.scale(c) for a in row] for row in self.rows])

    def compose(self, other: 'MatDiffOp') -> 'MatDiffOp':
        self._check(other)
        n = self.n

        def entry(a: int, b: int) -> ScalarDiffOp:
            total = ScalarDiffOp.zero(self.ring)
            for m in range(n):
                left, right = self.rows[a - 1][m], other.rows[m][b - 1]
                if left and right:
                    total = total + left.compose(right)
            return total
        return MatDiffOp.from_function(self.ring, entry, n)

    __matmul__ = compose

    def adjoint(self) -> 'MatDiffOp':
        return MatDiffOp.from_function(self.ring, lambda a, b: self.rows[b - 1][a - 1].adjoint(), self.n)

    def transpose(self) -> 'MatDiffOp':
        return MatDiffOp.from_function(self.ring, lambda a, b: self.rows[b - 1][a - 1], self.n)

    def apply(self, v: typing.Sequence[DiffPoly]) -> typing.Tuple[DiffPoly, ...]:
        if len(v) != self.n:
            raise SignatureError(f"cannot apply a {self.n}x{self.n} operator to {len(v)} components")
        out = []
        for row in self.rows:
            total = DiffPoly.zero(self.ring)
            for entry, component in zip(row, v):
                if entry and component:
                    total = total + entry.apply(component)
            out.append(total)
        return tuple(out)

    def map_coefficients(self, fn: typing.Callable[[DiffPoly], DiffPoly],
                         ring: typing.Optional[Ring] = None) -> 'MatDiffOp':
        target = ring or self.ring
        return MatDiffOp(target, [[e.map_coefficients(fn, target) for e in row] for row in self.rows])

    def degree_part(self, k: int) -> 'MatDiffOp':
        return self.map_coefficients(lambda a: a.eps_part(k))

    def left_matrix(self, m: Matrix) -> 'MatDiffOp':
        return MatDiffOp.constant(self.ring, m).compose(self)

    def right_matrix(self, m: Matrix) -> 'MatDiffOp':
        return self.compose(MatDiffOp.constant(self.ring, m))

    def is_skew(self) -> bool:
        return self.adjoint() == -self

    def check_skew(self) -> None:
        if not self.is_skew():
            raise NotSkewError("operator is not skew-symmetric")

    def is_zero(self) -> bool:
        return all(not e for row in self.rows for e in row)

    def rehome(self, ring: Ring) -> 'MatDiffOp':
        return self.map_coefficients(lambda a: a.rehome(ring), ring)

    def __str__(self) -> str:
        return "\n".join(
            f"[{a},{b}] {self.rows[a - 1][b - 1]}" for a in range(1, self.n + 1) for b in range(1, self.n + 1)
        )

    def __repr__(self) -> str:
        return f"MatDiffOp(n={self.n})"


def op_compose(a: MatDiffOp, b: MatDiffOp) -> MatDiffOp:
    return a.compose(b)


def op_adjoint(k: MatDiffOp) -> MatDiffOp:
    return k.adjoint()


def op_apply(k: MatDiffOp, v: typing.Sequence[DiffPoly]) -> typing.Tuple[DiffPoly, ...]:
    return k.apply(v)


def op_degree_part(k: MatDiffOp, eps_order: int) -> MatDiffOp:
    return k.degree_part(eps_order)


def coeff_extract(k: MatDiffOp, eps_order: int, alpha: int, beta: int, s: int) -> DiffPoly:
    return k.coeff(alpha, beta, s).eps_part(eps_order)


def poisson_bracket(f: 'MultiVector', g: 'MultiVector', k: MatDiffOp) -> 'LocalFunctional':
    from drham.variational import LocalFunctional, as_functional
    k.check_skew()
    f, g = as_functional(f), as_functional(g)
    flow = k.apply([g.var_u(b) for b in k.ring.fields])
    density = DiffPoly.zero(k.ring)
    for mu in k.ring.fields:
        density = density + f.var_u(mu) * flow[mu - 1]
    return LocalFunctional(density)


class MiuraMap:
    """
    u -> u~ with u~^alpha given as differential polynomials in u. Composition
    a.compose(b) applies b first.
    """
    __slots__ = ('ring', 'images', '_linear')

    def __init__(self, images: typing.Sequence[DiffPoly]) -> None:
        if not images:
            raise SignatureError("a Miura transformation needs at least one component")
        self.ring: Ring = images[0].ring
        if len(images) != self.ring.n or any(img.ring != self.ring for img in images):
            raise SignatureError("Miura images must be one per field, all in the same ring")
        if any(img.has_thetas() for img in images):
            raise UnsupportedInputError("Miura images must have theta degree 0")
        self.images: typing.Tuple[DiffPoly, ...] = tuple(images)
        self._linear: typing.Optional[Matrix] = None

    @classmethod
    def identity(cls, ring: Ring) -> 'MiuraMap':
        return cls([DiffPoly.field(ring, a) for a in ring.fields])

    def __eq__(self, other: typing.Any) -> bool:
        if not isinstance(other, MiuraMap):
            return NotImplemented
        return self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __reduce__(self) -> typing.Tuple[typing.Any, ...]:
        return MiuraMap, (self.images,)

    def linear_part(self) -> Matrix:
        if self._linear is None:
            rows = []
            for img in self.images:
                row = []
                for b in self.ring.fields:
                    mono = Monomial(jets=((JetVar(U, b, 0), 1),))
                    row.append(img.terms.get(mono, Fraction(0)))
                rows.append(tuple(row))
            self._linear = tuple(rows)
        return self._linear

    @property
    def is_close_to_identity(self) -> bool:
        n = self.ring.n
        return self.linear_part() == tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))

    def apply(self, p: DiffPoly) -> DiffPoly:
        """Express p(u~) in the u-variables."""
        return p.substitute({(U, a): img for a, img in enumerate(self.images, 1)})

    def compose(self, other: 'MiuraMap') -> 'MiuraMap':
        return MiuraMap([other.apply(img) for img in self.images])

    def inverse(self, max_iterations: int = MIURA_MAX_ITERATIONS) -> 'MiuraMap':
        """
        Fixed-point iteration u = A^-1 (u~ - N(u)) where A is the linear part at the
        origin; converges degree by degree for triangular maps.
        """
        try:
            a_inv = invert(self.linear_part())
        except SingularMetricError:
            raise SingularMetricError("the leading part of the Miura transformation is not invertible")
        ring = self.ring
        fields = [DiffPoly.field(ring, b) for b in ring.fields]
        a = self.linear_part()
        nonlinear = [
            img - sum((fields[b].scale(a[i][b]) for b in range(ring.n)), DiffPoly.zero(ring))
            for i, img in enumerate(self.images)
        ]

        def solve(rhs: typing.List[DiffPoly]) -> typing.List[DiffPoly]:
            return [
                sum((rhs[b].scale(a_inv[i][b]) for b in range(ring.n)), DiffPoly.zero(ring)) for i in range(ring.n)
            ]

        guess = solve(fields)
        for iteration in range(max_iterations):
            images = {(U, b): guess[b - 1] for b in ring.fields}
            nxt = solve([fields[i] - nonlinear[i].substitute(images) for i in range(ring.n)])
            if nxt == guess:
                log.debug("Miura inverse converged after %i iterations", iteration)
                return MiuraMap(guess)
            guess = nxt
        raise TruncationError(f"Miura inverse did not converge within {max_iterations} iterations")


def miura_op(k: MatDiffOp, m: MiuraMap, inverse: typing.Optional[MiuraMap] = None) -> MatDiffOp:
    """L(u~) o K o L(u~)^dagger with coefficients re-expressed in the u~ variables."""
    from drham.variational import frechet
    if k.ring != m.ring:
        raise SignatureError("Miura transformation and operator live in different rings")
    inverse = inverse or m.inverse()
    jacobian = MatDiffOp(k.ring, [frechet(img) for img in m.images])
    transformed = jacobian.compose(k).compose(jacobian.adjoint())
    return transformed.map_coefficients(inverse.apply)


def miura_functional(h: DiffPoly, m: MiuraMap, inverse: typing.Optional[MiuraMap] = None) -> DiffPoly:
    """A density in u re-expressed in the u~ variables."""
    return (inverse or m.inverse()).apply(h)


def _embed_monomial(mono: Monomial, shift: int, ring: Ring) -> typing.Optional[Monomial]:
    power = mono.standard_degree + shift
    if mono.eps:
        raise UnsupportedInputError("eps-embedding expects eps-free input")
    if power < 0:
        raise UnsupportedInputError(f"{mono} has negative standard degree after embedding")
    if ring.max_eps is not None and power > ring.max_eps:
        return None
    return mono._replace(eps=power)


def embed_eps_density(f: DiffPoly, ring: Ring) -> DiffPoly:
    """Give each term of standard degree k the factor eps^k."""
    out = {}
    for mono, c in f.terms.items():
        new = _embed_monomial(mono, 0, ring)
        if new is not None:
            out[new] = c
    return DiffPoly(ring, out)


def embed_eps(k: MatDiffOp, ring: Ring) -> MatDiffOp:
    """Give the term a*dx^s, deg a = d, the factor eps^(s+d-1) so every term has degree 1."""
    rows = []
    for row in k.rows:
        new_row = []
        for entry in row:
            terms = {}
            for s, a in entry.terms.items():
                out = {}
                for mono, c in a.terms.items():
                    new = _embed_monomial(mono, s - 1, ring)
                    if new is not None:
                        out[new] = c
                terms[s] = DiffPoly(ring, out)
            new_row.append(ScalarDiffOp(ring, terms))
        rows.append(new_row)
    return MatDiffOp(ring, rows)
