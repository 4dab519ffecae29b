import logging
import typing
from fractions import Fraction
from drham.algebra import AUX, DiffPoly, Ring
from drham.constants import PDO_DEPTH_MARGIN
from drham.fault import DRHamError, SignatureError, TruncationError, UnsupportedInputError
from drham.operators import MatDiffOp, MiuraMap, ScalarDiffOp, embed_eps, embed_eps_density, miura_functional, \
    miura_op
from drham.util import binomial, r_factorial
from drham.variational import as_functional

log = logging.getLogger(__name__)

SUPPORTED_R = (2, 3, 4, 5)


class PseudoDiffOp:
    """
    sum_n a_n dx^n with finitely many n >= 0. Every coefficient of order >= low is
    exact; low is None for operators known exactly (finite Laurent polynomials).
    """
    __slots__ = ('ring', 'terms', 'low')

    def __init__(self, ring: Ring, terms: typing.Optional[typing.Mapping[int, DiffPoly]] = None,
                 low: typing.Optional[int] = None) -> None:
        self.ring = ring
        self.low = low
        self.terms: typing.Dict[int, DiffPoly] = {}
        for n, a in (terms or {}).items():
            if a.ring != ring:
                raise SignatureError(f"coefficient of dx^{n} lives in {a.ring}, expected {ring}")
            if a and (low is None or n >= low):
                self.terms[n] = a

    @classmethod
    def dx_power(cls, ring: Ring, n: int) -> 'PseudoDiffOp':
        return cls(ring, {n: DiffPoly.one(ring)})

    @classmethod
    def multiplication(cls, a: DiffPoly) -> 'PseudoDiffOp':
        return cls(a.ring, {0: a})

    @property
    def top(self) -> typing.Optional[int]:
        return max(self.terms, default=None)

    @property
    def bottom(self) -> typing.Optional[int]:
        return min(self.terms, default=None)

    def coeff(self, n: int) -> DiffPoly:
        if self.low is not None and n < self.low:
            raise TruncationError(f"order {n} is below the certified order {self.low}")
        return self.terms.get(n, DiffPoly.zero(self.ring))

    def residue(self) -> DiffPoly:
        return self.coeff(-1)

    def plus_part(self) -> 'PseudoDiffOp':
        if self.low is not None and self.low > 0:
            raise TruncationError(f"the differential part needs order 0, certified down to {self.low}")
        return PseudoDiffOp(self.ring, {n: a for n, a in self.terms.items() if n >= 0})

    def minus_part(self) -> 'PseudoDiffOp':
        return PseudoDiffOp(self.ring, {n: a for n, a in self.terms.items() if n < 0}, self.low)

    def truncated(self, low: int) -> 'PseudoDiffOp':
        return PseudoDiffOp(self.ring, self.terms, low if self.low is None else max(low, self.low))

    def __eq__(self, other: typing.Any) -> bool:
        if not isinstance(other, PseudoDiffOp):
            return NotImplemented
        return self.ring == other.ring and self.low == other.low and self.terms == other.terms

    __hash__ = None  # type: ignore

    def __add__(self, other: 'PseudoDiffOp') -> 'PseudoDiffOp':
        if other.ring != self.ring:
            raise SignatureError(f"incompatible rings {self.ring} and {other.ring}")
        lows = [x for x in (self.low, other.low) if x is not None]
        terms = dict(self.terms)
        for n, a in other.terms.items():
            terms[n] = terms[n] + a if n in terms else a
        return PseudoDiffOp(self.ring, terms, max(lows) if lows else None)

    def __neg__(self) -> 'PseudoDiffOp':
        return PseudoDiffOp(self.ring, {n: -a for n, a in self.terms.items()}, self.low)

    def __sub__(self, other: 'PseudoDiffOp') -> 'PseudoDiffOp':
        return self + (-other)

    def scale(self, c: typing.Union[int, Fraction]) -> 'PseudoDiffOp':
        return PseudoDiffOp(self.ring, {n: a.scale(c) for n, a in self.terms.items()}, self.low)

    def compose(self, other: 'PseudoDiffOp', floor: typing.Optional[int] = None) -> 'PseudoDiffOp':
        return pdo_compose(self, other, floor)

    __matmul__ = compose

    def power(self, k: int, floor: typing.Optional[int] = None) -> 'PseudoDiffOp':
        """self^k for k >= 1, keeping only the orders a final floor needs."""
        if k < 1:
            raise UnsupportedInputError("pseudo-differential powers start at 1")
        top = self.top or 0
        result = self
        for j in range(2, k + 1):
            step = None if floor is None else floor - (k - j) * top
            result = pdo_compose(result, self, step)
        return result if floor is None else result.truncated(floor)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = [f"({self.terms[n]})*dx^{n}" for n in sorted(self.terms, reverse=True)]
        if self.low is not None:
            parts.append(f"O(dx^{self.low - 1})")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"PseudoDiffOp({self})"


def pdo_compose(a: PseudoDiffOp, b: PseudoDiffOp, floor: typing.Optional[int] = None) -> PseudoDiffOp:
    """
    dx^k o c = sum_l C(k, l) (dx^l c) dx^(k-l) for all integers k. The product is
    exact down to max(a.low + b.top, b.low + a.top) and never below `floor`.
    """
    if b.ring != a.ring:
        raise SignatureError(f"incompatible rings {a.ring} and {b.ring}")
    if not a.terms or not b.terms:
        lows = [x for x in (a.low, b.low, floor) if x is not None]
        return PseudoDiffOp(a.ring, {}, max(lows) if lows else None)
    certified = []
    if a.low is not None:
        certified.append(a.low + b.top)
    if b.low is not None:
        certified.append(b.low + a.top)
    if floor is not None:
        certified.append(floor)
    low = max(certified) if certified else None
    if low is None and a.bottom < 0:
        raise TruncationError("composition with negative powers of dx needs a truncation order")
    derivatives: typing.Dict[int, typing.List[DiffPoly]] = {n: [c] for n, c in b.terms.items()}
    out: typing.Dict[int, DiffPoly] = {}
    for i, x in a.terms.items():
        for j, chain in derivatives.items():
            l = 0
            while True:
                order = i + j - l
                if low is not None and order < low:
                    break
                if i >= 0 and l > i:
                    break
                while len(chain) <= l:
                    chain.append(chain[-1].dx())
                if chain[l]:
                    piece = (x * chain[l]).scale(binomial(i, l))
                    out[order] = out[order] + piece if order in out else piece
                l += 1
    return PseudoDiffOp(a.ring, out, low)


def pdo_root(lax: PseudoDiffOp, r: int, depth: int) -> PseudoDiffOp:
    """
    The unique A = dx + sum_(n>=0) x_n dx^-n with A^r = lax, solved order by order:
    x_n enters the dx^(r-1-n) coefficient of A^r only as r*x_n. The result is
    certified down to dx^-(depth-1) and checked by re-powering.
    """
    ring = lax.ring
    if lax.top != r or lax.coeff(r) != 1 or lax.coeff(r - 1):
        raise UnsupportedInputError(f"root extraction needs dx^{r} + (no dx^{r - 1} term) + lower terms")
    one = DiffPoly.one(ring)
    solved: typing.Dict[int, DiffPoly] = {1: one}
    for n in range(depth):
        order = r - 1 - n
        ansatz = PseudoDiffOp(ring, solved)
        current = ansatz.power(r, order)
        target = lax.coeff(order) if order >= 0 else DiffPoly.zero(ring)
        solved[-n] = (target - current.coeff(order)).scale(Fraction(1, r))
        log.debug("root of order %i: coefficient of dx^%i has %i terms", r, -n, len(solved[-n]))
    root = PseudoDiffOp(ring, solved, -(depth - 1))
    check = root.power(r)
    for order in range(check.low, r + 1):
        expected = lax.coeff(order) if order >= 0 else DiffPoly.zero(ring)
        if check.coeff(order) != expected:
            raise TruncationError(f"re-powering the root of order {r} fails at dx^{order}")
    return root


def default_depth(r: int, a_max: int) -> int:
    return r * (a_max + 2) + (r - 1) + PDO_DEPTH_MARGIN


class GDContext:
    """
    The Lax operator L = dx^r + f_(r-2) dx^(r-2) + ... + f_0 with f_j stored as the
    field u^(j+1); the auxiliary variables X_0, ..., X_(r-1) are X1, ..., Xr.
    """

    def __init__(self, r: int, depth: typing.Optional[int] = None, a_max: int = 1) -> None:
        if r not in SUPPORTED_R:
            raise UnsupportedInputError(f"r = {r} is outside the supported range {SUPPORTED_R}")
        self.r = r
        self.depth = depth if depth is not None else default_depth(r, a_max)
        self.ring = Ring(r - 1)
        self.aux_ring = Ring(r - 1, aux=r)
        self._root: typing.Optional[PseudoDiffOp] = None
        self._k1: typing.Optional[MatDiffOp] = None
        self._k2: typing.Optional[MatDiffOp] = None
        self._hamiltonians: typing.Dict[typing.Tuple[int, int], DiffPoly] = {}

    def f(self, j: int, ring: typing.Optional[Ring] = None) -> DiffPoly:
        """f_j with the conventions f_r = 1, f_(r-1) = 0."""
        ring = ring or self.ring
        if j == self.r:
            return DiffPoly.one(ring)
        if j == self.r - 1:
            return DiffPoly.zero(ring)
        return DiffPoly.field(ring, j + 1)

    def x(self, j: int) -> DiffPoly:
        return DiffPoly.aux_var(self.aux_ring, j + 1)

    def lax(self, ring: typing.Optional[Ring] = None) -> PseudoDiffOp:
        ring = ring or self.ring
        return PseudoDiffOp(ring, {j: self.f(j, ring) for j in range(self.r + 1)})

    def root(self) -> PseudoDiffOp:
        if self._root is None:
            self._root = pdo_root(self.lax(), self.r, self.depth)
        return self._root

    def fractional_power(self, a: int, alpha: int, floor: typing.Optional[int] = None) -> PseudoDiffOp:
        """L^(a + alpha/r) = L^a o (L^(1/r))^alpha, down to `floor` when given."""
        inner = None if floor is None else floor - a * self.r
        root_power = self.root().power(alpha, inner) if alpha else PseudoDiffOp.dx_power(self.ring, 0)
        if a == 0:
            return root_power
        return self.lax().power(a).compose(root_power, floor)

    def residue(self, a: int, alpha: int) -> DiffPoly:
        return self.fractional_power(a, alpha, -1).residue()

    def _dual(self, count: int) -> PseudoDiffOp:
        """sum_(j<count) dx^-(j+1) o X_j, certified down to dx^-r."""
        ring = self.aux_ring
        total = PseudoDiffOp(ring, {}, -self.r)
        for j in range(count):
            total = total + pdo_compose(PseudoDiffOp.dx_power(ring, -(j + 1)),
                                        PseudoDiffOp.multiplication(self.x(j)), -self.r)
        return total

    def _collect(self, op: PseudoDiffOp) -> MatDiffOp:
        size = self.r - 1
        rows = []
        for alpha in range(size):
            c = op.coeff(alpha)
            row = []
            for beta in range(size):
                parts = c.partials(AUX, beta + 1)
                row.append(ScalarDiffOp(self.ring, {i: p.rehome(self.ring) for i, p in parts.items()}))
            rows.append(row)
        return MatDiffOp(self.ring, rows)

    def k1(self) -> MatDiffOp:
        """[X, L]_+ = sum_(a,b) (K1^(ab) X_b) dx^a"""
        if self._k1 is None:
            lax = self.lax(self.aux_ring)
            x = self._dual(self.r - 1)
            bracket = (pdo_compose(x, lax) - pdo_compose(lax, x)).plus_part()
            self._k1 = self._collect(bracket)
        return self._k1

    def correction(self) -> DiffPoly:
        """f(X) = 1/r sum_(j<=r-2, 1<=a<=r-j) C(-j-1, a) dx^(a-1) (f_(j+a) X_j)"""
        ring = self.aux_ring
        total = DiffPoly.zero(ring)
        for j in range(self.r - 1):
            for a in range(1, self.r - j + 1):
                c = binomial(-j - 1, a)
                term = self.f(j + a, ring) * self.x(j)
                if c and term:
                    total = total + term.dx(a - 1).scale(c)
        return total.scale(Fraction(1, self.r))

    def k2(self) -> MatDiffOp:
        """(L o X~)_+ o L - L o (X~ o L)_+ with X_(r-1) replaced by f(X)."""
        if self._k2 is None:
            lax = self.lax(self.aux_ring)
            x = self._dual(self.r)
            left = pdo_compose(pdo_compose(lax, x).plus_part(), lax)
            right = pdo_compose(lax, pdo_compose(x, lax).plus_part())
            total = left - right
            images = {(AUX, self.r): self.correction()}
            reduced = PseudoDiffOp(
                self.aux_ring, {n: c.substitute(images) for n, c in total.terms.items() if n <= self.r - 2}
            )
            self._k2 = self._collect(reduced)
        return self._k2

    def hamiltonian(self, alpha: int, a: int) -> DiffPoly:
        """-r/((a+1)r + alpha) res L^(a+1+alpha/r)"""
        if not 1 <= alpha <= self.r - 1 or a < -1:
            raise UnsupportedInputError(f"no GD Hamiltonian with alpha={alpha}, a={a}")
        key = (alpha, a)
        if key not in self._hamiltonians:
            residue = self.residue(a + 1, alpha)
            self._hamiltonians[key] = residue.scale(Fraction(-self.r, (a + 1) * self.r + alpha))
        return self._hamiltonians[key]

    def w_hat(self) -> MiuraMap:
        """w^a = res L^((r-a)/r) / (r-a), before the (-r)^(k/2) scalings."""
        return MiuraMap([self.residue(0, self.r - a).scale(Fraction(1, self.r - a)) for a in range(1, self.r)])


def gd_hamiltonian(ctx: GDContext, alpha: int, a: int) -> DiffPoly:
    return ctx.hamiltonian(alpha, a)


def gd_k1(ctx: GDContext) -> MatDiffOp:
    return ctx.k1()


def gd_k2(ctx: GDContext) -> MatDiffOp:
    return ctx.k2()


def gd_recursion_residual(ctx: GDContext, alpha: int, a: int) -> typing.Tuple[DiffPoly, ...]:
    """K2 dh_(alpha,a) + K1 dh_(alpha,a+1), zero along the GD hierarchy."""
    lhs = ctx.k2().apply(as_functional(ctx.hamiltonian(alpha, a)).gradient())
    rhs = ctx.k1().apply(as_functional(ctx.hamiltonian(alpha, a + 1)).gradient())
    return tuple(x + y for x, y in zip(lhs, rhs))


def gd_casimir_residual(ctx: GDContext, alpha: int) -> typing.Tuple[DiffPoly, ...]:
    return ctx.k1().apply(as_functional(ctx.hamiltonian(alpha, -1)).gradient())


# r-spin normalization, tracked as exact powers of s = sqrt(-r)


def _field_weight(r: int, jets: typing.Iterable[typing.Tuple[typing.Any, int]]) -> int:
    return sum((r - v.index - 1) * e for v, e in jets)


def _s_power(r: int, exponent: int, c: Fraction) -> Fraction:
    if exponent % 2:
        raise DRHamError(f"an odd power of sqrt(-{r}) survives the r-spin normalization")
    return c * Fraction(-r) ** (exponent // 2)


def rescale_density(h: DiffPoly, r: int, extra: int, target: Ring) -> DiffPoly:
    """w^a = s^-(r-a-1) w_hat^a applied to a density in w_hat, times s^extra."""
    terms = {}
    for mono, c in h.terms.items():
        terms[mono] = _s_power(r, extra + _field_weight(r, mono.jets), c)
    return DiffPoly(target, terms)


def rescale_operator(k: MatDiffOp, r: int, extra: int, target: Ring) -> MatDiffOp:
    def entry(alpha: int, beta: int) -> ScalarDiffOp:
        shift = extra - (r - alpha - 1) - (r - beta - 1)
        return ScalarDiffOp(target, {
            s: rescale_density(a, r, shift, target) for s, a in k.entry(alpha, beta).terms.items()
        })
    return MatDiffOp.from_function(target, entry, k.n)


class RSpinPackage(typing.NamedTuple):
    r: int
    k1: MatDiffOp
    k2: MatDiffOp
    hamiltonians: typing.Dict[typing.Tuple[int, int], DiffPoly]

    def recursion_factor(self, alpha: int, d: int) -> Fraction:
        return Fraction(alpha + (d + 1) * self.r, self.r)

    def recursion_residual(self, alpha: int, d: int) -> typing.Tuple[DiffPoly, ...]:
        """K2 dh_(a,d) - (a + (d+1)r)/r K1 dh_(a,d+1)"""
        lhs = self.k2.apply(as_functional(self.hamiltonians[(alpha, d)]).gradient())
        rhs = self.k1.apply(as_functional(self.hamiltonians[(alpha, d + 1)]).gradient())
        factor = self.recursion_factor(alpha, d)
        return tuple(x - y.scale(factor) for x, y in zip(lhs, rhs))


def rspin_package(r: int, d_max: int = 0, max_eps: typing.Optional[int] = None,
                  depth: typing.Optional[int] = None, ctx: typing.Optional[GDContext] = None) -> RSpinPackage:
    """
    K1 = (-r)^(r/2) K1_GD, K2 = K2_GD and h_(a,d) = h_GD_(a,d) / ((-r)^(P/2) (a+rd)!_r),
    P = a - 1 + r(d+1) - 2d, all moved to w through w^a = res L^((r-a)/r) / ((r-a) (-r)^((r-a-1)/2))
    and embedded in eps by standard degree. Hamiltonians cover -1 <= d <= d_max + 1.
    """
    ctx = ctx or GDContext(r, depth, d_max + 1)
    target = Ring(r - 1, max_eps=max_eps)
    m = ctx.w_hat()
    inverse = m.inverse()
    log.debug("r-spin %i: w-hat Miura inverted", r)
    k1 = embed_eps(rescale_operator(miura_op(ctx.k1(), m, inverse), r, r, ctx.ring), target)
    k2 = embed_eps(rescale_operator(miura_op(ctx.k2(), m, inverse), r, 0, ctx.ring), target)
    hamiltonians = {}
    for alpha in range(1, r):
        for d in range(-1, d_max + 2):
            density = miura_functional(ctx.hamiltonian(alpha, d), m, inverse)
            p = alpha - 1 + r * (d + 1) - 2 * d
            scaled = rescale_density(density, r, -p, ctx.ring).scale(Fraction(1, r_factorial(alpha + r * d, r)))
            hamiltonians[(alpha, d)] = embed_eps_density(scaled, target)
    return RSpinPackage(r, k1, k2, hamiltonians)


def dr_miura(r: int, ring: Ring) -> MiuraMap:
    """u -> w for the r-spin theories."""
    if r not in SUPPORTED_R:
        raise UnsupportedInputError(f"no DR Miura transformation for r = {r}")
    images = [DiffPoly.field(ring, a) for a in ring.fields]
    eps2 = DiffPoly.eps(ring, 2)
    if r == 4:
        images[0] = images[0] + (eps2 * DiffPoly.field(ring, 3, 2)).scale(Fraction(1, 96))
    elif r == 5:
        images[0] = images[0] + (eps2 * DiffPoly.field(ring, 3, 2)).scale(Fraction(1, 60))
        images[1] = images[1] + (eps2 * DiffPoly.field(ring, 4, 2)).scale(Fraction(1, 60))
    return MiuraMap(images)


def miura_to_dr(r: int, k: MatDiffOp) -> MatDiffOp:
    """A DR-side operator in u moved to the r-spin variables w."""
    if k.n != r - 1:
        raise SignatureError(f"the {r}-spin theory has {r - 1} fields, operator has {k.n}")
    if r in (2, 3):
        return k
    return miura_op(k, dr_miura(r, k.ring))
