import bisect
import logging
import math
import typing
from fractions import Fraction
from drham.fault import SignatureError, UnsupportedInputError
from drham.util import Scalar, format_fraction

if typing.TYPE_CHECKING:
    from drham.drk2 import HomogeneityData

log = logging.getLogger(__name__)

# kinds of commuting jet variables
U = 0
AUX = 1
KIND_NAMES = {U: "u", AUX: "X"}


class JetVar(typing.NamedTuple):
    kind: int
    index: int
    order: int

    def shifted(self, n: int = 1) -> 'JetVar':
        return JetVar(self.kind, self.index, self.order + n)

    def __str__(self) -> str:
        name = f"{KIND_NAMES[self.kind]}{self.index}"
        return name if not self.order else f"{name}_{self.order}"


class ThetaVar(typing.NamedTuple):
    index: int
    order: int

    def __str__(self) -> str:
        return f"th{self.index}_{self.order}"


class ExtGen(typing.NamedTuple):
    """
    The transcendental generator exp(rate * u^index). Its derivation table has the
    single entry d(gen)/du^index = rate * gen, so it commutes with everything and
    is closed under differentiation.
    """
    name: str
    index: int
    rate: Fraction

    def derivation_table(self, ring: 'Ring') -> typing.Dict[int, 'DiffPoly']:
        return {self.index: DiffPoly.gen(ring, self.name).scale(self.rate)}


Jets = typing.Tuple[typing.Tuple[JetVar, int], ...]
Thetas = typing.Tuple[ThetaVar, ...]
Gens = typing.Tuple[typing.Tuple[str, int], ...]


class Monomial(typing.NamedTuple):
    eps: int = 0
    jets: Jets = ()
    thetas: Thetas = ()
    gens: Gens = ()

    @property
    def standard_degree(self) -> int:
        return sum(v.order * e for v, e in self.jets) + sum(t.order for t in self.thetas) - self.eps

    @property
    def theta_degree(self) -> int:
        return len(self.thetas)

    @property
    def u_degree(self) -> int:
        return sum(e for v, e in self.jets if v.kind == U)

    def is_scalar(self) -> bool:
        return not (self.jets or self.thetas or self.gens)

    def __str__(self) -> str:
        factors = []
        if self.eps:
            factors.append("eps" if self.eps == 1 else f"eps^{self.eps}")
        for v, e in self.jets:
            factors.append(str(v) if e == 1 else f"{v}^{e}")
        for name, e in self.gens:
            factors.append(name if e == 1 else f"{name}^{e}")
        factors.extend(str(t) for t in self.thetas)
        return "*".join(factors)


ONE = Monomial()


class Ring(typing.NamedTuple):
    n: int
    aux: int = 0
    generators: typing.Tuple[ExtGen, ...] = ()
    max_eps: typing.Optional[int] = None

    def generator(self, name: str) -> ExtGen:
        for g in self.generators:
            if g.name == name:
                return g
        raise SignatureError(f"ring has no generator named {name}")

    def truncated(self, max_eps: typing.Optional[int]) -> 'Ring':
        return self._replace(max_eps=max_eps)

    def with_aux(self, aux: int) -> 'Ring':
        return self._replace(aux=aux)

    def without_generators(self) -> 'Ring':
        return self._replace(generators=())

    @property
    def fields(self) -> range:
        return range(1, self.n + 1)

    def check_var(self, kind: int, index: int) -> None:
        bound = self.n if kind == U else self.aux
        if not 1 <= index <= bound:
            raise SignatureError(f"{KIND_NAMES[kind]}{index} is outside the ring signature {self}")

    def admits(self, mono: Monomial) -> bool:
        for v, _ in mono.jets:
            bound = self.n if v.kind == U else self.aux
            if not 1 <= v.index <= bound:
                return False
        if any(not 1 <= t.index <= self.n for t in mono.thetas):
            return False
        names = {g.name for g in self.generators}
        return all(name in names for name, _ in mono.gens)


def _merge_powers(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    merged = dict(a)
    for k, e in b:
        merged[k] = merged.get(k, 0) + e
    return tuple(sorted(merged.items()))


def _drop_power(powers: tuple, i: int) -> tuple:
    k, e = powers[i]
    if e > 1:
        return powers[:i] + ((k, e - 1),) + powers[i + 1:]
    return powers[:i] + powers[i + 1:]


def _merge_thetas(a: Thetas, b: Thetas) -> typing.Optional[typing.Tuple[int, Thetas]]:
    if not a:
        return 1, b
    if not b:
        return 1, a
    sign = 1
    for y in b:
        i = bisect.bisect_left(a, y)
        if i < len(a) and a[i] == y:
            return None
        if (len(a) - i) % 2:
            sign = -sign
    return sign, tuple(sorted(a + b))


def _sort_thetas(thetas: typing.List[ThetaVar]) -> typing.Optional[typing.Tuple[int, Thetas]]:
    items = list(thetas)
    sign = 1
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j - 1] > items[j]:
            items[j - 1], items[j] = items[j], items[j - 1]
            sign = -sign
            j -= 1
        if j > 0 and items[j - 1] == items[j]:
            return None
    return sign, tuple(items)


def _mul_monomials(a: Monomial, b: Monomial,
                   cap: typing.Optional[int]) -> typing.Optional[typing.Tuple[int, Monomial]]:
    eps = a.eps + b.eps
    if cap is not None and eps > cap:
        return None
    sign = 1
    if a.thetas and b.thetas:
        merged = _merge_thetas(a.thetas, b.thetas)
        if merged is None:
            return None
        sign, thetas = merged
    else:
        thetas = a.thetas or b.thetas
    return sign, Monomial(eps, _merge_powers(a.jets, b.jets), thetas, _merge_powers(a.gens, b.gens))


def _acc(out: typing.Dict[Monomial, Fraction], mono: Monomial, c: Fraction) -> None:
    out[mono] = out.get(mono, 0) + c


class DiffPoly:
    """
    Immutable sparse element of the ring of differential polynomials extended by odd
    variables theta, the formal parameter eps (truncated at ring.max_eps) and
    exponential generators.
    """
    __slots__ = ('ring', 'terms', '_hash')

    def __init__(self, ring: Ring, terms: typing.Optional[typing.Mapping[Monomial, Scalar]] = None) -> None:
        cap = ring.max_eps
        self.ring = ring
        self.terms: typing.Dict[Monomial, Fraction] = {
            mono: Fraction(c) for mono, c in (terms or {}).items() if c and (cap is None or mono.eps <= cap)
        }
        self._hash: typing.Optional[int] = None

    @classmethod
    def _build(cls, ring: Ring, terms: typing.Dict[Monomial, Fraction]) -> 'DiffPoly':
        cap = ring.max_eps
        poly = cls.__new__(cls)
        poly.ring = ring
        poly.terms = {m: c for m, c in terms.items() if c and (cap is None or m.eps <= cap)}
        poly._hash = None
        return poly

    @classmethod
    def zero(cls, ring: Ring) -> 'DiffPoly':
        return cls._build(ring, {})

    @classmethod
    def constant(cls, ring: Ring, c: Scalar) -> 'DiffPoly':
        return cls._build(ring, {ONE: Fraction(c)})

    @classmethod
    def one(cls, ring: Ring) -> 'DiffPoly':
        return cls.constant(ring, 1)

    @classmethod
    def var(cls, ring: Ring, kind: int, index: int, order: int = 0, power: int = 1) -> 'DiffPoly':
        ring.check_var(kind, index)
        if power == 0:
            return cls.one(ring)
        return cls._build(ring, {Monomial(jets=((JetVar(kind, index, order), power),)): Fraction(1)})

    @classmethod
    def field(cls, ring: Ring, index: int, order: int = 0, power: int = 1) -> 'DiffPoly':
        return cls.var(ring, U, index, order, power)

    @classmethod
    def aux_var(cls, ring: Ring, index: int, order: int = 0) -> 'DiffPoly':
        return cls.var(ring, AUX, index, order)

    @classmethod
    def theta(cls, ring: Ring, index: int, order: int = 0) -> 'DiffPoly':
        ring.check_var(U, index)
        return cls._build(ring, {Monomial(thetas=(ThetaVar(index, order),)): Fraction(1)})

    @classmethod
    def eps(cls, ring: Ring, power: int = 1) -> 'DiffPoly':
        return cls._build(ring, {Monomial(eps=power): Fraction(1)})

    @classmethod
    def gen(cls, ring: Ring, name: str, power: int = 1) -> 'DiffPoly':
        ring.generator(name)
        if power == 0:
            return cls.one(ring)
        return cls._build(ring, {Monomial(gens=((name, power),)): Fraction(1)})

    @classmethod
    def from_monomial(cls, ring: Ring, mono: Monomial, coeff: Scalar = 1) -> 'DiffPoly':
        if not ring.admits(mono):
            raise SignatureError(f"{mono} is outside the ring signature {ring}")
        return cls._build(ring, {mono: Fraction(coeff)})

    # ring structure

    def _check(self, other: 'DiffPoly') -> None:
        if other.ring != self.ring:
            raise SignatureError(f"incompatible rings {self.ring} and {other.ring}")

    def _lift(self, other: typing.Any) -> typing.Optional['DiffPoly']:
        if isinstance(other, DiffPoly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return DiffPoly.constant(self.ring, other)
        return None

    def __add__(self, other: typing.Any) -> 'DiffPoly':
        rhs = self._lift(other)
        if rhs is None:
            return NotImplemented
        if not rhs.terms:
            return self
        out = dict(self.terms)
        for mono, c in rhs.terms.items():
            _acc(out, mono, c)
        return DiffPoly._build(self.ring, out)

    __radd__ = __add__

    def __neg__(self) -> 'DiffPoly':
        return DiffPoly._build(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: typing.Any) -> 'DiffPoly':
        rhs = self._lift(other)
        if rhs is None:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other: typing.Any) -> 'DiffPoly':
        lhs = self._lift(other)
        if lhs is None:
            return NotImplemented
        return lhs - self

    def scale(self, c: Scalar) -> 'DiffPoly':
        if not c:
            return DiffPoly.zero(self.ring)
        c = Fraction(c)
        return DiffPoly._build(self.ring, {m: x * c for m, x in self.terms.items()})

    def __mul__(self, other: typing.Any) -> 'DiffPoly':
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        if not isinstance(other, DiffPoly):
            return NotImplemented
        self._check(other)
        cap = self.ring.max_eps
        out: typing.Dict[Monomial, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                prod = _mul_monomials(ma, mb, cap)
                if prod is not None:
                    sign, mono = prod
                    _acc(out, mono, ca * cb if sign > 0 else -ca * cb)
        return DiffPoly._build(self.ring, out)

    def __rmul__(self, other: typing.Any) -> 'DiffPoly':
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other: Scalar) -> 'DiffPoly':
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.scale(Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, n: int) -> 'DiffPoly':
        if n < 0:
            raise UnsupportedInputError("negative powers of differential polynomials")
        result = DiffPoly.one(self.ring)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other: typing.Any) -> bool:
        if isinstance(other, DiffPoly):
            return self.ring == other.ring and self.terms == other.terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.terms == ({ONE: Fraction(other)} if other else {})
        return NotImplemented

    def __ne__(self, other: typing.Any) -> bool:
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __reduce__(self) -> typing.Tuple[typing.Any, ...]:
        return DiffPoly, (self.ring, self.terms)

    def sorted_terms(self) -> typing.List[typing.Tuple[Monomial, Fraction]]:
        return sorted(self.terms.items())

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        out = ""
        for mono, c in self.sorted_terms():
            body = str(mono)
            mag = abs(c)
            if not body:
                text = format_fraction(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{format_fraction(mag)}*{body}"
            if not out:
                out = f"-{text}" if c < 0 else text
            else:
                out += f" - {text}" if c < 0 else f" + {text}"
        return out

    def __repr__(self) -> str:
        return f"DiffPoly({self})"

    # gradings

    def gradations(self) -> typing.List[typing.Tuple[int, int]]:
        """(standard degree, theta degree) of every term, in display order."""
        return [(m.standard_degree, m.theta_degree) for m, _ in self.sorted_terms()]

    def is_homogeneous(self) -> bool:
        return len(set(self.gradations())) <= 1

    @property
    def theta_degree(self) -> int:
        degrees = {m.theta_degree for m in self.terms}
        if len(degrees) > 1:
            raise UnsupportedInputError(f"mixed theta degrees {sorted(degrees)}")
        return degrees.pop() if degrees else 0

    @property
    def standard_degree(self) -> typing.Optional[int]:
        degrees = {m.standard_degree for m in self.terms}
        if len(degrees) != 1:
            return None
        return degrees.pop()

    def u_degree(self) -> int:
        return max((m.u_degree for m in self.terms), default=0)

    def has_generators(self) -> bool:
        return any(m.gens for m in self.terms)

    def has_thetas(self) -> bool:
        return any(m.thetas for m in self.terms)

    def max_eps(self) -> int:
        return max((m.eps for m in self.terms), default=0)

    def order(self, kind: int, index: int) -> int:
        """Highest jet order of the given variable, -1 when it does not occur."""
        gen_names = {g.name for g in self.ring.generators if g.index == index} if kind == U else set()
        best = -1
        for mono in self.terms:
            for v, _ in mono.jets:
                if v.kind == kind and v.index == index and v.order > best:
                    best = v.order
            if best < 0 and any(name in gen_names for name, _ in mono.gens):
                best = 0
        return best

    # derivations

    def dx(self, n: int = 1) -> 'DiffPoly':
        result = self
        for _ in range(n):
            result = result._dx_once()
        return result

    def _dx_once(self) -> 'DiffPoly':
        gens = {g.name: g for g in self.ring.generators}
        out: typing.Dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            jets = mono.jets
            for i, (v, e) in enumerate(jets):
                new_jets = _merge_powers(_drop_power(jets, i), ((v.shifted(), 1),))
                _acc(out, mono._replace(jets=new_jets), c * e)
            for i, t in enumerate(mono.thetas):
                shifted = list(mono.thetas)
                shifted[i] = ThetaVar(t.index, t.order + 1)
                normal = _sort_thetas(shifted)
                if normal is not None:
                    _acc(out, mono._replace(thetas=normal[1]), c * normal[0])
            for name, m in mono.gens:
                g = gens[name]
                new_jets = _merge_powers(jets, ((JetVar(U, g.index, 1), 1),))
                _acc(out, mono._replace(jets=new_jets), c * m * g.rate)
        return DiffPoly._build(self.ring, out)

    def partials(self, kind: int, index: int) -> typing.Dict[int, 'DiffPoly']:
        """
        All partial derivatives d/d(var_i) of one commuting variable, keyed by jet
        order i. Generators contribute to order 0 through their derivation table.
        """
        gens = {g.name: g for g in self.ring.generators if g.index == index} if kind == U else {}
        buckets: typing.Dict[int, typing.Dict[Monomial, Fraction]] = {}
        for mono, c in self.terms.items():
            for i, (v, e) in enumerate(mono.jets):
                if v.kind == kind and v.index == index:
                    _acc(buckets.setdefault(v.order, {}), mono._replace(jets=_drop_power(mono.jets, i)), c * e)
            for name, m in mono.gens:
                if name in gens:
                    _acc(buckets.setdefault(0, {}), mono, c * m * gens[name].rate)
        result = {}
        for order, terms in buckets.items():
            poly = DiffPoly._build(self.ring, terms)
            if poly:
                result[order] = poly
        return result

    def partial(self, kind: int, index: int, order: int) -> 'DiffPoly':
        return self.partials(kind, index).get(order, DiffPoly.zero(self.ring))

    def theta_partials(self, index: int) -> typing.Dict[int, 'DiffPoly']:
        """Left derivatives d/d(theta_{index,k}), keyed by k."""
        buckets: typing.Dict[int, typing.Dict[Monomial, Fraction]] = {}
        for mono, c in self.terms.items():
            for p, t in enumerate(mono.thetas):
                if t.index == index:
                    rest = mono._replace(thetas=mono.thetas[:p] + mono.thetas[p + 1:])
                    _acc(buckets.setdefault(t.order, {}), rest, -c if p % 2 else c)
        result = {}
        for order, terms in buckets.items():
            poly = DiffPoly._build(self.ring, terms)
            if poly:
                result[order] = poly
        return result

    def weighted_euler(self, field_weights: typing.Sequence[Scalar], order_weight: Scalar = 0,
                       shifts: typing.Sequence[Scalar] = (), eps_weight: Scalar = 0) -> 'DiffPoly':
        """
        Apply sum_(alpha,n) (w_alpha + n*order_weight) u^alpha_n d/du^alpha_n
        + sum_alpha shift_alpha d/du^alpha + eps_weight * eps d/deps.
        """
        if self.has_thetas():
            raise UnsupportedInputError("Euler-type derivations act on theta degree 0 only")
        gens = {g.name: g for g in self.ring.generators}
        out: typing.Dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            w = Fraction(eps_weight) * mono.eps
            for v, e in mono.jets:
                if v.kind == U:
                    w += (Fraction(field_weights[v.index - 1]) + Fraction(order_weight) * v.order) * e
            if w:
                _acc(out, mono, c * w)
            for name, m in mono.gens:
                g = gens[name]
                a = Fraction(field_weights[g.index - 1])
                if a:
                    new_jets = _merge_powers(mono.jets, ((JetVar(U, g.index, 0), 1),))
                    _acc(out, mono._replace(jets=new_jets), c * m * g.rate * a)
        result = DiffPoly._build(self.ring, out)
        for alpha, shift in enumerate(shifts, 1):
            if shift:
                result = result + self.partial(U, alpha, 0).scale(shift)
        return result

    # eps handling

    def eps_part(self, k: int) -> 'DiffPoly':
        return DiffPoly._build(self.ring, {m._replace(eps=0): c for m, c in self.terms.items() if m.eps == k})

    def eps_truncate(self, k: int) -> 'DiffPoly':
        return DiffPoly._build(self.ring, {m: c for m, c in self.terms.items() if m.eps <= k})

    def exp_nilpotent(self) -> 'DiffPoly':
        """exp(p) for p in the ideal generated by eps of a truncated ring."""
        if self.ring.max_eps is None or any(m.eps == 0 for m in self.terms):
            raise UnsupportedInputError(f"exp({self}) is not eps-nilpotent")
        result = DiffPoly.one(self.ring)
        term = DiffPoly.one(self.ring)
        for k in range(1, self.ring.max_eps + 1):
            term = (term * self).scale(Fraction(1, k))
            if not term:
                break
            result = result + term
        return result

    # change of ring and variables

    def rehome(self, ring: Ring) -> 'DiffPoly':
        for mono in self.terms:
            if not ring.admits(mono):
                raise SignatureError(f"{mono} is outside the ring signature {ring}")
        return DiffPoly._build(ring, dict(self.terms))

    def truncate_degree(self, degree: int) -> 'DiffPoly':
        if self.has_generators():
            raise UnsupportedInputError("expand generators before truncating by u-degree")
        return DiffPoly._build(self.ring, {m: c for m, c in self.terms.items() if m.u_degree <= degree})

    def expand_generators(self, degree: int) -> 'DiffPoly':
        """
        Replace every generator power by its Taylor polynomial and keep u-degree <= degree.
        The result lives in the ring without generators.
        """
        target = self.ring.without_generators()
        taylor: typing.Dict[typing.Tuple[str, int], DiffPoly] = {}

        def series(name: str, m: int) -> DiffPoly:
            if (name, m) not in taylor:
                g = self.ring.generator(name)
                a = g.rate * m
                u = DiffPoly.field(target, g.index)
                taylor[(name, m)] = sum(
                    ((u ** j).scale(a ** j / math.factorial(j)) for j in range(degree + 1)), DiffPoly.zero(target)
                )
            return taylor[(name, m)]

        out: typing.Dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            if mono.u_degree > degree:
                continue
            piece = DiffPoly._build(target, {mono._replace(gens=()): c})
            for name, m in mono.gens:
                piece = (piece * series(name, m)).truncate_degree(degree)
            for pm, pc in piece.terms.items():
                _acc(out, pm, pc)
        return DiffPoly._build(target, out)

    def substitute(self, images: typing.Mapping[typing.Tuple[int, int], 'DiffPoly'],
                   target: typing.Optional[Ring] = None) -> 'DiffPoly':
        """
        Replace each commuting variable (kind, index) by a DiffPoly image over the
        target ring; jets map to x-derivatives of the image. A generator exp(a*u^b)
        whose field is replaced maps to E'^m * exp(R), splitting the new exponent into
        a multiple of a target generator exponent and an eps-nilpotent remainder R.
        """
        target = target or self.ring
        if self.has_thetas():
            raise UnsupportedInputError("substitution into theta-dependent densities")
        for image in images.values():
            if image.ring != target:
                raise SignatureError("substitution images must live in the target ring")
        jet_images: typing.Dict[JetVar, DiffPoly] = {}
        powers: typing.Dict[typing.Tuple[typing.Any, int], DiffPoly] = {}
        gen_images: typing.Dict[str, DiffPoly] = {}

        def jet_image(v: JetVar) -> DiffPoly:
            if v not in jet_images:
                key = (v.kind, v.index)
                if key in images:
                    jet_images[v] = images[key] if not v.order else jet_image(v.shifted(-1)).dx()
                else:
                    jet_images[v] = DiffPoly.var(target, v.kind, v.index, v.order)
            return jet_images[v]

        def gen_image(name: str) -> DiffPoly:
            if name not in gen_images:
                g = self.ring.generator(name)
                if (U, g.index) in images:
                    gen_images[name] = _exponential_image(g, images[(U, g.index)], target)
                else:
                    gen_images[name] = DiffPoly.gen(target, name)
            return gen_images[name]

        def power(key: typing.Any, e: int, base: typing.Callable[[], DiffPoly]) -> DiffPoly:
            if (key, e) not in powers:
                powers[(key, e)] = base() if e == 1 else power(key, e - 1, base) * base()
            return powers[(key, e)]

        result: typing.Dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            piece = DiffPoly._build(target, {Monomial(eps=mono.eps): c})
            for v, e in mono.jets:
                piece = piece * power(v, e, lambda v=v: jet_image(v))
                if not piece:
                    break
            for name, e in mono.gens:
                if not piece:
                    break
                piece = piece * power(name, e, lambda name=name: gen_image(name))
            for pm, pc in piece.terms.items():
                _acc(result, pm, pc)
        return DiffPoly._build(target, result)

    # evaluation

    def at_origin(self) -> 'DiffPoly':
        """Value at u = 0 (and auxiliary variables = 0): an eps-polynomial."""
        out: typing.Dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            if not mono.jets and not mono.thetas:
                _acc(out, Monomial(eps=mono.eps), c)
        return DiffPoly._build(self.ring, out)

    def set_field_zero(self, index: int) -> 'DiffPoly':
        gens = {g.name for g in self.ring.generators if g.index == index}
        out: typing.Dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            if any(v.kind == U and v.index == index for v, _ in mono.jets):
                continue
            _acc(out, mono._replace(gens=tuple((n, e) for n, e in mono.gens if n not in gens)), c)
        return DiffPoly._build(self.ring, out)

    def integrate_field(self, index: int) -> 'DiffPoly':
        """
        Antiderivative in u^index (order 0) vanishing at u^index = 0, for densities
        polynomial in u^index times exponentials of u^index.
        """
        gens = {g.name: g for g in self.ring.generators if g.index == index}
        u0 = JetVar(U, index, 0)
        out: typing.Dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            if mono.thetas:
                raise UnsupportedInputError("integration of theta-dependent densities")
            k = 0
            rest_jets = []
            for v, e in mono.jets:
                if v == u0:
                    k = e
                elif v.kind == U and v.index == index:
                    raise UnsupportedInputError(f"integration in u{index} with jets {v} present")
                else:
                    rest_jets.append((v, e))
            rate = sum((m * gens[name].rate for name, m in mono.gens if name in gens), Fraction(0))

            def with_power(p: int, gens_kept: Gens = mono.gens) -> Monomial:
                jets = tuple(rest_jets)
                if p:
                    jets = _merge_powers(jets, ((u0, p),))
                return Monomial(mono.eps, jets, (), gens_kept)

            if rate == 0:
                _acc(out, with_power(k + 1), c / (k + 1))
                continue
            # int_0^s t^k e^{ct} dt
            falling = Fraction(1)
            for j in range(k + 1):
                _acc(out, with_power(k - j), c * (-1) ** j * falling / rate ** (j + 1))
                falling *= k - j
            bare = tuple((name, m) for name, m in mono.gens if name not in gens)
            _acc(out, with_power(0, bare), -c * (-1) ** k * math.factorial(k) / rate ** (k + 1))
        return DiffPoly._build(self.ring, out)


def _exponential_image(g: ExtGen, image: DiffPoly, target: Ring) -> DiffPoly:
    exponent = image.scale(g.rate)
    linear: typing.Dict[int, Fraction] = {}
    for mono, c in exponent.terms.items():
        if mono.eps == 0 and not mono.gens and len(mono.jets) == 1:
            v, e = mono.jets[0]
            if e == 1 and v.kind == U and v.order == 0:
                linear[v.index] = c
    result = DiffPoly.one(target)
    remainder = exponent
    for beta, c in sorted(linear.items()):
        chosen = None
        for h in target.generators:
            if h.index == beta:
                m = c / h.rate
                if m.denominator == 1 and m > 0:
                    chosen = (h, int(m))
                    break
        if chosen is None:
            raise UnsupportedInputError(f"exp({exponent}) has no image among the target generators")
        h, m = chosen
        result = result * DiffPoly.gen(target, h.name, m)
        remainder = remainder - DiffPoly.field(target, beta).scale(c)
    if remainder:
        result = result * remainder.exp_nilpotent()
    return result


def euler_Ehat(p: DiffPoly, h: 'HomogeneityData') -> DiffPoly:
    if p.has_thetas():
        raise UnsupportedInputError("E-hat acts on theta degree 0 only")
    return p.weighted_euler([1 - q for q in h.q], 0, h.r, (1 - h.delta) / 2)


def dilation_D(p: DiffPoly) -> DiffPoly:
    if p.has_thetas():
        raise UnsupportedInputError("D acts on theta degree 0 only")
    return p.weighted_euler([1] * p.ring.n, 1)
