import logging
import typing
from fractions import Fraction
from drham.algebra import DiffPoly
from drham.fault import PreconditionError, UnsupportedInputError
from drham.operators import MatDiffOp, ScalarDiffOp
from drham.variational import MultiVector, L_op, as_functional, evolutionary

log = logging.getLogger(__name__)

HALF = Fraction(1, 2)


def bivector_of_op(k: MatDiffOp) -> MultiVector:
    """B_K = 1/2 int K^(ab)_s theta_(a,0) theta_(b,s) dx for skew K."""
    k.check_skew()
    ring = k.ring
    density = DiffPoly.zero(ring)
    for a in ring.fields:
        theta_a = DiffPoly.theta(ring, a)
        for b in ring.fields:
            for s, coeff in k.entry(a, b).terms.items():
                density = density + (coeff * theta_a * DiffPoly.theta(ring, b, s)).scale(HALF)
    return MultiVector(density)


def op_of_bivector(bivector: MultiVector) -> MatDiffOp:
    """The skew operator K with dB/dtheta_a = K^(ab)_s theta_(b,s)."""
    ring = bivector.ring
    entries: typing.Dict[typing.Tuple[int, int], typing.Dict[int, typing.Dict]] = {}
    for a in ring.fields:
        for mono, c in bivector.var_theta(a).terms.items():
            if len(mono.thetas) != 1:
                raise UnsupportedInputError("density is not a bivector")
            t = mono.thetas[0]
            slot = entries.setdefault((a, t.index), {}).setdefault(t.order, {})
            rest = mono._replace(thetas=())
            slot[rest] = slot.get(rest, 0) + c
    return MatDiffOp.from_function(ring, lambda a, b: ScalarDiffOp(
        ring, {s: DiffPoly(ring, terms) for s, terms in entries.get((a, b), {}).items()}
    ))


def vector_field(q: typing.Sequence[DiffPoly]) -> MultiVector:
    """V_Q = int Q^a theta_a dx"""
    if not q:
        raise UnsupportedInputError("empty vector field")
    ring = q[0].ring
    density = DiffPoly.zero(ring)
    for a, component in enumerate(q, 1):
        density = density + component * DiffPoly.theta(ring, a)
    return MultiVector(density)


def components_of_vector_field(v: MultiVector) -> typing.Tuple[DiffPoly, ...]:
    return tuple(v.var_theta(a) for a in v.ring.fields)


def schouten(p: typing.Union[DiffPoly, MultiVector], q: typing.Union[DiffPoly, MultiVector]) -> MultiVector:
    """[P,Q] = int (dP/dtheta_a dQ/du^a + (-1)^p dP/du^a dQ/dtheta_a) dx"""
    p, q = as_functional(p), as_functional(q)
    sign = -1 if p.degree % 2 else 1
    density = DiffPoly.zero(p.ring)
    for a in p.ring.fields:
        left = p.var_theta(a)
        if left:
            density = density + left * q.var_u(a)
        right = q.var_theta(a)
        if right:
            density = density + (p.var_u(a) * right).scale(sign)
    log.debug("schouten bracket of degrees %i and %i: %i terms", p.degree, q.degree, len(density))
    return MultiVector(density)


def is_poisson(k: MatDiffOp) -> bool:
    b = bivector_of_op(k)
    return schouten(b, b).is_zero()


def compatible(k1: MatDiffOp, k2: MatDiffOp) -> bool:
    """The pencil k2 - lambda*k1 is Poisson: each operator is Poisson and [B1, B2] = 0."""
    for name, k in (("K1", k1), ("K2", k2)):
        if not is_poisson(k):
            raise PreconditionError(f"{name} is not a Poisson operator")
    return schouten(bivector_of_op(k1), bivector_of_op(k2)).is_zero()


def commutator_VQ_BK(q: typing.Sequence[DiffPoly], k: MatDiffOp) -> MatDiffOp:
    """
    K~ with [V_Q, B_K] = -B_K~:
    K~ = L_mu(Q^a) o K^(mu b) + K^(a nu) o L_nu(Q^b)^dagger - (dx^p Q^g) dK^(ab)_s/du^g_p dx^s
    """
    ring = k.ring
    n = ring.n
    jac = [[L_op(q[a], mu) for mu in ring.fields] for a in range(n)]
    jac_adj = [[jac[b][nu].adjoint() for b in range(n)] for nu in range(n)]

    def entry(a: int, b: int) -> ScalarDiffOp:
        total = ScalarDiffOp.zero(ring)
        for m in range(n):
            if jac[a - 1][m] and k.rows[m][b - 1]:
                total = total + jac[a - 1][m].compose(k.rows[m][b - 1])
            if k.rows[a - 1][m] and jac_adj[m][b - 1]:
                total = total + k.rows[a - 1][m].compose(jac_adj[m][b - 1])
        along = {s: evolutionary(q, c) for s, c in k.entry(a, b).terms.items()}
        return total - ScalarDiffOp(ring, along)
    return MatDiffOp.from_function(ring, entry)


def hamiltonian_vector_field(f: typing.Union[DiffPoly, MultiVector], k: MatDiffOp) -> typing.Tuple[DiffPoly, ...]:
    """P^a = K^(ab)_s dx^s df/du^b"""
    functional = as_functional(f)
    return k.apply(functional.gradient())
