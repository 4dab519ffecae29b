import logging
import typing
from fractions import Fraction
import sympy
from drham.algebra import DiffPoly, U
from drham.drk2 import CohFTModel, build_K2, structure_constants
from drham.fault import PreconditionError, UnsupportedInputError
from drham.operators import MatDiffOp, ScalarDiffOp
from drham.util import invert, to_fraction

log = logging.getLogger(__name__)

u = sympy.Symbol('u')


def to_sympy(p: DiffPoly, symbol: sympy.Symbol = u) -> sympy.Expr:
    """A function of u^1 alone (generators allowed) as a sympy expression."""
    if p.ring.n != 1:
        raise UnsupportedInputError("only scalar pencils have a single canonical coordinate")
    total = sympy.Integer(0)
    for mono, c in p.terms.items():
        if mono.eps or mono.thetas or any(v.kind != U or v.order for v, _ in mono.jets):
            raise UnsupportedInputError(f"{mono} is not a function of u")
        term = sympy.Rational(c.numerator, c.denominator)
        for _, e in mono.jets:
            term *= symbol ** e
        for name, e in mono.gens:
            rate = p.ring.generator(name).rate
            term *= sympy.exp(sympy.Rational(rate.numerator, rate.denominator) * e * symbol)
        total += term
    return total


def _scalar(k: typing.Union[ScalarDiffOp, MatDiffOp]) -> ScalarDiffOp:
    if isinstance(k, MatDiffOp):
        if k.n != 1:
            raise UnsupportedInputError("only scalar pencils have a single canonical coordinate")
        return k.entry(1, 1)
    return k


def symbol_coefficient(k: typing.Union[ScalarDiffOp, MatDiffOp], eps_order: int, s: int) -> DiffPoly:
    """P^[k]_(;s): the coefficient of eps^k dx^s."""
    return _scalar(k).coeff(s).eps_part(eps_order)


def central_invariant_scalar(p1: typing.Union[ScalarDiffOp, MatDiffOp],
                             p2: typing.Union[ScalarDiffOp, MatDiffOp]) -> sympy.Expr:
    """
    c = (P2^[2]_3 - u^ P1^[2]_3) / (3 (du^/du)^2 (P1^[0]_1)^2) with the canonical
    coordinate u^ = P2^[0]_1 / P1^[0]_1.
    """
    f = to_sympy(symbol_coefficient(p1, 0, 1))
    if f == 0:
        raise PreconditionError("the leading symbol of the first operator vanishes")
    canonical = sympy.cancel(to_sympy(symbol_coefficient(p2, 0, 1)) / f)
    jacobian = sympy.diff(canonical, u)
    if sympy.simplify(jacobian) == 0:
        raise PreconditionError("the pencil is degenerate: the canonical coordinate is constant")
    top1 = to_sympy(symbol_coefficient(p1, 2, 3))
    top2 = to_sympy(symbol_coefficient(p2, 2, 3))
    c = sympy.simplify((top2 - canonical * top1) / (3 * jacobian ** 2 * f ** 2))
    log.debug("central invariant with canonical coordinate %s: %s", canonical, c)
    return c


def central_invariant_value(p1: typing.Union[ScalarDiffOp, MatDiffOp],
                            p2: typing.Union[ScalarDiffOp, MatDiffOp]) -> typing.Optional[Fraction]:
    """The invariant as an exact rational when it is constant, else None."""
    c = central_invariant_scalar(p1, p2)
    if c.free_symbols:
        return None
    return to_fraction(sympy.Rational(c))


def eps2_expected(m: CohFTModel) -> typing.Dict[typing.Tuple[int, int], DiffPoly]:
    """1/24 (3 - mu_a - mu_b) c^t_(t x) c^(x a b)"""
    ring = m.ring
    h = m.homogeneity
    if m.F is None:
        raise PreconditionError(f"the {m.name} model carries no genus 0 potential")
    c = structure_constants(m.F, h.eta)
    eta_inv = invert(h.eta)
    trace = {xi: sum((c[(t, t, xi)] for t in ring.fields), DiffPoly.zero(ring)) for xi in ring.fields}
    expected = {}
    for a in ring.fields:
        for b in ring.fields:
            total = DiffPoly.zero(ring)
            for xi in ring.fields:
                if not trace[xi]:
                    continue
                raised = DiffPoly.zero(ring)
                for mu in ring.fields:
                    for nu in ring.fields:
                        w = eta_inv[mu - 1][a - 1] * eta_inv[nu - 1][b - 1]
                        if w:
                            raised = raised + c[(xi, mu, nu)].scale(w)
                total = total + trace[xi] * raised
            expected[(a, b)] = total.scale((3 - h.mu[a - 1] - h.mu[b - 1]) / 24)
    return expected


def eps2_tensor_residual(m: CohFTModel) -> typing.Dict[typing.Tuple[int, int], DiffPoly]:
    """Nonzero differences between K2^[2]_(;3) and the c-tensor contraction."""
    truncated = m.at_genus(2)
    k2 = build_K2(truncated)
    expected = eps2_expected(truncated)
    residual = {}
    for (a, b), value in expected.items():
        diff = symbol_coefficient_entry(k2, a, b) - value
        if diff:
            residual[(a, b)] = diff
    log.debug("eps^2 tensor identity for %s: %i failing entries", m.name, len(residual))
    return residual


def symbol_coefficient_entry(k: MatDiffOp, a: int, b: int) -> DiffPoly:
    return k.entry(a, b).coeff(3).eps_part(2)


def eps2_tensor_check(m: CohFTModel) -> bool:
    return not eps2_tensor_residual(m)
