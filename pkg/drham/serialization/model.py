import json
import logging
import typing
from fractions import Fraction
from drham.algebra import DiffPoly, ExtGen, JetVar, Monomial, Ring, U
from drham.constants import MODEL_SCHEMA
from drham.drk2 import CohFTModel, HomogeneityData
from drham.fault import DRHamError, ModelFileError, field_path
from drham.util import Matrix, format_fraction, to_fraction

log = logging.getLogger(__name__)

Json = typing.Dict[str, typing.Any]


def _rational(value: typing.Any, path: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ModelFileError(path, f"expected an exact rational as int or \"p/q\" string, got {value!r}")
    try:
        return to_fraction(value)
    except (ValueError, ZeroDivisionError):
        raise ModelFileError(path, f"malformed rational {value!r}")


def _int(value: typing.Any, path: str, minimum: typing.Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ModelFileError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ModelFileError(path, f"expected an integer >= {minimum}, got {value}")
    return value


def _list(value: typing.Any, path: str, length: typing.Optional[int] = None) -> typing.List[typing.Any]:
    if not isinstance(value, list):
        raise ModelFileError(path, f"expected a list, got {type(value).__name__}")
    if length is not None and len(value) != length:
        raise ModelFileError(path, f"expected {length} entries, got {len(value)}")
    return value


def _require(obj: Json, key: str, path: str) -> typing.Any:
    if not isinstance(obj, dict):
        raise ModelFileError(path, "expected an object")
    if key not in obj:
        raise ModelFileError(field_path(path, key), "missing required field")
    return obj[key]


# encoding


def encode_fraction(value: Fraction) -> str:
    return format_fraction(value)


def encode_matrix(m: Matrix) -> typing.List[typing.List[str]]:
    return [[encode_fraction(x) for x in row] for row in m]


def encode_monomial(mono: Monomial, coeff: Fraction) -> Json:
    if mono.thetas or any(v.kind != U for v, _ in mono.jets):
        raise DRHamError(f"only u-polynomials can be written to a model file, got {mono}")
    return {
        "vars": [[v.index, v.order, e] for v, e in mono.jets],
        "gens": {name: e for name, e in mono.gens},
        "eps": mono.eps,
        "coeff": encode_fraction(coeff),
    }


def encode_poly(p: DiffPoly) -> typing.List[Json]:
    return [encode_monomial(mono, c) for mono, c in p.sorted_terms()]


def encode_ring(ring: Ring) -> Json:
    return {
        "n": ring.n,
        "generators": [{"name": g.name, "index": g.index, "rate": encode_fraction(g.rate)} for g in ring.generators],
        "max_eps": ring.max_eps,
    }


def encode_homogeneity(h: HomogeneityData) -> Json:
    return {
        "eta": encode_matrix(h.eta),
        "unit": [encode_fraction(x) for x in h.unit],
        "q": [encode_fraction(x) for x in h.q],
        "r": [encode_fraction(x) for x in h.r],
        "delta": encode_fraction(h.delta),
        "A": encode_matrix(h.A),
    }


def model_to_dict(m: CohFTModel) -> Json:
    return {
        "schema": MODEL_SCHEMA,
        "name": m.name,
        "exact": m.exact,
        "ring": encode_ring(m.ring),
        "homogeneity": encode_homogeneity(m.homogeneity),
        "g": encode_poly(m.g),
        "F": encode_poly(m.F) if m.F is not None else None,
        "hamiltonians": [
            {"alpha": alpha, "d": d, "density": encode_poly(h)} for (alpha, d), h in m.hamiltonians
        ],
    }


def dumps_model(m: CohFTModel) -> str:
    return json.dumps(model_to_dict(m), indent=2)


def save_model(path: str, m: CohFTModel) -> None:
    with open(path, "w") as f:
        f.write(dumps_model(m))
        f.write("\n")
    log.debug("wrote the %s model to %s", m.name, path)


# decoding


def decode_ring(obj: Json, path: str) -> Ring:
    n = _int(_require(obj, "n", path), field_path(path, "n"), 1)
    generators = []
    for i, gen in enumerate(_list(obj.get("generators", []), field_path(path, "generators"))):
        gen_path = field_path(path, "generators", i)
        name = _require(gen, "name", gen_path)
        if not isinstance(name, str) or not name:
            raise ModelFileError(field_path(gen_path, "name"), "expected a non-empty string")
        index = _int(_require(gen, "index", gen_path), field_path(gen_path, "index"), 1)
        if index > n:
            raise ModelFileError(field_path(gen_path, "index"), f"field u^{index} does not exist for n = {n}")
        rate = _rational(_require(gen, "rate", gen_path), field_path(gen_path, "rate"))
        if not rate:
            raise ModelFileError(field_path(gen_path, "rate"), "the exponential rate must be nonzero")
        generators.append(ExtGen(name, index, rate))
    if len({g.name for g in generators}) != len(generators):
        raise ModelFileError(field_path(path, "generators"), "generator names must be unique")
    max_eps = obj.get("max_eps")
    if max_eps is not None:
        max_eps = _int(max_eps, field_path(path, "max_eps"), 0)
    return Ring(n, generators=tuple(generators), max_eps=max_eps)


def decode_monomial(obj: Json, ring: Ring, path: str) -> typing.Tuple[Monomial, Fraction]:
    jets: typing.Dict[JetVar, int] = {}
    for i, var in enumerate(_list(_require(obj, "vars", path), field_path(path, "vars"))):
        var_path = field_path(path, "vars", i)
        alpha, order, exponent = _list(var, var_path, 3)
        alpha = _int(alpha, field_path(var_path, 0), 1)
        if alpha > ring.n:
            raise ModelFileError(field_path(var_path, 0), f"field u^{alpha} does not exist for n = {ring.n}")
        v = JetVar(U, alpha, _int(order, field_path(var_path, 1), 0))
        jets[v] = jets.get(v, 0) + _int(exponent, field_path(var_path, 2), 1)
    gens = obj.get("gens", {})
    if not isinstance(gens, dict):
        raise ModelFileError(field_path(path, "gens"), "expected an object of generator powers")
    names = {g.name for g in ring.generators}
    for name, power in gens.items():
        if name not in names:
            raise ModelFileError(field_path(path, "gens", name), "unknown generator")
        _int(power, field_path(path, "gens", name), 1)
    eps = _int(obj.get("eps", 0), field_path(path, "eps"), 0)
    coeff = _rational(_require(obj, "coeff", path), field_path(path, "coeff"))
    mono = Monomial(eps=eps, jets=tuple(sorted(jets.items())), gens=tuple(sorted(gens.items())))
    return mono, coeff


def decode_poly(value: typing.Any, ring: Ring, path: str) -> DiffPoly:
    terms: typing.Dict[Monomial, Fraction] = {}
    for i, item in enumerate(_list(value, path)):
        mono, coeff = decode_monomial(item, ring, field_path(path, i))
        terms[mono] = terms.get(mono, Fraction(0)) + coeff
    return DiffPoly(ring, terms)


def decode_homogeneity(obj: Json, n: int, path: str) -> HomogeneityData:
    def vector(key: str, default: typing.Optional[typing.List[int]] = None) -> typing.List[Fraction]:
        raw = obj.get(key, default) if default is not None else _require(obj, key, path)
        key_path = field_path(path, key)
        return [_rational(x, field_path(key_path, i)) for i, x in enumerate(_list(raw, key_path, n))]

    def square(key: str, default: typing.Optional[typing.List[typing.List[int]]] = None) -> typing.List[typing.List[Fraction]]:
        raw = obj.get(key, default) if default is not None else _require(obj, key, path)
        key_path = field_path(path, key)
        return [
            [_rational(x, field_path(key_path, i, j)) for j, x in enumerate(_list(row, field_path(key_path, i), n))]
            for i, row in enumerate(_list(raw, key_path, n))
        ]

    eta = square("eta")
    unit = vector("unit")
    q = vector("q")
    r = vector("r", [0] * n)
    a = square("A", [[0] * n for _ in range(n)])
    delta = _rational(obj.get("delta", 0), field_path(path, "delta"))
    try:
        return HomogeneityData.build(eta, unit, q, delta, r=r, A=a)
    except DRHamError as err:
        raise ModelFileError(path, str(err))


def model_from_dict(obj: Json) -> CohFTModel:
    schema = _require(obj, "schema", "")
    if schema != MODEL_SCHEMA:
        raise ModelFileError("schema", f"expected {MODEL_SCHEMA}, got {schema!r}")
    name = obj.get("name", "model")
    if not isinstance(name, str):
        raise ModelFileError("name", "expected a string")
    ring = decode_ring(_require(obj, "ring", ""), "ring")
    homogeneity = decode_homogeneity(_require(obj, "homogeneity", ""), ring.n, "homogeneity")
    g = decode_poly(_require(obj, "g", ""), ring, "g")
    f = decode_poly(obj["F"], ring, "F") if obj.get("F") is not None else None
    hamiltonians = []
    for i, entry in enumerate(_list(obj.get("hamiltonians", []), "hamiltonians")):
        entry_path = field_path("hamiltonians", i)
        alpha = _int(_require(entry, "alpha", entry_path), field_path(entry_path, "alpha"), 1)
        if alpha > ring.n:
            raise ModelFileError(field_path(entry_path, "alpha"), f"no index {alpha} for n = {ring.n}")
        d = _int(_require(entry, "d", entry_path), field_path(entry_path, "d"), -1)
        hamiltonians.append(((alpha, d), decode_poly(_require(entry, "density", entry_path), ring,
                                                     field_path(entry_path, "density"))))
    exact = obj.get("exact", ring.max_eps is None)
    if not isinstance(exact, bool):
        raise ModelFileError("exact", "expected a boolean")
    return CohFTModel(name, homogeneity, g, f, tuple(hamiltonians), exact)


def loads_model(text: str) -> CohFTModel:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise ModelFileError("", f"not valid JSON: {err}")
    return model_from_dict(obj)


def load_model(path: str) -> CohFTModel:
    try:
        with open(path, "r") as f:
            text = f.read()
    except OSError as err:
        raise ModelFileError("", f"cannot read {path}: {err.strerror}")
    m = loads_model(text)
    log.debug("loaded the %s model from %s (n = %i, %i terms)", m.name, path, m.ring.n, len(m.g))
    return m
