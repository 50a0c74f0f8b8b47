"""Loaders for the JSON data files shipped with the package."""

from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .arith import HypergeomCoeffSpec
from .dfinite import DiffOp, adjoint, hypergeom_operator
from .diagonal import RationalFunctionRep
from .expr import parse_operator, parse_poly
from .modp import AlgRelation


@lru_cache(maxsize=None)
def load_json(name: str) -> dict:
    return json.loads(resources.files("diagmod").joinpath(f"data/{name}.json").read_text())


def operator_from_entry(entry: dict, p: int | None = None) -> DiffOp:
    if "text" in entry:
        return parse_operator(entry["text"], p)
    h = entry["hypergeometric"]
    spec = HypergeomCoeffSpec(tuple(Fraction(a) for a in h["upper"]),
                              tuple(Fraction(b) for b in h["lower"]), Fraction(h["scale"]))
    return hypergeom_operator(spec)


def operator(name: str) -> DiffOp:
    """A named operator; ``adjoint(NAME)`` is also accepted."""
    if name.startswith("adjoint(") and name.endswith(")"):
        return adjoint(operator(name[8:-1]))
    ops = load_json("operators")["operators"]
    if name not in ops:
        raise KeyError(f"unknown operator {name!r}; known: {', '.join(sorted(ops))}")
    return operator_from_entry(ops[name])


def operator_names() -> list:
    return sorted(load_json("operators")["operators"])


def expected(name: str) -> dict:
    """Reference series for a named operator, as Fractions."""
    raw = load_json("operators")["expected"][name]
    out = {}
    for key, val in raw.items():
        out[key] = [Fraction(v) for v in val] if isinstance(val, list) else Fraction(val)
    return out


def intertwiners() -> list:
    """(left, right, X) with left . X = X . right."""
    return [(operator(e["left"]), operator(e["right"]), parse_operator(e["via"]), e["note"])
            for e in load_json("operators")["intertwiners"]]


def relation(tag: str) -> AlgRelation:
    for e in load_json("modp")["relations"]:
        if e["tag"] == tag:
            return AlgRelation(parse_poly(e["poly"], ("x", "y"), e["p"]))
    raise KeyError(f"unknown relation {tag!r}")


def modp_operator(tag: str) -> tuple:
    """(operator over F_p, p)."""
    for e in load_json("modp")["operators"]:
        if e["tag"] == tag:
            return parse_operator(e["text"], e["p"]), e["p"]
    raise KeyError(f"unknown mod-p operator {tag!r}")


def rational_function(entry: dict) -> RationalFunctionRep:
    """A diagonal-corpus entry as a RationalFunctionRep."""
    names = entry["vars"]
    if isinstance(names, int):
        names = [f"z{i}" for i in range(names)]
    names = tuple(names)
    num = parse_poly(entry.get("num", "1"), names)
    if "factors" in entry:
        return RationalFunctionRep.from_factors(num, [parse_poly(f, names) for f in entry["factors"]])
    return RationalFunctionRep(num, parse_poly(entry["den"], names))


def diagonal_corpus() -> list:
    return [(e["tag"], rational_function(e), e) for e in load_json("diagonals")["corpus"]]


def apery_representations() -> list:
    return [(e["tag"], rational_function(e)) for e in load_json("diagonals")["apery"]["representations"]]


def apery_series() -> list:
    return list(load_json("diagonals")["apery"]["series"])
