"""Exact power-series toolkit for diagonals, mod-p certificates and modularity data."""

from .arith import FactorialRatioSpec, HypergeomCoeffSpec, ModP, MultiPoly, integrality_scan
from .dfinite import DiffOp, HeunSpec, frobenius_solutions, guess_ode, heun_series, hypergeom_operator
from .diagonal import BinSumExpr, RationalFunctionRep, binsum_to_ratfun, diagonal, furstenberg_embed
from .expr import ParseError, parse_operator, parse_poly
from .ising import chi_normalized_mod, chi_sign_variant, chi_tilde, phiD_series
from .mirror import InvariantBreach, integrality_report, mirror_map, nome, yukawa
from .modp import AlgRelation, find_relation, root_mod_p, verify_operator_mod_p, verify_relation
from .series import MultiSeries, PreconditionError, PullbackSpec, UniSeries

__version__ = "0.1.0"

__all__ = [
    "AlgRelation", "BinSumExpr", "DiffOp", "FactorialRatioSpec", "HeunSpec", "HypergeomCoeffSpec",
    "InvariantBreach", "ModP", "MultiPoly", "MultiSeries", "ParseError", "PreconditionError",
    "PullbackSpec", "RationalFunctionRep", "UniSeries", "binsum_to_ratfun", "chi_normalized_mod",
    "chi_sign_variant", "chi_tilde", "diagonal", "find_relation", "frobenius_solutions",
    "furstenberg_embed", "guess_ode", "heun_series", "hypergeom_operator", "integrality_report",
    "integrality_scan", "mirror_map", "nome", "parse_operator", "parse_poly", "phiD_series",
    "root_mod_p", "verify_operator_mod_p", "verify_relation", "yukawa",
]
