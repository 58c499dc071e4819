"""Exact polynomial identities used in the direct Jacobi proofs.

Each identity is expanded in Z[z, eta, p, q, r] and compared coefficient by
coefficient.  The partial-fraction identity for eps_circ_ab(z)/(z - c) is
checked for all six permutations of (a, b, c) by comparing the cleared
denominators (z - a)(z - b)(z - c).
"""
from __future__ import annotations

from itertools import permutations

import sympy as sp

z, eta, p, q, r = sp.symbols("z eta p q r")
GENS = (z, eta, p, q, r)


def _coefficients(expr) -> dict:
    poly = sp.Poly(sp.expand(expr), *GENS, domain="ZZ")
    return {m: c for m, c in poly.as_dict().items() if c != 0}


def same_polynomial(lhs, rhs) -> bool:
    return _coefficients(lhs) == _coefficients(rhs)


def _displayed(perturb: bool) -> dict:
    second_rhs = (eta + p - 2 * z) * (q - r)
    if perturb:
        second_rhs = (eta + p - z) * (q - r)
    return {
        "second_identity": (
            (z - r) * (eta - q) - (z - q) * (eta - r)
            - (z - p) * (eta - r) + (z - p) * (eta - q),
            second_rhs),
        "A_term_identity": (
            (z - r) * (eta - p) * (eta - q) - (z - q) * (eta - p) * (eta - r),
            (eta - p) * (r - q) * (z - eta)),
        "B_term_identity": (
            (z - p) * (eta - q) * (eta - r) - (z - q) * (eta - p) * (eta - r),
            (eta - r) * (z - eta) * (p - q)),
    }


def proof_identity_report(perturb: bool = False) -> dict[str, bool]:
    """Name -> holds, for every identity; ``perturb`` breaks one on purpose."""
    report = {}
    base = (z - p) * (z - q) * (z - r)
    for a, b, c in permutations((p, q, r)):
        name = f"first_identity[{a},{b},{c}]"
        report[name] = same_polynomial(base, (z - a) * (z - b) * (z - c))
    for name, (lhs, rhs) in _displayed(perturb).items():
        report[name] = same_polynomial(lhs, rhs)
    return report


def verify_proof_identities(perturb: bool = False) -> bool:
    return all(proof_identity_report(perturb).values())
