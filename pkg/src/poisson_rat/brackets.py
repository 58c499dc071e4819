"""First hierarchy: the contour bracket {w(p), w(q)}^f and its closed forms.

The contour bracket is

    {w(p), w(q)}^f = sum_k \\oint_{O_k} eps_circ_pq(z) f(z) w(z) (w(p) - w(q)) dz

with the pole circles of :func:`poisson_rat.contour.pole_contours`.  For
f = 1 and f = z it agrees with the closed forms ``bracket_ah`` and
``bracket_z``; for general polynomial f it differs from the closed-form
ansatz by the residue at infinity of the integrand.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .contour import (
    TWO_PI_I,
    ContourSpec,
    FWeight,
    check_distinct,
    integrate,
    pole_contours,
    residue_at_infinity,
)
from .errors import CoincidentPoints
from .ratfun import RationalMap, evaluate
from .tensor import JacobiReport, PoissonTensorField, jacobiator

CONTOUR = "contour"
CLOSED_FORM = "closed_form"
ANSATZ = "ansatz"

BRACKET_TOL = 1e-12


@dataclass(frozen=True)
class BracketValue:
    value: complex
    method: str
    est_error: float = 0.0

    def to_dict(self) -> dict:
        v = complex(self.value)
        return {"value": [v.real, v.imag], "method": self.method,
                "est_error": float(self.est_error)}


def _contour_bracket_array(f: FWeight, w: RationalMap, p, q,
                           contours: Sequence[ContourSpec], tol: float):
    """Contour bracket for broadcastable arrays p, q over fixed contours.

    The contours must keep every p and q outside.  Returns (values, err).
    """
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    dw = np.asarray(evaluate(w, p) - evaluate(w, q))
    pe, qe, dwe = p[..., None], q[..., None], dw[..., None]

    def g(z):
        return f(z) * evaluate(w, z) * dwe / ((z - pe) * (z - qe) * TWO_PI_I)

    total = 0j
    err = 0.0
    for c in contours:
        res = integrate(g, c, tol)
        total = total + res.value
        err += res.est_error
    return total, err


def bracket_contour(f: FWeight, w: RationalMap, p: complex, q: complex,
                    tol: float = BRACKET_TOL,
                    contours: Sequence[ContourSpec] | None = None) -> BracketValue:
    check_distinct(p, q, w)
    if contours is None:
        contours = pole_contours(w, [p, q])
    value, err = _contour_bracket_array(f, w, p, q, contours, tol)
    return BracketValue(complex(value), CONTOUR, err)


def bracket_ansatz(f: FWeight, w: RationalMap, p, q) -> BracketValue:
    """(f(p) w(p) - f(q) w(q)) / (p - q) * (w(p) - w(q))."""
    check_distinct(p, q, w)
    wp, wq = evaluate(w, p), evaluate(w, q)
    value = (f(p) * wp - f(q) * wq) / (p - q) * (wp - wq)
    return BracketValue(complex(value), ANSATZ)


def bracket_ah(w: RationalMap, p, q) -> BracketValue:
    """(w(p) - w(q))^2 / (p - q)."""
    value = bracket_ansatz(FWeight.monomial(0), w, p, q).value
    return BracketValue(value, CLOSED_FORM)


def bracket_z(w: RationalMap, p, q) -> BracketValue:
    """(p w(p) - q w(q)) / (p - q) * (w(p) - w(q))."""
    value = bracket_ansatz(FWeight.monomial(1), w, p, q).value
    return BracketValue(value, CLOSED_FORM)


def residue_decomposition_check(f: FWeight, w: RationalMap, p, q) -> float:
    """|contour bracket - (ansatz + res_inf alpha)|."""
    lhs = bracket_contour(f, w, p, q).value
    rhs = bracket_ansatz(f, w, p, q).value + residue_at_infinity(f, w, p, q).value
    return float(abs(lhs - rhs))


def _check_triple(w, p, q, r):
    for a, b in ((p, q), (q, r), (r, p)):
        check_distinct(a, b, w, exc=CoincidentPoints)


def triple_bracket_contour(f: FWeight, w: RationalMap, p: complex, q: complex,
                           r: complex, tol: float = BRACKET_TOL) -> complex:
    """{{w(p), w(q)}, w(r)} through the Leibniz rule under the outer integral.

    Outer integrand: eps_circ_pq(z) f(z) [w(z) ({w(p),w(r)} - {w(q),w(r)})
    + (w(p) - w(q)) {w(z), w(r)}], every inner bracket being a contour
    bracket over circles of half the outer radius.
    """
    _check_triple(w, p, q, r)
    outer = pole_contours(w, [p, q, r])
    inner = [c.scaled(0.5) for c in outer]
    inner_tol = tol / 10

    b_pr, _ = _contour_bracket_array(f, w, p, r, inner, inner_tol)
    b_qr, _ = _contour_bracket_array(f, w, q, r, inner, inner_tol)
    wp, wq = evaluate(w, p), evaluate(w, q)

    def g(z):
        b_zr, _ = _contour_bracket_array(f, w, z, r, inner, inner_tol)
        wz = evaluate(w, z)
        density = f(z) / ((z - p) * (z - q) * TWO_PI_I)
        return density * (wz * (b_pr - b_qr) + (wp - wq) * b_zr)

    return complex(sum(integrate(g, c, tol).value for c in outer))


def jacobi_defect_contour(f: FWeight, w: RationalMap, p, q, r,
                          tol: float = BRACKET_TOL) -> float:
    """Cyclic sum of triple brackets relative to the largest of the three."""
    terms = [triple_bracket_contour(f, w, a, b, c, tol)
             for a, b, c in ((p, q, r), (q, r, p), (r, p, q))]
    scale = max(abs(t) for t in terms)
    total = abs(sum(terms))
    return float(total / scale) if scale > 0 else float(total)


def ansatz_evaluation_tensor(f: FWeight, points: Sequence[complex]) -> PoissonTensorField:
    """Coordinate tensor of the ansatz in evaluation coordinates x_i = w(p_i).

    The ansatz gives {x_i, x_j} = (f(p_i) x_i - f(p_j) x_j)(x_i - x_j)/(p_i - p_j)
    as a function of the x's alone, so it is a tensor field on C^m whose
    Jacobiator is the pointwise Jacobi defect of the ansatz.
    """
    pts = np.asarray(points, dtype=complex)
    m = pts.size
    fp = f(pts)
    dp = pts[:, None] - pts[None, :]
    np.fill_diagonal(dp, 1.0)

    def evaluate_tensor(x):
        x = np.asarray(x, dtype=complex)
        fx = fp * x
        J = (fx[:, None] - fx[None, :]) * (x[:, None] - x[None, :]) / dp
        np.fill_diagonal(J, 0.0)
        return J

    return PoissonTensorField(m, evaluate_tensor,
                              f"ansatz f={list(f.coefficients)} in w(p_i) coordinates")


def jacobi_defect_ansatz(f: FWeight, w: RationalMap, p, q, r,
                         step: float = 1e-5) -> JacobiReport:
    """Normalized Jacobiator of the ansatz bracket at (w(p), w(q), w(r))."""
    _check_triple(w, p, q, r)
    pts = [p, q, r]
    field = ansatz_evaluation_tensor(f, pts)
    x = np.array([evaluate(w, a) for a in pts])
    return jacobiator(field, x, step)
