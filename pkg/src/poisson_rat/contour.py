"""Periodic trapezoid quadrature on circles and the differentials built on it.

Orientation convention: circles returned by :func:`pole_contours` run
clockwise around their pole.  With w = sum rho_k/(z_k - z) this is the
orientation for which (1/2 pi i) \\oint_{O_k} w = rho_k, the integral over
all O_k equals res_p + res_q + res_inf of the integrand, and the contour
bracket with f = 1 reproduces (w(p) - w(q))^2 / (p - q).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    CoincidentPQ,
    EvalAtSingularity,
    ExternalPointAtPole,
    NonConvergent,
)
from .ratfun import GUARD, RationalMap, evaluate, evaluate_derivative

TWO_PI_I = 2j * np.pi
MAX_NODES = 4096
DEFAULT_NODES = 64
CLOCKWISE = -1
COUNTERCLOCKWISE = 1


@dataclass(frozen=True)
class ContourSpec:
    center: complex
    radius: float
    nodes: int = DEFAULT_NODES
    orientation: int = COUNTERCLOCKWISE

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        m = self.nodes
        if m < 16 or m & (m - 1):
            raise ValueError("node count must be a power of two >= 16")
        if self.orientation not in (CLOCKWISE, COUNTERCLOCKWISE):
            raise ValueError("orientation must be +1 or -1")

    def scaled(self, factor: float) -> "ContourSpec":
        return ContourSpec(self.center, self.radius * factor, self.nodes,
                           self.orientation)

    def points(self, nodes: int | None = None, offset: int = 0, stride: int = 1):
        """Nodes center + r e^{i theta_j} and the weights dz_j for an M-point rule."""
        m = nodes or self.nodes
        j = np.arange(offset, m, stride)
        e = np.exp(TWO_PI_I * j / m)
        return self.center + self.radius * e, e


@dataclass(frozen=True)
class QuadratureResult:
    value: complex | np.ndarray
    nodes_used: int
    est_error: float

    def to_dict(self) -> dict:
        v = complex(self.value)
        return {"value": [v.real, v.imag], "nodes": self.nodes_used,
                "err": float(self.est_error)}


@dataclass(frozen=True)
class FWeight:
    """Polynomial weight f(z) = sum_j c_j z^j (ascending coefficients)."""

    coefficients: tuple

    def __post_init__(self):
        c = [complex(x) for x in self.coefficients]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if not c:
            c = [0j]
        object.__setattr__(self, "coefficients", tuple(c))

    @classmethod
    def monomial(cls, n: int) -> "FWeight":
        if n < 0:
            raise ValueError("monomial degree must be >= 0")
        return cls((0,) * n + (1,))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, z):
        return npoly.polyval(np.asarray(z, dtype=complex), self.coefficients)

    def __repr__(self):
        return f"FWeight({list(self.coefficients)})"


def integrate(g: Callable[[np.ndarray], np.ndarray], c: ContourSpec,
              tol: float = 1e-12, max_nodes: int = MAX_NODES) -> QuadratureResult:
    """\\oint_c g(z) dz by the periodic trapezoid rule.

    ``g`` receives a 1-d array of nodes and returns an array whose last
    axis runs over those nodes; leading axes are integrated independently.
    The node count doubles (reusing previous nodes) until successive
    estimates agree to ``tol * (1 + |value|)``.
    """
    m = c.nodes
    z, e = c.points(m)
    acc = np.sum(np.asarray(g(z)) * e, axis=-1)
    prev = c.orientation * TWO_PI_I * c.radius * acc / m
    while m < max_nodes:
        z, e = c.points(2 * m, offset=1, stride=2)
        acc = acc + np.sum(np.asarray(g(z)) * e, axis=-1)
        m *= 2
        cur = c.orientation * TWO_PI_I * c.radius * acc / m
        err = np.abs(cur - prev)
        if np.all(err < tol * (1 + np.abs(cur))):
            return QuadratureResult(cur if np.ndim(cur) else complex(cur), m,
                                    float(np.max(err)))
        prev = cur
    raise NonConvergent(f"trapezoid rule not converged at {max_nodes} nodes")


def pole_contours(w: RationalMap, external_points: Sequence[complex] = (),
                  nodes: int = DEFAULT_NODES) -> list[ContourSpec]:
    """One clockwise circle per pole, radius half the distance to the nearest
    other pole or external point."""
    ext = np.asarray(list(external_points), dtype=complex).reshape(-1)
    scale = w.scale + (np.max(np.abs(ext)) if ext.size else 0.0)
    out = []
    for k, zk in enumerate(w.poles):
        others = np.concatenate([np.delete(w.poles, k), ext])
        if ext.size and np.min(np.abs(ext - zk)) <= GUARD * scale:
            raise ExternalPointAtPole(f"external point sits on pole {k}")
        d = np.min(np.abs(others - zk)) if others.size else 1.0
        out.append(ContourSpec(complex(zk), 0.5 * float(d), nodes, CLOCKWISE))
    return out


def residue_at(w: RationalMap, k: int, radius_scale: float = 1.0,
               tol: float = 1e-13) -> complex:
    """(1/2 pi i) \\oint_{O_k} w; equals rho_k."""
    return pole_moment(w, k, 0, radius_scale=radius_scale, tol=tol)


def pole_moment(w: RationalMap, k: int, m: int, radius_scale: float = 1.0,
                tol: float = 1e-13) -> complex:
    """(1/2 pi i) \\oint_{O_k} zeta^m w(zeta) d zeta = rho_k z_k^m."""
    c = pole_contours(w)[k].scaled(radius_scale)
    res = integrate(lambda z: z**m * evaluate(w, z), c, tol)
    return complex(res.value) / TWO_PI_I


def derivative_moment(w: RationalMap, k: int, n: int, radius_scale: float = 1.0,
                      tol: float = 1e-13) -> complex:
    """(1/2 pi i) \\oint_{O_k} zeta^n w'(zeta) d zeta = -n z_k^{n-1} rho_k."""
    c = pole_contours(w)[k].scaled(radius_scale)
    res = integrate(lambda z: z**n * evaluate_derivative(w, z, 1), c, tol)
    return complex(res.value) / TWO_PI_I


def _check_off(z, pts, scale, exc):
    z = np.asarray(z, dtype=complex)
    for a in pts:
        if np.any(np.abs(z - a) <= GUARD * scale):
            raise exc("evaluation point on a singularity of the differential")


def eval_epsilon(p, q, z):
    """Density of the third-kind differential with residues +1 at p, -1 at q."""
    scale = 1.0 + max(np.max(np.abs(p)), np.max(np.abs(q)))
    _check_off(z, (p, q), scale, EvalAtSingularity)
    z = np.asarray(z, dtype=complex)
    out = (1.0 / (z - p) - 1.0 / (z - q)) / TWO_PI_I
    return complex(out) if np.ndim(out) == 0 else out


def eval_epsilon_circ(p, q, z):
    """Density (1/2 pi i) / ((z - p)(z - q))."""
    scale = 1.0 + max(np.max(np.abs(p)), np.max(np.abs(q)))
    _check_off(z, (p, q), scale, EvalAtSingularity)
    z = np.asarray(z, dtype=complex)
    out = 1.0 / ((z - p) * (z - q)) / TWO_PI_I
    return complex(out) if np.ndim(out) == 0 else out


def check_distinct(p, q, w: RationalMap | None = None, exc=CoincidentPQ):
    scale = 1.0 + max(float(np.max(np.abs(p))), float(np.max(np.abs(q))))
    if w is not None:
        scale = max(scale, w.scale)
    if np.any(np.abs(np.asarray(p) - np.asarray(q)) < 1e-8 * scale):
        raise exc("coincident evaluation points")


def eval_alpha(f: FWeight, w: RationalMap, p, q, z):
    """alpha_{pq}^f density: eps_circ_pq(z) f(z) w(z) (w(p) - w(q)).

    ``p``/``q`` may be arrays broadcasting against a trailing node axis of ``z``.
    """
    check_distinct(p, q, w)
    z = np.asarray(z, dtype=complex)
    dw = np.asarray(evaluate(w, p) - evaluate(w, q))
    p = np.asarray(p)[..., None] if np.ndim(p) else p
    q = np.asarray(q)[..., None] if np.ndim(q) else q
    dw = dw[..., None] if dw.ndim else dw
    out = f(z) * evaluate(w, z) * dw / ((z - p) * (z - q) * TWO_PI_I)
    return complex(out) if np.ndim(out) == 0 else out


def eval_alpha_from_epsilon(f: FWeight, w: RationalMap, p, q, z):
    """Same differential written as eps_pq(z)/(p - q) * f w (w(p) - w(q))."""
    check_distinct(p, q, w)
    return (eval_epsilon(p, q, z) / (p - q) * f(z) * evaluate(w, z)
            * (evaluate(w, p) - evaluate(w, q)))


def residue_at_infinity(f: FWeight, w: RationalMap, p: complex, q: complex,
                        tol: float = 1e-13, agree: float = 1e-8) -> QuadratureResult:
    """res_inf of alpha_{pq}^f, computed two independent ways.

    (a) minus the sum of residues at z_k, p, q from small circles; (b) minus
    a counterclockwise integral over a circle of radius
    10 (1 + max |singularity|).  Disagreement above ``agree`` raises.
    """
    check_distinct(p, q, w)
    sing = np.concatenate([w.poles, [p, q]])
    g = lambda z: eval_alpha(f, w, p, q, z)

    finite = 0j
    for k, s in enumerate(sing):
        d = np.min(np.abs(np.delete(sing, k) - s))
        c = ContourSpec(complex(s), 0.5 * float(d))
        finite += integrate(g, c, tol).value
    via_small = -finite

    big = ContourSpec(0j, 10.0 * (1.0 + float(np.max(np.abs(sing)))))
    via_big = -integrate(g, big, tol).value

    diff = abs(via_small - via_big)
    if diff > agree * (1 + abs(via_big)):
        raise NonConvergent(
            f"residue at infinity: routes disagree by {diff:.3g}")
    return QuadratureResult(complex(via_big), big.nodes, float(diff))

