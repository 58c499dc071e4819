"""Rational maps w(z) = sum_k rho_k / (z_k - z) in pole-residue form.

The pole-residue form is the master representation.  The polynomial pair
(q, p) with w = -q/p is derived from it and can be inverted back through a
companion-matrix root solve.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    DuplicatePole,
    EmptyInput,
    EvalAtPole,
    NonConvergedRoots,
    RepeatedRoot,
    SamplingExhausted,
    UnsupportedOrder,
    ZeroResidue,
)

EPS = np.finfo(float).eps
GUARD = 1e-12


def _as_complex_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite value in input")
    return arr


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


class RationalMap:
    """A point of Rat_N: N simple poles ``z_k`` with nonzero residues ``rho_k``.

    Instances are immutable.  Poles are kept in lexicographic (re, im)
    order and the residues are permuted along with them.  Use
    :func:`make_rational_map` or the constructor directly; both validate.
    """

    __slots__ = ("_poles", "_residues")

    def __init__(self, poles, residues):
        poles = _as_complex_array(poles)
        residues = _as_complex_array(residues)
        if poles.size == 0 or residues.size == 0:
            raise EmptyInput("a rational map needs at least one pole")
        if poles.size != residues.size:
            raise ValueError(
                f"got {poles.size} poles but {residues.size} residues")
        if np.any(residues == 0):
            raise ZeroResidue("every residue must be nonzero")
        order = np.lexsort((poles.imag, poles.real))
        poles, residues = poles[order], residues[order]
        if poles.size > 1:
            gaps = np.abs(poles[:, None] - poles[None, :])
            gaps[np.diag_indices_from(gaps)] = np.inf
            scale = 1.0 + np.max(np.abs(poles))
            if gaps.min() <= 10 * EPS * scale:
                raise DuplicatePole(
                    f"poles closer than {10 * EPS * scale:.3g}")
        self._poles = _readonly(poles)
        self._residues = _readonly(residues)

    @property
    def poles(self) -> np.ndarray:
        return self._poles

    @property
    def residues(self) -> np.ndarray:
        return self._residues

    @property
    def N(self) -> int:
        return int(self._poles.size)

    @property
    def scale(self) -> float:
        return 1.0 + float(np.max(np.abs(self._poles)))

    def coordinates(self) -> np.ndarray:
        """Coordinate vector (z_1..z_N, rho_1..rho_N)."""
        return np.concatenate([self._poles, self._residues])

    @classmethod
    def from_coordinates(cls, x) -> "RationalMap":
        x = np.asarray(x, dtype=complex)
        n = x.size // 2
        return cls(x[:n], x[n:])

    def _check_off_poles(self, z: np.ndarray) -> None:
        dist = np.abs(self._poles.reshape((-1,) + (1,) * z.ndim) - z)
        if np.any(dist <= GUARD * self.scale):
            raise EvalAtPole("evaluation point coincides with a pole")

    def __call__(self, z):
        return evaluate(self, z)

    def derivative(self, z, order: int = 1):
        return evaluate_derivative(self, z, order)

    def __eq__(self, other):
        if not isinstance(other, RationalMap):
            return NotImplemented
        return (np.array_equal(self._poles, other._poles)
                and np.array_equal(self._residues, other._residues))

    def __hash__(self):
        return hash((self._poles.tobytes(), self._residues.tobytes()))

    def __repr__(self):
        return f"RationalMap(poles={self._poles!r}, residues={self._residues!r})"

    def to_dict(self) -> dict:
        return {
            "poles": [[float(c.real), float(c.imag)] for c in self._poles],
            "residues": [[float(c.real), float(c.imag)] for c in self._residues],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "RationalMap":
        poles = [complex(re, im) for re, im in data["poles"]]
        residues = [complex(re, im) for re, im in data["residues"]]
        return cls(poles, residues)

    @classmethod
    def from_json(cls, text: str) -> "RationalMap":
        return cls.from_dict(json.loads(text))


def make_rational_map(poles: Sequence[complex], residues: Sequence[complex]) -> RationalMap:
    return RationalMap(poles, residues)


def evaluate(w: RationalMap, z):
    """w(z) = sum_k rho_k / (z_k - z); ``z`` may be a scalar or an array."""
    z = np.asarray(z, dtype=complex)
    w._check_off_poles(z)
    shape = (-1,) + (1,) * z.ndim
    terms = w.residues.reshape(shape) / (w.poles.reshape(shape) - z)
    out = terms.sum(axis=0)
    return complex(out) if out.ndim == 0 else out


def evaluate_derivative(w: RationalMap, z, order: int = 1):
    """First or second z-derivative of w."""
    if order not in (1, 2):
        raise UnsupportedOrder(f"derivative order {order} not in (1, 2)")
    z = np.asarray(z, dtype=complex)
    w._check_off_poles(z)
    shape = (-1,) + (1,) * z.ndim
    diff = w.poles.reshape(shape) - z
    rho = w.residues.reshape(shape)
    if order == 1:
        out = (rho / diff**2).sum(axis=0)
    else:
        out = (2 * rho / diff**3).sum(axis=0)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PolynomialPair:
    """(q, p) with w = -q/p; coefficients in ascending powers, p monic."""

    q: tuple
    p: tuple

    def __post_init__(self):
        q = tuple(complex(c) for c in self.q)
        p = tuple(complex(c) for c in self.p)
        if len(p) < 2 or p[-1] != 1:
            raise ValueError("p must be monic of degree >= 1")
        while len(q) > 1 and q[-1] == 0:
            q = q[:-1]
        if len(q) >= len(p):
            raise ValueError("deg q must be smaller than deg p")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def degree(self) -> int:
        return len(self.p) - 1

    def __call__(self, z):
        """Evaluate -q(z)/p(z)."""
        return -npoly.polyval(z, self.q) / npoly.polyval(z, self.p)


def to_polynomial_pair(w: RationalMap) -> PolynomialPair:
    p = npoly.polyfromroots(w.poles)
    q = np.zeros(w.N, dtype=complex)
    for k in range(w.N):
        others = np.delete(w.poles, k)
        q = q + w.residues[k] * (npoly.polyfromroots(others) if others.size else np.ones(1))
    return PolynomialPair(tuple(q), tuple(p))


def from_polynomial_pair(pp: PolynomialPair) -> RationalMap:
    """Invert :func:`to_polynomial_pair` via the roots of p.

    Roots come from the companion-matrix eigenvalues and get one Newton
    polishing step.  Residues are rho_k = q(z_k) / p'(z_k).
    """
    p = np.asarray(pp.p, dtype=complex)
    q = np.asarray(pp.q, dtype=complex)
    dp = npoly.polyder(p)
    roots = npoly.polyroots(p) if pp.degree > 1 else np.array([-p[0]])
    roots = np.atleast_1d(roots).astype(complex)
    scale = 1.0 + np.max(np.abs(roots))
    if roots.size > 1:
        gaps = np.abs(roots[:, None] - roots[None, :])
        gaps[np.diag_indices_from(gaps)] = np.inf
        if gaps.min() <= 1e-7 * scale:
            raise RepeatedRoot("p has a repeated root")
    dpv = npoly.polyval(roots, dp)
    if np.any(np.abs(dpv) <= 1e-12 * scale ** pp.degree):
        raise RepeatedRoot("p'(z_k) vanishes")
    roots = roots - npoly.polyval(roots, p) / dpv
    size = npoly.polyval(np.abs(roots), np.abs(p))
    if np.any(np.abs(npoly.polyval(roots, p)) > 1e-8 * size):
        raise NonConvergedRoots("root polish did not converge")
    residues = npoly.polyval(roots, q) / npoly.polyval(roots, dp)
    return RationalMap(roots, residues)


def random_instance(N: int, seed: int, separation: float = 0.3,
                    max_tries: int = 2000) -> RationalMap:
    """Random point of Rat_N: poles in |z| <= 2, pairwise at least
    ``separation`` apart, residues with separation <= |rho| <= 2.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    rng = np.random.default_rng(seed)
    poles = []
    tries = 0
    while len(poles) < N:
        tries += 1
        if tries > max_tries * N:
            raise SamplingExhausted(
                f"could not place {N} poles with separation {separation}")
        r = 2.0 * np.sqrt(rng.uniform())
        cand = r * np.exp(2j * np.pi * rng.uniform())
        if all(abs(cand - z) >= separation for z in poles):
            poles.append(cand)
    lo = min(separation, 2.0)
    mags = rng.uniform(lo, 2.0, size=N)
    phases = np.exp(2j * np.pi * rng.uniform(size=N))
    return RationalMap(poles, mags * phases)


def sample_external_points(w: RationalMap, count: int, seed: int,
                           separation: float = 0.3, radius: float = 3.0,
                           max_tries: int = 10000) -> list[complex]:
    """Points in |z| <= radius, at least ``separation`` from every pole and
    from each other; used as the evaluation points p, q, r.
    """
    rng = np.random.default_rng([seed, 7919])
    pts: list[complex] = []
    avoid = list(w.poles)
    for _ in range(max_tries):
        if len(pts) == count:
            return pts
        cand = radius * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        if all(abs(cand - a) >= separation for a in avoid + pts):
            pts.append(complex(cand))
    if len(pts) == count:
        return pts
    raise SamplingExhausted("could not place external points")


def upper_half_plane_check(w: RationalMap, points: Iterable[complex]) -> bool:
    """True iff Im w > 0 at every sample point with Im z > 0."""
    pts = np.asarray(list(points), dtype=complex)
    pts = pts[pts.imag > 0]
    return bool(np.all(np.imag(evaluate(w, pts)) > 0))
