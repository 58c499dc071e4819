"""Coordinate Poisson tensors: extraction from point brackets, Jacobiator,
rank and nullspace.

Coordinates on Rat_N are ordered (z_1..z_N, rho_1..rho_N) throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .contour import DEFAULT_NODES, MAX_NODES, TWO_PI_I, pole_contours
from .errors import LeibnizSolveFailure, NonConvergent
from .ratfun import RationalMap

PointBracket = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PoissonTensorField:
    dimension: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    label: str = ""

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(np.asarray(x, dtype=complex))


@dataclass(frozen=True)
class JacobiReport:
    max_defect: float
    worst_triple: tuple
    samples: int
    normalization: float
    raw_defect: float = 0.0
    step: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {"max_defect": self.max_defect,
                "worst_triple": list(self.worst_triple),
                "samples": self.samples,
                "normalization": self.normalization,
                "raw_defect": self.raw_defect}


def _moment_matrices(bracket: PointBracket, w: RationalMap, nodes: int):
    """(1/2 pi i)^2 double integrals of B, zeta B and zeta eta B over
    O_k x O'_j, where O'_j is the pole circle at half radius."""
    circles = pole_contours(w, nodes=nodes)
    N = w.N
    m00 = np.zeros((N, N), complex)
    m10 = np.zeros((N, N), complex)
    m11 = np.zeros((N, N), complex)
    pts = [c.points() for c in circles]
    for k, ck in enumerate(circles):
        zeta, ez = pts[k]
        dzeta = ck.orientation * TWO_PI_I * ck.radius * ez / nodes
        for j, cj in enumerate(circles):
            inner = cj.scaled(0.5)
            eta, ee = inner.points()
            deta = inner.orientation * TWO_PI_I * inner.radius * ee / nodes
            B = bracket(zeta[:, None], eta[None, :]) * dzeta[:, None] * deta[None, :]
            m00[k, j] = B.sum()
            m10[k, j] = (zeta[:, None] * B).sum()
            m11[k, j] = (zeta[:, None] * eta[None, :] * B).sum()
    norm = TWO_PI_I**2
    return m00 / norm, m10 / norm, m11 / norm


def extract_coordinate_tensor(bracket: PointBracket, w: RationalMap,
                              tol: float = 1e-12, nodes: int = DEFAULT_NODES,
                              rho_floor: float = 1e-8) -> np.ndarray:
    """Coordinate tensor in (z, rho) from a point bracket B(zeta, eta).

    rho_k = (1/2 pi i) \\oint_{O_k} w, rho_k z_k = (1/2 pi i) \\oint_{O_k} zeta w,
    so {rho_k, rho_j}, {z_k rho_k, rho_j} and {z_k rho_k, z_j rho_j} are double
    contour integrals of B; {z_k, rho_j} and {z_k, z_j} then follow from the
    Leibniz rule.  ``bracket`` must broadcast over array arguments.
    """
    rho, z = w.residues, w.poles
    if np.any(np.abs(rho) < rho_floor):
        raise LeibnizSolveFailure("residue too small to divide by")
    prev = _moment_matrices(bracket, w, nodes)
    while True:
        nodes *= 2
        if nodes > MAX_NODES:
            raise NonConvergent("double contour quadrature not converged")
        cur = _moment_matrices(bracket, w, nodes)
        if all(np.all(np.abs(a - b) < tol * (1 + np.abs(a))) for a, b in zip(cur, prev)):
            break
        prev = cur
    m00, m10, m11 = cur

    # {z_k, rho_j}
    Z = (m10 - z[:, None] * m00) / rho[:, None]
    # {z_k, z_j}; uses {rho_k, z_j} = -{z_j, rho_k}
    ZZ = (m11 - rho[:, None] * z[None, :] * Z
          + z[:, None] * rho[None, :] * Z.T
          - z[:, None] * z[None, :] * m00) / (rho[:, None] * rho[None, :])

    # self-brackets vanish; fill the off-diagonal blocks from the upper triangle
    zz = np.triu(ZZ, 1)
    rr = np.triu(m00, 1)
    return np.block([[zz - zz.T, Z], [-Z.T, rr - rr.T]])


def recontract(J: np.ndarray, w: RationalMap, p, q) -> complex:
    """sum_ij dw(p)/dx_i J_ij dw(q)/dx_j via the chain rule."""
    def grad(a):
        d = w.poles - a
        return np.concatenate([-w.residues / d**2, 1.0 / d])
    return complex(grad(p) @ J @ grad(q))


def jacobiator(J: PoissonTensorField, x, step: float = 1e-5) -> JacobiReport:
    """Jacobiator sum_l (J_il d_l J_jk + J_jl d_l J_ki + J_kl d_l J_ij).

    Derivatives are central differences with step ``step * (1 + |x_l|)``.
    The reported defect is max |Jacobiator| over distinct triples divided
    by the largest sum of absolute values of its nine term groups.
    """
    x = np.asarray(x, dtype=complex)
    d = x.size
    J0 = J(x)
    dJ = np.empty((d, d, d), complex)
    for l in range(d):
        h = step * (1 + abs(x[l]))
        e = np.zeros(d, complex)
        e[l] = h
        dJ[l] = (J(x + e) - J(x - e)) / (2 * h)

    jac = (np.einsum("il,ljk->ijk", J0, dJ)
           + np.einsum("jl,lki->ijk", J0, dJ)
           + np.einsum("kl,lij->ijk", J0, dJ))
    aJ, adJ = np.abs(J0), np.abs(dJ)
    size = (np.einsum("il,ljk->ijk", aJ, adJ)
            + np.einsum("jl,lki->ijk", aJ, adJ)
            + np.einsum("kl,lij->ijk", aJ, adJ))

    triples = [(i, j, k) for i in range(d) for j in range(i + 1, d)
               for k in range(j + 1, d)]
    if not triples:
        return JacobiReport(0.0, (), 0, 0.0, 0.0, step)
    idx = tuple(np.array(triples).T)
    vals = np.abs(jac[idx])
    worst = int(np.argmax(vals))
    raw = float(vals[worst])
    norm = float(np.max(size[idx]))
    defect = raw / norm if norm > 0 else raw
    return JacobiReport(defect, triples[worst], len(triples), norm, raw, step)


def numerical_rank(J: np.ndarray, threshold: float = 1e-10) -> int:
    s = np.linalg.svd(np.asarray(J), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > threshold * s[0]))


def nullspace(J: np.ndarray, threshold: float = 1e-10) -> np.ndarray:
    """Orthonormal kernel basis, one vector per row."""
    J = np.asarray(J)
    _, s, vh = np.linalg.svd(J)
    rank = numerical_rank(J, threshold)
    return vh[rank:].conj()


def antisymmetry_residual(J: np.ndarray) -> float:
    return float(np.max(np.abs(J + J.T))) if J.size else 0.0


def tensor_to_rows(J: np.ndarray) -> list:
    """Row-major [re, im] pairs for JSON."""
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(J, complex)]
