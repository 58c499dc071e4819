"""Second hierarchy {w(p), w(q)}^n = p^n w'(p) w(q) - q^n w'(q) w(p).

Point brackets, coordinate tensors in (z, rho), Darboux charts and the
degenerate n = 0 structure (rank, Casimirs, averaged pair).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import DomainViolation, SingularJacobian, TooSmall
from .ratfun import RationalMap, evaluate, evaluate_derivative, random_instance
from .tensor import (
    PoissonTensorField,
    extract_coordinate_tensor,
    numerical_rank,
    nullspace,
    tensor_to_rows,
)

CONSTANCY_TOL = 1e-8


def bracket_n(n: int, w: RationalMap, p, q):
    wp, wq = evaluate(w, p), evaluate(w, q)
    dp, dq = evaluate_derivative(w, p, 1), evaluate_derivative(w, q, 1)
    out = np.asarray(p) ** n * dp * wq - np.asarray(q) ** n * dq * wp
    return complex(out) if np.ndim(out) == 0 else out


def bracket_n_deriv(n: int, w: RationalMap, p, q):
    """{w'(p), w(q)}^n."""
    wq = evaluate(w, q)
    d1p, d2p = evaluate_derivative(w, p, 1), evaluate_derivative(w, p, 2)
    d1q = evaluate_derivative(w, q, 1)
    out = np.asarray(p) ** n * d2p * wq - np.asarray(q) ** n * d1q * d1p
    if n > 0:
        out = out + n * np.asarray(p) ** (n - 1) * d1p * wq
    return complex(out) if np.ndim(out) == 0 else out


def triple_bracket_n(n: int, w: RationalMap, p, q, r,
                     bracket: Callable | None = None,
                     deriv_bracket: Callable | None = None) -> complex:
    """{{w(p), w(q)}, w(r)} from the Leibniz rule and the derivative bracket."""
    B = bracket or (lambda a, b: bracket_n(n, w, a, b))
    D = deriv_bracket or (lambda a, b: bracket_n_deriv(n, w, a, b))
    wp, wq = evaluate(w, p), evaluate(w, q)
    dp, dq = evaluate_derivative(w, p, 1), evaluate_derivative(w, q, 1)
    pn, qn = p**n, q**n
    return (pn * wq * D(p, r) + pn * dp * B(q, r)
            - qn * wp * D(q, r) - qn * dq * B(p, r))


def pointwise_jacobi_deriv_hierarchy(n: int, w: RationalMap, p, q, r,
                                     bracket: Callable | None = None,
                                     deriv_bracket: Callable | None = None) -> float:
    """Cyclic sum of triple brackets relative to the largest single one.

    ``bracket``/``deriv_bracket`` override the point brackets.  A global sign
    flip of either one leaves the cyclic sum at zero; pairing the bracket with
    the derivative bracket of another hierarchy level does not.
    """
    terms = [triple_bracket_n(n, w, a, b, c, bracket, deriv_bracket)
             for a, b, c in ((p, q, r), (q, r, p), (r, p, q))]
    scale = max(abs(t) for t in terms)
    total = abs(sum(terms))
    return float(total / scale) if scale > 0 else float(total)


def coord_tensor_closed(n: int, z, rho) -> np.ndarray:
    """{rho_k, rho_j} = -rho_k rho_j n (z_k^{n-1} - z_j^{n-1}),
    {rho_j, z_k} = rho_j z_k^n, {z_k, z_j} = 0, in (z, rho) order."""
    z = np.asarray(z, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    N = z.size
    Z = -rho[None, :] * (z**n)[:, None]  # {z_k, rho_j}
    if n > 0:
        zn1 = z ** (n - 1)
        R = -n * rho[:, None] * rho[None, :] * (zn1[:, None] - zn1[None, :])
    else:
        R = np.zeros((N, N), complex)
    return np.block([[np.zeros((N, N), complex), Z], [-Z.T, R]])


def coord_tensor_field(n: int) -> PoissonTensorField:
    def evaluate_tensor(x):
        half = x.size // 2
        return coord_tensor_closed(n, x[:half], x[half:])
    return PoissonTensorField(0, evaluate_tensor, f"second hierarchy n={n}")


def coord_tensor_numeric(n: int, w: RationalMap, tol: float = 1e-12) -> np.ndarray:
    return extract_coordinate_tensor(lambda a, b: bracket_n(n, w, a, b), w, tol)


@dataclass(frozen=True)
class CanonicalTensor:
    variant: str
    N: int

    def matrix(self) -> np.ndarray:
        if self.variant == "identity_block":
            B = np.eye(self.N)
        elif self.variant == "ones_block":
            B = np.ones((self.N, self.N))
        else:
            raise ValueError(f"unknown variant {self.variant!r}")
        O = np.zeros((self.N, self.N))
        return np.block([[O, B], [-B, O]])


def _on_cut(a: np.ndarray) -> bool:
    return bool(np.any((a.imag == 0) & (a.real <= 0)))


@dataclass(frozen=True)
class DarbouxChart:
    """(z, rho) -> (I, theta) with I_k = z_k (n=0), log z_k (n=1),
    z_k^{1-n} (n>=2) and theta_k = log rho_k + shift * log z_k.

    A nonzero ``shift`` is the one-parameter correction searched by
    :func:`search_chart_shift`; ``shift=0`` is the chart as stated.
    """

    n: int | None
    shift: complex = 0.0
    validated: bool | None = field(default=None, compare=False)

    @property
    def is_identity(self) -> bool:
        return self.n is None

    def check_domain(self, x) -> None:
        x = np.asarray(x, dtype=complex)
        if self.is_identity:
            return
        half = x.size // 2
        z, rho = x[:half], x[half:]
        if _on_cut(rho):
            raise DomainViolation("residue on the branch cut of log")
        needs_log_z = self.n == 1 or self.shift != 0
        if self.n >= 1 and np.any(z == 0):
            raise DomainViolation("pole at 0")
        if needs_log_z and _on_cut(z):
            raise DomainViolation("pole on the branch cut of log")
        if self.n >= 2 and np.any(np.abs(np.angle(z)) >= np.pi / (self.n - 1)):
            raise DomainViolation("pole outside the sector where z^(1-n) inverts")

    def forward(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if self.is_identity:
            return x.copy()
        self.check_domain(x)
        half = x.size // 2
        z, rho = x[:half], x[half:]
        if self.n == 0:
            I = z.copy()
        elif self.n == 1:
            I = np.log(z)
        else:
            I = z ** (1 - self.n)
        theta = np.log(rho)
        if self.shift != 0:
            theta = theta + self.shift * np.log(z)
        return np.concatenate([I, theta])

    def inverse(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=complex)
        if self.is_identity:
            return y.copy()
        half = y.size // 2
        I, theta = y[:half], y[half:]
        if self.n == 0:
            z = I.copy()
        elif self.n == 1:
            z = np.exp(I)
        else:
            z = np.exp(np.log(I) / (1 - self.n))
        if self.shift != 0:
            theta = theta - self.shift * np.log(z)
        return np.concatenate([z, np.exp(theta)])

    def jacobian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if self.is_identity:
            return np.eye(x.size, dtype=complex)
        self.check_domain(x)
        half = x.size // 2
        z, rho = x[:half], x[half:]
        if self.n == 0:
            dI = np.ones(half, complex)
        elif self.n == 1:
            dI = 1.0 / z
        else:
            dI = (1 - self.n) * z ** (-self.n)
        O = np.zeros((half, half), complex)
        dtheta_dz = np.diag(self.shift / z) if self.shift != 0 else O
        return np.block([[np.diag(dI), O], [dtheta_dz, np.diag(1.0 / rho)]])


def darboux_chart(n: int, shift: complex = 0.0, validate: bool = False,
                  samples: int = 8) -> DarbouxChart:
    if n < 0:
        raise ValueError("n must be >= 0")
    chart = DarbouxChart(n, shift)
    if validate:
        report = chart_constancy_report(n, samples, shift=shift)
        chart = replace(chart, validated=report.is_constant)
    return chart


def identity_chart() -> DarbouxChart:
    return DarbouxChart(None)


def pushforward_tensor(J: np.ndarray, chart: DarbouxChart, point) -> np.ndarray:
    """D J D^T with D the chart jacobian at ``point``."""
    D = chart.jacobian(point)
    if np.linalg.cond(D) > 1e12:
        raise SingularJacobian("chart jacobian is singular at this point")
    return D @ J @ D.T


def _domain_points(n: int, N: int, samples: int, seed: int, shift=0.0):
    chart = DarbouxChart(n, shift)
    pts = []
    s = seed
    while len(pts) < samples:
        if s - seed > 100 * samples:
            raise DomainViolation("could not sample points inside the chart domain")
        x = random_instance(N, s).coordinates()
        s += 1
        half = x.size // 2
        if n >= 2:
            # squeeze the pole arguments into the sector |arg z| < pi/(n-1)
            z = x[:half]
            x[:half] = np.abs(z) * np.exp(1j * np.angle(z) * 0.95 / (n - 1))
        if n >= 1 and np.min(np.abs(x[:half])) < 0.1:
            continue
        try:
            chart.check_domain(x)
        except DomainViolation:
            continue
        pts.append(x)
    return pts


@dataclass(frozen=True)
class ChartReport:
    n: int
    N: int
    shift: complex
    is_constant: bool
    max_deviation: float
    deviation: np.ndarray
    reference: np.ndarray
    samples: int

    def ones_block_sign(self, tol: float = 1e-10) -> int:
        """+1 or -1 if the reference equals that multiple of the ones block, else 0."""
        C = CanonicalTensor("ones_block", self.N).matrix()
        for s in (1, -1):
            if np.max(np.abs(self.reference - s * C)) < tol:
                return s
        return 0

    def to_dict(self) -> dict:
        c = complex(self.shift)
        return {"n": self.n, "N": self.N, "shift": [c.real, c.imag],
                "is_constant": self.is_constant,
                "max_deviation": self.max_deviation,
                "deviation": np.asarray(self.deviation).tolist(),
                "reference": tensor_to_rows(self.reference),
                "ones_block_sign": self.ones_block_sign(),
                "samples": self.samples}


def _pushforwards(n, N, samples, seed, shift):
    chart = DarbouxChart(n, shift)
    out = []
    for x in _domain_points(n, N, samples, seed, shift):
        J = coord_tensor_closed(n, x[:N], x[N:])
        out.append(pushforward_tensor(J, chart, x))
    return out


def chart_constancy_report(n: int, samples: int = 8, N: int = 2, seed: int = 0,
                           shift: complex = 0.0) -> ChartReport:
    """Pushforward of the closed-form tensor at random domain points.

    Constant iff every entry spreads by less than 1e-8 across samples.
    """
    Js = _pushforwards(n, N, samples, seed, shift)
    ref = Js[0]
    dev = np.max([np.abs(J - ref) for J in Js], axis=0)
    mx = float(dev.max())
    return ChartReport(n, N, shift, mx < CONSTANCY_TOL, mx, dev, ref, len(Js))


def search_chart_shift(n: int, samples: int = 8, N: int = 2, seed: int = 0):
    """Least-squares shift c making theta_k = log rho_k + c log z_k constant.

    The pushforward is affine in c, so pushforward(c) = A + c B; the c that
    best cancels the spread of A + c B across samples is found in closed
    form and then checked with :func:`chart_constancy_report`.
    """
    A = _pushforwards(n, N, samples, seed, 0.0)
    B = [b - a for a, b in zip(A, _pushforwards(n, N, samples, seed, 1.0))]
    dA = np.concatenate([(a - A[0]).ravel() for a in A[1:]])
    dB = np.concatenate([(b - B[0]).ravel() for b in B[1:]])
    denom = np.vdot(dB, dB).real
    c = -np.vdot(dB, dA) / denom if denom > 0 else 0.0
    c = complex(c)
    if abs(c - round(c.real)) < 1e-9:
        c = complex(round(c.real))
    return c, chart_constancy_report(n, samples, N, seed, shift=c)


@dataclass(frozen=True)
class CasimirBasis:
    vectors: np.ndarray

    def __len__(self):
        return len(self.vectors)


def casimirs_n0(N: int) -> CasimirBasis:
    """Differences I_k - I_{k+1} and theta_k - theta_{k+1}."""
    if N < 2:
        raise TooSmall("N = 1 has no Casimirs of this family")
    vecs = []
    for block in (0, N):
        for k in range(N - 1):
            v = np.zeros(2 * N)
            v[block + k], v[block + k + 1] = 1.0, -1.0
            vecs.append(v)
    return CasimirBasis(np.array(vecs))


def n0_tensor(N: int, seed: int = 0) -> np.ndarray:
    """Pushforward of the n = 0 closed-form tensor to (I, theta) at a random point."""
    return _pushforwards(0, N, 1, seed, 0.0)[0]


def action_angle_average(N: int, seed: int = 0) -> dict:
    """{I_avg, Theta_avg} from the n = 0 tensor in (I, theta) coordinates."""
    J = n0_tensor(N, seed)
    I_avg = np.concatenate([np.full(N, 1.0 / N), np.zeros(N)])
    Theta = np.concatenate([np.zeros(N), np.full(N, 1.0 / N)])
    value = complex(I_avg @ J @ Theta)
    if abs(abs(value) - 1) > 1e-12:
        raise AssertionError(f"|{{I, Theta}}| = {abs(value)} != 1")
    return {"I": I_avg, "Theta": Theta, "bracket_value": value,
            "sign": int(np.sign(value.real)),
            "I_I": complex(I_avg @ J @ I_avg)}


def rank_n0(N: int) -> int:
    return numerical_rank(CanonicalTensor("ones_block", N).matrix(), 1e-10)


def casimir_nullspace_dim(N: int) -> int:
    return len(nullspace(CanonicalTensor("ones_block", N).matrix(), 1e-10))
