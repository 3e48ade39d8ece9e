"""
Hardy Space
Truncated Maclaurin model of H^p on the unit disk: inner products, reproducing
kernels, boundary-quadrature norms, pointwise bounds and the binomial test
family f_s(z) = (1 - z)^(-s).
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from . import config
from .errors import InvalidParameter, OutsideDisk

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TaylorPoly:
    """Coefficients c[0..N] of sum c[n] z^n"""
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'coeffs', np.atleast_1d(np.asarray(self.coeffs, dtype=complex)))

    @property
    def truncation(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z: complex) -> complex:
        return evaluate(self, z)

    def __len__(self) -> int:
        return len(self.coeffs)


@dataclass(frozen=True, eq=False)
class KernelVector:
    w: complex
    poly: TaylorPoly

    @property
    def exact_norm_sq(self) -> float:
        """||k_w||^2 = 1/(1 - |w|^2) for the untruncated kernel"""
        return 1.0 / (1.0 - abs(self.w) ** 2)

    @property
    def truncation_gap(self) -> float:
        n = self.poly.truncation
        return abs(self.w) ** (2 * (n + 1)) / (1.0 - abs(self.w) ** 2)


def poly(*coeffs: complex) -> TaylorPoly:
    return TaylorPoly(np.array(coeffs, dtype=complex))


def monomial(k: int, N: int) -> TaylorPoly:
    coeffs = np.zeros(N + 1, dtype=complex)
    coeffs[k] = 1.0
    return TaylorPoly(coeffs)


def _pad(coeffs: np.ndarray, length: int) -> np.ndarray:
    if len(coeffs) >= length:
        return coeffs
    return np.concatenate([coeffs, np.zeros(length - len(coeffs), dtype=complex)])


def evaluate(f: TaylorPoly, z: complex) -> complex:
    # Horner
    value = 0j
    for c in f.coeffs[::-1]:
        value = value * z + c
    return complex(value)


def evaluate_many(f: TaylorPoly, z: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), f.coeffs)


def poly_arith(f: TaylorPoly, g: TaylorPoly = None, op: str = 'add', lam: complex = 1.0) -> TaylorPoly:
    """
    Coefficientwise arithmetic on truncated series

    Args:
        op: 'add' (f + g), 'scale' (lam * f) or 'truncated_multiply'
            (f * g cut at the larger truncation)
    """
    if op == 'scale':
        return TaylorPoly(lam * f.coeffs)
    if g is None:
        raise InvalidParameter(f"operation {op!r} needs a second operand")

    length = max(len(f), len(g))
    a = _pad(f.coeffs, length)
    b = _pad(g.coeffs, length)
    if op == 'add':
        return TaylorPoly(a + b)
    if op == 'truncated_multiply':
        return TaylorPoly(np.convolve(a, b)[:length])
    raise InvalidParameter(f"unknown operation {op!r}")


def h2_inner(f: TaylorPoly, g: TaylorPoly) -> complex:
    """<f, g> = sum f[n] conj(g[n])"""
    length = max(len(f), len(g))
    return complex(np.vdot(_pad(g.coeffs, length), _pad(f.coeffs, length)))


def h2_norm(f: TaylorPoly) -> float:
    return float(np.linalg.norm(f.coeffs))


def kernel(w: complex, N: int) -> KernelVector:
    """Truncated reproducing kernel k_w(z) = sum conj(w)^n z^n"""
    if abs(w) >= 1:
        raise OutsideDisk(f"|w| = {abs(w):.6g} must be < 1")
    coeffs = np.conj(complex(w)) ** np.arange(N + 1)
    return KernelVector(complex(w), TaylorPoly(coeffs))


def hp_norm(f: TaylorPoly, p: float, M: int = config.QUADRATURE_M) -> float:
    """
    H^p norm of a polynomial from M boundary samples

    Polynomials are continuous on the closed disk and their integral means
    grow with the radius, so the norm is attained on the unit circle.
    p = inf gives the boundary maximum.
    """
    if p < 1:
        raise InvalidParameter(f"p = {p} must be >= 1")
    if M < 4:
        raise InvalidParameter(f"M = {M} quadrature points is too few")

    z = np.exp(2j * np.pi * np.arange(M) / M)
    moduli = np.abs(evaluate_many(f, z))
    if math.isinf(p):
        return float(np.max(moduli))
    return float(np.mean(moduli ** p) ** (1.0 / p))


def pointwise_bound_margin(f: TaylorPoly, z: complex, p: float = 2.0, M: int = config.QUADRATURE_M) -> float:
    """||f||_p (1 - |z|^2)^(-1/p) - |f(z)|; non-negative for every f in H^p"""
    if abs(z) >= 1:
        raise OutsideDisk(f"|z| = {abs(z):.6g} must be < 1")
    norm = h2_norm(f) if p == 2 else hp_norm(f, p, M)
    weight = 1.0 if math.isinf(p) else (1.0 - abs(z) ** 2) ** (-1.0 / p)
    return norm * weight - abs(evaluate(f, z))


def binomial_series(s: float, N: int) -> TaylorPoly:
    """Maclaurin coefficients of (1 - z)^(-s): c0 = 1, c_n = c_(n-1) (n - 1 + s)/n"""
    if s <= 0:
        raise InvalidParameter(f"s = {s} must be > 0")
    n = np.arange(1, N + 1, dtype=float)
    coeffs = np.concatenate([[1.0], np.cumprod((n - 1 + s) / n)])
    return TaylorPoly(coeffs)


def f_s_membership(s: float, p: float) -> bool:
    """(1 - z)^(-s) lies in H^p iff s < 1/p"""
    return s < (0.0 if math.isinf(p) else 1.0 / p)


def partial_norms_sq(s: float, truncations: Iterable[int]) -> List[Tuple[int, float]]:
    """Partial sums of ||f_s||_2^2 at increasing truncations"""
    truncations = sorted(truncations)
    series = binomial_series(s, truncations[-1])
    cumulative = np.cumsum(np.abs(series.coeffs) ** 2)
    return [(N, float(cumulative[N])) for N in truncations]


def to_json(f: TaylorPoly) -> List[List[float]]:
    return [[c.real, c.imag] for c in f.coeffs]


def to_csv_rows(f: TaylorPoly) -> List[Tuple[int, float, float]]:
    return [(n, c.real, c.imag) for n, c in enumerate(f.coeffs)]
