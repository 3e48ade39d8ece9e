"""
Composition Operators
Dense matrices of C_phi and of the weighted operator
f -> ((1 - Phi)/(1 - z)) f(Phi) in the monomial basis of truncated H^2,
operator norms, spectral radius estimates and the hyperbolic-automorphism
spectrum annulus.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from . import config
from . import hardy_space as hs
from . import lft_core as lft
from .errors import InvalidParameter, NoConvergence, PoleTooClose, WrongClass

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray
    provenance: str = ''

    @property
    def truncation(self) -> int:
        return self.entries.shape[0] - 1


@dataclass(frozen=True)
class SpectrumAnnulus:
    inner: float
    outer: float

    @property
    def contains_unit_circle(self) -> bool:
        """The unit circle lies in the interior of the annulus"""
        return self.inner < 1 < self.outer


@dataclass
class SpectralEstimate:
    norm: float
    spectral_radius: float
    previous_estimate: float
    schedule: List[Tuple[int, float]] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return not self.warnings


def symbol_series(phi: lft.MoebiusMap, N: int) -> hs.TaylorPoly:
    """
    Maclaurin coefficients of phi:
    b/d + ((ad - bc)/d^2) sum_{n>=1} (-c/d)^(n-1) z^n

    Raises:
        PoleTooClose: when the pole lies within 1e-9 of the closed disk
    """
    a, b, c, d = phi.coefficients
    coeffs = np.zeros(N + 1, dtype=complex)
    if abs(c) <= config.IDENTITY_TOL:
        coeffs[0] = b / d
        if N >= 1:
            coeffs[1] = a / d
        return hs.TaylorPoly(coeffs)

    pole = -d / c
    if abs(pole) <= 1 + config.POLE_MARGIN:
        raise PoleTooClose(f"pole {pole:.6g} is within {config.POLE_MARGIN} of the closed disk")

    coeffs[0] = b / d
    if N >= 1:
        ratio = -c / d
        coeffs[1:] = ((a * d - b * c) / d ** 2) * ratio ** np.arange(N)
    return hs.TaylorPoly(coeffs)


def _power_columns(series: np.ndarray, seed: np.ndarray, N: int) -> np.ndarray:
    """Columns seed * series^k, k = 0..N, each cut at degree N"""
    entries = np.zeros((N + 1, N + 1), dtype=complex)
    column = seed[:N + 1].copy()
    for k in range(N + 1):
        entries[:, k] = column
        column = np.convolve(column, series)[:N + 1]
    return entries


def comp_matrix(phi: lft.MoebiusMap, N: int) -> OperatorMatrix:
    """Column k holds the first N + 1 coefficients of phi^k"""
    series = symbol_series(phi, N).coeffs
    seed = np.zeros(N + 1, dtype=complex)
    seed[0] = 1.0
    return OperatorMatrix(_power_columns(series, seed, N), f"C[{phi!r}]")


def weight_series(Phi: lft.MoebiusMap, N: int) -> hs.TaylorPoly:
    """(1 - Phi(z))/(1 - z): the running sum of the coefficients of 1 - Phi"""
    series = symbol_series(Phi, N).coeffs
    one_minus = -series
    one_minus[0] += 1.0
    return hs.TaylorPoly(np.cumsum(one_minus))


def weighted_comp_matrix(Phi: lft.MoebiusMap, N: int) -> OperatorMatrix:
    """Matrix of f -> ((1 - Phi(z))/(1 - z)) f(Phi(z))"""
    series = symbol_series(Phi, N).coeffs
    weight = weight_series(Phi, N).coeffs
    return OperatorMatrix(_power_columns(series, weight, N), f"W[{Phi!r}]")


def apply(T: OperatorMatrix, f: hs.TaylorPoly) -> hs.TaylorPoly:
    size = T.truncation + 1
    coeffs = np.zeros(size, dtype=complex)
    head = f.coeffs[:size]
    coeffs[:len(head)] = head
    return hs.TaylorPoly(T.entries @ coeffs)


def matrix_power_apply(T: OperatorMatrix, x: np.ndarray, n: int) -> List[np.ndarray]:
    """[x, Tx, ..., T^n x]"""
    out = [np.asarray(x, dtype=complex)]
    for _ in range(n):
        out.append(T.entries @ out[-1])
    return out


def _power_norm(M: np.ndarray, iters: int) -> float:
    """Largest singular value by power iteration on M^H M"""
    size = M.shape[1]
    x = 1.0 / np.arange(1, size + 1)
    x = x.astype(complex) / np.linalg.norm(x)
    gram = M.conj().T @ M
    value = 0.0
    for _ in range(iters):
        y = gram @ x
        y_norm = np.linalg.norm(y)
        if y_norm == 0:
            return 0.0
        value = float(np.real(np.vdot(x, y)))
        x = y / y_norm
    return math.sqrt(max(value, float(np.real(np.vdot(x, gram @ x)))))


def norm_and_spectral_radius(T: OperatorMatrix, iters: int = 200) -> SpectralEstimate:
    """
    Operator norm by power iteration and spectral radius from ||T^n||^(1/n)
    over n = 1, 2, 4, ...

    Estimates that have not settled to 1e-3 are reported in `warnings`.
    """
    if iters < 10:
        raise InvalidParameter(f"iters = {iters} must be >= 10")

    norm = _power_norm(T.entries, iters)

    squarings = max(4, math.ceil(math.log2(iters)))
    power = T.entries.astype(complex)
    log_scale = 0.0
    n = 1
    schedule: List[Tuple[int, float]] = []
    for _ in range(squarings + 1):
        size = np.linalg.norm(power, 2)
        if size == 0:
            schedule.append((n, 0.0))
            break
        log_norm = log_scale + math.log(size)
        schedule.append((n, math.exp(log_norm / n)))
        power = power / size
        power = power @ power
        log_scale = 2 * log_norm
        n *= 2

    radius = schedule[-1][1]
    previous = schedule[-2][1] if len(schedule) > 1 else radius
    warnings = []
    if abs(radius - previous) > config.CONVERGENCE_GAP:
        warnings.append(f"{NoConvergence.__name__}: last estimates {previous:.6g} and {radius:.6g} differ by more than {config.CONVERGENCE_GAP}")
        logger.warning(f"[Spectral] {warnings[-1]}")
    return SpectralEstimate(norm, radius, previous, schedule, warnings)


def spectrum_annulus_HA(phi: lft.MoebiusMap) -> SpectrumAnnulus:
    """
    sigma(C_phi) = {phi'(alpha)^(1/2) <= |z| <= phi'(alpha)^(-1/2)} for a
    hyperbolic automorphism with attracting boundary fixed point alpha
    """
    cls = lft.classify(phi)
    if cls.tag != lft.HA:
        raise WrongClass(f"spectrum annulus needs a hyperbolic automorphism, got {cls.tag}")
    m = cls.multiplier.real
    return SpectrumAnnulus(math.sqrt(m), 1.0 / math.sqrt(m))


def halfplane_symbol_norm(a: float) -> float:
    """||C_psi|| = a^(-1/2) on H^2 of the right half-plane for psi(w) = w/a + (1/a - 1)"""
    if not 0 < a:
        raise InvalidParameter(f"a = {a} must be > 0")
    return a ** -0.5


def matrix_csv_rows(T: OperatorMatrix) -> List[Tuple[int, int, float, float]]:
    rows, cols = np.nonzero(np.abs(T.entries) > 1e-15)
    return [(int(r), int(c), float(T.entries[r, c].real), float(T.entries[r, c].imag))
            for r, c in zip(rows, cols)]


def summary_json(T: OperatorMatrix, estimate: SpectralEstimate) -> Dict[str, float]:
    return {
        'norm': estimate.norm,
        'spectral_radius': estimate.spectral_radius,
        'truncation': T.truncation,
    }
