"""
Shadowing Lab
Pseudo-orbits of truncated composition operators, the finite-horizon
least-squares shadow, divergence certificates for the fixed-point and
parabolic cases, the power-sum lemma and the shadowing verdict.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import qr, solve_triangular

from . import config
from . import hardy_space as hs
from . import lft_core as lft
from .comp_op import OperatorMatrix, comp_matrix, matrix_power_apply
from .errors import IdentityMap, IllConditioned, InvalidParameter, OutsideDisk, ZeroAtFixedPoint, ZeroVector

logger = logging.getLogger(__name__)

SHADOWED = 'shadowed'
FAILED = 'failed'


@dataclass(frozen=True, eq=False)
class PseudoOrbit:
    """States x_1..x_L as rows, with residuals ||T x_n - x_(n+1)||"""
    states: np.ndarray
    delta: float
    residuals: np.ndarray

    def __len__(self) -> int:
        return self.states.shape[0]


@dataclass(frozen=True, eq=False)
class ShadowReport:
    shadow: np.ndarray
    sup_error: float
    epsilon: float
    verdict: str
    condition_estimate: float = 1.0
    errors: np.ndarray = field(default_factory=lambda: np.zeros(0))
    warnings: Tuple[str, ...] = ()
    extras: Dict[str, float] = field(default_factory=dict)

    @property
    def shadowed(self) -> bool:
        return self.verdict == SHADOWED


@dataclass(frozen=True, eq=False)
class DivergenceCertificate:
    n_values: np.ndarray
    lower_bounds: np.ndarray
    growth_exponent: float
    constants: Dict[str, complex]
    n0: Optional[int]
    orbit_values: np.ndarray = field(default_factory=lambda: np.zeros(0))


@dataclass(frozen=True)
class TransportCheck:
    residual_ratio: float
    shadow_ratio: float
    forward_norm: float
    backward_norm: float


def _verdict(sup_error: float, epsilon: float) -> str:
    return SHADOWED if sup_error <= epsilon else FAILED


def _residuals(T: np.ndarray, states: np.ndarray) -> np.ndarray:
    if len(states) < 2:
        return np.zeros(0)
    images = states[:-1] @ T.T
    return np.linalg.norm(images - states[1:], axis=1)


# =============================================================================
# PSEUDO-ORBITS
# =============================================================================

def make_pseudo_orbit(T: OperatorMatrix, states: np.ndarray, delta: float) -> PseudoOrbit:
    states = np.atleast_2d(np.asarray(states, dtype=complex))
    return PseudoOrbit(states, float(delta), _residuals(T.entries, states))


def natural_pseudo_orbit(T: OperatorMatrix, x: np.ndarray, delta: float, L: int) -> PseudoOrbit:
    """
    x_n = delta * sum_{j<n} T^j (x/||x||), so every step misses by exactly delta*x/||x||

    Raises:
        ZeroVector: x = 0
        InvalidParameter: delta <= 0 or L < 2
    """
    if delta <= 0:
        raise InvalidParameter(f"delta = {delta} must be > 0")
    if L < 2:
        raise InvalidParameter(f"L = {L} must be >= 2")

    x = np.asarray(x, dtype=complex)
    size = T.truncation + 1
    if len(x) < size:
        x = np.concatenate([x, np.zeros(size - len(x), dtype=complex)])
    norm = np.linalg.norm(x[:size])
    if norm == 0:
        raise ZeroVector("the seed vector is zero")

    powers = np.array(matrix_power_apply(T, x[:size] / norm, L - 1))
    states = delta * np.cumsum(powers, axis=0)
    orbit = PseudoOrbit(states, float(delta), _residuals(T.entries, states))
    logger.debug(f"[Orbit] L={L} delta={delta} max residual {orbit.residuals.max():.3e}")
    return orbit


def validate_pseudo_orbit(T: OperatorMatrix, orbit: PseudoOrbit) -> float:
    """Largest residual; exceeding delta + 1e-12 is logged as a violation"""
    residuals = _residuals(T.entries, orbit.states)
    worst = float(residuals.max()) if len(residuals) else 0.0
    if worst > orbit.delta + config.RESIDUAL_SLACK:
        logger.warning(f"[Orbit] residual {worst:.6g} exceeds delta {orbit.delta:.6g}")
    return worst


def check_pseudo_orbit(T: OperatorMatrix, orbit: PseudoOrbit) -> Tuple[bool, str]:
    worst = validate_pseudo_orbit(T, orbit)
    if worst > orbit.delta + config.RESIDUAL_SLACK:
        n = int(np.argmax(_residuals(T.entries, orbit.states))) + 1
        return False, f"residual {worst:.6g} at step {n} exceeds delta {orbit.delta:.6g}"
    return True, ""


# =============================================================================
# FINITE-HORIZON SHADOW
# =============================================================================

def shadow_errors(T: OperatorMatrix, x: np.ndarray, orbit: PseudoOrbit) -> np.ndarray:
    """||T^n x - x_(n+1)|| for n = 0..L-1"""
    iterates = np.array(matrix_power_apply(T, x, len(orbit) - 1))
    return np.linalg.norm(iterates - orbit.states, axis=1)


def finite_horizon_shadow(T: OperatorMatrix, orbit: PseudoOrbit, epsilon: float) -> ShadowReport:
    """
    Least-squares shadow: argmin_x sum_n ||T^n x - x_(n+1)||^2

    The stacked system [I; T; ...; T^(L-1)] x = [x_1; ...; x_L] is solved by
    an economic QR factorization. The sup error is recomputed from the
    minimizer, so the verdict is an upper bound on the best achievable one.
    """
    if epsilon <= 0:
        raise InvalidParameter(f"epsilon = {epsilon} must be > 0")

    warnings: List[str] = []
    if len(orbit) > config.HORIZON_CAP:
        warnings.append(f"horizon {len(orbit)} capped at {config.HORIZON_CAP}")
        logger.warning(f"[Shadow] {warnings[-1]}")
        orbit = PseudoOrbit(orbit.states[:config.HORIZON_CAP], orbit.delta,
                            orbit.residuals[:config.HORIZON_CAP - 1])

    L = len(orbit)
    size = T.truncation + 1
    blocks = []
    power = np.eye(size, dtype=complex)
    for _ in range(L):
        blocks.append(power)
        power = T.entries @ power
    A = np.vstack(blocks)
    b = orbit.states.reshape(-1)

    Q, R = qr(A, mode='economic')
    shadow = solve_triangular(R, Q.conj().T @ b)
    condition = float(np.linalg.cond(R))
    if not math.isfinite(condition) or condition > config.CONDITION_LIMIT:
        warnings.append(f"{IllConditioned.__name__}: condition estimate {condition:.3e} exceeds {config.CONDITION_LIMIT:.0e}")
        logger.warning(f"[Shadow] {warnings[-1]}")

    errors = shadow_errors(T, shadow, orbit)
    sup_error = float(errors.max())
    verdict = _verdict(sup_error, epsilon)
    logger.info(f"[Shadow] L={L} N={T.truncation} sup_error={sup_error:.6g} epsilon={epsilon} -> {verdict}")
    return ShadowReport(shadow, sup_error, float(epsilon), verdict, condition, errors, tuple(warnings))


# =============================================================================
# POWER-SUM LEMMA
# =============================================================================

def _check_lemma_params(s: float, a: complex):
    a = complex(a)
    if not 0 < s < 1:
        raise InvalidParameter(f"s = {s} must lie in (0, 1)")
    if a.real < -1e-12:
        raise InvalidParameter(f"Re(a) = {a.real:.6g} must be >= 0")
    if abs(a) == 0:
        raise InvalidParameter("a must be non-zero")


def lemma_constant(s: float, a: complex) -> float:
    """c = cos(s pi/2) |a|^s/(s + 1)"""
    _check_lemma_params(s, a)
    return math.cos(s * math.pi / 2) * abs(complex(a)) ** s / (s + 1)


def lemma_violation(s: float, a: complex, n_max: int) -> Optional[int]:
    """First n <= n_max with |sum_{j=0}^{n} (2 + ja)^s| < c n^(s+1), or None"""
    c = lemma_constant(s, a)
    if n_max < 1:
        raise InvalidParameter(f"n_max = {n_max} must be >= 1")
    j = np.arange(n_max + 1)
    sums = np.abs(np.cumsum((2 + j * complex(a)) ** s))
    n = j[1:]
    failed = np.nonzero(sums[1:] < c * n ** (s + 1.0))[0]
    return int(n[failed[0]]) if len(failed) else None


def lemma_check(s: float, a: complex, n_max: int) -> bool:
    violation = lemma_violation(s, a, n_max)
    if violation is not None:
        logger.warning(f"[Lemma] s={s} a={a} fails at n={violation}")
    return violation is None


def sweep_lemma(s_values: Iterable[float], a_values: Iterable[complex], n_max: int,
                max_workers: int = config.MAX_WORKERS) -> List[Dict]:
    """lemma_check over a grid of (s, a); rows come back in grid order"""
    grid = [(s, complex(a)) for s in s_values for a in a_values]
    results: Dict[int, Dict] = {}
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        futures = {
            executor.submit(lemma_violation, s, a, n_max): (index, s, a)
            for index, (s, a) in enumerate(grid)
        }
        for future in as_completed(futures):
            index, s, a = futures[future]
            violation = future.result()
            results[index] = {'s': s, 'a': a, 'n_max': n_max, 'violation': violation}
    rows = [results[index] for index in range(len(grid))]
    failures = sum(1 for row in rows if row['violation'] is not None)
    logger.info(f"[Lemma] swept {len(rows)} grid points, violations: {failures}")
    return rows


# =============================================================================
# DIVERGENCE CERTIFICATES
# =============================================================================

def fixed_point_orbit_value(alpha: complex, f: hs.TaylorPoly, delta: float, n: int) -> complex:
    """f_n(alpha) = n delta f(alpha)/||f||_2 for the natural pseudo-orbit of C_phi with phi(alpha) = alpha"""
    return n * delta * f(alpha) / hs.h2_norm(f)


def fixed_point_divergence_bound(alpha: complex, f: hs.TaylorPoly, delta: float,
                                 g_at_alpha: complex, n: int, p: float = 2.0) -> float:
    """
    (1 - |alpha|^2)^(1/p) [(delta |f(alpha)|/||f||_p) n - |g(alpha)|]

    Lower bound on ||C_phi^n g - f_n||_p when alpha in the disk is fixed by phi
    """
    if abs(alpha) >= 1:
        raise OutsideDisk(f"|alpha| = {abs(alpha):.6g} must be < 1")
    if delta <= 0:
        raise InvalidParameter(f"delta = {delta} must be > 0")
    f_alpha = f(alpha)
    if abs(f_alpha) < 1e-15:
        raise ZeroAtFixedPoint(f"f vanishes at the fixed point {alpha}")

    norm = hs.h2_norm(f) if p == 2 else hs.hp_norm(f, p)
    weight = 1.0 if math.isinf(p) else (1 - abs(alpha) ** 2) ** (1.0 / p)
    return weight * ((delta * abs(f_alpha) / norm) * n - abs(g_at_alpha))


def divergence_threshold(bound_fn: Callable[[int], float], epsilon: float,
                         n_start: int = 1, n_cap: int = 10 ** 9) -> Optional[int]:
    """First n >= n_start with bound_fn(n) > epsilon, for bounds increasing from n_start on"""
    if bound_fn(n_start) > epsilon:
        return n_start
    low, high = n_start, n_start + 1
    while bound_fn(high) <= epsilon:
        low, high = high, 2 * high
        if high > n_cap:
            return None
    while high - low > 1:
        mid = (low + high) // 2
        if bound_fn(mid) > epsilon:
            high = mid
        else:
            low = mid
    return high


def fixed_point_certificate(alpha: complex, f: hs.TaylorPoly, delta: float, g_at_alpha: complex,
                            n_values: Sequence[int], p: float = 2.0) -> DivergenceCertificate:
    n_values = np.asarray(n_values, dtype=int)
    bounds = np.array([fixed_point_divergence_bound(alpha, f, delta, g_at_alpha, int(n), p) for n in n_values])
    n0 = divergence_threshold(lambda n: fixed_point_divergence_bound(alpha, f, delta, g_at_alpha, n, p), 0.0)
    values = np.array([fixed_point_orbit_value(alpha, f, delta, int(n)) for n in n_values])
    constants = {'delta': delta, 'alpha': complex(alpha), 'f_norm': hs.h2_norm(f),
                 'f_at_alpha': f(alpha), 'g_at_alpha': complex(g_at_alpha), 'p': p}
    return DivergenceCertificate(n_values, bounds, 1.0, constants, n0, values)


def _check_parabolic_params(a: complex, s: float, delta: float, n: int):
    if not 0 < s < 0.5:
        raise InvalidParameter(f"s = {s} must lie in (0, 1/2)")
    _check_lemma_params(s, a)
    if delta <= 0:
        raise InvalidParameter(f"delta = {delta} must be > 0")
    if n < 2:
        raise InvalidParameter(f"n = {n} must be >= 2")


def parabolic_orbit_value(a: complex, s: float, delta: float, n: int, N: int = config.DEFAULT_N) -> complex:
    """f_n(0) = (delta/(2^s ||f_s||)) sum_{j<n} (2 + ja)^s with the truncated norm of f_s"""
    f_norm = hs.h2_norm(hs.binomial_series(s, N))
    j = np.arange(n)
    return complex(delta / (2 ** s * f_norm) * np.sum((2 + j * complex(a)) ** s))


def parabolic_divergence_bound(a: complex, s: float, delta: float, g_norm: float, n: int,
                               N: int = config.DEFAULT_N) -> float:
    """
    (delta c)/(2^s ||f_s|| (2 + |a|)) (n - 1)^(s+1)/n - ||g||/2

    Lower bound on ||C_phi^n g - f_n||_2 for the natural pseudo-orbit of the
    canonical parabolic map seeded with f_s = (1 - z)^(-s).
    """
    _check_parabolic_params(a, s, delta, n)
    c = lemma_constant(s, a)
    f_norm = hs.h2_norm(hs.binomial_series(s, N))
    scale = delta * c / (2 ** s * f_norm * (2 + abs(complex(a))))
    return scale * (n - 1) ** (s + 1) / n - g_norm / 2


def sharp_parabolic_bound(a: complex, s: float, delta: float, g_norm: float, n: int,
                          N: int = config.DEFAULT_N) -> float:
    """(|f_n(0)| (1 - |phi^[n](0)|^2)^(1/2) - ||g||)/2; never below parabolic_divergence_bound"""
    _check_parabolic_params(a, s, delta, n)
    gap, _ = lft.parabolic_origin_gap(a, n)
    value = abs(parabolic_orbit_value(a, s, delta, n, N))
    return (value * math.sqrt(gap) - g_norm) / 2


def parabolic_certificate(a: complex, s: float, delta: float, g_norm: float,
                          n_values: Sequence[int], N: int = config.DEFAULT_N) -> DivergenceCertificate:
    n_values = np.asarray(n_values, dtype=int)
    bounds = np.array([parabolic_divergence_bound(a, s, delta, g_norm, int(n), N) for n in n_values])
    values = np.array([parabolic_orbit_value(a, s, delta, int(n), N) for n in n_values])
    n0 = divergence_threshold(lambda n: parabolic_divergence_bound(a, s, delta, g_norm, n, N), 0.0, n_start=2)
    constants = {
        'delta': delta, 's': s, 'a': complex(a), 'g_norm': g_norm,
        'f_norm': hs.h2_norm(hs.binomial_series(s, N)), 'c': lemma_constant(s, a),
    }
    return DivergenceCertificate(n_values, bounds, s, constants, n0, values)


# =============================================================================
# VERDICTS
# =============================================================================

def shadowing_verdict(phi: lft.MoebiusMap) -> bool:
    """C_phi on H^2 has positive shadowing iff phi is HA or HNA_I"""
    if lft.is_identity(phi):
        raise IdentityMap("the identity map has no shadowing verdict")
    return lft.classify(phi).tag in lft.SHADOWING_CLASSES


def hp_shadowing_verdict(phi: lft.MoebiusMap, p: float) -> Optional[bool]:
    """
    Verdict on H^p. None marks the cases left open (HA and HNA_I for p != 2).
    """
    if p < 1:
        raise InvalidParameter(f"p = {p} must be >= 1")
    if p == 2:
        return shadowing_verdict(phi)
    if lft.is_identity(phi):
        raise IdentityMap("the identity map has no shadowing verdict")
    tag = lft.classify(phi).tag
    if math.isinf(p):
        return False
    return None if tag in lft.SHADOWING_CLASSES else False


def hinfty_counterexample(delta: float, L: int, phi: lft.MoebiusMap, N: int = 8,
                          candidate_sup: float = 0.0) -> Tuple[PseudoOrbit, DivergenceCertificate]:
    """
    Constant states f_n = n delta/2. C_phi fixes constants, so every residual
    has sup norm delta/2 whatever phi is, while any candidate f stays at
    distance >= n delta/2 - ||f||_inf.
    """
    if delta <= 0:
        raise InvalidParameter(f"delta = {delta} must be > 0")
    T = comp_matrix(phi, N)
    n = np.arange(1, L + 1)
    states = np.zeros((L, N + 1), dtype=complex)
    states[:, 0] = n * delta / 2
    images = states[:-1] @ T.entries.T
    residuals = np.array([hs.hp_norm(hs.TaylorPoly(r), math.inf, 64) for r in images - states[1:]])
    orbit = PseudoOrbit(states, float(delta), residuals)

    bounds = n * delta / 2 - candidate_sup
    constants = {'delta': delta, 'candidate_sup': candidate_sup}
    n0 = hinfty_threshold(delta, candidate_sup, 0.0)
    return orbit, DivergenceCertificate(n, bounds, 1.0, constants, n0, states[:, 0].copy())


def hinfty_threshold(delta: float, candidate_sup: float, epsilon: float) -> int:
    """n0 = floor(2 (epsilon + ||f||_inf)/delta) + 1, first n with n delta/2 - ||f||_inf > epsilon"""
    return int(math.floor(2 * (epsilon + candidate_sup) / delta)) + 1


# =============================================================================
# SIMILARITY TRANSPORT
# =============================================================================

def transport_orbit(U: np.ndarray, orbit: PseudoOrbit, T: OperatorMatrix) -> Tuple[OperatorMatrix, PseudoOrbit]:
    """Carry a delta-pseudo-orbit of T to a (||U|| delta)-pseudo-orbit of U T U^-1"""
    U = np.asarray(U, dtype=complex)
    conjugated = OperatorMatrix(U @ T.entries @ np.linalg.inv(U), f"U {T.provenance} U^-1")
    states = orbit.states @ U.T
    delta = float(np.linalg.norm(U, 2)) * orbit.delta
    return conjugated, make_pseudo_orbit(conjugated, states, delta)


def similarity_transport_check(T: OperatorMatrix, U: np.ndarray, orbit: PseudoOrbit,
                               epsilon: float) -> TransportCheck:
    """
    Residuals and shadow errors grow by at most ||U|| under x -> Ux, and the
    reverse trip costs at most ||U^-1||
    """
    U = np.asarray(U, dtype=complex)
    conjugated, moved = transport_orbit(U, orbit, T)
    report = finite_horizon_shadow(T, orbit, epsilon)
    moved_errors = shadow_errors(conjugated, U @ report.shadow, moved)

    residual_ratio = float(moved.residuals.max() / orbit.residuals.max()) if orbit.residuals.max() > 0 else 0.0
    shadow_ratio = float(moved_errors.max() / report.sup_error) if report.sup_error > 0 else 0.0
    return TransportCheck(residual_ratio, shadow_ratio,
                          float(np.linalg.norm(U, 2)), float(np.linalg.norm(np.linalg.inv(U), 2)))


# =============================================================================
# EXPORT
# =============================================================================

def orbit_csv_rows(orbit: PseudoOrbit, alpha: complex = 0.0,
                   lower_bounds: Optional[Sequence[float]] = None) -> List[Tuple]:
    """Rows n, residual, value_at_alpha_re, value_at_alpha_im, lower_bound for n = 1..L-1"""
    rows = []
    for n in range(1, len(orbit)):
        value = hs.evaluate(hs.TaylorPoly(orbit.states[n - 1]), alpha)
        bound = float(lower_bounds[n - 1]) if lower_bounds is not None else ''
        rows.append((n, float(orbit.residuals[n - 1]), value.real, value.imag, bound))
    return rows


def report_json(report: ShadowReport) -> Dict:
    payload = {
        'epsilon': report.epsilon,
        'sup_error': report.sup_error,
        'verdict': report.verdict,
        'condition_estimate': report.condition_estimate,
    }
    payload.update(report.extras)
    if report.warnings:
        payload['warnings'] = list(report.warnings)
    return payload
