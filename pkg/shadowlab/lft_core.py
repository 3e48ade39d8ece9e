"""
LFT Core
Moebius maps z -> (az + b)/(cz + d) stored as normalized SL2 matrices:
evaluation on the extended plane, composition and iterates, fixed points,
the seven-way classification of disk self-maps and their canonical forms.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np

from . import config
from .errors import (
    DegenerateCoefficients,
    IdentityMap,
    InvalidParameter,
    NotSelfMap,
    PoleEvaluation,
)

logger = logging.getLogger(__name__)

INFINITY = complex(math.inf, 0.0)

# Symbol classes
EA = 'EA'
HA = 'HA'
HNA_I = 'HNA_I'
HNA_II = 'HNA_II'
LOX = 'LOX'
PA = 'PA'
PNA = 'PNA'
IDENTITY = 'Identity'

SYMBOL_CLASSES = (EA, HA, HNA_I, HNA_II, LOX, PA, PNA)
SHADOWING_CLASSES = (HA, HNA_I)


def is_infinite(z: complex) -> bool:
    return cmath.isinf(z)


@dataclass(frozen=True, eq=False)
class MoebiusMap:
    """Linear fractional map with det(m) = 1"""
    m: np.ndarray

    @property
    def coefficients(self) -> Tuple[complex, complex, complex, complex]:
        return complex(self.m[0, 0]), complex(self.m[0, 1]), complex(self.m[1, 0]), complex(self.m[1, 1])

    @property
    def a(self) -> complex:
        return complex(self.m[0, 0])

    @property
    def b(self) -> complex:
        return complex(self.m[0, 1])

    @property
    def c(self) -> complex:
        return complex(self.m[1, 0])

    @property
    def d(self) -> complex:
        return complex(self.m[1, 1])

    @property
    def pole(self) -> complex:
        if abs(self.c) <= config.IDENTITY_TOL:
            return INFINITY
        return -self.d / self.c

    def __call__(self, z: complex) -> complex:
        return evaluate(self, z)

    def __repr__(self) -> str:
        a, b, c, d = self.coefficients
        return f"MoebiusMap(a={a:.6g}, b={b:.6g}, c={c:.6g}, d={d:.6g})"


@dataclass(frozen=True)
class FixedPointSet:
    points: Tuple[complex, ...]
    multiplicity: int = 1   # 2 for the parabolic double root

    @property
    def finite(self) -> Tuple[complex, ...]:
        return tuple(p for p in self.points if not is_infinite(p))

    @property
    def includes_infinity(self) -> bool:
        return any(is_infinite(p) for p in self.points)


@dataclass(frozen=True)
class SymbolClass:
    tag: str
    multiplier: Optional[complex] = None
    attracting_point: Optional[complex] = None


@dataclass(frozen=True)
class CanonicalForm:
    canonical: MoebiusMap
    conjugator: MoebiusMap
    tag: str
    params: Dict[str, complex] = field(default_factory=dict)


# =============================================================================
# CONSTRUCTION
# =============================================================================

def _normalize(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det) <= config.DET_FLOOR:
        raise DegenerateCoefficients(f"ad - bc = {det:.3g} is zero")
    return m / cmath.sqrt(det)


def from_matrix(m: np.ndarray) -> MoebiusMap:
    return MoebiusMap(_normalize(m))


def make_moebius(a: complex, b: complex, c: complex, d: complex) -> MoebiusMap:
    """
    Build z -> (az + b)/(cz + d), normalized so that ad - bc = 1

    Raises:
        DegenerateCoefficients: when |ad - bc| <= 1e-14
    """
    return from_matrix(np.array([[a, b], [c, d]], dtype=complex))


IDENTITY_MAP = make_moebius(1, 0, 0, 1)
CAYLEY = make_moebius(1, 1, -1, 1)


def canonical_ea(omega: complex) -> MoebiusMap:
    return make_moebius(omega, 0, 0, 1)


def canonical_ha(r: float) -> MoebiusMap:
    return make_moebius(1, r, r, 1)


def canonical_hna1(r: float) -> MoebiusMap:
    return make_moebius(r, 1 - r, 0, 1)


def canonical_hna2(r: float) -> MoebiusMap:
    return make_moebius(r, 0, -(1 - r), 1)


def canonical_lox(a: complex, c: complex) -> MoebiusMap:
    """z -> a(z - c) + c"""
    return make_moebius(a, c * (1 - a), 0, 1)


def canonical_parabolic(a: complex) -> MoebiusMap:
    return make_moebius(2 - a, a, -a, 2 + a)


def disk_automorphism(u: complex, lam: complex = 1.0) -> MoebiusMap:
    """z -> lam (z - u)/(1 - conj(u) z) with |lam| = 1, |u| < 1"""
    if abs(u) >= 1:
        raise InvalidParameter(f"|u| = {abs(u):.6g} must be < 1")
    if abs(abs(lam) - 1) > 1e-12:
        raise InvalidParameter(f"|lam| = {abs(lam):.6g} must be 1")
    return make_moebius(lam, -lam * u, -np.conj(u), 1)


def to_json(phi: MoebiusMap) -> Dict[str, list]:
    return {name: [value.real, value.imag] for name, value in zip('abcd', phi.coefficients)}


def from_json(obj: Dict[str, list]) -> MoebiusMap:
    return make_moebius(*(complex(obj[name][0], obj[name][1]) for name in 'abcd'))


# =============================================================================
# ARITHMETIC
# =============================================================================

def evaluate(phi: MoebiusMap, z: complex) -> complex:
    """(az + b)/(cz + d) on the extended plane: the pole goes to infinity, infinity to a/c"""
    a, b, c, d = phi.coefficients
    if is_infinite(z):
        return a / c if abs(c) > config.IDENTITY_TOL else INFINITY
    den = c * z + d
    if abs(den) <= 1e-14 * (abs(c * z) + abs(d)):
        return INFINITY
    return (a * z + b) / den


def compose(phi: MoebiusMap, psi: MoebiusMap) -> MoebiusMap:
    """phi o psi"""
    return from_matrix(phi.m @ psi.m)


def inverse(phi: MoebiusMap) -> MoebiusMap:
    a, b, c, d = phi.coefficients
    return from_matrix(np.array([[d, -b], [-c, a]], dtype=complex))


def _matrix_power(m: np.ndarray, n: int) -> np.ndarray:
    eigvals, vecs = np.linalg.eig(m)
    if abs(eigvals[0] - eigvals[1]) > 1e-6 and np.linalg.cond(vecs) < 1e8:
        return vecs @ np.diag(eigvals ** n) @ np.linalg.inv(vecs)
    # near-parabolic: repeated squaring
    return np.linalg.matrix_power(m, n)


def iterate(phi: MoebiusMap, n: int) -> MoebiusMap:
    """n-th iterate phi^[n]; phi^[0] is the identity"""
    if n < 0:
        raise InvalidParameter(f"iterate count must be >= 0, got {n}")
    if n == 0:
        return IDENTITY_MAP
    return from_matrix(_matrix_power(phi.m, n))


def compose_and_iterate(phi: MoebiusMap, other: Union[MoebiusMap, int]) -> MoebiusMap:
    if isinstance(other, MoebiusMap):
        return compose(phi, other)
    return iterate(phi, int(other))


def conjugate(phi: MoebiusMap, sigma: MoebiusMap) -> MoebiusMap:
    """sigma o phi o sigma^-1"""
    return compose(compose(sigma, phi), inverse(sigma))


def parabolic_iterate_closed_form(a: complex, n: int) -> MoebiusMap:
    """z -> ((2 - na)z + na)/(-na z + 2 + na), the n-th iterate of the canonical parabolic map"""
    if complex(a).real < -1e-12:
        raise InvalidParameter(f"Re(a) = {complex(a).real:.6g} must be >= 0")
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    na = n * a
    return make_moebius(2 - na, na, -na, 2 + na)


def parabolic_origin_gap(a: complex, n: int) -> Tuple[float, float]:
    """
    1 - |phi^[n](0)|^2 in closed form for the canonical parabolic map, and its
    lower bound 4/(n^2 (2 + |a|)^2)
    """
    a = complex(a)
    core = 4 + 4 * n * a.real
    gap = core / (core + n * n * abs(a) ** 2)
    lower = 4 / (n * n * (2 + abs(a)) ** 2)
    return gap, lower


def same_map(phi: MoebiusMap, psi: MoebiusMap, tol: float = 1e-9) -> bool:
    """Normalized matrices agree up to a global sign"""
    return min(np.max(np.abs(phi.m - psi.m)), np.max(np.abs(phi.m + psi.m))) <= tol


def is_identity(phi: MoebiusMap, tol: float = config.IDENTITY_TOL) -> bool:
    return same_map(phi, IDENTITY_MAP, tol)


def derivative_at(phi: MoebiusMap, z: complex) -> complex:
    """phi'(z) = (ad - bc)/(cz + d)^2"""
    a, b, c, d = phi.coefficients
    den = c * z + d
    if abs(den) <= 1e-14 * (abs(c * z) + abs(d)):
        raise PoleEvaluation(f"z = {z} is the pole of {phi}")
    return (a * d - b * c) / den ** 2


def cayley(z: complex) -> complex:
    """gamma(z) = (1 + z)/(1 - z), disk onto right half-plane"""
    if abs(1 - z) <= 1e-15:
        raise PoleEvaluation("Cayley transform has its pole at z = 1")
    return (1 + z) / (1 - z)


def cayley_inverse(w: complex) -> complex:
    if abs(w + 1) <= 1e-15:
        raise PoleEvaluation("inverse Cayley transform has its pole at w = -1")
    return (w - 1) / (w + 1)


def cayley_pair(value: complex, direction: str = 'forward') -> complex:
    if direction == 'forward':
        return cayley(value)
    if direction == 'inverse':
        return cayley_inverse(value)
    raise InvalidParameter(f"direction must be 'forward' or 'inverse', got {direction!r}")


def cayley_conjugate(phi: MoebiusMap) -> MoebiusMap:
    """gamma o phi o gamma^-1, the half-plane picture of phi"""
    return conjugate(phi, CAYLEY)


# =============================================================================
# FIXED POINTS AND CLASSIFICATION
# =============================================================================

def fixed_points(phi: MoebiusMap) -> FixedPointSet:
    """Roots of c z^2 + (d - a) z - b = 0, with infinity when c = 0"""
    if is_identity(phi):
        raise IdentityMap("identity map fixes every point")
    a, b, c, d = phi.coefficients
    if abs(c) <= config.IDENTITY_TOL:
        if abs(d - a) <= config.IDENTITY_TOL:
            return FixedPointSet((INFINITY,), multiplicity=2)
        return FixedPointSet((b / (d - a), INFINITY))

    if abs((a + d) ** 2 - 4) <= config.DOUBLE_ROOT_TOL:
        return FixedPointSet(((a - d) / (2 * c),), multiplicity=2)

    # stable quadratic formula
    B = d - a
    root = cmath.sqrt(B * B + 4 * b * c)
    q = -0.5 * (B + root) if abs(B + root) >= abs(B - root) else -0.5 * (B - root)
    return FixedPointSet((q / c, -b / q))


def _on_circle(p: complex) -> bool:
    return not is_infinite(p) and abs(abs(p) - 1) <= config.ON_CIRCLE_TOL


def is_automorphism(phi: MoebiusMap, tol: float = config.DEFAULT_TOL) -> bool:
    """Three boundary points land on the circle and 0 stays inside"""
    for z in (1, -1, 1j):
        w = evaluate(phi, z)
        if is_infinite(w) or abs(abs(w) - 1) > tol:
            return False
    w0 = evaluate(phi, 0)
    return not is_infinite(w0) and abs(w0) < 1


def validate_self_map(phi: MoebiusMap, tol: float = config.DEFAULT_TOL) -> Tuple[bool, str]:
    """
    Boundary sampling test for phi(D) in D

    Returns:
        (is_valid, message)
    """
    pole = phi.pole
    if not is_infinite(pole) and abs(pole) <= 1 + tol:
        return False, f"pole {pole:.6g} lies in the closed disk"

    a, b, c, d = phi.coefficients
    z = np.exp(2j * np.pi * np.arange(config.BOUNDARY_SAMPLES) / config.BOUNDARY_SAMPLES)
    values = (a * z + b) / (c * z + d)
    worst = float(np.max(np.abs(values)))
    if worst > 1 + tol:
        return False, f"|phi| reaches {worst:.6g} on the unit circle"

    w0 = evaluate(phi, 0)
    if is_infinite(w0) or abs(w0) >= 1:
        return False, f"|phi(0)| = {abs(w0):.6g} is not < 1"
    return True, ""


def _attracting(phi: MoebiusMap, fps: FixedPointSet) -> Tuple[complex, complex]:
    candidates = [p for p in fps.finite if abs(p) <= 1 + config.ON_CIRCLE_TOL]
    if not candidates:
        raise NotSelfMap(f"{phi} has no fixed point in the closed disk")
    scored = [(abs(derivative_at(phi, p)), p) for p in candidates]
    _, point = min(scored, key=lambda item: item[0])
    return point, derivative_at(phi, point)


def classify(phi: MoebiusMap, tol: float = config.DEFAULT_TOL) -> SymbolClass:
    """
    Classify a linear fractional self-map of the disk by fixed-point location

    Returns:
        SymbolClass with one of EA, HA, HNA_I, HNA_II, LOX, PA, PNA
        (Identity for the identity map)

    Raises:
        NotSelfMap: when phi does not map the disk into itself
    """
    if is_identity(phi):
        return SymbolClass(IDENTITY)

    ok, message = validate_self_map(phi, tol)
    if not ok:
        raise NotSelfMap(message)

    fps = fixed_points(phi)
    on_circle = [p for p in fps.points if _on_circle(p)]

    if fps.multiplicity == 2:
        if not on_circle:
            raise NotSelfMap(f"double fixed point {fps.points[0]} is off the unit circle")
        tag = PA if is_automorphism(phi, tol) else PNA
    elif len(on_circle) == 2:
        tag = HA
    elif len(on_circle) == 1:
        other = next(p for p in fps.points if not _on_circle(p))
        tag = HNA_I if is_infinite(other) or abs(other) > 1 else HNA_II
    else:
        tag = EA if is_automorphism(phi, tol) else LOX

    point, multiplier = _attracting(phi, fps)
    logger.debug(f"[Classify] {phi} -> {tag} (multiplier {multiplier:.6g})")
    return SymbolClass(tag, multiplier, point)


# =============================================================================
# CANONICAL FORMS
# =============================================================================

def three_point_map(p1: complex, p2: complex, p3: complex,
                    q1: complex, q2: complex, q3: complex) -> MoebiusMap:
    """Moebius map with p1 -> q1, p2 -> q2, p3 -> q3"""
    a = np.linalg.det(np.array(((p1 * q1, q1, 1), (p2 * q2, q2, 1), (p3 * q3, q3, 1))))
    b = np.linalg.det(np.array(((p1 * q1, p1, q1), (p2 * q2, p2, q2), (p3 * q3, p3, q3))))
    c = np.linalg.det(np.array(((p1, q1, 1), (p2, q2, 1), (p3, q3, 1))))
    d = np.linalg.det(np.array(((p1 * q1, p1, 1), (p2 * q2, p2, 1), (p3 * q3, p3, 1))))
    return make_moebius(a, b, c, d)


def _arc_midpoint(p: complex, q: complex) -> complex:
    """Midpoint of the counterclockwise arc from p to q"""
    start = cmath.phase(p)
    sweep = (cmath.phase(q) - start) % (2 * math.pi)
    return cmath.exp(1j * (start + sweep / 2))


def _automorphism_sending(u: complex, p: complex, target: complex = 1.0) -> MoebiusMap:
    """Disk automorphism with u -> 0 and boundary point p -> target"""
    base = disk_automorphism(u)
    v = evaluate(base, p)
    return disk_automorphism(u, target / v)


def _pole_parameter(q: complex) -> complex:
    return 0j if is_infinite(q) else 1 / np.conj(q)


def canonical_form(phi: MoebiusMap, tol: float = config.DEFAULT_TOL) -> CanonicalForm:
    """
    Conjugate phi by a disk automorphism sigma into its canonical family shape

    The conjugator moves the fixed points to 1 and -1 (HA), 1 and infinity
    (HNA_I), 1 and 0 (HNA_II), 1 (parabolic) or sends the exterior fixed point
    to infinity (EA, LOX). The multiplier is conjugation invariant, so the
    result is fixed by the class and one parameter.
    """
    cls = classify(phi, tol)
    if cls.tag == IDENTITY:
        raise IdentityMap("identity map has no canonical form")

    fps = fixed_points(phi)
    attracting = cls.attracting_point
    others = [p for p in fps.points if is_infinite(p) or p != attracting]
    other = others[0] if others else attracting
    multiplier = cls.multiplier
    params: Dict[str, complex] = {}

    if cls.tag == HA:
        sigma = three_point_map(attracting, _arc_midpoint(attracting, other), other, 1, 1j, -1)
        m = multiplier.real
        params['r'] = (1 - m) / (1 + m)
    elif cls.tag == HNA_I:
        sigma = _automorphism_sending(_pole_parameter(other), attracting)
        params['r'] = multiplier.real
    elif cls.tag == HNA_II:
        boundary = next(p for p in fps.points if _on_circle(p))
        sigma = _automorphism_sending(attracting, boundary)
        params['r'] = multiplier.real
    elif cls.tag in (PA, PNA):
        sigma = make_moebius(1, 0, 0, attracting)
    else:
        sigma = disk_automorphism(_pole_parameter(other))

    canonical = conjugate(phi, sigma)

    if cls.tag in (PA, PNA):
        params['a'] = cayley(evaluate(canonical, 0)) - 1
    elif cls.tag == EA:
        params['omega'] = multiplier
    elif cls.tag == LOX:
        params['a'] = multiplier
        params['c'] = evaluate(sigma, attracting)

    logger.debug(f"[Canonical] {cls.tag} params={params}")
    return CanonicalForm(canonical, sigma, cls.tag, params)


def family_shape(tag: str, params: Dict[str, complex]) -> MoebiusMap:
    """Canonical map of a class from its family parameters"""
    if tag == EA:
        return canonical_ea(params['omega'])
    if tag == HA:
        return canonical_ha(params['r'])
    if tag == HNA_I:
        return canonical_hna1(params['r'])
    if tag == HNA_II:
        return canonical_hna2(params['r'])
    if tag == LOX:
        return canonical_lox(params['a'], params['c'])
    if tag in (PA, PNA):
        return canonical_parabolic(params['a'])
    raise InvalidParameter(f"unknown symbol class {tag!r}")
