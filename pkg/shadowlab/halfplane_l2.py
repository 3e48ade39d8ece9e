"""
Half-Plane Model
Midpoint-grid model of L^2(0, inf) carrying the weighted dilation
(W_a F)(t) = e^(-t(1-a)) F(at), its inverse V_a on the small-support
subspace, the M + N splitting at t = a, iterate norm bounds, the
splitting-based shadow and the Laplace (Paley-Wiener) bridge to H^2 of
the right half-plane.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from . import config
from .errors import InvalidParameter, NotInN, NotPseudoOrbit
from .shadowing_lab import FAILED, SHADOWED, ShadowReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples at t_k = (k + 1/2) h, h = T_max/G"""
    values: np.ndarray
    T_max: float = config.DEFAULT_T_MAX

    def __post_init__(self):
        object.__setattr__(self, 'values', np.asarray(self.values, dtype=complex))

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray], G: int = config.DEFAULT_GRID,
                      T_max: float = config.DEFAULT_T_MAX) -> 'GridFunction':
        t = (np.arange(G) + 0.5) * (T_max / G)
        values = np.zeros(G, dtype=complex)
        values[:] = fn(t)
        return cls(values, T_max)

    @classmethod
    def zeros(cls, G: int = config.DEFAULT_GRID, T_max: float = config.DEFAULT_T_MAX) -> 'GridFunction':
        return cls(np.zeros(G, dtype=complex), T_max)

    @property
    def G(self) -> int:
        return len(self.values)

    @property
    def h(self) -> float:
        return self.T_max / self.G

    @property
    def grid(self) -> np.ndarray:
        return (np.arange(self.G) + 0.5) * self.h

    @property
    def l2_norm(self) -> float:
        return math.sqrt(self.h * float(np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: 'GridFunction') -> complex:
        return complex(self.h * np.vdot(other.values, self.values))

    def with_values(self, values: np.ndarray) -> 'GridFunction':
        return GridFunction(values, self.T_max)

    def __add__(self, other: 'GridFunction') -> 'GridFunction':
        return self.with_values(self.values + other.values)

    def __sub__(self, other: 'GridFunction') -> 'GridFunction':
        return self.with_values(self.values - other.values)

    def scale(self, lam: complex) -> 'GridFunction':
        return self.with_values(lam * self.values)


@dataclass(frozen=True, eq=False)
class SplitSpaces:
    cutoff: float
    mask_M: np.ndarray
    mask_N: np.ndarray


@dataclass(frozen=True, eq=False)
class GridPseudoOrbit:
    states: Tuple[GridFunction, ...]
    delta: float
    residuals: np.ndarray

    def __len__(self) -> int:
        return len(self.states)


def _check_a(a: float):
    if not 0 < a < 1:
        raise InvalidParameter(f"a = {a} must lie in (0, 1)")


def _sample(F: GridFunction, points: np.ndarray) -> np.ndarray:
    """Linear interpolation of F at arbitrary points; zero past T_max"""
    return np.interp(points, F.grid, F.values, right=0.0)


# =============================================================================
# OPERATORS
# =============================================================================

def split_spaces(a: float, G: int = config.DEFAULT_GRID, T_max: float = config.DEFAULT_T_MAX) -> SplitSpaces:
    _check_a(a)
    t = (np.arange(G) + 0.5) * (T_max / G)
    mask_M = t >= a
    return SplitSpaces(a, mask_M, ~mask_M)


def split(a: float, F: GridFunction) -> Tuple[GridFunction, GridFunction]:
    """(P_M F, P_N F): M vanishes on (0, a), N vanishes on [a, inf)"""
    spaces = split_spaces(a, F.G, F.T_max)
    return (F.with_values(np.where(spaces.mask_M, F.values, 0)),
            F.with_values(np.where(spaces.mask_N, F.values, 0)))


def apply_W(a: float, F: GridFunction) -> GridFunction:
    """(W_a F)(t) = e^(-t(1-a)) F(at)"""
    _check_a(a)
    t = F.grid
    return F.with_values(np.exp(-t * (1 - a)) * _sample(F, a * t))


def _require_in_N(a: float, F: GridFunction):
    head, _ = split(a, F)
    leak = float(np.max(np.abs(head.values), initial=0.0))
    if leak > 1e-12:
        raise NotInN(f"function has magnitude {leak:.3e} on t >= {a}")


def apply_V(a: float, F: GridFunction) -> GridFunction:
    """(V_a F)(t) = e^((t/a)(1-a)) F(t/a), the inverse of W_a on N"""
    _check_a(a)
    _require_in_N(a, F)
    t = F.grid
    return F.with_values(np.exp((t / a) * (1 - a)) * _sample(F, t / a))


def iterate_W_closed_form(a: float, n: int, F: GridFunction) -> GridFunction:
    """W_a^n F(t) = e^(-t(1-a^n)) F(a^n t)"""
    _check_a(a)
    b = a ** n
    t = F.grid
    return F.with_values(np.exp(-t * (1 - b)) * _sample(F, b * t))


def iterate_V_closed_form(a: float, n: int, F: GridFunction) -> GridFunction:
    """V_a^n F(t) = e^((t/a^n)(1-a^n)) F(t/a^n)"""
    _check_a(a)
    _require_in_N(a, F)
    b = a ** n
    t = F.grid
    inside = t / b <= F.T_max
    values = np.zeros(F.G, dtype=complex)
    s = t[inside] / b
    values[inside] = np.exp(s * (1 - b)) * _sample(F, s)
    return F.with_values(values)


# =============================================================================
# ITERATE NORMS AND BOUNDS
# =============================================================================

def bound_W(a: float, n: int) -> float:
    """||W_a^n restricted to M|| <= e^(-a(1/a^n - 1))/a^(n/2)"""
    return math.exp(-a * (a ** -n - 1) - 0.5 * n * math.log(a))


def bound_V(a: float, n: int) -> float:
    """||V_a^n|| <= a^(n/2) e^(a(1 - a^n))"""
    return math.exp(0.5 * n * math.log(a) + a * (1 - a ** n))


def interpolation_matrix(points: np.ndarray, G: int, T_max: float) -> sparse.csr_matrix:
    """Sparse rows reproducing np.interp(points, grid, values, right=0.0) on the midpoint grid"""
    if G < 2:
        raise InvalidParameter(f"G = {G} must be >= 2")
    h = T_max / G
    points = np.asarray(points, dtype=float)
    inside = np.flatnonzero(points <= (G - 0.5) * h)
    x = np.clip(points[inside] / h - 0.5, 0.0, G - 1.0)
    lo = np.minimum(np.floor(x).astype(int), G - 2)
    frac = x - lo
    rows = np.concatenate([inside, inside])
    cols = np.concatenate([lo, lo + 1])
    data = np.concatenate([1.0 - frac, frac])
    return sparse.csr_matrix((data, (rows, cols)), shape=(len(points), G))


def W_matrix(a: float, G: int = config.DEFAULT_GRID, T_max: float = config.DEFAULT_T_MAX) -> sparse.csr_matrix:
    """apply_W as a sparse G x G matrix"""
    _check_a(a)
    t = (np.arange(G) + 0.5) * (T_max / G)
    return (sparse.diags(np.exp(-t * (1 - a))) @ interpolation_matrix(a * t, G, T_max)).tocsr()


def V_shift_matrix(a: float, size: int, cells_per_step: int = config.LOG_GRID_CELLS) -> sparse.csr_matrix:
    """
    V_a on N as a weighted shift

    With t = a e^(-u) and Phi(u) = (a e^(-u))^(1/2) F(t), L^2(0, a) maps
    isometrically onto L^2(0, inf) in u and V_a becomes
    Phi -> a^(1/2) e^(e^(-u)(1-a)) Phi(u - log(1/a)). A midpoint grid in u
    with `cells_per_step` cells per log(1/a) carries the shift exactly.
    """
    _check_a(a)
    du = -math.log(a) / cells_per_step
    u = (np.arange(size) + 0.5) * du
    rows = np.arange(cells_per_step, size)
    weights = math.sqrt(a) * np.exp(np.exp(-u[rows]) * (1 - a))
    return sparse.csr_matrix((weights, (rows, rows - cells_per_step)), shape=(size, size))


def _power_norm(A: sparse.spmatrix, x0: np.ndarray, iters: int = config.POWER_ITERS, tol: float = 1e-12) -> float:
    """Largest singular value by power iteration on A^T A"""
    x = x0 / np.linalg.norm(x0)
    value = 0.0
    for _ in range(iters):
        y = A.T @ (A @ x)
        y_norm = np.linalg.norm(y)
        if y_norm == 0:
            return 0.0
        new = float(x @ y)
        x = y / y_norm
        settled = abs(new - value) <= tol * new
        value = new
        if settled:
            break
    return math.sqrt(max(value, 0.0))


def _W_chain(a: float, n_max: int, G: int, T_max: float, restrict_to_M: bool):
    """Yields (n, W^n P_M) for n = 1..n_max, or W^n itself when unrestricted"""
    W = W_matrix(a, G, T_max)
    t = (np.arange(G) + 0.5) * (T_max / G)
    start = sparse.diags((t >= a).astype(float) if restrict_to_M else np.ones(G)).tocsr()
    power = start
    for n in range(1, n_max + 1):
        power = (W @ power).tocsr()
        power.eliminate_zeros()
        yield n, power, start.diagonal() * np.exp(-t)


def _V_chain(a: float, n_max: int, cells_per_step: int):
    size = cells_per_step * (n_max + config.LOG_GRID_TAIL)
    S = V_shift_matrix(a, size, cells_per_step)
    x0 = np.exp(-np.arange(size) / cells_per_step)
    power = sparse.identity(size, format='csr')
    for n in range(1, n_max + 1):
        power = (S @ power).tocsr()
        yield n, power, x0


def _chain_norm(n: int, power: sparse.spmatrix, x0: np.ndarray) -> float:
    if power.nnz == 0:
        return 0.0
    norm = _power_norm(power, x0)
    logger.debug(f"[Norm] n={n} nnz={power.nnz} norm={norm:.6g}")
    return norm


def measured_norm_W(a: float, n: int, G: int = config.DEFAULT_GRID,
                    T_max: float = config.DEFAULT_T_MAX, restrict_to_M: bool = True) -> float:
    """||W_a^n|| of the grid operator (restricted to M by default), by power iteration"""
    _check_a(a)
    if n < 1:
        raise InvalidParameter(f"n = {n} must be >= 1")
    *_, last = _W_chain(a, n, G, T_max, restrict_to_M)
    return _chain_norm(*last)


def measured_norm_V(a: float, n: int, cells_per_step: int = config.LOG_GRID_CELLS) -> float:
    """
    ||V_a^n|| on N by power iteration over the weighted-shift grid

    V_a^n F lives on (0, a^(n+1)), below the first cell of any practical
    uniform grid, so V is measured on the logarithmic grid of V_shift_matrix.
    """
    _check_a(a)
    if n < 1:
        raise InvalidParameter(f"n = {n} must be >= 1")
    *_, last = _V_chain(a, n, cells_per_step)
    return _chain_norm(*last)


def _root(norm: float, n: int) -> float:
    return norm ** (1.0 / n) if norm > 0 else 0.0


def spectral_bounds_report(a: float, n_max: int, G: int = config.DEFAULT_GRID,
                           T_max: float = config.DEFAULT_T_MAX,
                           cells_per_step: int = config.LOG_GRID_CELLS) -> List[Dict[str, float]]:
    """Rows n, measured_W, bound_W, measured_V, bound_V, root_W, root_V for n = 1..n_max"""
    _check_a(a)
    if n_max < 2:
        raise InvalidParameter(f"n_max = {n_max} must be >= 2")

    rows = []
    chains = zip(_W_chain(a, n_max, G, T_max, True), _V_chain(a, n_max, cells_per_step))
    for w_step, v_step in chains:
        n = w_step[0]
        norm_w = _chain_norm(*w_step)
        norm_v = _chain_norm(*v_step)
        rows.append({
            'n': n,
            'measured_W': norm_w,
            'bound_W': bound_W(a, n),
            'measured_V': norm_v,
            'bound_V': bound_V(a, n),
            'root_W': _root(norm_w, n),
            'root_V': _root(norm_v, n),
        })
    logger.info(f"[Norm] a={a} n_max={n_max} G={G} rows={len(rows)}")
    return rows


def decay_horizon(a: float) -> int:
    """n by which ||W_a^n|_M||^(1/n) has fallen below 0.01"""
    _check_a(a)
    return math.ceil(math.log(100) / abs(math.log(a))) + 2


def shadow_constant(a: float, tol: float = 1e-16) -> float:
    """K(a) = sum_{k>=0} bound_W(a, k) + sum_{k>=1} bound_V(a, k)"""
    _check_a(a)
    total = 0.0
    k = 0
    while True:
        term = bound_W(a, k)
        total += term
        k += 1
        if term < tol * total or k > 10_000:
            break
    k = 1
    while True:
        term = bound_V(a, k)
        total += term
        k += 1
        if term < tol * total or k > 100_000:
            break
    return total


# =============================================================================
# SPLITTING SHADOW
# =============================================================================

def grid_pseudo_orbit(a: float, states: Sequence[GridFunction], delta: float) -> GridPseudoOrbit:
    states = tuple(states)
    residuals = np.array([(apply_W(a, x) - y).l2_norm for x, y in zip(states[:-1], states[1:])])
    return GridPseudoOrbit(states, float(delta), residuals)


def _bump(rng: np.random.Generator, a: float, t: np.ndarray) -> np.ndarray:
    # vanishes near t = 0 so the V_a corrections stay resolvable
    mu = rng.uniform(0.6 * a, 4.0)
    sigma = a / 10
    coefficient = complex(rng.normal(), rng.normal())
    return coefficient * np.exp(-0.5 * ((t - mu) / sigma) ** 2)


def random_pseudo_orbit(a: float, delta: float, L: int, rng: np.random.Generator,
                        G: int = config.DEFAULT_GRID, T_max: float = config.DEFAULT_T_MAX) -> GridPseudoOrbit:
    """x_(n+1) = W_a x_n - e_n with random smooth errors of norm exactly delta"""
    _check_a(a)
    if delta <= 0 or L < 2:
        raise InvalidParameter(f"delta = {delta} must be > 0 and L = {L} >= 2")

    t = (np.arange(G) + 0.5) * (T_max / G)
    first = GridFunction(_bump(rng, a, t), T_max)
    states = [first.scale(1.0 / first.l2_norm)]
    for _ in range(L - 1):
        error = GridFunction(_bump(rng, a, t), T_max)
        error = error.scale(delta / error.l2_norm)
        states.append(apply_W(a, states[-1]) - error)
    return grid_pseudo_orbit(a, states, delta)


def gh_shadow(a: float, orbit: GridPseudoOrbit, epsilon: Optional[float] = None) -> ShadowReport:
    """
    Shadow x = x_1 - sum_{j>=1} V_a^j P_N e_j with e_j = W_a x_j - x_(j+1)

    Then W^n x - x_(n+1) splits into forward contractions on M and backward
    contractions on N, so sup_error <= K(a) delta. The target defaults to
    K(a) delta.
    """
    _check_a(a)
    errors = [apply_W(a, x) - y for x, y in zip(orbit.states[:-1], orbit.states[1:])]
    worst = max((e.l2_norm for e in errors), default=0.0)
    if worst > orbit.delta + config.RESIDUAL_SLACK:
        raise NotPseudoOrbit(f"residual {worst:.6g} exceeds delta {orbit.delta:.6g}")

    K = shadow_constant(a)
    target = K * orbit.delta if epsilon is None else epsilon

    shadow = orbit.states[0]
    for j, e in enumerate(errors, start=1):
        _, tail = split(a, e)
        shadow = shadow - iterate_V_closed_form(a, j, tail)

    measured = []
    current = shadow
    for n, state in enumerate(orbit.states):
        if n:
            current = apply_W(a, current)
        measured.append((current - state).l2_norm)
    measured = np.array(measured)
    sup_error = float(measured.max())

    verdict = SHADOWED if sup_error <= target else FAILED
    logger.info(f"[GH] a={a} delta={orbit.delta} L={len(orbit)} sup_error={sup_error:.4g} K*delta={K * orbit.delta:.4g}")
    return ShadowReport(shadow.values, sup_error, float(target), verdict, errors=measured,
                        extras={'a': a, 'delta': orbit.delta, 'K': K})


def gh_shadow_trials(a: float, delta: float, L: int, trials: int, seed: int = config.DEFAULT_SEED,
                     G: int = config.DEFAULT_GRID, T_max: float = config.DEFAULT_T_MAX,
                     max_workers: int = config.MAX_WORKERS) -> List[ShadowReport]:
    """Independent seeded trials; report order follows the trial index"""
    streams = np.random.SeedSequence(seed).spawn(trials)

    def run(stream):
        rng = np.random.default_rng(stream)
        return gh_shadow(a, random_pseudo_orbit(a, delta, L, rng, G, T_max))

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        return list(executor.map(run, streams))


def gh_shadow_json(report: ShadowReport) -> Dict[str, float]:
    return {
        'a': report.extras['a'],
        'delta': report.extras['delta'],
        'K': report.extras['K'],
        'sup_error': report.sup_error,
    }


# =============================================================================
# LAPLACE BRIDGE
# =============================================================================

def _check_half_plane(w: complex):
    if complex(w).real <= 0:
        raise InvalidParameter(f"Re(w) = {complex(w).real:.6g} must be > 0")


def paley_wiener(F: GridFunction, w: complex) -> complex:
    """
    (PF)(w) = int_0^T_max F(t) e^(-tw) dt

    Midpoint rule plus the endpoint correction (h^2/24)(f'(T_max) - f'(0)),
    with one-sided second-order differences for the derivatives.
    """
    _check_half_plane(w)
    h = F.h
    f = F.values * np.exp(-F.grid * complex(w))
    total = h * np.sum(f)
    if F.G >= 3:
        left = (-2 * f[0] + 3 * f[1] - f[2]) / h
        right = (2 * f[-1] - 3 * f[-2] + f[-3]) / h
        total += h * h / 24 * (right - left)
    return complex(total)


def paley_wiener_tail_bound(F: GridFunction, w: complex) -> float:
    """||F|| e^(-Re(w) T_max)/sqrt(2 Re(w)), the Cauchy-Schwarz bound on the dropped tail"""
    _check_half_plane(w)
    x = complex(w).real
    return F.l2_norm * math.exp(-x * F.T_max) / math.sqrt(2 * x)


def psi(a: float, w: complex) -> complex:
    """psi_a(w) = w/a + 1/a - 1"""
    return complex(w) / a + 1 / a - 1


def similarity_check(a: float, F: GridFunction, w_samples: Sequence[complex]) -> float:
    """max_w |P(W_a F)(w) - a^(-1) (PF)(psi_a(w))|"""
    _check_a(a)
    for w in w_samples:
        _check_half_plane(w)
    image = apply_W(a, F)
    gaps = [abs(paley_wiener(image, w) - paley_wiener(F, psi(a, w)) / a) for w in w_samples]
    return max(gaps, default=0.0)


def spectral_csv_rows(rows: List[Dict[str, float]]) -> List[Tuple]:
    columns = ('n', 'measured_W', 'bound_W', 'measured_V', 'bound_V', 'root_W', 'root_V')
    return [tuple(row[c] for c in columns) for row in rows]
