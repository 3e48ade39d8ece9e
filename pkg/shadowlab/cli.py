"""
ShadowLab command line
  classify    classify a linear fractional symbol and report its shadowing verdict
  experiment  pseudo-orbit, shadow, lemma, half-plane, spectral and transport experiments
  report      canonical family table with verdicts

Exit codes: 0 ok, 2 symbol errors, 3 configuration errors, 4 violated checks.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, config
from . import comp_op
from . import experiment_recorder as recorder
from . import halfplane_l2 as hp
from . import hardy_space as hs
from . import lft_core as lft
from . import shadowing_lab as lab
from .errors import ConfigError, IdentityMap, InvariantViolation, ShadowLabError
from .family_catalog import get_family_catalog, param_label, random_family_map
from .run_logger import RunLogger, configure_logging, get_run_logger

logger = logging.getLogger(__name__)

SYMBOLS = ('elliptic', 'parabolic', 'ha', 'hna1', 'hna2', 'lox')
BOUNDARY_SYMBOLS = ('parabolic', 'ha', 'hna1', 'hna2')
LEMMA_S_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
LEMMA_A_GRID = (1, 2, 4, 1j, 2j, 1 + 1j, 0.1)
HA_HORIZONS = (25, 50, 100)
HA_GROWTH_LIMIT = 1.5
LAPLACE_SAMPLES = (1.0, 2.0, 1 + 1j)
RANDOM_DRAWS = 100


@dataclass(frozen=True)
class ExperimentConfig:
    N: int = config.DEFAULT_N
    L: int = config.DEFAULT_L
    delta: float = config.DEFAULT_DELTA
    epsilon: float = config.DEFAULT_EPSILON
    grid: int = config.DEFAULT_GRID
    T_max: float = config.DEFAULT_T_MAX
    tol: float = config.DEFAULT_TOL
    seed: int = config.DEFAULT_SEED
    out: Optional[str] = None
    fmt: str = 'json'

    def validate(self) -> Tuple[bool, str]:
        for name in ('N', 'L', 'delta', 'epsilon', 'grid', 'T_max', 'tol'):
            value = getattr(self, name)
            if not value > 0:
                return False, f"{name} must be positive, got {value}"
        if self.seed < 0:
            return False, f"seed must be non-negative, got {self.seed}"
        if self.L < 2:
            return False, f"L must be >= 2, got {self.L}"
        if self.out is not None and not self.out.strip():
            return False, "output path is empty"
        if self.fmt not in ('json', 'csv'):
            return False, f"format must be json or csv, got {self.fmt!r}"
        return True, ""

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'ExperimentConfig':
        settings = {name: getattr(args, name) for name in cls.__dataclass_fields__ if getattr(args, name, None) is not None}
        cfg = cls(**settings)
        ok, message = cfg.validate()
        if not ok:
            raise ConfigError(f"❌ {message}")
        return cfg


# =============================================================================
# PARSING
# =============================================================================

def parse_complex(text: str) -> complex:
    """'1', '-2.5', '2i', '1+2i', '0.3-0.4i' -> complex"""
    cleaned = str(text).strip().replace(' ', '').replace('i', 'j')
    try:
        return complex(cleaned)
    except ValueError:
        raise ConfigError(f"❌ cannot read {text!r} as a complex number (use re+imi)")


def parse_coeffs(text: str) -> Tuple[complex, complex, complex, complex]:
    parts = [p for p in str(text).split(',')]
    if len(parts) != 4:
        raise ConfigError(f"❌ --coeffs needs 4 comma-separated values, got {len(parts)}")
    return tuple(parse_complex(p) for p in parts)


def _fmt_complex(z: complex) -> List[float]:
    return [float(z.real), float(z.imag)]


# =============================================================================
# CLASSIFY
# =============================================================================

def run_classify(coeffs: Sequence[complex], tol: float = config.DEFAULT_TOL) -> Dict:
    """Classification report of z -> (az + b)/(cz + d)"""
    phi = lft.make_moebius(*coeffs)
    if lft.is_identity(phi):
        raise IdentityMap("identity map")

    cls = lft.classify(phi, tol)
    form = lft.canonical_form(phi, tol)
    fps = lft.fixed_points(phi)
    verdict = lab.shadowing_verdict(phi)
    return {
        'class': cls.tag,
        'fixed_points': ['inf' if lft.is_infinite(p) else _fmt_complex(p) for p in fps.points],
        'multiplier': _fmt_complex(cls.multiplier),
        'canonical_params': {k: _fmt_complex(v) for k, v in sorted(form.params.items())},
        'shadowing_verdict': verdict,
        'verdict': verdict,
    }


# =============================================================================
# EXPERIMENTS
# =============================================================================

@dataclass(frozen=True, eq=False)
class SymbolSetup:
    name: str
    phi: lft.MoebiusMap
    seed: hs.TaylorPoly
    alpha: complex
    bound: Optional[Callable[[int, np.ndarray], float]] = None
    exact: bool = False
    sharp_bound: Optional[Callable[[int, np.ndarray], float]] = None


def _symbol_setup(args: argparse.Namespace, cfg: ExperimentConfig) -> SymbolSetup:
    """Symbol, seed vector and certificate for the orbit and shadow experiments"""
    symbol = args.symbol
    if symbol == 'elliptic':
        omega = parse_complex(args.omega)
        phi = lft.canonical_ea(omega)
        seed = hs.poly(1)

        def bound(n, shadow):
            g_at_alpha = hs.evaluate(hs.TaylorPoly(shadow), 0) if shadow is not None else 0
            return lab.fixed_point_divergence_bound(0, seed, cfg.delta, g_at_alpha, n)
        return SymbolSetup(symbol, phi, seed, 0j, bound, exact=True)

    if symbol == 'parabolic':
        a = parse_complex(args.a)
        phi = lft.canonical_parabolic(a)
        seed = hs.binomial_series(args.s, cfg.N)

        def bound(n, shadow):
            g_norm = float(np.linalg.norm(shadow)) if shadow is not None else 0.0
            if n < 2:
                return -g_norm / 2
            return lab.parabolic_divergence_bound(a, args.s, cfg.delta, g_norm, n, cfg.N)

        def sharp_bound(n, shadow):
            g_norm = float(np.linalg.norm(shadow)) if shadow is not None else 0.0
            return lab.sharp_parabolic_bound(a, args.s, cfg.delta, g_norm, n, cfg.N)
        return SymbolSetup(symbol, phi, seed, 0j, bound, sharp_bound=sharp_bound)

    r = float(args.r)
    if symbol == 'ha':
        phi = lft.canonical_ha(r)
    elif symbol == 'hna1':
        phi = lft.canonical_hna1(r)
    elif symbol == 'hna2':
        phi = lft.canonical_hna2(r)
    else:
        phi = lft.canonical_lox(parse_complex(args.a), parse_complex(args.c))
    return SymbolSetup(symbol, phi, hs.poly(1), 0j, None)


def _natural_orbit(setup: SymbolSetup, cfg: ExperimentConfig) -> Tuple[comp_op.OperatorMatrix, lab.PseudoOrbit]:
    T = comp_op.comp_matrix(setup.phi, cfg.N)
    orbit = lab.natural_pseudo_orbit(T, setup.seed.coeffs, cfg.delta, cfg.L)
    ok, message = lab.check_pseudo_orbit(T, orbit)
    if not ok:
        raise InvariantViolation(message)
    return T, orbit


def orbit_truncation(args: argparse.Namespace, cfg: ExperimentConfig) -> int:
    """An explicit --N wins; symbols with a fixed point on the circle otherwise get the longer truncation"""
    if getattr(args, 'N', None) is None and args.symbol in BOUNDARY_SYMBOLS:
        return config.BOUNDARY_TRUNCATION
    return cfg.N


def experiment_orbit(args, cfg: ExperimentConfig, out_dir: Path) -> Tuple[str, int]:
    cfg = replace(cfg, N=orbit_truncation(args, cfg))
    logger.info(f"[Orbit] {args.symbol} truncated at N={cfg.N}")
    setup = _symbol_setup(args, cfg)
    _, orbit = _natural_orbit(setup, cfg)
    bounds = None
    if setup.bound is not None:
        bounds = [setup.bound(n, None) for n in range(1, len(orbit))]
    recorder.write_csv(out_dir / f"orbit_{setup.name}.csv",
                       ('n', 'residual', 'value_at_alpha_re', 'value_at_alpha_im', 'lower_bound'),
                       lab.orbit_csv_rows(orbit, setup.alpha, bounds))
    return f"max residual: {orbit.residuals.max():.12g}", 0


def experiment_shadow(args, cfg: ExperimentConfig, out_dir: Path) -> Tuple[str, int]:
    setup = _symbol_setup(args, cfg)
    T, orbit = _natural_orbit(setup, cfg)
    report = lab.finite_horizon_shadow(T, orbit, cfg.epsilon)

    code = 0
    bounds = None
    if setup.bound is not None:
        bounds = [setup.bound(n, report.shadow) for n in range(1, len(orbit) + 1)]
    if setup.exact:
        below = [n for n, (err, b) in enumerate(zip(report.errors, bounds), start=1) if err < b - 1e-9]
        if below:
            logger.error(f"[Shadow] measured error below the certificate at n={below[:5]}")
            code = InvariantViolation.exit_code

    payload = lab.report_json(report)
    if setup.sharp_bound is not None:
        payload['sharp_lower_bounds'] = [setup.sharp_bound(n, report.shadow) for n in range(2, len(orbit) + 1)]
    recorder.write_json(out_dir / f"shadow_{setup.name}.json", payload)
    recorder.write_csv(out_dir / f"orbit_{setup.name}.csv",
                       ('n', 'residual', 'value_at_alpha_re', 'value_at_alpha_im', 'lower_bound'),
                       lab.orbit_csv_rows(orbit, setup.alpha, bounds))
    return f"sup_error: {report.sup_error:.6g} ({report.verdict})", code


def experiment_lemma(args, cfg: ExperimentConfig, out_dir: Path) -> Tuple[str, int]:
    if args.sweep:
        rows = lab.sweep_lemma(LEMMA_S_GRID, LEMMA_A_GRID, args.nmax)
    else:
        a = parse_complex(args.a)
        rows = [{'s': args.s, 'a': a, 'n_max': args.nmax, 'violation': lab.lemma_violation(args.s, a, args.nmax)}]
    for row in rows:
        row['constant'] = lab.lemma_constant(row['s'], row['a'])
    violations = sum(1 for row in rows if row['violation'] is not None)
    recorder.write_json(out_dir / 'lemma.json', {'rows': rows, 'violations': violations})
    return f"violations: {violations}", InvariantViolation.exit_code if violations else 0


def experiment_halfplane(args, cfg: ExperimentConfig, out_dir: Path) -> Tuple[str, int]:
    a = float(args.a)
    rows = hp.spectral_bounds_report(a, args.nmax, cfg.grid, cfg.T_max)
    violations = sum(1 for row in rows
                     if row['measured_W'] > row['bound_W'] + 1e-6 or row['measured_V'] > row['bound_V'] + 1e-6)
    recorder.write_csv(out_dir / f"halfplane_a{a:g}.csv",
                       ('n', 'measured_W', 'bound_W', 'measured_V', 'bound_V', 'root_W', 'root_V'),
                       hp.spectral_csv_rows(rows))

    F = hp.GridFunction.from_callable(lambda t: np.exp(-t), cfg.grid, cfg.T_max)
    reference = comp_op.halfplane_symbol_norm(a)
    norm_W = hp.measured_norm_W(a, 1, cfg.grid, cfg.T_max, restrict_to_M=False)
    recorder.write_json(out_dir / f"halfplane_a{a:g}.json", {
        'a': a,
        'grid': cfg.grid,
        'norm_W': norm_W,
        'reference_norm': reference,
        'relative_gap': (reference - norm_W) / reference,
        'similarity_gap': hp.similarity_check(a, F, LAPLACE_SAMPLES),
        'laplace_tail_bound': max(hp.paley_wiener_tail_bound(F, w) for w in LAPLACE_SAMPLES),
        'violations': violations,
    })
    return f"bound violations: {violations}", InvariantViolation.exit_code if violations else 0


def experiment_gh_shadow(args, cfg: ExperimentConfig, out_dir: Path) -> Tuple[str, int]:
    a = float(args.a)
    reports = hp.gh_shadow_trials(a, cfg.delta, cfg.L, args.trials, cfg.seed, cfg.grid, cfg.T_max)
    worst = max(reports, key=lambda r: r.sup_error)
    payload = hp.gh_shadow_json(worst)
    payload['trials'] = [r.sup_error for r in reports]
    failures = sum(1 for r in reports if not r.shadowed)
    recorder.write_json(out_dir / 'gh_shadow.json', payload)
    summary = f"sup_error: {worst.sup_error:.6g} K*delta: {payload['K'] * cfg.delta:.6g} violations: {failures}"
    return summary, InvariantViolation.exit_code if failures else 0


def experiment_spectral(args, cfg: ExperimentConfig, out_dir: Path) -> Tuple[str, int]:
    phi = lft.canonical_ha(float(args.r))
    annulus = comp_op.spectrum_annulus_HA(phi)
    T = comp_op.comp_matrix(phi, cfg.N)
    estimate = comp_op.norm_and_spectral_radius(T)

    shadows = []
    for L in HA_HORIZONS:
        orbit = lab.natural_pseudo_orbit(T, hs.poly(1).coeffs, cfg.delta, L)
        report = lab.finite_horizon_shadow(T, orbit, cfg.epsilon)
        shadows.append({'L': L, 'sup_error': report.sup_error, 'verdict': report.verdict})

    growth = shadows[-1]['sup_error'] / shadows[0]['sup_error'] if shadows[0]['sup_error'] > 0 else 0.0
    bounded = growth <= HA_GROWTH_LIMIT
    if not bounded:
        logger.warning(f"[Spectral] sup_error grew {growth:.3g}x from L={HA_HORIZONS[0]} to L={HA_HORIZONS[-1]} "
                       f"at N={cfg.N}")

    payload = {
        'annulus': [annulus.inner, annulus.outer],
        'contains_unit_circle': annulus.contains_unit_circle,
        'matrix': comp_op.summary_json(T, estimate),
        'shadows': shadows,
        'growth': growth,
        'bounded_in_L': bounded,
    }
    if estimate.warnings:
        payload['warnings'] = estimate.warnings
    recorder.write_json(out_dir / 'spectral.json', payload)
    return (f"annulus: ({annulus.inner:.6g}, {annulus.outer:.6g}) "
            f"sup_error@L={HA_HORIZONS[-1]}: {shadows[-1]['sup_error']:.6g} growth: {growth:.3g}"), 0


def experiment_transport(args, cfg: ExperimentConfig, out_dir: Path) -> Tuple[str, int]:
    """Carry the natural pseudo-orbit and its shadow through C_sigma for a disk automorphism sigma"""
    setup = _symbol_setup(args, cfg)
    T, orbit = _natural_orbit(setup, cfg)
    sigma = lft.disk_automorphism(parse_complex(args.w))
    U = comp_op.comp_matrix(sigma, cfg.N).entries
    check = lab.similarity_transport_check(T, U, orbit, cfg.epsilon)

    slack = 1 + 1e-9
    violated = check.residual_ratio > check.forward_norm * slack or check.shadow_ratio > check.forward_norm * slack
    recorder.write_json(out_dir / f"transport_{setup.name}.json", {
        'symbol': setup.name,
        'w': _fmt_complex(parse_complex(args.w)),
        'residual_ratio': check.residual_ratio,
        'shadow_ratio': check.shadow_ratio,
        'forward_norm': check.forward_norm,
        'backward_norm': check.backward_norm,
    })
    summary = f"residual ratio: {check.residual_ratio:.6g} shadow ratio: {check.shadow_ratio:.6g} ||U||: {check.forward_norm:.6g}"
    return summary, InvariantViolation.exit_code if violated else 0


EXPERIMENTS = {
    'orbit': experiment_orbit,
    'shadow': experiment_shadow,
    'lemma': experiment_lemma,
    'halfplane': experiment_halfplane,
    'gh-shadow': experiment_gh_shadow,
    'spectral': experiment_spectral,
    'transport': experiment_transport,
}


def run_experiment(kind: str, args: argparse.Namespace, cfg: ExperimentConfig) -> Tuple[str, int]:
    out_dir = recorder.output_dir(cfg.out)
    logger.info(f"[Experiment] {kind} -> {out_dir}")
    return EXPERIMENTS[kind](args, cfg, out_dir)


# =============================================================================
# REPORT
# =============================================================================

def family_rows(tol: float = config.DEFAULT_TOL) -> List[Dict]:
    catalog = get_family_catalog()
    rows = []
    for tag, params, phi in catalog.rows():
        cls = lft.classify(phi, tol)
        verdict = lab.shadowing_verdict(phi)
        rows.append({
            'family': tag,
            'param': param_label(params),
            'class': cls.tag,
            'verdict': verdict,
            'expected_verdict': catalog.expected_verdict(tag),
        })
    return rows


def random_draw_summary(seed: int, draws: int = RANDOM_DRAWS, tol: float = config.DEFAULT_TOL) -> Dict[str, Dict]:
    catalog = get_family_catalog()
    rng = np.random.default_rng(seed)
    summary = {}
    for tag in catalog.tags:
        mismatches = 0
        for _ in range(draws):
            phi, _ = random_family_map(tag, rng)
            if lft.classify(phi, tol).tag != tag or lab.shadowing_verdict(phi) != catalog.expected_verdict(tag):
                mismatches += 1
        summary[tag] = {'draws': draws, 'mismatches': mismatches}
    return summary


def emit_report(suite: str, out: Optional[str], fmt: str = 'json', seed: int = config.DEFAULT_SEED,
                tol: float = config.DEFAULT_TOL) -> Tuple[Path, int]:
    if out is not None and not out.strip():
        raise ConfigError("❌ --out is empty")
    path = Path(out) if out else recorder.output_dir() / f"table1.{fmt}"

    rows = family_rows(tol)
    mismatches = [r for r in rows if r['class'] != r['family'] or r['verdict'] != r['expected_verdict']]
    draws = random_draw_summary(seed, tol=tol) if suite == 'all' else None
    if draws:
        mismatches += [{'family': tag, **d} for tag, d in draws.items() if d['mismatches']]

    if fmt == 'csv':
        recorder.write_csv(path, ('family', 'param', 'class', 'verdict'),
                           [(r['family'], r['param'], r['class'], r['verdict']) for r in rows])
    else:
        payload = {'rows': rows, 'mismatches': len(mismatches)}
        if draws:
            payload['random_draws'] = draws
        recorder.write_json(path, payload)

    for row in mismatches:
        logger.error(f"[Report] mismatch: {row}")
    return path, InvariantViolation.exit_code if mismatches else 0


# =============================================================================
# ENTRY POINT
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='shadowlab', description='Shadowing experiments for composition operators')
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('--log-level', default=config.LOG_LEVEL, choices=('DEBUG', 'INFO', 'WARNING', 'ERROR'))
    parser.add_argument('--log-dir', default=None, help='run log root (default $SHADOWLAB_LOG_DIR)')
    parser.add_argument('--seed', type=int, default=config.DEFAULT_SEED)
    commands = parser.add_subparsers(dest='command', required=True)

    classify = commands.add_parser('classify', help='classify z -> (az + b)/(cz + d)')
    classify.add_argument('--coeffs', required=True, help='a,b,c,d with complex values as re+imi')
    classify.add_argument('--tol', type=float, default=config.DEFAULT_TOL)
    classify.add_argument('--out', default=None, help='also write the report to this JSON file')

    experiment = commands.add_parser('experiment', help='run an experiment and write its artifacts')
    experiment.add_argument('kind', choices=sorted(EXPERIMENTS))
    experiment.add_argument('--symbol', choices=SYMBOLS, default='parabolic')
    experiment.add_argument('--a', default=None, help='parabolic or lemma parameter; half-plane dilation')
    experiment.add_argument('--c', default='0', help='loxodromic center')
    experiment.add_argument('--r', default=0.5, type=float)
    experiment.add_argument('--omega', default='i', help='elliptic rotation')
    experiment.add_argument('--w', default='0.3', help='disk automorphism center for transport')
    experiment.add_argument('--s', default=0.25, type=float)
    experiment.add_argument('--nmax', default=None, type=int)
    experiment.add_argument('--sweep', action='store_true', help='lemma over the full (s, a) grid')
    experiment.add_argument('--trials', default=1, type=int)
    experiment.add_argument('--N', type=int)
    experiment.add_argument('--L', type=int)
    experiment.add_argument('--delta', type=float)
    experiment.add_argument('--epsilon', type=float)
    experiment.add_argument('--grid', type=int)
    experiment.add_argument('--T-max', dest='T_max', type=float)
    experiment.add_argument('--tol', type=float)
    experiment.add_argument('--out', default=None, help='output directory (default $SHADOWLAB_OUT_DIR)')
    experiment.add_argument('--format', dest='fmt', choices=('json', 'csv'), default='json')

    report = commands.add_parser('report', help='canonical family table with verdicts')
    report.add_argument('--suite', choices=('all', 'table1'), default='table1')
    report.add_argument('--format', dest='fmt', choices=('json', 'csv'), default='json')
    report.add_argument('--out', default=None, help='report file (default <out dir>/table1.<format>)')
    report.add_argument('--tol', type=float, default=config.DEFAULT_TOL)
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == 'classify':
        result = run_classify(parse_coeffs(args.coeffs), args.tol)
        if args.out is not None:
            if not args.out.strip():
                raise ConfigError("❌ --out is empty")
            recorder.write_json(Path(args.out), result)
        print(json.dumps(result, sort_keys=True))
        return 0

    if args.command == 'experiment':
        if args.nmax is None:
            args.nmax = 20 if args.kind == 'halfplane' else 10_000
        if args.a is None:
            args.a = '0.5' if args.kind in ('halfplane', 'gh-shadow') or args.symbol == 'lox' else '1'
        cfg = ExperimentConfig.from_args(args)
        summary, code = run_experiment(args.kind, args, cfg)
        print(summary)
        return code

    path, code = emit_report(args.suite, args.out, args.fmt, args.seed, args.tol)
    print(f"report: {path}")
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    run_log = get_run_logger() if args.log_dir is None else RunLogger(args.log_dir)
    run_log.cleanup_old_logs(weeks_to_keep=config.LOG_WEEKS_TO_KEEP)
    settings = {k: v for k, v in sorted(vars(args).items()) if v is not None}
    log_file = run_log.start_run(args.command if args.command != 'experiment' else f"experiment-{args.kind}", settings)
    logger.debug(f"[CLI] logging to {log_file}")

    try:
        return _dispatch(args)
    except ShadowLabError as e:
        logger.error(f"[CLI] {type(e).__name__}: {e}")
        print(json.dumps({'error': type(e).__name__, 'message': str(e)}), file=sys.stderr)
        return e.exit_code
    finally:
        run_log.end_run()


if __name__ == '__main__':
    sys.exit(main())
