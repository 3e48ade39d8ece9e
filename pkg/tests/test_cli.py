import csv
import json
import logging

import pytest

from shadowlab import cli, config
from shadowlab.errors import ConfigError


@pytest.fixture(autouse=True)
def detach_stderr_handler():
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, '_shadowlab', False):
            root.removeHandler(handler)


@pytest.fixture
def run(tmp_path, capsys):
    """Run the CLI and return (exit code, stdout, stderr)"""
    def _run(*argv):
        code = cli.main(['--log-dir', str(tmp_path / 'logs'), *argv])
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return _run


def _error_payload(err):
    return json.loads(err.strip().splitlines()[-1])


# =============================================================================
# CLASSIFY
# =============================================================================

def test_classify_hyperbolic_automorphism(run):
    code, out, _ = run('classify', '--coeffs', '1,0.5,0.5,1')
    result = json.loads(out)
    assert code == 0
    assert result['class'] == 'HA'
    assert result['verdict'] is True
    assert result['canonical_params']['r'][0] == pytest.approx(0.5)


def test_classify_parabolic_non_automorphism(run):
    code, out, _ = run('classify', '--coeffs', '0,2,-2,4')
    result = json.loads(out)
    assert code == 0
    assert result['class'] in ('PA', 'PNA')
    assert result['shadowing_verdict'] is False


def test_classify_identity_is_a_symbol_error(run):
    code, _, err = run('classify', '--coeffs', '1,0,0,1')
    assert code == 2
    assert _error_payload(err)['error'] == 'IdentityMap'


def test_classify_degenerate_and_malformed(run):
    assert run('classify', '--coeffs', '1,2,2,4')[0] == 2
    code, _, err = run('classify', '--coeffs', '1,2')
    assert code == 3
    assert _error_payload(err)['error'] == 'ConfigError'


def test_classify_writes_report(run, tmp_path):
    target = tmp_path / 'classify.json'
    code, _, _ = run('classify', '--coeffs', '0.5,0.5,0,1', '--out', str(target))
    assert code == 0
    assert json.loads(target.read_text())['class'] == 'HNA_I'


def test_run_classify_directly():
    result = cli.run_classify((0.5, 0.5, 0, 1))
    assert result['class'] == 'HNA_I'
    assert result['shadowing_verdict'] is True
    assert 'inf' in result['fixed_points']


def test_parse_complex():
    assert cli.parse_complex('1+2i') == 1 + 2j
    assert cli.parse_complex('2i') == 2j
    assert cli.parse_complex(' -0.5 ') == -0.5
    with pytest.raises(ConfigError):
        cli.parse_complex('abc')


# =============================================================================
# EXPERIMENTS
# =============================================================================

def test_lemma_experiment(run, out_dir):
    code, out, _ = run('experiment', 'lemma', '--a', '1', '--s', '0.5', '--nmax', '1000')
    assert code == 0
    assert out.strip() == 'violations: 0'
    payload = json.loads((out_dir / 'lemma.json').read_text())
    assert payload['rows'][0]['constant'] == pytest.approx(0.471405, abs=1e-6)


def test_orbit_experiment(run, out_dir):
    code, out, _ = run('experiment', 'orbit', '--symbol', 'parabolic', '--N', '32', '--L', '20')
    assert code == 0
    assert out.startswith('max residual:')
    with open(out_dir / 'orbit_parabolic.csv', newline='') as f:
        rows = list(csv.reader(f))
    assert rows[0] == ['n', 'residual', 'value_at_alpha_re', 'value_at_alpha_im', 'lower_bound']
    assert len(rows) == 20
    assert float(rows[1][1]) == pytest.approx(0.1)


def test_orbit_lower_bound_column(run, out_dir):
    from shadowlab import shadowing_lab as lab

    code, _, _ = run('experiment', 'orbit', '--symbol', 'parabolic', '--a', '2', '--N', '32', '--L', '20',
                     '--delta', '0.1')
    assert code == 0
    with open(out_dir / 'orbit_parabolic.csv', newline='') as f:
        rows = list(csv.reader(f))[1:]
    for row in rows[1:]:
        n = int(row[0])
        expected = lab.parabolic_divergence_bound(2, 0.25, 0.1, 0.0, n, 32)
        assert float(row[4]) == pytest.approx(expected, abs=1e-10)


def test_elliptic_shadow_experiment(run, out_dir):
    code, out, _ = run('experiment', 'shadow', '--symbol', 'elliptic', '--N', '8', '--L', '200')
    assert code == 0
    assert 'failed' in out
    payload = json.loads((out_dir / 'shadow_elliptic.json').read_text())
    assert payload['sup_error'] == pytest.approx(9.95, abs=1e-8)


def test_orbit_uses_boundary_truncation_without_N(run, out_dir):
    from shadowlab import shadowing_lab as lab

    code, _, _ = run('experiment', 'orbit', '--symbol', 'parabolic', '--L', '5')
    assert code == 0
    with open(out_dir / 'orbit_parabolic.csv', newline='') as f:
        rows = list(csv.reader(f))[1:]
    for row in rows[1:]:
        expected = lab.parabolic_divergence_bound(1, 0.25, 0.1, 0.0, int(row[0]), config.BOUNDARY_TRUNCATION)
        assert float(row[4]) == pytest.approx(expected, abs=1e-12)


def test_orbit_truncation():
    parser = cli.build_parser()
    for argv, expected in [
        (['experiment', 'orbit', '--symbol', 'ha'], config.BOUNDARY_TRUNCATION),
        (['experiment', 'orbit', '--symbol', 'parabolic', '--N', '32'], 32),
        (['experiment', 'orbit', '--symbol', 'elliptic'], config.DEFAULT_N),
    ]:
        args = parser.parse_args(argv)
        assert cli.orbit_truncation(args, cli.ExperimentConfig.from_args(args)) == expected


def test_parabolic_shadow_reports_sharp_bounds(run, out_dir):
    code, _, _ = run('experiment', 'shadow', '--symbol', 'parabolic', '--N', '16', '--L', '10')
    payload = json.loads((out_dir / 'shadow_parabolic.json').read_text())
    with open(out_dir / 'orbit_parabolic.csv', newline='') as f:
        rows = list(csv.reader(f))[1:]
    assert code == 0
    assert len(payload['sharp_lower_bounds']) == 9
    for sharp, row in zip(payload['sharp_lower_bounds'], rows[1:]):
        assert sharp >= float(row[4]) - 1e-12


def test_halfplane_experiment(run, out_dir):
    code, out, _ = run('experiment', 'halfplane', '--a', '0.5', '--nmax', '10')
    assert code == 0
    assert out.strip() == 'bound violations: 0'
    assert (out_dir / 'halfplane_a0.5.csv').exists()
    payload = json.loads((out_dir / 'halfplane_a0.5.json').read_text())
    assert payload['reference_norm'] == pytest.approx(2 ** 0.5)
    assert 0 < payload['relative_gap'] < 0.05
    assert payload['similarity_gap'] <= 1e-4
    assert payload['laplace_tail_bound'] < 1e-6


def test_gh_shadow_experiment(run, out_dir):
    code, _, _ = run('experiment', 'gh-shadow', '--trials', '2', '--L', '8')
    payload = json.loads((out_dir / 'gh_shadow.json').read_text())
    assert code == 0
    assert len(payload['trials']) == 2
    assert payload['K'] == pytest.approx(5.962270, abs=1e-5)


def test_spectral_experiment(run, out_dir):
    code, _, _ = run('experiment', 'spectral', '--r', '0.5', '--N', '16')
    payload = json.loads((out_dir / 'spectral.json').read_text())
    assert code == 0
    assert payload['contains_unit_circle'] is True
    assert [row['L'] for row in payload['shadows']] == list(cli.HA_HORIZONS)
    errors = [row['sup_error'] for row in payload['shadows']]
    assert payload['growth'] == pytest.approx(errors[-1] / errors[0])
    assert payload['bounded_in_L'] == (payload['growth'] <= cli.HA_GROWTH_LIMIT)


def test_transport_experiment(run, out_dir):
    code, out, _ = run('experiment', 'transport', '--symbol', 'elliptic', '--N', '16', '--L', '20')
    payload = json.loads((out_dir / 'transport_elliptic.json').read_text())
    assert code == 0
    assert out.startswith('residual ratio:')
    assert payload['residual_ratio'] <= payload['forward_norm'] * (1 + 1e-9)
    assert payload['shadow_ratio'] <= payload['forward_norm'] * (1 + 1e-9)
    assert payload['backward_norm'] >= 1 / payload['forward_norm']


def test_invalid_experiment_settings(run, out_dir):
    code, _, err = run('experiment', 'orbit', '--delta', '-1')
    assert code == 3
    assert _error_payload(err)['error'] == 'ConfigError'


# =============================================================================
# REPORT
# =============================================================================

def test_report_csv(run, tmp_path):
    target = tmp_path / 'table1.csv'
    code, _, _ = run('report', '--suite', 'table1', '--format', 'csv', '--out', str(target))
    assert code == 0
    lines = target.read_text().splitlines()
    assert lines[0] == 'family,param,class,verdict'
    assert len(lines) == 22
    assert 'HA,r=0.5,HA,True' in lines


def test_report_rejects_unknown_suite(run):
    with pytest.raises(SystemExit):
        run('report', '--suite', 'families')


def test_report_default_suite_is_table1():
    args = cli.build_parser().parse_args(['report'])
    assert args.suite == 'table1'


def test_emit_report_default_path(out_dir):
    path, code = cli.emit_report('table1', None)
    assert code == 0
    assert path == out_dir / 'table1.json'
    assert len(json.loads(path.read_text())['rows']) == 21


def test_run_experiment_directly(out_dir):
    args = cli.build_parser().parse_args(['experiment', 'lemma', '--a', '2', '--s', '0.3', '--nmax', '100'])
    cfg = cli.ExperimentConfig.from_args(args)
    summary, code = cli.run_experiment('lemma', args, cfg)
    assert (summary, code) == ('violations: 0', 0)
    assert (out_dir / 'lemma.json').exists()


def test_report_rejects_empty_out(run):
    code, _, err = run('report', '--out', '')
    assert code == 3
    assert _error_payload(err)['error'] == 'ConfigError'


def test_report_is_reproducible(run, tmp_path):
    first, second = tmp_path / 'a.json', tmp_path / 'b.json'
    assert run('report', '--out', str(first))[0] == 0
    assert run('report', '--out', str(second))[0] == 0
    assert first.read_bytes() == second.read_bytes()
    assert json.loads(first.read_text())['mismatches'] == 0


@pytest.mark.slow
def test_full_report_has_no_mismatches(run, tmp_path):
    target = tmp_path / 'all.json'
    code, _, _ = run('report', '--suite', 'all', '--out', str(target))
    payload = json.loads(target.read_text())
    assert code == 0
    assert all(d['mismatches'] == 0 for d in payload['random_draws'].values())
    assert all(d['draws'] == cli.RANDOM_DRAWS for d in payload['random_draws'].values())


def test_run_log_written(run, tmp_path):
    run('classify', '--coeffs', '1,0.5,0.5,1')
    logs = list((tmp_path / 'logs').glob('*/*_classify.log'))
    assert len(logs) == 1
    assert 'SHADOWLAB - Run Log' in logs[0].read_text()


def test_old_run_logs_are_pruned(run, tmp_path):
    stale = tmp_path / 'logs' / '2000-W01'
    stale.mkdir(parents=True)
    run('classify', '--coeffs', '1,0.5,0.5,1')
    assert not stale.exists()
    assert len(list((tmp_path / 'logs').glob('*/*_classify.log'))) == 1
