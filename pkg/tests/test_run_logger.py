import logging

from shadowlab.run_logger import RunLogger


def test_run_log_captures_records(tmp_path):
    run_log = RunLogger(str(tmp_path))
    log_file = run_log.start_run('experiment-orbit', {'N': 32, 'delta': 0.1})
    logging.getLogger('shadowlab.test').warning('[Test] recorded line')
    run_log.end_run()

    text = log_file.read_text()
    assert log_file.parent.parent == tmp_path
    assert log_file.name.endswith('_experiment-orbit.log')
    assert 'N: 32' in text
    assert '[Test] recorded line' in text


def test_end_run_detaches_handler(tmp_path):
    run_log = RunLogger(str(tmp_path))
    before = len(logging.getLogger().handlers)
    run_log.start_run('classify')
    assert len(logging.getLogger().handlers) == before + 1
    run_log.end_run()
    run_log.end_run()
    assert len(logging.getLogger().handlers) == before


def test_write_log(tmp_path):
    path = RunLogger(str(tmp_path)).write_log(None, 'body')
    assert path.endswith('_no-command.log')
    assert open(path, encoding='utf-8').read().endswith('body')


def test_cleanup_old_logs(tmp_path):
    run_log = RunLogger(str(tmp_path))
    current = run_log.get_week_folder()
    stale = tmp_path / '2001-W01'
    stale.mkdir()
    (tmp_path / 'notes').mkdir()
    run_log.cleanup_old_logs(weeks_to_keep=4)
    assert current.exists()
    assert not stale.exists()
    assert (tmp_path / 'notes').exists()
