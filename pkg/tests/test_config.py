"""Configuration loading and logger setup"""

import logging
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from utils.config import load_config, runtime_threads
from utils.logger import get_logger, set_level


def test_default_config_sections():
    """Shipped config.yaml carries every section the services read"""

    config = load_config()

    for section in ('runtime', 'logging', 'geometry', 'lab', 'acceptance', 'recording'):
        assert section in config
    assert config['lab']['mask_cells'] == 3
    assert config['acceptance']['relative_tolerance'] == pytest.approx(0.01)


def test_env_default_substitution(tmp_path, monkeypatch):
    monkeypatch.delenv('MONODROME_THREADS', raising=False)
    monkeypatch.delenv('MONODROME_LOG_LEVEL', raising=False)
    path = tmp_path / 'config.yaml'
    path.write_text(
        "runtime:\n  threads: \"${MONODROME_THREADS:-3}\"\n"
        "recording:\n  enabled: false\n"
    )

    config = load_config(str(path))

    assert config['runtime']['threads'] == 3
    assert runtime_threads(config) == 3


def test_env_overrides_yaml(tmp_path, monkeypatch):
    path = tmp_path / 'config.yaml'
    path.write_text("runtime:\n  threads: 2\nlogging:\n  level: INFO\nrecording:\n  enabled: false\n")
    monkeypatch.setenv('MONODROME_THREADS', '5')
    monkeypatch.setenv('MONODROME_LOG_LEVEL', 'DEBUG')

    config = load_config(str(path))

    assert config['runtime']['threads'] == 5
    assert config['logging']['level'] == 'DEBUG'


def test_bad_thread_count_rejected(monkeypatch):
    monkeypatch.setenv('MONODROME_THREADS', 'many')
    with pytest.raises(ValueError, match='MONODROME_THREADS'):
        runtime_threads({})


def test_logger_writes_to_stderr():
    logger = get_logger('monodrome.test')

    assert logger.handlers
    assert logger.handlers[0].stream is sys.stderr
    assert logger.propagate is False


def test_set_level_applies_to_existing_loggers():
    logger = get_logger('monodrome.level')
    set_level('WARNING')
    assert logger.level == logging.WARNING
    set_level('INFO')
    assert logger.level == logging.INFO


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
