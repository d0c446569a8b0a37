import logging
import os

import pytest

from pascalis.config import TERM_CEILING_ENV, PascalisConfig, get_config, reset_config
from pascalis.errors import ConfigError, InputError
from pascalis.logs import setup_logging


def _write(tmp_path, text):
    path = tmp_path / "pascalis.yaml"
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_bundled_config_matches_defaults():
    config = get_config()
    assert config.get("pascal.m_max_multiplier") == 3
    assert config.get("pascal.m_max_cap") == 64
    assert config.term_ceiling() == 5_000_000
    assert config.get("pascal.work_factor") == 50
    assert config.get("pascal.evidence_ceiling") == 20_000
    assert config.get("output.format") == "json"
    assert config.get("messages.headers.pascal") == "[Pascal sequence]"


def test_missing_file_falls_back_to_defaults(tmp_path):
    config = PascalisConfig(str(tmp_path / "absent.yaml"))
    assert config.get("pascal.probe_doublings") == 3
    assert config.get_int("pascal.work_factor", minimum=1) == 50
    assert config.get("messages.headers.pascal") is None


def test_partial_file_is_merged_over_defaults(tmp_path):
    config = PascalisConfig(_write(tmp_path, "pascal:\n  m_max_cap: 10\n"))
    assert config.get("pascal.m_max_cap") == 10
    assert config.get("pascal.m_max_multiplier") == 3


@pytest.mark.parametrize("text", ["pascal: [1, 2\n", "- just\n- a list\n"])
def test_malformed_file_is_a_config_error(tmp_path, text):
    with pytest.raises(ConfigError):
        PascalisConfig(_write(tmp_path, text))


def test_config_error_is_an_input_error():
    assert issubclass(ConfigError, InputError)


def test_dotted_lookup_default():
    config = get_config()
    assert config.get("pascal.nothing.here", "fallback") == "fallback"
    assert config.get("output") == {"format": "json", "indent": 2}


def test_get_int_validates(tmp_path):
    config = PascalisConfig(_write(tmp_path, "pascal:\n  m_max_cap: yes\n  probe_doublings: -1\n"))
    with pytest.raises(ConfigError):
        config.get_int("pascal.m_max_cap", minimum=1)
    with pytest.raises(ConfigError):
        config.get_int("pascal.probe_doublings")
    assert config.get_int("pascal.m_max_multiplier", minimum=1) == 3


def test_environment_overrides_term_ceiling(monkeypatch):
    monkeypatch.setenv(TERM_CEILING_ENV, "1234")
    assert get_config().term_ceiling() == 1234
    monkeypatch.setenv(TERM_CEILING_ENV, "  ")
    assert get_config().term_ceiling() == 5_000_000


@pytest.mark.parametrize("raw", ["lots", "0", "-5"])
def test_invalid_environment_ceiling(monkeypatch, raw):
    monkeypatch.setenv(TERM_CEILING_ENV, raw)
    with pytest.raises(ConfigError):
        get_config().term_ceiling()


def test_jobs_zero_means_every_core(tmp_path):
    assert get_config().jobs() == (os.cpu_count() or 1)
    config = reset_config(_write(tmp_path, "runtime:\n  jobs: 3\n"))
    assert config.jobs() == 3
    assert get_config() is config


def test_golden_dir(tmp_path):
    assert (get_config().golden_dir() / "nagata.map").is_file()
    config = PascalisConfig(_write(tmp_path, f"corpus:\n  golden_dir: {tmp_path}\n"))
    assert config.golden_dir() == tmp_path


def test_setup_logging_installs_one_handler():
    root = setup_logging(verbose=True)
    setup_logging(verbose=True)
    ours = [h for h in root.handlers if type(h).__name__ == "_StderrHandler"]
    assert len(ours) == 1
    assert root.level == logging.INFO
    assert setup_logging().level == logging.WARNING
    assert setup_logging(debug=True).level == logging.DEBUG
    setup_logging()


def test_progress_lines_go_to_stderr(capsys):
    setup_logging(verbose=True)
    logging.getLogger("pascalis.pascal").info("[Pascal] step %d", 3)
    captured = capsys.readouterr()
    assert "[Pascal] step 3" in captured.err
    assert captured.out == ""
    setup_logging()
