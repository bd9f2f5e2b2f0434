"""Structured logging setup."""

import json
import logging
import sys

import pytest

from snspd_toolkit.utils import LOG_FILE_NAME, CustomJSONFormatter, setup_logging


@pytest.fixture(autouse=True)
def _close_handlers():
    yield
    logging.shutdown()


def test_json_formatter_flattens_extra_dicts():
    record = logging.LogRecord("snspd_toolkit", logging.INFO, __file__, 7, "solved %s", ("stack",), None)
    record.result = {"energy_sum": 1.0, "layers": 4}
    record.command = "solve"
    entry = json.loads(CustomJSONFormatter().format(record))
    assert entry["message"] == "solved stack"
    assert entry["level"] == "INFO"
    assert entry["line"] == 7
    assert entry["energy_sum"] == 1.0
    assert entry["layers"] == 4
    assert entry["command"] == "solve"
    assert "args" not in entry


def test_json_formatter_keeps_exceptions():
    try:
        raise RuntimeError("singular matrix")
    except RuntimeError:
        record = logging.LogRecord("snspd_toolkit", logging.ERROR, __file__, 1, "failed", (), sys.exc_info())
    entry = json.loads(CustomJSONFormatter().format(record))
    assert "singular matrix" in entry["exception"]


def test_file_log_in_output_directory(tmp_path, monkeypatch):
    monkeypatch.delenv("NO_FILE_LOGS")
    logger = setup_logging("WARNING", tmp_path / "out")
    logger.debug("sweep chunk", extra={"chunk": 3})
    logging.shutdown()
    lines = (tmp_path / "out" / LOG_FILE_NAME).read_text().splitlines()
    entry = json.loads(lines[-1])
    assert entry["message"] == "sweep chunk"
    assert entry["chunk"] == 3


def test_no_file_logs_environment(tmp_path):
    logger = setup_logging("INFO", tmp_path / "out")
    logger.info("nothing on disk")
    assert not (tmp_path / "out").exists()


def test_console_goes_to_stderr(capsys):
    logger = setup_logging("WARNING")
    logger.warning("drift above threshold")
    logger.info("hidden")
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "drift above threshold" in captured.err
    assert "hidden" not in captured.err
