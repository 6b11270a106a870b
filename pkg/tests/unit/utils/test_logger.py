import logging

import pytest

from utils.logger import ROOT, KramersLogger, get_logger, parse_level


@pytest.fixture
def restore_logging():
    yield
    KramersLogger.configure(logging.INFO, None)


def test_module_loggers_hang_off_package_logger():
    log = get_logger("core.sde")
    assert log.name == "kramers.core.sde"
    assert log is get_logger("core.sde")
    assert get_logger("kramers.tests").name == "kramers.tests"


def test_handlers_live_on_package_logger(restore_logging):
    root = KramersLogger.configure("INFO")
    assert not root.propagate
    assert [type(h) for h in root.handlers] == [logging.StreamHandler]
    assert get_logger("tests.console").propagate


def test_configure_applies_level_and_file(tmp_path, restore_logging):
    log = get_logger("tests.file")
    log_file = tmp_path / "logs" / "run.log"
    KramersLogger.configure("debug", str(log_file))
    log.debug("fine-grained detail")
    for handler in logging.getLogger(ROOT).handlers:
        handler.flush()
    assert log.getEffectiveLevel() == logging.DEBUG
    assert "kramers.tests.file - DEBUG - fine-grained detail" in log_file.read_text()


def test_reconfigure_replaces_handlers(tmp_path, restore_logging):
    KramersLogger.configure("INFO", str(tmp_path / "a.log"))
    root = KramersLogger.configure("INFO", str(tmp_path / "b.log"))
    assert len(root.handlers) == 2


def test_unknown_level_falls_back_to_info(restore_logging):
    KramersLogger.configure("chatty")
    assert get_logger("tests.fallback").getEffectiveLevel() == logging.INFO
    assert parse_level("warning") == logging.WARNING
    assert parse_level(15) == 15
