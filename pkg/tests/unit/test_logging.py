"""Unit tests for dofusion.core.logging module."""

import logging
import os
from unittest.mock import patch


class TestLevels:
    """Tests for level_from_env and verbosity_level."""

    def test_env_level(self):
        """The environment names the level."""
        from dofusion.core.logging import level_from_env

        with patch.dict(os.environ, {"DOFUSION_LOG_LEVEL": "debug"}):
            assert level_from_env() == logging.DEBUG

    def test_env_unknown_or_unset(self):
        """Unknown names and an unset variable give the default."""
        from dofusion.core.logging import level_from_env

        with patch.dict(os.environ, {"DOFUSION_LOG_LEVEL": "chatty"}):
            assert level_from_env() == logging.WARNING
        with patch.dict(os.environ, {}, clear=True):
            assert level_from_env(logging.ERROR) == logging.ERROR

    def test_verbosity(self):
        """-v gives INFO, -vv and more give DEBUG."""
        from dofusion.core.logging import verbosity_level

        assert verbosity_level(0) is None
        assert verbosity_level(1) == logging.INFO
        assert verbosity_level(3) == logging.DEBUG


class TestSetupLogging:
    """Tests for setup_logging."""

    def test_console_handler_on_stderr(self, capsys):
        """Records go to stderr, never stdout."""
        from dofusion.core.logging import setup_logging

        logger = setup_logging(logging.INFO, simple_format=True)
        logging.getLogger("dofusion.core.engine").info("searching")
        captured = capsys.readouterr()

        assert logger.name == "dofusion"
        assert not logger.propagate
        assert captured.out == ""
        assert "INFO - searching" in captured.err

    def test_no_duplicate_handlers(self):
        """Calling twice replaces the handlers."""
        from dofusion.core.logging import setup_logging

        setup_logging(logging.INFO)
        logger = setup_logging(logging.INFO)

        assert len(logger.handlers) == 1

    def test_log_file(self, tmp_path):
        """A log file gets full-format records."""
        from dofusion.core.logging import setup_logging

        path = tmp_path / "logs" / "dofusion.log"
        logger = setup_logging(logging.DEBUG, log_file=path)
        logging.getLogger("dofusion.core.oracle").debug("table size %d", 8)
        for handler in logger.handlers:
            handler.flush()

        assert "dofusion.core.oracle - DEBUG - table size 8" in path.read_text()

    def test_progress_logging_restores_handlers(self):
        """Handlers come back once the progress bar is done."""
        from dofusion.core.logging import progress_logging, setup_logging

        logger = setup_logging(logging.INFO)
        before = list(logger.handlers)

        with progress_logging():
            assert logger.handlers != before

        assert logger.handlers == before
