"""Shared test fixtures for dofusion tests."""

import logging
from unittest.mock import patch

import pytest


@pytest.fixture(autouse=True)
def default_config():
    """Use built-in defaults instead of any user configuration file."""
    from dofusion.core.config import Config

    config = Config()
    with patch("dofusion.core.config._config", config):
        yield config


@pytest.fixture(autouse=True)
def reset_logging():
    """Undo setup_logging so caplog keeps seeing package records."""
    yield
    logger = logging.getLogger("dofusion")
    for handler in logger.handlers:
        handler.close()
    logger.handlers.clear()
    logger.propagate = True
    logger.setLevel(logging.NOTSET)


@pytest.fixture
def confounder():
    """Z confounds X and Y."""
    from dofusion.core.fixtures import get_fixture

    return get_fixture("confounder").graph


@pytest.fixture
def collider_chain():
    """Five-vertex d-separation example with a collider at D."""
    from dofusion.core.fixtures import get_fixture

    return get_fixture("collider_chain").graph


@pytest.fixture
def wage_premium():
    """College wage premium diagram."""
    from dofusion.core.fixtures import get_fixture

    return get_fixture("wage_premium").graph


@pytest.fixture
def instrument():
    """Instrument Z, confounded X and Y."""
    from dofusion.core.fixtures import get_fixture

    return get_fixture("instrument").graph


@pytest.fixture
def selection_treatment():
    """Selection driven by the treatment only."""
    from dofusion.core.fixtures import get_fixture

    return get_fixture("selection_treatment").graph


@pytest.fixture
def transport_covariate():
    """Transport diagram with a discrepancy at Z."""
    from dofusion.core.fixtures import get_fixture

    return get_fixture("transport_covariate").graph


@pytest.fixture
def selection_treatment_text():
    """Diagram file for the simple selection example."""
    return "\n".join(
        [
            "# selection on the treatment",
            "var X Y",
            "select S",
            "X -> Y",
            "X -> S",
            "",
        ]
    )


@pytest.fixture
def write_file(tmp_path):
    """Write text to a file under tmp_path and return its path."""

    def write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write
