import pytest

from config import config
from services.service_registry import ServiceRegistry


@pytest.fixture(autouse=True)
def fresh_config():
    """Every test starts from the built-in defaults."""
    config.reset()
    yield config
    config.reset()


@pytest.fixture
def registry():
    """Service registry that is emptied after the test."""
    instance = ServiceRegistry()
    yield instance
    instance.cleanup()
