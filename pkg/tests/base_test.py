"""Base test configuration and utilities."""
import unittest
import tempfile
import shutil
from pathlib import Path
from typing import Dict, Any

from config import config
from services.service_registry import ServiceRegistry
from services.chain_service import ChainService
from services.sweep_service import SweepService
from services.golden_service import GoldenService

class BaseServiceTest(unittest.TestCase):
    """Base class for service tests."""

    def setUp(self):
        """Set up test environment."""
        super().setUp()

        # Create temporary directory
        self.test_dir = Path(tempfile.mkdtemp())
        self.addCleanup(lambda: shutil.rmtree(self.test_dir, ignore_errors=True))

        # Initialize services
        self.registry = ServiceRegistry()

        # Register common services
        self.registry.register(ChainService, threads=2)
        self.registry.register(SweepService, threads=2)
        self.registry.register(GoldenService, threads=2)
        self.registry.start_all()

        self.addCleanup(self.registry.cleanup)

        # Override config for testing
        self.config = self._create_test_config()
        for section, values in self.config.items():
            for key, value in values.items():
                config.set(section, key, value)
        self.addCleanup(config.reset)

    def _create_test_config(self) -> Dict[str, Any]:
        """Create test configuration."""
        return {
            "vmc": {
                "steps": 256,
                "burn_in": 64,
                "blocking_minimum": 64,
                "chains": 1
            },
            "lattice": {
                "threads": 1,
                "deterministic": True
            },
            "logging": {
                "level": "DEBUG",
                "file": str(self.test_dir / "bosegas.log")
            }
        }

    def create_temp_file(self, name: str, content: str = "") -> Path:
        """Create a temporary file for testing."""
        path = self.test_dir / name
        path.write_text(content)
        return path
