from .base_service import Service
from .service_registry import ServiceRegistry
from .chain_service import ChainService
from .sweep_service import SweepService
from .golden_service import GoldenService, GoldenReport, GoldenOutcome

__all__ = [
    'Service',
    'ServiceRegistry',
    'ChainService',
    'SweepService',
    'GoldenService',
    'GoldenReport',
    'GoldenOutcome'
]
