"""FastAPI microservice exposing the adiabatic and gate-based TSP solvers."""

from .app import create_app
from .settings import ServiceSettings
from .solver import ADIABATIC_DEVICES, GATE_DEVICES, ServiceError

__all__ = ["ADIABATIC_DEVICES", "GATE_DEVICES", "ServiceError", "ServiceSettings", "create_app"]
