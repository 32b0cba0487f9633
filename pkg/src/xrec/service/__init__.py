"""HTTP session service."""

from .app import ServiceConfig, ServiceState, create_app, run_service

__all__ = ["ServiceConfig", "ServiceState", "create_app", "run_service"]
