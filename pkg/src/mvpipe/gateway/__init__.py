from .config import EndpointConfig, ServiceConfig, load_config
from .app import create_app

__all__ = ["EndpointConfig", "ServiceConfig", "load_config", "create_app"]
