from .app import create_app
from .client import in_process_client

__all__ = ["create_app", "in_process_client"]
