"""HTTP service wrapping the command layer; run with ``fluxq serve`` or uvicorn."""

from .app import app, create_app

__all__ = ["app", "create_app"]
