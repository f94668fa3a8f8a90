"""HTTP service wrapping the core package (FastAPI + pydantic schemas)."""

from .app import app

__all__ = ["app"]
