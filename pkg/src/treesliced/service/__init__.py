"""HTTP service exposing the distance pipeline."""

from .app import app

__all__ = ["app"]
