"""Inference HTTP service for the layered cross-modal image codec."""

from .app import create_app

__version__ = "0.1.0"
