"""embed-service: HTTP microservice exposing sentence-embedding vectors."""

from .app import create_app

__version__ = "0.1.0"
