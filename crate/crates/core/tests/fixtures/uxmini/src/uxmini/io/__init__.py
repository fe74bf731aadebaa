"""Persistence helpers."""
from .writer import write_world
