"""Bundled case data."""

from importlib import resources


def ieee30_path():
    """Filesystem path of the bundled IEEE 30-bus MATPOWER case."""
    return resources.files(__package__) / "case30.m"


def ieee30_text() -> str:
    return ieee30_path().read_text(encoding="utf-8")
