"""Shim for `pip install -e .` on older pips; metadata and the `bench` script live in pyproject.toml."""
from setuptools import setup

if __name__ == "__main__":
    setup()
