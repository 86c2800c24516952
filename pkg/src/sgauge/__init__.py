"""Gauge-invariant discrete Yang-Mills actions on simplicial meshes."""

from . import action, gauge, harness, lie, mesh, noether, whitney  # noqa: F401

__version__ = "0.1.0"
