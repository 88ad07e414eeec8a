#!/usr/bin/env python3
"""
Error Types
Exception hierarchy shared by the analysis modules and the CLI.
"""


class HolderRegError(Exception):
    """Base class for toolkit errors."""
    exit_code = 1


class UsageError(HolderRegError, ValueError):
    """Invalid arguments, malformed problem files, unsupported option combinations."""
    exit_code = 2


class UnsupportedDimensionError(UsageError):
    """Direction grids are only built for n <= 3 unless explicitly overridden."""


class PreconditionError(HolderRegError):
    """A mathematical precondition of the requested analysis does not hold."""
    exit_code = 3


class CombinatorialCapError(PreconditionError):
    """Too many active indices for the exhaustive subset enumeration."""


class LpError(HolderRegError, RuntimeError):
    """Simplex iteration limit exhausted."""
