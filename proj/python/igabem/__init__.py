"""Isogeometric boundary element solver for elastic domains with inclusions."""

from ._core import (
    AssemblyError,
    DomainError,
    Error,
    GeometryError,
    IoError,
    ModelFile,
    ParseError,
    Solution,
    SolveError,
    kelvin_U,
    kernel_E,
    load_model,
    mixtures_estimate,
    parse_model,
    solve,
    sweep,
    verify,
    version,
)

__version__ = version()

__all__ = [
    "AssemblyError",
    "DomainError",
    "Error",
    "GeometryError",
    "IoError",
    "ModelFile",
    "ParseError",
    "Solution",
    "SolveError",
    "kelvin_U",
    "kernel_E",
    "load_model",
    "mixtures_estimate",
    "parse_model",
    "solve",
    "sweep",
    "verify",
    "version",
]
