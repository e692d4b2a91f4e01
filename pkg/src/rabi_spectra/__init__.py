"""Spectra, level crossings and exceptional points of the asymmetric one- and
two-photon quantum Rabi models from Bogoliubov-frame G-functions, with a
truncated-Fock diagonalization oracle for verification."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    BargmannIndex,
    ConvergenceError,
    DomainError,
    InconsistencyError,
    Kind,
    Model,
    ModelParams,
    PoleLine,
    PoleProximityError,
    RootSearchConfig,
    beta,
    bracket_roots,
    pole_energy,
    squeeze_r,
)

__all__ = [
    "BargmannIndex", "ConvergenceError", "DomainError", "InconsistencyError", "Kind", "Model",
    "ModelParams", "PoleLine", "PoleProximityError", "RootSearchConfig", "beta", "bracket_roots",
    "pole_energy", "squeeze_r", "__version__",
]
