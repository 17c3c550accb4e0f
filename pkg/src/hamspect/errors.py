"""Exception hierarchy.

Everything raised by this package derives from :class:`HamspectError`, so
callers can catch one type at an API boundary.  The CLI maps subfamilies to
exit codes (see ``hamspect.cli``).
"""

from __future__ import annotations

__all__ = [
    "HamspectError",
    "DomainError",
    "ConfigError",
    "SpectralError",
    "AliasingSuspected",
    "NoPeak",
    "EstimationError",
    "DegenerateSignal",
    "InconsistentSpectrum",
    "PhaseCorrectionFailed",
    "BranchDomainError",
    "FitFailed",
]


class HamspectError(Exception):
    """Base class for all package errors."""


class DomainError(HamspectError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ConfigError(HamspectError, ValueError):
    """An experiment configuration is malformed or inconsistent."""


class SpectralError(HamspectError):
    """Base class for spectral-analysis failures."""


class AliasingSuspected(SpectralError):
    """The spectral peak sits at the edge of the resolvable band."""


class NoPeak(SpectralError):
    """No spectral peak rises out of the noise floor."""


class EstimationError(HamspectError):
    """Base class for parameter-inversion failures."""


class DegenerateSignal(EstimationError):
    """The record carries no resolvable precession signal."""


class InconsistentSpectrum(EstimationError):
    """Fourier components violate the signal model beyond noise allowance."""


class PhaseCorrectionFailed(EstimationError):
    """The complex-phase correction argument is out of range."""


class BranchDomainError(EstimationError):
    """A branch inversion ratio exceeds its admissible range."""


class FitFailed(HamspectError):
    """A regression step had too few usable points."""
