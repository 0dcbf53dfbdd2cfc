"""Numerical tolerances shared across the package."""

from __future__ import annotations

import contextlib
import dataclasses


@dataclasses.dataclass
class Tolerances:
    #: relative tolerance for Hermiticity checks (times max |entry|)
    hermitian: float = 1e-9
    #: relative PSD tolerance (times spectral norm)
    psd: float = 1e-9
    #: absolute Frobenius tolerance for subspace residuals
    subspace: float = 1e-9
    #: absolute override for PSD checks; ``None`` means relative
    psd_absolute: float | None = None


TOL = Tolerances()

#: largest total dimension handled by the dense routines
MAX_DIMENSION = 4096


@contextlib.contextmanager
def tolerances(**overrides):
    """Temporarily override entries of :data:`TOL`.

    >>> with tolerances(psd=5e-3):
    ...     pass
    """
    old = dataclasses.replace(TOL)
    for key, value in overrides.items():
        if not hasattr(TOL, key):
            raise AttributeError(f"unknown tolerance {key!r}")
        setattr(TOL, key, value)
    try:
        yield TOL
    finally:
        for field in dataclasses.fields(TOL):
            setattr(TOL, field.name, getattr(old, field.name))
