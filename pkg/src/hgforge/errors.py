"""Exceptions raised by hgforge.

Everything the library raises on purpose derives from HgforgeError, so callers (the
CLI in particular) can tell our failures from programming errors.
"""


class HgforgeError(Exception):
    """Root of all hgforge errors."""


class GenericityError(HgforgeError):
    """A denominator of a closed form is too close to zero.

    The formulas divide by differences of exponents (and by kernel values at such
    differences); resonant parameters are not supported.
    """


class SamplingError(HgforgeError):
    """Rejection sampling ran out of retries."""


class DegenerateMatrixError(HgforgeError):
    """A matrix is singular to working precision or not hermitian when it should be."""


class LatticeError(HgforgeError):
    """An elliptic argument sits on (or next to) the period lattice, or the lattice is invalid."""


class SeriesError(HgforgeError):
    """A series was requested outside of where it converges or is defined."""


class OracleError(HgforgeError):
    """The exact oracle could not find a trial point avoiding all denominator zeros."""
