"""
Exceptions raised by stator_lab.

Every error derives from StatorLabError. Errors about malformed input also derive
from ValueError so callers that only know about ValueError still catch them.
"""


class StatorLabError(Exception):
    """Root of the stator_lab exception hierarchy."""


# linalg

class DimMismatch(StatorLabError, ValueError):
    """Operands have incompatible register dimensions."""


class NonHermitianInput(StatorLabError, ValueError):
    """A generator that must be hermitian is not."""


class NonOrthonormalBasis(StatorLabError, ValueError):
    """A measurement basis is not orthonormal or does not span the register."""


class ImpossibleForcedOutcome(StatorLabError):
    """A forced measurement outcome has (numerically) zero probability."""


class BadBipartition(StatorLabError, ValueError):
    """A bipartition is empty, not proper, or names unknown registers."""


# stator

class NotInvolution(StatorLabError, ValueError):
    """An operator expected to square to the identity does not."""


class NotRootOfUnity(StatorLabError, ValueError):
    """U^n differs from the identity."""


class SpectrumNotInteger(StatorLabError, ValueError):
    """A generator spectrum cannot produce U^n = I (non-integer or colliding residues)."""


# protocol

class LocalityViolation(StatorLabError):
    """A party tried to act on a register it does not own."""


class SymbolOutOfRange(StatorLabError, ValueError):
    """A classical symbol lies outside [0, arity)."""


class MissingPair(StatorLabError):
    """No unused entangled pair of the required dimension is shared with the party."""


# verify

class TooLarge(StatorLabError, ValueError):
    """The requested enumeration exceeds the supported size."""


class EmptyCounts(StatorLabError, ValueError):
    """A goodness-of-fit test was given no data."""


class NonUnitaryProcess(StatorLabError):
    """A reconstructed process matrix is not unitary (signals a protocol bug)."""


# cli

class ConfigError(StatorLabError, ValueError):
    """A run configuration is invalid; `field` names the offending option."""

    def __init__(self, field, message):
        super().__init__(f"--{field}: {message}")
        self.field = field
        self.message = message
