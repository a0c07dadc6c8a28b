"""Exception types raised across the package."""

from __future__ import annotations


class OpChaosError(Exception):
    """Base class for every error raised by opchaos."""


class IndexOutOfDomain(OpChaosError, IndexError):
    """A weight or atom index lies outside the described domain."""


class NonFiniteWeight(OpChaosError, ValueError):
    """A weight value is NaN or infinite."""


class ExactUnavailable(OpChaosError):
    """No closed form is known for the requested quantity."""


class DomainMismatch(OpChaosError, ValueError):
    """The operation needs a different index domain (unilateral vs bilateral)."""


class SupNormMismatch(OpChaosError, ValueError):
    """An Lp-only quantity was requested on a sup-norm system."""


class NonUnitGrid(OpChaosError, ValueError):
    """Step-function cells do not refine the unit partition."""


class UndecidableTail(OpChaosError):
    """The finite description does not determine the requested answer."""


class NonInjectiveMap(OpChaosError, ValueError):
    """The transition map sends two atoms to the same atom."""


class EmptyFamily(OpChaosError, ValueError):
    """A set family was empty or contained an empty set."""


class MalformedCertificate(OpChaosError, ValueError):
    """A certificate violates its structural invariants."""


class NonpositiveWeight(OpChaosError, ValueError):
    """A criterion needing strictly positive weights met a zero weight."""


class ZeroWeightBilateral(OpChaosError, ValueError):
    """A bilateral criterion needing nonzero weights met a zero weight."""


class NoDissipativePart(OpChaosError):
    """Every described atom is periodic, so no wandering set exists."""


class DivergentASeries(OpChaosError):
    """The series of mass ratios does not converge on the scanned range."""


class DivergentSum(OpChaosError):
    """A required summability condition could not be established."""


class SupportExplosion(OpChaosError):
    """A sparse vector's support grew past the configured cap."""


class WindowTooLarge(OpChaosError, ValueError):
    """A dense truncation was requested above the configured size cap."""


class BoundaryContamination(OpChaosError):
    """A dense truncation has no atom whose preimages fit inside the window."""


class ConfigError(OpChaosError, ValueError):
    """A configuration document failed validation.

    ``pointer`` is a JSON pointer to the offending value.
    """

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer or "/"
        self.message = message
        super().__init__(f"{self.pointer}: {message}")
