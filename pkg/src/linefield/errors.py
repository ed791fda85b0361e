"""Exception types shared across the package.

Every failure mode that callers are expected to branch on gets its own
class; anything else surfaces as ValueError from the offending module.
"""

from __future__ import annotations


class LinefieldError(Exception):
    """Base class for package-specific failures."""


class NonConvergence(LinefieldError):
    """Root iteration failed to reach the residual contract."""


class IndeterminateAtCommonRoot(LinefieldError):
    """Map evaluated where numerator and denominator both vanish."""


class NormalizationImpossible(LinefieldError):
    """No admissible fixed-point triple (or Fatou data) for normalization."""


class HintRequired(LinefieldError):
    """Normalization needs caller-supplied data it cannot derive."""


class NearCriticalValue(LinefieldError):
    """Preimage branches merge numerically; the point sits on a critical value."""


class DomainViolation(LinefieldError):
    """Evaluation point lies outside the holomorphy domain."""


class ZeroOrbitDerivative(LinefieldError):
    """Critical-orbit derivative vanishes; the orbit-sum formula is undefined."""


class SlowDecay(LinefieldError):
    """Orbit series did not decay within the truncation horizon."""


class ProbeMismatch(LinefieldError):
    """Residue extraction disagrees between probe points."""


class CriticalZ(LinefieldError):
    """Kernel parameter sits on (or hugs) a critical point."""


class RadiusInstability(LinefieldError):
    """Large-contour integral changed between radius R and 2R."""


class SeedNotRepelling(LinefieldError):
    """No finite repelling fixed point to seed inverse iteration."""


class PoleInRegion(LinefieldError):
    """Declared pole inside the integration region for a scheme that cannot take it."""


class CriticalPoint(LinefieldError):
    """Pushforward requested where the map derivative vanishes."""


class CriticalOrbit(LinefieldError):
    """Orbit passes too close to a critical point for chain transport."""


class NotLattesLike(LinefieldError):
    """Map does not admit the degree-(-3) invariant-field control."""


class UnboundedSupport(LinefieldError):
    """Field is nonzero near the sampling box boundary and the kernel decay cannot compensate."""


class ConfigError(LinefieldError):
    """Bad CLI/config input; maps to exit code 2."""
