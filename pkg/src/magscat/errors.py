"""Exception taxonomy.

Every failure mode that callers are expected to branch on gets its own class;
the CLI maps these onto exit codes (2 config, 3 numeric failure, 4 invariant
violation).
"""


class MagscatError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class ConfigError(MagscatError):
    exit_code = 2


class InvariantViolation(MagscatError):
    exit_code = 4


# geometry
class NotPositiveDefinite(MagscatError):
    """Metric evaluation failed a Cholesky factorization."""


class DegenerateBoundary(MagscatError):
    """Boundary tangent basis is rank deficient."""


class OutsideCollar(MagscatError):
    """Requested collar coordinate outside the (-eps, eps) band."""


class InversionDiverged(MagscatError):
    """Collar-coordinate Newton inversion did not converge."""


class UnknownSystem(ConfigError):
    pass


class BadParams(ConfigError):
    pass


# flow
class LeftChart(MagscatError):
    """Trajectory left the extended chart before any boundary event."""


class Trapped(MagscatError):
    """No boundary exit before the trapping guard time."""


class GrazingUnresolved(MagscatError):
    """A boundary tangency could not be classified at tolerance."""


# scattering
class NotOnBoundary(MagscatError):
    pass


class KappaSingular(MagscatError):
    """Exit-point map is numerically singular (conjugate entry/exit pair)."""


class NoConvergence(MagscatError):
    pass


class FormatError(MagscatError):
    exit_code = 2


# action
class QuadratureFail(MagscatError):
    pass


class ConjugateDegenerate(MagscatError):
    """Two-point shooting Jacobian is numerically singular."""


class HolonomyObstruction(MagscatError):
    """Boundary 1-form difference is not exact; no gauge function exists."""


class NonSmoothExitCurve(MagscatError):
    pass


class ConvexityUndetermined(MagscatError):
    pass


# jacobi
class AnchorAtConjugate(MagscatError):
    pass


# recovery
class ExtrapolationUnstable(MagscatError):
    pass


class ShortGeodesicRegime(MagscatError):
    """Exit points collapse onto the probe point as the tilt goes to zero.

    Not an error per se; raised only when a caller asked for the
    long-geodesic fit in a regime where it does not apply.
    """


class FirstJetRequired(MagscatError):
    pass


class IllConditioned(MagscatError):
    pass


class HalfNeighborhoodOnly(Warning):
    """Exit direction is tangent; boundary samples only on one side."""


# rigidity
class GridMismatch(MagscatError):
    pass


class MissingTimes(MagscatError):
    pass


class JacobianSingular(MagscatError):
    pass


class BackingBandEmpty(MagscatError):
    pass
