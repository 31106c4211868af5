"""Exception and warning types shared across the package."""


class OscnetError(Exception):
    """Base class for all package-specific errors."""


class UnstableNetwork(OscnetError):
    """The quadratic form is not positive definite: some eigenfrequency
    would be non-positive or complex, so no stable normal-mode
    decomposition exists."""


class UnstableChain(UnstableNetwork):
    """Chain parameters violate omega + 2*eps_k > 0 for some mode."""


class DegenerateSpectrum(OscnetError):
    """Two eigenfrequencies coincide within tolerance; the probe cannot
    resolve the corresponding modes by frequency."""


class AssumptionViolation(OscnetError):
    """A coupling weight G_k vanishes within tolerance; the probe is
    blind to that normal mode."""


class IllConditioned(OscnetError):
    """The pulse-synthesis linear system is too ill-conditioned to invert
    reliably (interaction time too short)."""


class NonPhysicalChi(OscnetError):
    """A characteristic-function value exceeds 1 in modulus."""


class TruncationLeak(OscnetError):
    """Population reached the truncation boundary of the Fock-space
    oracle; results would not be trustworthy."""


class RankDeficient(OscnetError):
    """The moment-fit design matrix is singular (sample points not in
    general position)."""


class InsufficientClosure(OscnetError):
    """Too few sample points are closed under pairwise differences to
    build a positivity kernel."""


class ConfigError(OscnetError):
    """Invalid experiment configuration."""


class NearDegenerateWarning(UserWarning):
    """Spectrum gap is above tolerance but small; the protocol needs long
    interaction times."""


class OverAmplifiedWarning(UserWarning):
    """exp(f) correction exceeds 100; reconstruction is statistically
    hopeless at realistic shot counts."""
