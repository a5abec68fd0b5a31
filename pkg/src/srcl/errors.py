"""Exception types shared across the library."""


class GradingError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(GradingError):
    """Shapes of two related arrays do not line up."""


class EmptyDictionary(GradingError):
    """A reference dictionary needs at least two atoms."""


class NonFiniteData(GradingError):
    """An input contains NaN or infinity."""


class NonPositiveSigma(GradingError):
    """Gaussian locality requires sigma > 0."""


class NegativeHistogramEntry(GradingError):
    """Chi-square distances are defined on nonnegative histograms only."""


class NegativeGamma(GradingError):
    """The range-constraint weight gamma must be >= 0."""


class NegativeLambda(GradingError):
    """Regularization weights must be >= 0."""


class SingularSystem(GradingError):
    """A closed-form solve hit a singular normal-equations matrix."""


class DegenerateWeights(GradingError):
    """A grade estimate was requested for an (effectively) all-zero weight vector."""


class LengthMismatch(GradingError):
    """Two paired vectors have different lengths."""


class EmptyInput(GradingError):
    """An operation received zero samples."""


class ConstantVector(GradingError):
    """Correlation is undefined for a zero-variance vector."""


class InvalidImage(GradingError):
    """A gray image violates its shape or value-range contract."""


class ImageSmallerThanPatch(GradingError):
    """Patch extraction needs the image to be at least patch_size on each side."""


class TooFewPatches(GradingError):
    """Codebook construction needs at least k (distinct) patches."""


class ParseError(GradingError):
    """A data file could not be parsed; the message names the offending spot."""


class GradeMissing(GradingError):
    """The configured grade column is absent from a data file."""


class BadDimension(GradingError):
    """The synthetic generator needs a perfect-square feature dimension."""
