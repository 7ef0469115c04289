"""Classical simulation of boson sampling with partially distinguishable and lossy photons."""

from .core import (
    FockVector,
    Interferometer,
    NoiseModel,
    OutcomeDistribution,
    OutputSample,
    TruncationLevel,
    standard_input,
    validate_unitary,
)
from .interferometer import fourier, haar_random, load_matrix, save_matrix
from .oracle import (
    GramMatrix,
    distinguishable_distribution,
    enumerate_outputs,
    gram_distribution,
    ideal_distribution,
    lossy_mixture_distribution,
    mixture_distribution,
    total_photon_marginal,
    uniform_gram,
)
from .permanent import abs_squared, permanent_naive, permanent_ryser
from .sampler import (
    SamplerConfig,
    sample_batch,
    sample_distinguishable,
    sample_indistinguishable,
    sample_lossy_truncated,
    sample_truncated,
)

__version__ = "0.1.0"

__all__ = [
    "FockVector",
    "GramMatrix",
    "Interferometer",
    "NoiseModel",
    "OutcomeDistribution",
    "OutputSample",
    "SamplerConfig",
    "TruncationLevel",
    "abs_squared",
    "distinguishable_distribution",
    "enumerate_outputs",
    "fourier",
    "gram_distribution",
    "haar_random",
    "ideal_distribution",
    "load_matrix",
    "lossy_mixture_distribution",
    "mixture_distribution",
    "permanent_naive",
    "permanent_ryser",
    "sample_batch",
    "sample_distinguishable",
    "sample_indistinguishable",
    "sample_lossy_truncated",
    "sample_truncated",
    "save_matrix",
    "standard_input",
    "total_photon_marginal",
    "uniform_gram",
    "validate_unitary",
    "__version__",
]
