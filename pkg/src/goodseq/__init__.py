"""goodseq: successioni buone costruite da moduli lacunari."""

from goodseq.errors import ComputationError, ConfigurationError, GoodSeqError
from goodseq.lacunary import ModulusSequence, build_modulus, element_at, enumerate_stream
from goodseq.modone import dyadic, parse_angle, rational
from goodseq.spectral import cesaro_average, limit_L

__version__ = "0.1.0"

__all__ = [
    "ComputationError",
    "ConfigurationError",
    "GoodSeqError",
    "ModulusSequence",
    "build_modulus",
    "cesaro_average",
    "dyadic",
    "element_at",
    "enumerate_stream",
    "limit_L",
    "parse_angle",
    "rational",
]
