"""Ancilla-free synthesis of n-bit reversible functions into mixed-polarity
multi-controlled NOT circuits."""

from .circuit import (
    CostModel,
    Circuit,
    Gate,
    SynthReport,
    elementary_cost,
    emit,
    evaluate,
    parse,
    simulate,
)
from .f2linalg import BitMatrix, SpanTracker, gaussian_synthesize, invert, pmh_synthesize, rank
from .permutation import (
    Permutation,
    compose,
    inverse,
    parse_truth_table,
    format_truth_table,
    random_permutation,
    support,
)
from .synth import SynthOptions, synthesize

__version__ = "0.1.0"
