"""Automated expected-runtime bounds for randomized recurrence relations."""

from .analyzer import AnalysisResult, analyze, bi_dec, bi_synth, uni_dec, uni_synth
from .errors import RecError, RecSyntaxError, ResourceError, StructureError, ValidationError
from .evalcore import d_z, eval_bi, eval_uni
from .numeric import Constants
from .recdsl import BiRecurrence, UniRecurrence, format_recurrence, parse, parse_bi, parse_uni
from .shapes import BoundShape

__version__ = "0.1.0"

__all__ = [
    "AnalysisResult", "analyze", "bi_dec", "bi_synth", "uni_dec", "uni_synth",
    "RecError", "RecSyntaxError", "ResourceError", "StructureError", "ValidationError",
    "d_z", "eval_bi", "eval_uni", "Constants",
    "BiRecurrence", "UniRecurrence", "format_recurrence", "parse", "parse_bi", "parse_uni",
    "BoundShape", "__version__",
]
