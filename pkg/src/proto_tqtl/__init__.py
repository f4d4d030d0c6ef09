"""Prototype-similarity traces, their quantitative temporal verification, and
the desk-scale prototype classifier that produces them."""

from .formula import Formula, lower, pretty_print, scope_check
from .parser import ParseError, parse, parse_file, tokenize
from .prototypes import (
    LatentClip,
    PrototypeBank,
    TrainConfig,
    TrainResult,
    gradients,
    loss_ce,
    loss_clus,
    loss_div,
    loss_sep,
    loss_total,
    patch_similarity,
    predict,
    project,
    prototype_layer,
    train,
)
from .semantics import (
    ClassSource,
    Environment,
    EvaluationError,
    Verdict,
    boolean_oracle,
    evaluate,
    satisfies,
    verdict_of,
)
from .specs import SpecParams, build_phi1, build_phi2, build_phi3, report
from .synth import SynthSpec, generate_dataset, script_trace
from .trace import (
    FrameRecord,
    Label,
    PrototypeMeta,
    Trace,
    TraceInvariantError,
    TraceParseError,
    read_trace,
    write_trace,
)
from .tracegen import generate_trace

__version__ = "0.1.0"
