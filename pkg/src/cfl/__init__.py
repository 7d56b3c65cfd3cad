"""Constraint-based case-frame lexicon over typed feature structures."""

from .dsl import (
    DslError,
    DslNameError,
    DslSyntaxError,
    DslTypeError,
    parse_frame,
    parse_lexicon,
    serialize_frame,
)
from .fs import (
    FeatureStructure,
    InappropriateFeatureError,
    UnificationFailure,
    graft,
    iso_equal,
    subsumes,
    unify,
)
from .kernel import BACKEND as KERNEL_BACKEND
from .lattice import (
    Diagnostic,
    LatticeError,
    MultipleGlbError,
    TypeLattice,
    VoiceValue,
)
from .lexicon import (
    CompileError,
    CompiledLexicon,
    SchemaError,
    SenseEntry,
    compile_lexicon,
    load_lexicon,
    prelude_path,
    sense_lookup,
)
from .resolver import (
    EmbedDepthExceededError,
    FailureRecord,
    FailureReport,
    MalformedFrameError,
    ResolvedSense,
    explain,
    generate,
    resolve,
)
from .valency import LexicalRule, RULES, Stage, stage_label, stages

__all__ = [
    "CompileError",
    "CompiledLexicon",
    "Diagnostic",
    "DslError",
    "DslNameError",
    "DslSyntaxError",
    "DslTypeError",
    "EmbedDepthExceededError",
    "FailureRecord",
    "FailureReport",
    "FeatureStructure",
    "InappropriateFeatureError",
    "KERNEL_BACKEND",
    "LatticeError",
    "LexicalRule",
    "MalformedFrameError",
    "MultipleGlbError",
    "ResolvedSense",
    "RULES",
    "SchemaError",
    "SenseEntry",
    "Stage",
    "TypeLattice",
    "UnificationFailure",
    "VoiceValue",
    "compile_lexicon",
    "explain",
    "generate",
    "graft",
    "iso_equal",
    "load_lexicon",
    "parse_frame",
    "parse_lexicon",
    "prelude_path",
    "resolve",
    "sense_lookup",
    "serialize_frame",
    "stage_label",
    "stages",
    "subsumes",
    "unify",
]

__version__ = "0.1.0"
