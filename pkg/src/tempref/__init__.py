"""Rule-based resolution of temporal references in scheduling dialogs."""
from .core import (
    NULL_TU,
    DiscourseEntity,
    Endpoint,
    FieldName,
    FocusList,
    SpecLevel,
    TemporalUnit,
    merge,
    merge_upper,
    push_focus,
    specificity,
    starting_fields,
)
from .dates import DeicticTerm, day_of_week, infer_trivial, next_matching, resolve_deictic
from .engine import Ailt, EngineConfig, resolve_dialog, resolve_utterance
from .formats import Dialog, FormatError, emit_ailts, load_dialog, load_key
from .normalizer import Expression, SurfaceIlt, Tense, normalize
from .rules import DistancePenalty, Pailt

__version__ = "0.1.0"
