"""devoc: two-stage handwritten Devanagari character recognition.

Stage one routes a skeletonized glyph by structural class (headline and
spine detection); stage two classifies within the group using a 32-value
zoning feature vector and a small feedforward network.
"""

from .config import Config, load_config
from .pipeline import (
    GroupModelSet,
    Prediction,
    analyze_glyph,
    evaluate,
    load_modelset,
    preprocess_glyph,
    recognize,
    save_modelset,
    train_all,
)
from .structural import ShirorekhaKind, SpineKind, StructuralClass

__version__ = "0.1.0"

__all__ = [
    "Config",
    "GroupModelSet",
    "Prediction",
    "ShirorekhaKind",
    "SpineKind",
    "StructuralClass",
    "analyze_glyph",
    "evaluate",
    "load_config",
    "load_modelset",
    "preprocess_glyph",
    "recognize",
    "save_modelset",
    "train_all",
]
