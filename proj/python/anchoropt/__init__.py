"""Anchor placement for through-wall localization."""

import json as _json

from ._core import (
    BudgetError,
    Dictionary,
    DomainError,
    Error,
    FormatError,
    ParseError,
    Scene,
    SingularError,
    ValidationError,
    build_dictionary,
    closure_angles,
    closure_residual,
    draw_shift,
    load_dictionary,
    objectives,
    overlap_loss_curve,
    ranging_weight,
    single_target_optimum,
    snr_db,
    solve,
    worst_target_metrics,
)
from ._core import load_scene as _load_scene


def load_scene(config=None):
    """Builds a scene from a JSON string, a dict, or the defaults when None."""
    if config is None:
        config = {}
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _load_scene(config)


__all__ = [
    "BudgetError",
    "Dictionary",
    "DomainError",
    "Error",
    "FormatError",
    "ParseError",
    "Scene",
    "SingularError",
    "ValidationError",
    "build_dictionary",
    "closure_angles",
    "closure_residual",
    "draw_shift",
    "load_dictionary",
    "load_scene",
    "objectives",
    "overlap_loss_curve",
    "ranging_weight",
    "single_target_optimum",
    "snr_db",
    "solve",
    "worst_target_metrics",
]
