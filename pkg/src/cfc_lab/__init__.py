"""Exact simulation of counterfactual-computation protocols and pre/post-selected photons."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CFCLabError,
    DuplicateLabel,
    GridTooNarrow,
    InvariantBreach,
    NoRootInBracket,
    UndefinedConditional,
    ZeroPostSelection,
)
from .qstate import LinearOperator, StateVector, apply, inner, make_state, projector, rotation  # noqa: E402
