from vpdebug.runtime.interpreter import (
    DEFAULT_STEP_LIMIT,
    StepLimitExceeded,
    UnsupportedAPIError,
    execute,
    execute_or_syntax_error,
    syntax_error_outcome,
)
from vpdebug.runtime.trace import (
    DEFAULT_TOKEN_BUDGET,
    ELISION_MARKER,
    ExecutionOutcome,
    FeedbackText,
    TraceEvent,
    VarChange,
    render_feedback,
    render_result,
    render_value,
)

__all__ = [
    "DEFAULT_STEP_LIMIT",
    "DEFAULT_TOKEN_BUDGET",
    "ELISION_MARKER",
    "ExecutionOutcome",
    "FeedbackText",
    "StepLimitExceeded",
    "TraceEvent",
    "UnsupportedAPIError",
    "VarChange",
    "execute",
    "execute_or_syntax_error",
    "render_feedback",
    "render_result",
    "render_value",
    "syntax_error_outcome",
]
