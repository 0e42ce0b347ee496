"""Relational transducer networks."""

import json

from ._core import (
    Error,
    ParseError,
    PreconditionError,
    SchemaError,
    check_consistency as _check_consistency,
    cli,
    corpus_names,
    corpus_source,
    eval_dedalus,
    evaluate_query,
    run,
    tm_accepts,
)

__all__ = [
    "Error",
    "ParseError",
    "PreconditionError",
    "SchemaError",
    "check_consistency",
    "cli",
    "corpus_names",
    "corpus_source",
    "eval_dedalus",
    "evaluate_query",
    "run",
    "tm_accepts",
]


def check_consistency(**kwargs):
    """Consistency verdict as a dict (see ``_core.check_consistency``)."""
    return json.loads(_check_consistency(**kwargs))
