from ._core import (
    Error,
    InputError,
    NotFoundError,
    PreconditionError,
    cluster,
    estimate,
    gaussian_w2,
    ingest,
    interval,
    pearson,
    request,
    similarity,
    spearman,
    synth,
    train,
)

__all__ = [
    "Error",
    "InputError",
    "NotFoundError",
    "PreconditionError",
    "cluster",
    "estimate",
    "gaussian_w2",
    "ingest",
    "interval",
    "pearson",
    "request",
    "similarity",
    "spearman",
    "synth",
    "train",
]
