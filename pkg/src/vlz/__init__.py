"""vlz: error-bounded lossy compression for 1D/2D/3D float32 arrays."""

from .model import (
    ArrayDescriptor,
    BlockGrid,
    CodeStream,
    CompressionConfig,
    ErrorBound,
    ErrorBoundMode,
    PaddingGranularity,
    PaddingPolicy,
    PaddingValue,
    QuantizedGrid,
    build_block_grid,
    resolve_error_bound,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayDescriptor",
    "BlockGrid",
    "CodeStream",
    "CompressionConfig",
    "ErrorBound",
    "ErrorBoundMode",
    "PaddingGranularity",
    "PaddingPolicy",
    "PaddingValue",
    "QuantizedGrid",
    "build_block_grid",
    "resolve_error_bound",
    "compress",
    "decompress",
    "__version__",
]


def __getattr__(name):
    # compress/decompress pull in the whole pipeline; import lazily so the
    # data model stays importable on its own.
    if name == "compress":
        from .pipeline import compress

        return compress
    if name == "decompress":
        from .pipeline import decompress

        return decompress
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
