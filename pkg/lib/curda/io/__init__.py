"""Binary tensor files and tagged bundles."""

from curda.io.tensors import (
    TENSOR_MAGIC,
    TENSOR_VERSION,
    load_bundle,
    load_tensor,
    save_bundle,
    save_tensor,
)

__all__ = [
    "TENSOR_MAGIC",
    "TENSOR_VERSION",
    "load_bundle",
    "load_tensor",
    "save_bundle",
    "save_tensor",
]
