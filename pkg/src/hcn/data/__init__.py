from .datasets import (
    Dataset,
    gen_shapes_dataset,
    sample_hcn,
    sample_single_layer,
    shapes_architecture,
)
from .corrupt import corrupt, CORRUPTION_KINDS
from .metrics import encoding_cost, compression_ratio, discard_unused_features
from . import io

__all__ = [
    "Dataset",
    "gen_shapes_dataset",
    "sample_hcn",
    "sample_single_layer",
    "shapes_architecture",
    "corrupt",
    "CORRUPTION_KINDS",
    "encoding_cost",
    "compression_ratio",
    "discard_unused_features",
    "io",
]
