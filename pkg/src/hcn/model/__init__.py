from .tensors import BinaryTensor3, BinaryTensor4
from .arch import Architecture, Hyperparams, LayerSpec
from .bconv import bconv, bconv_arrays
from .trees import andor_tree_update, class_tree_update, AndOrTreeFactor, ClassTreeFactor
from .graph import HcnGraph, build_hcn_graph, pooling_connectivity

__all__ = [
    "BinaryTensor3",
    "BinaryTensor4",
    "Architecture",
    "Hyperparams",
    "LayerSpec",
    "bconv",
    "bconv_arrays",
    "andor_tree_update",
    "class_tree_update",
    "AndOrTreeFactor",
    "ClassTreeFactor",
    "HcnGraph",
    "build_hcn_graph",
    "pooling_connectivity",
]
