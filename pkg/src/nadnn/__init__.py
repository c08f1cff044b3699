"""Deep networks on the finite quotients of p-adic and Laurent-series rings."""

from .localfield import (
    BallId,
    CapacityError,
    Characteristic,
    FieldConfig,
    TreeIndex,
    add,
    enumerate_level,
    lifts,
    multiply,
    neg,
    project,
    sub,
)
from .network import Activation, Layer, Network, NumericError, conv_to_dense, forward, lift_state
from .testfn import TestFunction, embed, evaluate, inner_product, lp_norm

__version__ = "0.1.0"

__all__ = [
    "Activation",
    "BallId",
    "CapacityError",
    "Characteristic",
    "FieldConfig",
    "Layer",
    "Network",
    "NumericError",
    "TestFunction",
    "TreeIndex",
    "add",
    "conv_to_dense",
    "embed",
    "enumerate_level",
    "evaluate",
    "forward",
    "inner_product",
    "lift_state",
    "lifts",
    "lp_norm",
    "multiply",
    "neg",
    "project",
    "sub",
]
