"""From-scratch CNN: layers, initialization, NAG training, fusion, model I/O."""

from .layers import (
    Conv2D,
    Dense,
    Dropout,
    Flatten,
    MaxPool2x2,
    ReLU,
    Softmax,
    conv2d,
    dense,
    dropout,
    maxpool2x2,
    nll_loss,
    relu,
    softmax,
)
from .model_io import load_network, read_gnet, save_network, write_gnet
from .network import (
    LayerSpec,
    Network,
    count_params,
    figure1_specs,
    fingerprint,
    fuse_predict,
    highres_input_shape,
    infer_shapes,
    init_params,
    lowres_input_shape,
    validate_specs,
)
from .optimizer import OptimizerState, TrainConfig, nag_step
from .training import evaluate, train

__all__ = [
    "Conv2D",
    "Dense",
    "Dropout",
    "Flatten",
    "MaxPool2x2",
    "ReLU",
    "Softmax",
    "conv2d",
    "dense",
    "dropout",
    "maxpool2x2",
    "nll_loss",
    "relu",
    "softmax",
    "LayerSpec",
    "Network",
    "count_params",
    "figure1_specs",
    "fingerprint",
    "fuse_predict",
    "highres_input_shape",
    "infer_shapes",
    "init_params",
    "lowres_input_shape",
    "validate_specs",
    "OptimizerState",
    "TrainConfig",
    "nag_step",
    "train",
    "evaluate",
    "load_network",
    "save_network",
    "read_gnet",
    "write_gnet",
]
