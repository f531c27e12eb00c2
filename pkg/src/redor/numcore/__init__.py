"""Dense numerics: ReLU MLPs with hand-written backprop and ridge least squares."""

from redor.numcore.linalg import (
    RealMatrix,
    RealVector,
    nonnegative_ridge,
    ridge_objective,
    ridge_solve,
)
from redor.numcore.mlp import (
    HIDDEN_DIM,
    MlpParams,
    MlpTrace,
    backward_trace,
    forward_trace,
    init_mlp,
    mlp_backward,
    mlp_forward,
    mlp_layer_sizes,
    per_sample_grad_norms,
)

__all__ = [
    "HIDDEN_DIM",
    "MlpParams",
    "MlpTrace",
    "RealMatrix",
    "RealVector",
    "backward_trace",
    "forward_trace",
    "init_mlp",
    "mlp_backward",
    "mlp_forward",
    "mlp_layer_sizes",
    "nonnegative_ridge",
    "per_sample_grad_norms",
    "ridge_objective",
    "ridge_solve",
]
