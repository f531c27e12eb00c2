"""Fully connected ReLU networks with hand-written forward and backward passes.

Layer ``i`` maps ``h -> h @ weights[i] + biases[i]``; every layer but the last is
followed by a ReLU. The flattened parameter vector lists, layer by layer, the
row-major weights followed by the biases.
"""

from dataclasses import dataclass

import numpy as np

from redor.core.redor_error import DimensionMismatchError
from redor.core.utils import ensure_finite
from redor.numcore.linalg import RealMatrix, RealVector

HIDDEN_DIM = 256
HIDDEN_LAYERS = 2


def mlp_layer_sizes(
    input_dim: int,
    output_dim: int,
    hidden_dim: int = HIDDEN_DIM,
    hidden_layers: int = HIDDEN_LAYERS,
) -> tuple[int, ...]:
    """Layer widths ``input -> hidden x hidden_layers -> output``."""
    if min(input_dim, output_dim, hidden_dim) < 1 or hidden_layers < 0:
        raise DimensionMismatchError(
            f"invalid network shape {input_dim}->{hidden_dim}x{hidden_layers}->{output_dim}"
        )
    return (input_dim, *([hidden_dim] * hidden_layers), output_dim)


def _frozen(array: np.ndarray) -> np.ndarray:
    copy = np.array(array, dtype=np.float64)
    copy.setflags(write=False)
    return copy


@dataclass(frozen=True, eq=False)
class MlpParams:
    """Immutable weights and biases of a ReLU MLP."""

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.biases) or not self.weights:
            raise DimensionMismatchError("an MLP needs one bias per weight matrix")
        object.__setattr__(self, "weights", tuple(_frozen(w) for w in self.weights))
        object.__setattr__(self, "biases", tuple(_frozen(b) for b in self.biases))
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise DimensionMismatchError(
                    f"layer {i}: weight {w.shape} and bias {b.shape} do not match"
                )
            if i and self.weights[i - 1].shape[1] != w.shape[0]:
                raise DimensionMismatchError(f"layer {i} input does not match layer {i - 1}")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0], *(w.shape[1] for w in self.weights))

    @property
    def input_dim(self) -> int:
        return int(self.weights[0].shape[0])

    @property
    def output_dim(self) -> int:
        return int(self.weights[-1].shape[1])

    @property
    def size(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def flatten(self) -> RealVector:
        parts: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b)
        return np.concatenate(parts)

    @classmethod
    def unflatten(cls, layer_sizes: tuple[int, ...], flat: RealVector) -> "MlpParams":
        flat = np.asarray(flat, dtype=np.float64)
        expected = sum(n * m + m for n, m in zip(layer_sizes[:-1], layer_sizes[1:]))
        if flat.shape != (expected,):
            raise DimensionMismatchError(
                f"flat parameters have shape {flat.shape}, expected ({expected},)"
            )
        weights, biases, offset = [], [], 0
        for n, m in zip(layer_sizes[:-1], layer_sizes[1:]):
            weights.append(flat[offset : offset + n * m].reshape(n, m))
            offset += n * m
            biases.append(flat[offset : offset + m])
            offset += m
        return cls(tuple(weights), tuple(biases))

    @classmethod
    def zeros(cls, layer_sizes: tuple[int, ...]) -> "MlpParams":
        return cls(
            tuple(np.zeros((n, m)) for n, m in zip(layer_sizes[:-1], layer_sizes[1:])),
            tuple(np.zeros(m) for m in layer_sizes[1:]),
        )

    def bit_equal(self, other: "MlpParams") -> bool:
        return self.layer_sizes == other.layer_sizes and all(
            np.array_equal(a, b)
            for a, b in zip(self.weights + self.biases, other.weights + other.biases)
        )


def init_mlp(layer_sizes: tuple[int, ...], rng: np.random.Generator) -> MlpParams:
    """Uniform initialization in ``+-1/sqrt(fan_in)`` for weights and biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return MlpParams(tuple(weights), tuple(biases))


@dataclass(frozen=True)
class MlpTrace:
    """Layer activations of one forward pass, reused by the backward pass."""

    activations: tuple[np.ndarray, ...]
    was_vector: bool

    @property
    def output(self) -> np.ndarray:
        out = self.activations[-1]
        return out[0] if self.was_vector else out


def _as_batch(params: MlpParams, inputs: np.ndarray) -> tuple[RealMatrix, bool]:
    x = np.asarray(inputs, dtype=np.float64)
    was_vector = x.ndim == 1
    if was_vector:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != params.input_dim:
        raise DimensionMismatchError(
            f"input has shape {np.shape(inputs)}, network expects dimension {params.input_dim}"
        )
    return x, was_vector


def forward_trace(params: MlpParams, inputs: np.ndarray) -> MlpTrace:
    """Run the network on one input vector or a batch (rows) and keep activations."""
    h, was_vector = _as_batch(params, inputs)
    activations = [h]
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w + b
        if i < last:
            h = np.maximum(h, 0.0)
        activations.append(h)
    ensure_finite(h, "network output")
    return MlpTrace(tuple(activations), was_vector)


def backward_trace(
    params: MlpParams, trace: MlpTrace, output_grad: np.ndarray
) -> tuple[RealVector, np.ndarray]:
    """Backpropagate ``output_grad`` through a recorded forward pass.

    Returns:
        ``(param_grad, input_grad)``: the flattened parameter gradient summed over
        the batch, and the gradient with respect to each input row.
    """
    delta = np.asarray(output_grad, dtype=np.float64)
    if trace.was_vector and delta.ndim == 1:
        delta = delta[None, :]
    if delta.shape != trace.activations[-1].shape:
        raise DimensionMismatchError(
            f"output gradient has shape {np.shape(output_grad)}, "
            f"expected {trace.output.shape}"
        )
    grads: list[np.ndarray] = [np.empty(0)] * (2 * len(params.weights))
    for i in reversed(range(len(params.weights))):
        grads[2 * i] = (trace.activations[i].T @ delta).ravel()
        grads[2 * i + 1] = delta.sum(axis=0)
        delta = delta @ params.weights[i].T
        if i > 0:
            delta = delta * (trace.activations[i] > 0.0)
    param_grad = ensure_finite(np.concatenate(grads), "parameter gradient")
    input_grad = delta[0] if trace.was_vector else delta
    return param_grad, input_grad


def per_sample_grad_norms(
    params: MlpParams, trace: MlpTrace, output_grad: np.ndarray
) -> RealVector:
    """Euclidean norm of each batch row's parameter gradient, without materializing it.

    The weight gradient of one row is an outer product, so its squared Frobenius
    norm is ``||activation||^2 * ||delta||^2``.
    """
    delta = np.atleast_2d(np.asarray(output_grad, dtype=np.float64))
    squared = np.zeros(delta.shape[0])
    for i in reversed(range(len(params.weights))):
        a = trace.activations[i]
        squared += np.sum(a * a, axis=1) * np.sum(delta * delta, axis=1)
        squared += np.sum(delta * delta, axis=1)
        delta = delta @ params.weights[i].T
        if i > 0:
            delta = delta * (a > 0.0)
    return np.sqrt(squared)


def mlp_forward(params: MlpParams, inputs: np.ndarray) -> np.ndarray:
    """Network output for one input vector or a batch of rows."""
    return forward_trace(params, inputs).output


def mlp_backward(
    params: MlpParams, inputs: np.ndarray, output_grad: np.ndarray
) -> tuple[RealVector, np.ndarray]:
    """Gradients of ``<output_grad, mlp_forward(params, inputs)>``.

    Returns:
        ``(param_grad, input_grad)`` with ``param_grad`` flattened like
        `MlpParams.flatten` and summed over batch rows.
    """
    return backward_trace(params, forward_trace(params, inputs), output_grad)
