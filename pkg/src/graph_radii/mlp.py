from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from graph_radii.errors import DimensionError, ParameterError
from graph_radii.formalisms import layers

HEADS = ('mean', 'lower', 'upper')


@dataclass(frozen=True, eq=False)
class MLPParams:
    """Weights of a fully connected backbone with relu activations, shared by several linear output heads."""

    weights: List[np.ndarray]
    biases: List[np.ndarray]
    head_weights: Dict[str, np.ndarray]
    head_biases: Dict[str, np.ndarray]

    def __post_init__(self):
        if len(self.weights) != len(self.biases):
            raise DimensionError(f'{len(self.weights)} weight matrices for {len(self.biases)} bias vectors.')
        for i, (w, b) in enumerate(zip(self.weights, self.biases), start=1):
            if b.shape != (w.shape[1],):
                raise DimensionError(f'layer {i}: bias of shape {b.shape} for {w.shape[1]} units.')
        for i, (w, w_next) in enumerate(zip(self.weights, self.weights[1:]), start=1):
            if w.shape[1] != w_next.shape[0]:
                raise DimensionError(f'layer {i} outputs {w.shape[1]} units, layer {i + 1} expects {w_next.shape[0]}.')
        width = self.weights[-1].shape[1]
        for head, w in self.head_weights.items():
            if w.shape[0] != width:
                raise DimensionError(f'head {head} expects {w.shape[0]} inputs, backbone outputs {width}.')

    @property
    def output_dim(self) -> int:
        return next(iter(self.head_weights.values())).shape[1]

    @property
    def names(self) -> List[str]:
        backbone = [name for i in range(1, len(self.weights) + 1) for name in (f'w{i}', f'b{i}')]
        return backbone + [name for head in self.head_weights for name in (f'{head}_w', f'{head}_b')]

    def tensors(self) -> List[np.ndarray]:
        backbone = [t for pair in zip(self.weights, self.biases) for t in pair]
        return backbone + [t for head in self.head_weights for t in (self.head_weights[head], self.head_biases[head])]

    def with_tensors(self, tensors: List[np.ndarray]) -> 'MLPParams':
        """Returns parameters of the same architecture holding `tensors` (ordered as `tensors()`)."""
        tensors = [np.asarray(t, dtype=float) for t in tensors]
        num_layers = len(self.weights)
        heads = list(self.head_weights)
        if len(tensors) != 2 * (num_layers + len(heads)):
            raise DimensionError(f'{len(tensors)} tensors for {num_layers} layers and {len(heads)} heads.')
        head_tensors = tensors[2 * num_layers:]
        return MLPParams(weights=tensors[0:2 * num_layers:2],
                         biases=tensors[1:2 * num_layers:2],
                         head_weights={h: head_tensors[2 * i] for i, h in enumerate(heads)},
                         head_biases={h: head_tensors[2 * i + 1] for i, h in enumerate(heads)})


@dataclass(frozen=True, eq=False)
class MLPTrace:
    params: MLPParams
    inputs: List[np.ndarray]
    """input of each backbone layer, inputs[0] being the features"""
    pre_activations: List[np.ndarray]
    dropout_masks: List[Optional[np.ndarray]]
    output: np.ndarray
    """backbone output, shared input of the heads"""


def init_mlp(input_dim: int,
             output_dim: int,
             hidden: int = 1024,
             num_layers: int = 3,
             heads=HEADS,
             seed: int = 0) -> MLPParams:
    """Draws Glorot-uniform weights and zero biases."""
    if num_layers < 1 or hidden < 1:
        raise ParameterError('The MLP needs at least one hidden layer of at least one unit.')
    rng = np.random.default_rng([seed, 1])
    widths = [input_dim] + [hidden] * num_layers
    weights = [layers.calc_glorot_uniform(fan_in, fan_out, rng) for fan_in, fan_out in zip(widths, widths[1:])]
    return MLPParams(weights=weights,
                     biases=[np.zeros(hidden) for _ in range(num_layers)],
                     head_weights={head: layers.calc_glorot_uniform(hidden, output_dim, rng) for head in heads},
                     head_biases={head: np.zeros(output_dim) for head in heads})


def mlp_forward(params: MLPParams,
                features: np.ndarray,
                mode: str = 'eval',
                seed: int = 0,
                dropout: float = 0.5,
                dropout_layers: int = 2) -> tuple:
    """Runs the backbone and every head.

    Args:
        params: network weights
        features: [-] m x f inputs
        mode: 'train' (dropout active) or 'eval'
        seed: seed of the dropout masks
        dropout: [-] dropout probability
        dropout_layers: number of leading hidden layers followed by dropout

    Returns:
        dictionary of m x d head outputs, and the forward trace
    """
    if mode not in ('train', 'eval'):
        raise ParameterError(f'Unknown mode: {mode}.')
    x = np.asarray(features, dtype=float)
    if x.ndim != 2 or x.shape[1] != params.weights[0].shape[0]:
        raise DimensionError(f'layer 1: inputs of shape {x.shape}, weights expect {params.weights[0].shape[0]} '
                             f'features.')
    rng = np.random.default_rng(seed)

    inputs, pre_activations, masks = [], [], []
    a = x
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        inputs.append(a)
        z = a @ w + b
        pre_activations.append(z)
        a = layers.relu(z)
        mask = layers.calc_dropout_mask(a.shape, dropout, rng) if mode == 'train' and i < dropout_layers else None
        if mask is not None:
            a = a * mask
        masks.append(mask)

    outputs = {head: a @ w + params.head_biases[head] for head, w in params.head_weights.items()}
    return outputs, MLPTrace(params=params, inputs=inputs, pre_activations=pre_activations, dropout_masks=masks,
                             output=a)


def mlp_backward(trace: MLPTrace,
                 head_grads: Dict[str, np.ndarray]) -> List[np.ndarray]:
    """Backpropagates the gradients of a loss with respect to the head outputs.

    Returns:
        gradients ordered as `MLPParams.tensors()`; heads absent from `head_grads` get zero gradients
    """
    params = trace.params
    m = trace.output.shape[0]
    grad_output = np.zeros_like(trace.output)
    head_gradients = []
    for head, w in params.head_weights.items():
        g = head_grads.get(head)
        if g is None:
            head_gradients += [np.zeros_like(w), np.zeros_like(params.head_biases[head])]
            continue
        g = np.asarray(g, dtype=float)
        if g.shape != (m, w.shape[1]):
            raise DimensionError(f'head {head}: gradient of shape {g.shape}, expected {(m, w.shape[1])}.')
        head_gradients += [trace.output.T @ g, g.sum(axis=0)]
        grad_output = grad_output + g @ w.T

    backbone_gradients = []
    g = grad_output
    for a, z, mask, w in reversed(list(zip(trace.inputs, trace.pre_activations, trace.dropout_masks,
                                           params.weights))):
        if mask is not None:
            g = g * mask
        g = g * (z > 0)
        backbone_gradients = [a.T @ g, g.sum(axis=0)] + backbone_gradients
        g = g @ w.T
    return backbone_gradients + head_gradients
