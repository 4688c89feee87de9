from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from graph_radii.errors import DimensionError, ParameterError
from graph_radii.formalisms import layers
from graph_radii.graph import NormalizedAdjacency

MODES = ('train', 'eval')


@dataclass(frozen=True, eq=False)
class GCNParams:
    """Weights of a two-layer graph convolutional network without biases."""

    layer_weights: List[np.ndarray]
    """[f x h, h x C] weight matrices"""

    def __post_init__(self):
        for i, (w, w_next) in enumerate(zip(self.layer_weights, self.layer_weights[1:]), start=1):
            if w.shape[1] != w_next.shape[0]:
                raise DimensionError(f'layer {i} outputs {w.shape[1]} units, layer {i + 1} expects {w_next.shape[0]}.')

    @property
    def names(self) -> List[str]:
        return [f'w{i}' for i in range(1, len(self.layer_weights) + 1)]

    def tensors(self) -> List[np.ndarray]:
        return list(self.layer_weights)

    @classmethod
    def from_tensors(cls, tensors: List[np.ndarray]) -> 'GCNParams':
        return cls(layer_weights=[np.asarray(t, dtype=float) for t in tensors])

    def copy(self) -> 'GCNParams':
        return GCNParams(layer_weights=[w.copy() for w in self.layer_weights])


@dataclass(frozen=True, eq=False)
class ForwardTrace:
    """Every intermediate of a GCN forward pass, including the random draws, kept for backpropagation."""

    params: GCNParams
    a_hat: np.ndarray
    features: np.ndarray
    z1: np.ndarray
    """pre-activation of layer 1"""
    h1: np.ndarray
    """post-activation of layer 1, noise included"""
    dropout_mask: Optional[np.ndarray]
    dropped: np.ndarray
    """input of layer 2"""
    logits: np.ndarray
    radii: Optional[np.ndarray] = None
    """[-] noise variance of each node, None when no noise was injected"""
    noise_seeds: Optional[tuple] = None
    """seeds of the layer 1 and layer 2 noise, replayed by `inject_radius_noise`"""


def init_gcn(num_features: int,
             num_classes: int,
             hidden: int = 16,
             seed: int = 0) -> GCNParams:
    """Draws Glorot-uniform weights of a two-layer GCN."""
    rng = np.random.default_rng([seed, 0])
    return GCNParams(layer_weights=[layers.calc_glorot_uniform(num_features, hidden, rng),
                                    layers.calc_glorot_uniform(hidden, num_classes, rng)])


def _radii_values(radii, n: int) -> Optional[np.ndarray]:
    if radii is None:
        return None
    values = np.asarray(getattr(radii, 'values', radii), dtype=float)
    if values.shape != (n,):
        raise DimensionError(f'Expected {n} radii, got shape {values.shape}.')
    return values


def gcn_forward(params: GCNParams,
                a_hat: NormalizedAdjacency,
                features: np.ndarray,
                radii=None,
                mode: str = 'eval',
                seed: int = 0,
                dropout: float = 0.5) -> tuple:
    """Runs a two-layer GCN, optionally perturbing each layer output with radius noise.

    Args:
        params: network weights
        a_hat: propagation operator
        features: [-] n x f node features
        radii: per-node noise variances (`RadiusVector` or array), used in train mode only
        mode: 'train' (noise and dropout) or 'eval' (deterministic)
        seed: seed of the noise and dropout draws
        dropout: [-] dropout probability after the first layer

    Returns:
        n x C logits, n x h first-layer representation (before dropout), and the forward trace

    Notes:
        Noise of layer 1, dropout mask and noise of layer 2 are drawn from independent streams of `seed`, so the
        dropout mask does not depend on whether radii are given.
    """
    if mode not in MODES:
        raise ParameterError(f'Unknown mode: {mode}.')
    a = a_hat.matrix
    x = np.asarray(features, dtype=float)
    w1, w2 = params.layer_weights
    n = a.shape[0]
    if x.shape[0] != n:
        raise DimensionError(f'layer 1: {x.shape[0]} feature rows for a {n}-node propagation operator.')
    if x.shape[1] != w1.shape[0]:
        raise DimensionError(f'layer 1: {x.shape[1]} features, weights expect {w1.shape[0]}.')

    training = mode == 'train'
    r = _radii_values(radii, n) if training else None
    noise_seed, dropout_seed, output_noise_seed = np.random.SeedSequence(seed).spawn(3)
    noise_seeds = (noise_seed, output_noise_seed) if r is not None else None

    z1 = a @ (x @ w1)
    h1 = layers.relu(z1)
    if noise_seeds:
        h1 = layers.inject_radius_noise(h1, r, noise_seeds[0])
    mask = layers.calc_dropout_mask(h1.shape, dropout, np.random.default_rng(dropout_seed)) if training else None
    dropped = h1 * mask if mask is not None else h1

    logits = a @ (dropped @ w2)
    if noise_seeds:
        logits = layers.inject_radius_noise(logits, r, noise_seeds[1])

    trace = ForwardTrace(params=params, a_hat=a, features=x, z1=z1, h1=h1, dropout_mask=mask, dropped=dropped,
                         logits=logits, radii=r, noise_seeds=noise_seeds)
    return logits, h1, trace


def replay(trace: ForwardTrace) -> np.ndarray:
    """Recomputes the logits of a trace from its inputs, its dropout mask and its noise seeds."""
    w1, w2 = trace.params.layer_weights
    h1 = layers.relu(trace.a_hat @ (trace.features @ w1))
    if trace.noise_seeds:
        h1 = layers.inject_radius_noise(h1, trace.radii, trace.noise_seeds[0])
    dropped = h1 * trace.dropout_mask if trace.dropout_mask is not None else h1
    logits = trace.a_hat @ (dropped @ w2)
    if trace.noise_seeds:
        logits = layers.inject_radius_noise(logits, trace.radii, trace.noise_seeds[1])
    return logits


def backward(trace: ForwardTrace,
             loss_grad: np.ndarray) -> List[np.ndarray]:
    """Backpropagates the gradient of a loss with respect to the logits.

    Args:
        trace: trace of the forward pass that produced the logits
        loss_grad: [-] n x C gradient of the loss with respect to the logits

    Returns:
        gradient with respect to each weight matrix, random draws being held constant
    """
    loss_grad = np.asarray(loss_grad, dtype=float)
    if loss_grad.shape != trace.logits.shape:
        raise DimensionError(f'Gradient of shape {loss_grad.shape} for logits of shape {trace.logits.shape}.')
    w1, w2 = trace.params.layer_weights
    a_t = trace.a_hat.T

    propagated = a_t @ loss_grad
    grad_w2 = trace.dropped.T @ propagated
    grad_h1 = propagated @ w2.T
    if trace.dropout_mask is not None:
        grad_h1 = grad_h1 * trace.dropout_mask
    grad_z1 = grad_h1 * (trace.z1 > 0)
    grad_w1 = trace.features.T @ (a_t @ grad_z1)
    return [grad_w1, grad_w2]


def predict(params: GCNParams,
            a_hat: NormalizedAdjacency,
            features: np.ndarray) -> tuple:
    """Returns the eval-mode logits and first-layer representation."""
    logits, hidden, _ = gcn_forward(params, a_hat, features, mode='eval')
    return logits, hidden
