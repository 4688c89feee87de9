import numpy as np

from graph_radii.errors import DimensionError, ParameterError


def calc_glorot_uniform(fan_in: int,
                        fan_out: int,
                        rng: np.random.Generator) -> np.ndarray:
    """Draws a fan_in x fan_out weight matrix from U(-l, l), l = sqrt(6 / (fan_in + fan_out))."""
    limit = np.sqrt(6. / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def relu(z: np.ndarray) -> np.ndarray:
    """Applies the rectified linear unit elementwise.

    Args:
        z: [-] pre-activations of any shape

    Returns:
        [-] max(z, 0), same shape as `z`
    """
    return np.maximum(z, 0.)


def calc_dropout_mask(shape: tuple,
                      p: float,
                      rng: np.random.Generator) -> np.ndarray:
    """Draws an inverted-dropout mask: entries are 0 with probability p, 1 / (1 - p) otherwise."""
    if p == 0:
        return np.ones(shape)
    return (rng.random(shape) >= p) / (1. - p)


def calc_radius_noise(shape: tuple,
                      radii: np.ndarray,
                      rng: np.random.Generator) -> np.ndarray:
    """Draws Gaussian noise whose variance in row i equals radii[i].

    Args:
        shape: (n, h) shape of the noise
        radii: [-] variance of each row, non-negative
        rng: random generator

    Returns:
        n x h matrix of independent N(0, radii[i]) draws
    """
    radii = np.asarray(radii, dtype=float)
    if radii.shape != (shape[0],):
        raise DimensionError(f'Expected {shape[0]} radii, got shape {radii.shape}.')
    if np.any(radii < 0):
        raise ParameterError('Radii (noise variances) must be non-negative.')
    return np.sqrt(radii)[:, None] * rng.standard_normal(shape)


def inject_radius_noise(h: np.ndarray,
                        radii: np.ndarray,
                        seed) -> np.ndarray:
    """Adds N(0, radii[i]) noise to each element of row i of `h`, deterministically for a given seed.

    Args:
        h: [-] n x h layer output
        radii: [-] noise variance of each row, non-negative
        seed: integer seed or `np.random.SeedSequence`; the same seed always gives the same noise
    """
    h = np.asarray(h, dtype=float)
    return h + calc_radius_noise(h.shape, radii, np.random.default_rng(seed))
