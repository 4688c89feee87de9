from math import ceil

import numpy as np

from graph_radii.errors import DimensionError, ParameterError


def conformal_score(lower: float,
                    upper: float,
                    y: float) -> float:
    """Calculates the signed distance of a target to a predicted interval.

    Args:
        lower: [-] lower bound of the interval
        upper: [-] upper bound of the interval
        y: [-] target

    Returns:
        max(lower - y, y - upper): non-positive when y lies in the interval
    """
    return float(max(lower - y, y - upper))


def calc_conformal_scores(lower: np.ndarray,
                          upper: np.ndarray,
                          y: np.ndarray) -> np.ndarray:
    """Elementwise version of `conformal_score` over m x d arrays."""
    lower, upper, y = (np.asarray(v, dtype=float) for v in (lower, upper, y))
    if not lower.shape == upper.shape == y.shape:
        raise DimensionError(f'Bounds of shapes {lower.shape} and {upper.shape} for targets of shape {y.shape}.')
    return np.maximum(lower - y, y - upper)


def calc_order_statistic_rank(m: int,
                              alpha: float) -> int:
    """Returns k = ceil((m + 1)(1 - alpha)), clipped to [1, m].

    Notes:
        The product is rounded to 9 decimals before taking the ceiling so that values such as 20 * 0.95 do not
        land one rank above their exact value.
    """
    k = ceil(round((m + 1) * (1. - alpha), 9))
    return min(max(k, 1), m)


def compute_qhat(scores,
                 alpha: float) -> float:
    """Calculates the conformal offset of a set of scores.

    Args:
        scores: [-] conformal scores of the calibration set
        alpha: [-] miscoverage level in (0, 1)

    Returns:
        the k-th smallest score, k = ceil((m + 1)(1 - alpha)), or the largest score when k exceeds m

    Raises:
        ParameterError: if `scores` is empty or `alpha` is outside (0, 1)
    """
    scores = np.asarray(scores, dtype=float).ravel()
    if scores.size == 0:
        raise ParameterError('Conformal calibration needs at least one score.')
    if not 0 < alpha < 1:
        raise ParameterError(f'Miscoverage level must lie in (0, 1), got {alpha}.')
    k = calc_order_statistic_rank(scores.size, alpha)
    return float(np.partition(scores, k - 1)[k - 1])


def calc_intervals(lower: np.ndarray,
                   upper: np.ndarray,
                   q_hat: np.ndarray) -> tuple:
    """Shifts each column of the raw quantile predictions by its conformal offset.

    Returns:
        (lower - q_hat, upper + q_hat), broadcast over rows
    """
    lower, upper = np.asarray(lower, dtype=float), np.asarray(upper, dtype=float)
    q_hat = np.asarray(q_hat, dtype=float)
    if lower.shape != upper.shape or q_hat.shape not in ((), (lower.shape[-1],)):
        raise DimensionError(f'Bounds of shapes {lower.shape} and {upper.shape} with offsets of shape '
                             f'{q_hat.shape}.')
    return lower - q_hat, upper + q_hat


def calc_mean_width(lower: np.ndarray,
                    upper: np.ndarray) -> np.ndarray:
    """Averages interval widths over dimensions, inverted intervals counting as zero width."""
    return np.mean(np.maximum(np.asarray(upper) - np.asarray(lower), 0.), axis=1)
