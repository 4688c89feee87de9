import numpy as np
from scipy.special import xlogy

from graph_radii.formalisms.config import PRECISION


def calc_consensus(views: list) -> np.ndarray:
    """Calculates the elementwise frequency of each edge across binary views.

    Args:
        views: [-] non-empty list of n x n binary matrices

    Returns:
        [-] n x n matrix of edge frequencies in [0, 1]
    """
    return np.mean(np.stack([np.asarray(v, dtype=float) for v in views]), axis=0)


def calc_binary_deviation(w: np.ndarray,
                          incident_only: bool = False) -> np.ndarray:
    """Calculates the raw binary-deviation radius of each row of a consensus matrix.

    Args:
        w: [-] n x n edge frequencies
        incident_only: if True, only entries observed in at least one view (w > 0) are averaged

    Returns:
        [-] 1 - mean_j |w_ij - (1 - w_ij)| per row, in [0, 1]

    Notes:
        The edge uncertainty 1 - |2w - 1| is maximal (1) at w = 0.5 and null at w = 0 or w = 1.
        Rows without any observed entry get a null radius when `incident_only` is set.
    """
    w = np.asarray(w, dtype=float)
    deviation = np.abs(w - (1. - w))
    if not incident_only:
        return 1. - deviation.mean(axis=1)
    observed = w > 0
    counts = observed.sum(axis=1)
    uncertainty = np.where(observed, 1. - deviation, 0.).sum(axis=1)
    return np.divide(uncertainty, counts, out=np.zeros(len(w)), where=counts > 0)


def calc_row_stddev(w: np.ndarray) -> np.ndarray:
    """Calculates the population standard deviation of each row."""
    return np.asarray(w, dtype=float).std(axis=1)


def calc_binary_entropy(p: np.ndarray) -> np.ndarray:
    """Calculates the base-2 entropy of Bernoulli probabilities, with H(0) = H(1) = 0."""
    p = np.asarray(p, dtype=float)
    return -(xlogy(p, p) + xlogy(1. - p, 1. - p)) / np.log(2.)


def calc_row_entropy(w: np.ndarray) -> np.ndarray:
    """Calculates the mean binary entropy of each row."""
    return calc_binary_entropy(w).mean(axis=1)


def minmax_normalize(raw: np.ndarray) -> np.ndarray:
    """Rescales a vector to [0, 1]; a constant vector maps to zeros."""
    raw = np.asarray(raw, dtype=float)
    low, high = raw.min(), raw.max()
    if high - low <= PRECISION:
        return np.zeros_like(raw)
    return (raw - low) / (high - low)
