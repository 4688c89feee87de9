import numpy as np
from scipy.special import logsumexp, softmax

from graph_radii.errors import DimensionError, ParameterError


def _check_quantile(q: float):
    if not 0 < q < 1:
        raise ParameterError(f'Quantile level must lie in (0, 1), got {q}.')


def quantile_loss(y,
                  y_hat,
                  q: float) -> float:
    """Calculates the pinball loss max{(q - 1)(y - y_hat), q (y - y_hat)}, averaged over elements.

    Args:
        y: [-] targets (scalar or array)
        y_hat: [-] predictions, same shape as `y`
        q: [-] quantile level in (0, 1)
    """
    _check_quantile(q)
    residual = np.asarray(y, dtype=float) - np.asarray(y_hat, dtype=float)
    return float(np.mean(np.maximum((q - 1.) * residual, q * residual)))


def calc_quantile_loss_gradient(y: np.ndarray,
                                y_hat: np.ndarray,
                                q: float) -> np.ndarray:
    """Calculates the gradient of the mean pinball loss with respect to `y_hat`."""
    _check_quantile(q)
    residual = np.asarray(y, dtype=float) - np.asarray(y_hat, dtype=float)
    return np.where(residual > 0, -q, 1. - q) / residual.size


def squared_error_loss(y: np.ndarray,
                       y_hat: np.ndarray) -> tuple:
    """Calculates the mean squared error and its gradient with respect to `y_hat`."""
    residual = np.asarray(y_hat, dtype=float) - np.asarray(y, dtype=float)
    return float(np.mean(residual ** 2)), 2. * residual / residual.size


def calc_softmax(logits: np.ndarray) -> np.ndarray:
    return softmax(logits, axis=1)


def cross_entropy_loss(logits: np.ndarray,
                       labels: np.ndarray,
                       mask: np.ndarray) -> float:
    """Calculates the mean negative log-likelihood of the labels of the masked nodes.

    Raises:
        ParameterError: if the mask selects no node
    """
    return calc_cross_entropy(logits, labels, mask)[0]


def calc_cross_entropy(logits: np.ndarray,
                       labels: np.ndarray,
                       mask: np.ndarray) -> tuple:
    """Calculates the masked cross-entropy and its gradient with respect to the logits.

    Args:
        logits: [-] n x C class scores
        labels: [-] class index of each node
        mask: boolean vector of the nodes entering the loss

    Returns:
        the loss, and the n x C gradient (zero on rows outside the mask)
    """
    logits = np.asarray(logits, dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if logits.shape[0] != len(labels) or len(mask) != len(labels):
        raise DimensionError(f'{logits.shape[0]} logit rows for {len(labels)} labels and {len(mask)} mask entries.')
    m = int(mask.sum())
    if m == 0:
        raise ParameterError('Cross-entropy needs at least one masked node.')

    rows = np.flatnonzero(mask)
    targets = np.asarray(labels)[rows]
    selected = logits[rows]
    log_probabilities = selected - logsumexp(selected, axis=1, keepdims=True)
    loss = -float(np.mean(log_probabilities[np.arange(m), targets]))

    gradient = np.zeros_like(logits)
    probabilities = calc_softmax(selected)
    probabilities[np.arange(m), targets] -= 1.
    gradient[rows] = probabilities / m
    return loss, gradient


def calc_student_loss(outputs: dict,
                      target: np.ndarray,
                      alpha: float) -> tuple:
    """Calculates the distillation loss of the student's three heads.

    Args:
        outputs: 'mean', 'lower' and 'upper' head predictions, m x d each
        target: [-] m x d teacher outputs
        alpha: [-] miscoverage level; the lower and upper heads fit the alpha/2 and 1 - alpha/2 quantiles

    Returns:
        the summed loss (squared error of the mean head plus pinball losses of the quantile heads), and the
        gradient of each head
    """
    mean_loss, mean_gradient = squared_error_loss(target, outputs['mean'])
    levels = {'lower': alpha / 2., 'upper': 1. - alpha / 2.}
    loss = mean_loss
    gradients = {'mean': mean_gradient}
    for head, q in levels.items():
        loss += quantile_loss(target, outputs[head], q)
        gradients[head] = calc_quantile_loss_gradient(target, outputs[head], q)
    return loss, gradients
