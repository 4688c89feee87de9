import numpy as np

from graph_radii.errors import NumericalError, ParameterError
from graph_radii.formalisms.config import PRECISION, RECONSTRUCTION_TOLERANCE, TIE_DECIMALS


def calc_sorted_eigenpairs(adjacency: np.ndarray) -> tuple:
    """Calculates the full spectral decomposition of a symmetric matrix.

    Args:
        adjacency: [-] n x n symmetric matrix

    Returns:
        eigenvalues sorted by descending magnitude (ties broken by descending signed value), and the matrix whose
        column i is the unit eigenvector of eigenvalue i

    Raises:
        NumericalError: if the solver fails or the decomposition does not reproduce the input
    """
    a = np.asarray(adjacency, dtype=float)
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f'Symmetric eigensolver did not converge: {e}.', residual=float('nan')) from e

    order = np.lexsort((-eigenvalues, -np.round(np.abs(eigenvalues), TIE_DECIMALS)))
    eigenvalues, eigenvectors = eigenvalues[order], eigenvectors[:, order]

    if a.size:
        residual = np.max(np.abs((eigenvectors * eigenvalues) @ eigenvectors.T - a))
        if not residual < RECONSTRUCTION_TOLERANCE:
            raise NumericalError('Spectral decomposition does not reproduce the matrix.', residual=float(residual))
    return eigenvalues, eigenvectors


def calc_retained_energy(eigenvalues: np.ndarray,
                         q: int) -> float:
    """Calculates the fraction of squared-eigenvalue mass held by the first `q` components.

    Args:
        eigenvalues: [-] eigenvalues sorted by descending magnitude
        q: [-] number of retained components, in [1, n]

    Returns:
        [-] retained energy, 1 when all eigenvalues are zero

    Raises:
        ParameterError: if `q` is not in [1, n]
    """
    n = len(eigenvalues)
    if not 1 <= q <= n:
        raise ParameterError(f'Number of components must lie in [1, {n}], got {q}.')
    squares = np.asarray(eigenvalues, dtype=float) ** 2
    total = squares.sum()
    if q == n or total == 0:
        return 1.
    return float(squares[:q].sum() / total)


def calc_low_rank_matrix(eigenvalues: np.ndarray,
                         eigenvectors: np.ndarray,
                         k: int) -> np.ndarray:
    """Calculates the rank-k reconstruction U_k diag(lambda_k) U_k^T, symmetrized to absorb round-off."""
    u = eigenvectors[:, :k]
    a_k = (u * eigenvalues[:k]) @ u.T
    return (a_k + a_k.T) / 2.


def calc_binarized_view(a_k: np.ndarray,
                        threshold: float = 0.5) -> np.ndarray:
    """Discretizes a real reconstruction into a binary adjacency matrix.

    Args:
        a_k: [-] n x n real symmetric reconstruction
        threshold: [-] entries whose min-max normalized value reaches the threshold become edges

    Returns:
        [-] binary symmetric matrix with zero diagonal

    Notes:
        The min-max scale is computed over off-diagonal entries only. When those entries are constant there is
        no scale, and the raw constant is compared to the threshold instead: a complete graph stays complete, an
        empty one stays empty.
    """
    n = a_k.shape[0]
    view = np.zeros((n, n), dtype=np.int8)
    off_diagonal = ~np.eye(n, dtype=bool)
    if n < 2:
        return view
    values = a_k[off_diagonal]
    low, high = values.min(), values.max()
    if high - low <= PRECISION:
        view[off_diagonal] = (values >= threshold).astype(np.int8)
        return view
    view[off_diagonal] = ((values - low) / (high - low) >= threshold).astype(np.int8)
    return view


def calc_component_counts(n: int,
                          q_min: int,
                          step: int) -> list:
    """Calculates q_min, q_min + step, ... capped so that the last count is exactly n."""
    if not 1 <= q_min <= n:
        raise ParameterError(f'`q_min` must lie in [1, {n}], got {q_min}.')
    if step < 1:
        raise ParameterError(f'`step` must be a positive integer, got {step}.')
    counts = list(range(q_min, n + 1, step))
    if counts[-1] != n:
        counts.append(n)
    return counts
