import numpy as np

from graph_radii.errors import ParameterError


def calc_symmetric_normalization(adjacency: np.ndarray) -> np.ndarray:
    """Calculates the GCN propagation operator of a binary symmetric adjacency matrix.

    Args:
        adjacency: [-] n x n binary symmetric adjacency matrix with zero diagonal

    Returns:
        [-] D^{-1/2} (A + I) D^{-1/2}, D being the degree matrix of A + I
    """
    a_tilde = np.asarray(adjacency, dtype=float) + np.eye(adjacency.shape[0])
    d_inv_sqrt = 1. / np.sqrt(a_tilde.sum(axis=1))
    return d_inv_sqrt[:, None] * a_tilde * d_inv_sqrt[None, :]


def calc_block_sizes(n: int,
                     num_blocks: int) -> list:
    """Splits `n` nodes into `num_blocks` blocks whose sizes differ by at most one (larger blocks first)."""
    base, remainder = divmod(n, num_blocks)
    return [base + 1 if i < remainder else base for i in range(num_blocks)]


def calc_sbm_adjacency(block_sizes: list,
                       p_in: float,
                       p_out: float,
                       rng: np.random.Generator) -> np.ndarray:
    """Draws the adjacency matrix of a stochastic block model.

    Args:
        block_sizes: [-] number of nodes of each block (nodes are numbered block after block)
        p_in: [-] probability of an edge between two nodes of the same block
        p_out: [-] probability of an edge between two nodes of different blocks
        rng: random generator

    Returns:
        [-] binary symmetric adjacency matrix with zero diagonal
    """
    blocks = np.repeat(np.arange(len(block_sizes)), block_sizes)
    probabilities = np.where(blocks[:, None] == blocks[None, :], p_in, p_out)
    draws = rng.random(probabilities.shape) < probabilities
    upper = np.triu(draws, k=1)
    return (upper | upper.T).astype(np.int8)


def calc_random_split(labeled: np.ndarray,
                      fractions: tuple,
                      rng: np.random.Generator) -> tuple:
    """Draws disjoint train/validation/test masks over the labeled nodes.

    Args:
        labeled: boolean vector of the nodes that carry a label
        fractions: [-] train and validation fractions (the remaining nodes go to the test mask)
        rng: random generator

    Returns:
        train, validation and test boolean masks
    """
    candidates = np.flatnonzero(labeled)
    if not 0 <= fractions[0] + fractions[1] <= 1:
        raise ParameterError(f'Split fractions must sum to at most 1, got {fractions}.')
    permuted = rng.permutation(candidates)
    m = len(candidates)
    n_train = max(1, int(round(fractions[0] * m))) if m >= 3 else min(m, 1)
    n_val = max(1, int(round(fractions[1] * m))) if m >= 3 else 0

    masks = [np.zeros(len(labeled), dtype=bool) for _ in range(3)]
    masks[0][permuted[:n_train]] = True
    masks[1][permuted[n_train:n_train + n_val]] = True
    masks[2][permuted[n_train + n_val:]] = True
    return tuple(masks)
