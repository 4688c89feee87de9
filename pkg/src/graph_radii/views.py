import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence

import numpy as np

from graph_radii.errors import ParameterError
from graph_radii.formalisms import spectral
from graph_radii.graph import Graph, write_edge_list
from graph_radii.utils import atomic_write_text, format_float

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: np.ndarray
    """[-] eigenvalues sorted by descending magnitude, ties broken by descending signed value"""

    eigenvectors: np.ndarray
    """[-] orthonormal eigenvectors, column i paired with eigenvalues[i]"""

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True, eq=False)
class ViewSequence:
    views: List[np.ndarray]
    """Binary symmetric zero-diagonal adjacency matrices, simplest first"""

    component_counts: List[int]
    """Number of spectral components used for each view (strictly increasing)"""

    @property
    def count(self) -> int:
        return len(self.views)

    def __iter__(self):
        return iter(zip(self.component_counts, self.views))


def eigendecompose(graph: Graph) -> EigenDecomposition:
    """Decomposes the raw adjacency matrix of a graph (not its propagation operator)."""
    eigenvalues, eigenvectors = spectral.calc_sorted_eigenpairs(graph.adjacency)
    return EigenDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def retained_energy(decomp: EigenDecomposition,
                    q: int) -> float:
    """Returns the share of the squared spectrum held by the first `q` components.

    Args:
        decomp: eigendecomposition of the graph adjacency
        q: [-] number of retained components, in [1, n]

    Returns:
        [-] retained energy in [0, 1], exactly 1 at q = n

    Raises:
        ParameterError: if `q` is not in [1, n]
    """
    return spectral.calc_retained_energy(decomp.eigenvalues, q)


def reconstruct_view(decomp: EigenDecomposition,
                     k: int) -> np.ndarray:
    """Reconstructs a binary view of the graph from its first `k` spectral components.

    Raises:
        ParameterError: if `k` is not in [1, n]
    """
    if not 1 <= k <= decomp.n:
        raise ParameterError(f'Number of components must lie in [1, {decomp.n}], got {k}.')
    a_k = spectral.calc_low_rank_matrix(decomp.eigenvalues, decomp.eigenvectors, k)
    view = spectral.calc_binarized_view(a_k)
    logger.debug('view from %d components: %d edges', k, int(np.triu(view, k=1).sum()))
    return view


def generate_views(graph: Graph,
                   q_min: int,
                   step: int,
                   decomp: EigenDecomposition = None,
                   jobs: int = 1) -> ViewSequence:
    """Generates views of increasing spectral complexity.

    Args:
        graph: input graph
        q_min: [-] number of components of the first view
        step: [-] increment of components between views; the last view always uses all n components
        decomp: decomposition of `graph` when already available
        jobs: number of threads reconstructing views concurrently
    """
    counts = spectral.calc_component_counts(graph.n, q_min, step)
    decomp = eigendecompose(graph) if decomp is None else decomp
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            views = list(executor.map(lambda k: reconstruct_view(decomp, k), counts))
    else:
        views = [reconstruct_view(decomp, k) for k in counts]
    logger.info('generated %d views with %s components', len(views), counts)
    return ViewSequence(views=views, component_counts=counts)


def write_views(views: ViewSequence,
                node_ids: Sequence[str],
                directory: Path) -> List[Path]:
    """Writes each view as an edge list named after its component count (view_0005.txt, ...)."""
    directory = Path(directory)
    return [write_edge_list(view, node_ids, directory / f'view_{k:04d}.txt') for k, view in views]


def write_energy_table(decomp: EigenDecomposition,
                       component_counts: Sequence[int],
                       path: Path) -> Path:
    """Writes the CSV 'components,energy' of the retained energy of each component count."""
    lines = ['components,energy'] + [f'{k},{format_float(retained_energy(decomp, k))}' for k in component_counts]
    return atomic_write_text(path, '\n'.join(lines) + '\n')
