import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import networkx as nx
import numpy as np
import pandas as pd

from graph_radii.errors import DimensionError, GraphParseError, ParameterError, PreconditionError
from graph_radii.formalisms import adjacency as adjacency_formalisms
from graph_radii.params import Constants
from graph_radii.utils import atomic_write_text

logger = logging.getLogger(__name__)

constants = Constants()

SPLIT_NAMES = ('train', 'val', 'test')


def _frozen(array: np.ndarray, dtype=None) -> np.ndarray:
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected unweighted attributed graph with an optional node classification task."""

    adjacency: np.ndarray
    """[-] n x n symmetric binary matrix with zero diagonal"""

    features: np.ndarray
    """[-] n x f node attribute matrix"""

    labels: Optional[np.ndarray] = None
    """[-] class index of each node (0 .. C-1, or -1 for an unlabeled node), or None for unlabeled graphs"""

    train_mask: Optional[np.ndarray] = None
    val_mask: Optional[np.ndarray] = None
    test_mask: Optional[np.ndarray] = None

    node_ids: Optional[Sequence[str]] = None
    """Original node identifiers, index i holding the identifier of node i"""

    provenance: Mapping = field(default_factory=dict)
    """Free-form description of how the graph was obtained (e.g. perturbation counts)"""

    def __post_init__(self):
        a = _frozen(self.adjacency, dtype=np.int8)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f'Adjacency must be square, got shape {a.shape}.')
        n = a.shape[0]
        if not np.array_equal(a, a.T):
            raise ParameterError('Adjacency must be symmetric.')
        if np.any(np.diag(a) != 0):
            raise ParameterError('Adjacency must have a zero diagonal.')
        if np.any((a != 0) & (a != 1)):
            raise ParameterError('Adjacency entries must be 0 or 1.')
        object.__setattr__(self, 'adjacency', a)

        x = _frozen(self.features, dtype=float)
        if x.ndim != 2 or x.shape[0] != n:
            raise DimensionError(f'Features must have {n} rows, got shape {x.shape}.')
        object.__setattr__(self, 'features', x)

        if self.labels is not None:
            y = _frozen(self.labels, dtype=np.int64)
            if y.shape != (n,):
                raise DimensionError(f'Labels must have length {n}, got shape {y.shape}.')
            if n and y.min() < -1:
                raise ParameterError('Labels must be class indices, or -1 for unlabeled nodes.')
            object.__setattr__(self, 'labels', y)

        for name in ('train_mask', 'val_mask', 'test_mask'):
            mask = getattr(self, name)
            mask = np.zeros(n, dtype=bool) if mask is None else mask
            mask = _frozen(mask, dtype=bool)
            if mask.shape != (n,):
                raise DimensionError(f'`{name}` must have length {n}, got shape {mask.shape}.')
            object.__setattr__(self, name, mask)
        if np.any(self.train_mask.astype(int) + self.val_mask + self.test_mask > 1):
            raise ParameterError('Train, validation and test masks must be disjoint.')
        if self.labels is not None and np.any((self.train_mask | self.val_mask | self.test_mask) & (self.labels < 0)):
            raise ParameterError('Unlabeled nodes cannot belong to the train, validation or test masks.')

        node_ids = tuple(str(i) for i in range(n)) if self.node_ids is None else tuple(self.node_ids)
        if len(node_ids) != n:
            raise DimensionError(f'Expected {n} node identifiers, got {len(node_ids)}.')
        object.__setattr__(self, 'node_ids', node_ids)
        object.__setattr__(self, 'provenance', dict(self.provenance))

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_edges(self) -> int:
        return int(np.triu(self.adjacency, k=1).sum())

    @property
    def num_classes(self) -> int:
        return 0 if self.labels is None else int(self.labels.max()) + 1

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1).astype(int)

    def require_labels(self):
        if self.labels is None:
            raise PreconditionError('This operation needs node labels.')
        if not self.train_mask.any():
            raise PreconditionError('This operation needs at least one training node.')

    def with_adjacency(self,
                       adjacency: np.ndarray,
                       provenance: Mapping = None) -> 'Graph':
        """Returns a graph sharing this graph's nodes, features, labels and masks, over another edge set."""
        return Graph(adjacency=adjacency, features=self.features, labels=self.labels,
                     train_mask=self.train_mask, val_mask=self.val_mask, test_mask=self.test_mask,
                     node_ids=self.node_ids, provenance=provenance or {})


@dataclass(frozen=True, eq=False)
class NormalizedAdjacency:
    matrix: np.ndarray
    """[-] symmetric GCN propagation operator"""


def symmetric_normalize(graph: Graph) -> NormalizedAdjacency:
    """Builds the propagation operator D^{-1/2} (A + I) D^{-1/2} of a graph."""
    return NormalizedAdjacency(matrix=_frozen(
        adjacency_formalisms.calc_symmetric_normalization(graph.adjacency)))


def normalize_adjacency(adjacency: np.ndarray) -> NormalizedAdjacency:
    """Builds the propagation operator of a bare adjacency matrix (e.g. a reconstructed view)."""
    return NormalizedAdjacency(matrix=_frozen(adjacency_formalisms.calc_symmetric_normalization(adjacency)))


def read_edge_list(path: Path) -> tuple:
    """Reads a whitespace-separated edge list.

    Args:
        path: text file with one "u v" pair per line; lines starting with '#' and blank lines are ignored

    Returns:
        node identifiers in first-appearance order, and the list of (i, j) index pairs

    Raises:
        GraphParseError: if a line does not hold exactly two identifiers
    """
    index = {}
    pairs = []
    with open(str(path), mode='r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith('#'):
                continue
            tokens = stripped.split()
            if len(tokens) != 2:
                raise GraphParseError(line_number=line_number, line=line)
            i, j = (index.setdefault(token, len(index)) for token in tokens)
            pairs.append((i, j))
    return list(index), pairs


def _build_adjacency(n: int,
                     pairs: list) -> np.ndarray:
    adjacency = np.zeros((n, n), dtype=np.int8)
    for i, j in pairs:
        if i != j:
            adjacency[i, j] = adjacency[j, i] = 1
    return adjacency


def read_adjacency(path: Path,
                   node_ids: Sequence[str]) -> np.ndarray:
    """Reads an edge list over an already known node set (e.g. an attacked version of a dataset).

    Raises:
        DimensionError: if the file mentions a node that is not in `node_ids`
    """
    file_ids, pairs = read_edge_list(path)
    position = {node_id: i for i, node_id in enumerate(node_ids)}
    unknown = [node_id for node_id in file_ids if node_id not in position]
    if unknown:
        raise DimensionError(f'{path}: {len(unknown)} nodes are not part of the graph (e.g. "{unknown[0]}").')
    remap = [position[node_id] for node_id in file_ids]
    return _build_adjacency(len(node_ids), [(remap[i], remap[j]) for i, j in pairs])


def _read_node_table(path: Path,
                     node_ids: list,
                     what: str) -> pd.DataFrame:
    table = pd.read_csv(str(path), dtype=str)
    table = table.set_index(table.columns[0])
    if len(table) != len(node_ids) or set(table.index) != set(node_ids):
        raise DimensionError(f'{path}: {what} cover {len(table)} nodes, the edge list has {len(node_ids)}.')
    return table.loc[node_ids]


def _read_splits(path: Path,
                 node_ids: list) -> tuple:
    table = pd.read_csv(str(path), dtype=str)
    position = {node_id: i for i, node_id in enumerate(node_ids)}
    masks = {name: np.zeros(len(node_ids), dtype=bool) for name in SPLIT_NAMES}
    if table.iloc[:, 0].duplicated().any():
        raise ParameterError(f'{path}: a node is assigned to several splits.')
    for node_id, split in zip(table.iloc[:, 0], table.iloc[:, 1]):
        split = split.strip().lower()
        if split not in masks:
            raise ParameterError(f'{path}: unknown split "{split}".')
        if node_id not in position:
            raise DimensionError(f'{path}: node "{node_id}" is not part of the graph.')
        masks[split][position[node_id]] = True
    return tuple(masks[name] for name in SPLIT_NAMES)


def _factorize_labels(column: pd.Series) -> np.ndarray:
    """Maps raw label strings to class indices 0 .. C-1, empty labels to -1.

    Classes are numbered in numeric order when every label is an integer, in lexicographic order otherwise.
    """
    column = column.str.strip().replace('', np.nan)
    present = column.dropna()
    if len(present) and present.str.fullmatch(r'[+-]?\d+').all():
        column = pd.to_numeric(column).astype('Int64')
    labels, _ = pd.factorize(column, sort=True)
    unlabeled = int((labels < 0).sum())
    if unlabeled:
        logger.info('%d nodes have no label', unlabeled)
    return labels


def load_graph(edge_list_path: Path,
               features_path: Path = None,
               labels_path: Path = None,
               splits_path: Path = None,
               split_seed: int = 0) -> Graph:
    """Loads a graph from an edge list and optional node tables.

    Args:
        edge_list_path: edge list (see `read_edge_list`); edges are symmetrized, deduplicated and self-loops dropped
        features_path: CSV of node features keyed by node id; identity features if None
        labels_path: CSV 'node_id,label' keyed by node id; an empty label marks an unlabeled node
        splits_path: CSV 'node_id,split'; a seeded 10/10/80 split of the labeled nodes if None
        split_seed: seed of the random split

    Returns:
        the loaded graph, nodes indexed in first-appearance order in the edge list
    """
    node_ids, pairs = read_edge_list(edge_list_path)
    n = len(node_ids)
    adjacency = _build_adjacency(n, pairs)

    if features_path:
        features = _read_node_table(features_path, node_ids, 'features').to_numpy(dtype=float)
    else:
        features = np.eye(n)

    labels = None
    if labels_path:
        column = _read_node_table(labels_path, node_ids, 'labels').iloc[:, 0]
        labels = _factorize_labels(column)

    if splits_path:
        masks = _read_splits(splits_path, node_ids)
    elif labels is not None:
        masks = adjacency_formalisms.calc_random_split(
            labeled=labels >= 0,
            fractions=constants.split_fractions[:2],
            rng=np.random.default_rng(split_seed))
    else:
        masks = (None, None, None)

    graph = Graph(adjacency=adjacency, features=features, labels=labels,
                  train_mask=masks[0], val_mask=masks[1], test_mask=masks[2],
                  node_ids=node_ids, provenance={'source': str(edge_list_path)})
    logger.info('loaded %s: %d nodes, %d edges', edge_list_path, graph.n, graph.num_edges)
    return graph


def generate_sbm(n: int,
                 num_blocks: int,
                 p_in: float,
                 p_out: float,
                 seed: int) -> Graph:
    """Generates a labeled stochastic block model graph with identity features.

    Args:
        n: [-] number of nodes
        num_blocks: [-] number of blocks; the remainder of n / num_blocks is spread over the first blocks
        p_in: [-] within-block edge probability
        p_out: [-] between-block edge probability, at most `p_in`
        seed: seed of both the edge draws and the random split

    Raises:
        ParameterError: if probabilities are not ordered as 0 <= p_out <= p_in <= 1
    """
    if not 0 <= p_out <= p_in <= 1:
        raise ParameterError(f'Expected 0 <= p_out <= p_in <= 1, got p_in={p_in}, p_out={p_out}.')
    if not 1 <= num_blocks <= n:
        raise ParameterError(f'`num_blocks` must lie in [1, n], got {num_blocks}.')

    rng = np.random.default_rng(seed)
    block_sizes = adjacency_formalisms.calc_block_sizes(n, num_blocks)
    adjacency = adjacency_formalisms.calc_sbm_adjacency(block_sizes, p_in, p_out, rng)
    labels = np.repeat(np.arange(num_blocks), block_sizes)
    masks = adjacency_formalisms.calc_random_split(
        labeled=np.ones(n, dtype=bool), fractions=constants.split_fractions[:2], rng=rng)
    return Graph(adjacency=adjacency, features=np.eye(n), labels=labels,
                 train_mask=masks[0], val_mask=masks[1], test_mask=masks[2],
                 provenance={'source': 'sbm', 'n': n, 'num_blocks': num_blocks, 'p_in': p_in, 'p_out': p_out,
                             'seed': seed})


def karate(split_seed: int = 0) -> Graph:
    """Returns Zachary's Karate Club graph (34 nodes, 78 edges) labeled by faction (0: instructor, 1: president)."""
    club = nx.karate_club_graph()
    nodes = sorted(club.nodes)
    adjacency = nx.to_numpy_array(club, nodelist=nodes, weight=None, dtype=np.int8)
    labels = np.array([0 if club.nodes[v]['club'] == 'Mr. Hi' else 1 for v in nodes])
    masks = adjacency_formalisms.calc_random_split(
        labeled=np.ones(len(nodes), dtype=bool), fractions=constants.split_fractions[:2],
        rng=np.random.default_rng(split_seed))
    return Graph(adjacency=adjacency, features=np.eye(len(nodes)), labels=labels,
                 train_mask=masks[0], val_mask=masks[1], test_mask=masks[2],
                 node_ids=[str(v) for v in nodes], provenance={'source': 'karate'})


def format_edge_list(adjacency: np.ndarray,
                     node_ids: Sequence[str]) -> str:
    """Formats an adjacency matrix as a canonical edge list (i < j, row-major order)."""
    rows, cols = np.nonzero(np.triu(adjacency, k=1))
    return ''.join(f'{node_ids[i]} {node_ids[j]}\n' for i, j in zip(rows, cols))


def write_edge_list(adjacency: np.ndarray,
                    node_ids: Sequence[str],
                    path: Path) -> Path:
    return atomic_write_text(path, format_edge_list(adjacency, node_ids))
