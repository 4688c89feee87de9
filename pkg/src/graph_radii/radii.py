import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from graph_radii.errors import ParameterError
from graph_radii.formalisms import radii as radii_formalisms
from graph_radii.graph import Graph
from graph_radii.params import RADII_KINDS
from graph_radii.utils import atomic_write_text, format_float
from graph_radii.views import ViewSequence, generate_views

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ConsensusMatrix:
    w: np.ndarray
    """[-] symmetric frequency of each edge across views, zero diagonal"""


@dataclass(frozen=True, eq=False)
class RadiusVector:
    values: np.ndarray
    """[-] uncertainty of each node, in [0, 1]"""

    kind: str
    """One of 'ddr', 'mdr', 'stddev', 'entropy'"""

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if self.kind not in RADII_KINDS:
            raise ParameterError(f'Unknown radius kind: {self.kind}.')
        if values.ndim != 1 or np.any(values < 0) or np.any(values > 1):
            raise ParameterError('Radii must be a vector of values in [0, 1].')
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    def __len__(self):
        return len(self.values)

    @classmethod
    def zeros(cls, n: int, kind: str = 'ddr') -> 'RadiusVector':
        return cls(values=np.zeros(n), kind=kind)


def consensus(views: ViewSequence) -> ConsensusMatrix:
    """Averages the views of a sequence into edge frequencies.

    Args:
        views: sequence of binary views over the same nodes

    Returns:
        consensus matrix W, W[i, j] being the fraction of views holding edge (i, j)

    Raises:
        ParameterError: if the sequence holds no view
    """
    if views.count == 0:
        raise ParameterError('Consensus needs at least one view.')
    return ConsensusMatrix(w=radii_formalisms.calc_consensus(views.views))


def binary_deviation_radii(w: ConsensusMatrix,
                           incident_only: bool = False) -> RadiusVector:
    """Calculates data-dependent radii from the disagreement of the views on each node's edges.

    Args:
        w: consensus matrix of the views
        incident_only: average over each node's observed entries (W > 0) instead of the full row

    Returns:
        'ddr' radii, min-max normalized to [0, 1] (all zeros when the raw radii are constant)
    """
    raw = radii_formalisms.calc_binary_deviation(w.w, incident_only=incident_only)
    return RadiusVector(values=radii_formalisms.minmax_normalize(raw), kind='ddr')


def stddev_radii(w: ConsensusMatrix) -> RadiusVector:
    return RadiusVector(values=radii_formalisms.minmax_normalize(radii_formalisms.calc_row_stddev(w.w)),
                        kind='stddev')


def entropy_radii(w: ConsensusMatrix) -> RadiusVector:
    return RadiusVector(values=radii_formalisms.minmax_normalize(radii_formalisms.calc_row_entropy(w.w)),
                        kind='entropy')


def minmax_normalize(raw: np.ndarray) -> np.ndarray:
    return radii_formalisms.minmax_normalize(raw)


def compute_ddr(graph: Graph,
                q_min: int = 5,
                step: int = 5,
                kind: str = 'ddr',
                incident_only: bool = False,
                views: ViewSequence = None) -> RadiusVector:
    """Computes data-dependent radii from the consensus of spectral views.

    Args:
        graph: input graph
        q_min: [-] number of components of the first view
        step: [-] increment of components between views
        kind: row function, one of 'ddr' (binary deviation), 'stddev', 'entropy'
        incident_only: restricts the binary deviation to observed entries
        views: precomputed views of `graph`
    """
    views = generate_views(graph, q_min, step) if views is None else views
    w = consensus(views)
    if kind == 'ddr':
        radii = binary_deviation_radii(w, incident_only=incident_only)
    elif kind == 'stddev':
        radii = stddev_radii(w)
    elif kind == 'entropy':
        radii = entropy_radii(w)
    else:
        raise ParameterError(f'Unknown data radius kind: {kind}.')
    logger.info('%s radii over %d views: median %.3f', kind, views.count, float(np.median(radii.values)))
    return radii


def format_radii_csv(radii: RadiusVector,
                     node_ids: Sequence[str]) -> str:
    lines = ['node_id,radius,kind'] + [f'{node_id},{format_float(r)},{radii.kind}'
                                       for node_id, r in zip(node_ids, radii.values)]
    return '\n'.join(lines) + '\n'


def write_radii_csv(radii: RadiusVector,
                    node_ids: Sequence[str],
                    path: Path) -> Path:
    """Writes the CSV 'node_id,radius,kind'."""
    if len(node_ids) != len(radii):
        raise ParameterError(f'{len(node_ids)} node identifiers for {len(radii)} radii.')
    return atomic_write_text(path, format_radii_csv(radii, node_ids))


def write_consensus_csv(w: ConsensusMatrix,
                        node_ids: Sequence[str],
                        path: Path) -> Path:
    """Writes the dense consensus matrix, with node identifiers as header and first column."""
    lines = ['node_id,' + ','.join(node_ids)] + [
        node_id + ',' + ','.join(format_float(v) for v in row) for node_id, row in zip(node_ids, w.w)]
    return atomic_write_text(path, '\n'.join(lines) + '\n')


def summarize(radii: RadiusVector) -> dict:
    return {'min': float(radii.values.min()), 'median': float(np.median(radii.values)),
            'max': float(radii.values.max())}
