import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from math import floor
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from graph_radii.errors import ParameterError, PreconditionError
from graph_radii.graph import Graph
from graph_radii.methods import train_method
from graph_radii.params import ATTACKS, TrainConfig, normalize_method
from graph_radii.utils import atomic_write_text

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ['method', 'attack', 'budget', 'seed', 'accuracy']


@dataclass(frozen=True)
class PerturbationBudget:
    rate: float
    """[-] fraction of the existing edges to modify"""

    def __post_init__(self):
        if not 0 <= self.rate <= 1:
            raise ParameterError(f'Perturbation rate must lie in [0, 1], got {self.rate}.')

    def flips(self, num_edges: int) -> int:
        return int(floor(round(self.rate * num_edges, 9)))


def _upper_pairs(n: int) -> tuple:
    return np.triu_indices(n, k=1)


def _flip_pairs(graph: Graph,
                pairs: np.ndarray) -> np.ndarray:
    """Returns the adjacency of `graph` with the upper-triangle pairs indexed by `pairs` toggled."""
    rows, cols = _upper_pairs(graph.n)
    adjacency = np.array(graph.adjacency, dtype=np.int8)
    adjacency[rows[pairs], cols[pairs]] ^= 1
    adjacency[cols[pairs], rows[pairs]] ^= 1
    return adjacency


def random_flip(graph: Graph,
                budget: PerturbationBudget,
                seed: int) -> Graph:
    """Flips floor(rate * |E|) node pairs: half of them (rounded down) edges removed, the rest non-edges added.

    Args:
        graph: graph to perturb
        budget: perturbation budget
        seed: seed of the pair draws

    Returns:
        the perturbed graph; its provenance records the requested and applied flips and whether the budget was
        clipped for lack of candidate pairs
    """
    rng = np.random.default_rng([seed, 2])
    rows, cols = _upper_pairs(graph.n)
    upper = graph.adjacency[rows, cols]
    edges, non_edges = np.flatnonzero(upper == 1), np.flatnonzero(upper == 0)

    requested = budget.flips(graph.num_edges)
    num_removed = requested // 2
    num_added = requested - num_removed
    clipped = num_removed > len(edges) or num_added > len(non_edges)
    if clipped:
        logger.warning('random flip budget of %d exceeds the candidate pairs; clipping', requested)
        num_removed, num_added = min(num_removed, len(edges)), min(num_added, len(non_edges))

    pairs = np.concatenate([rng.choice(edges, size=num_removed, replace=False),
                            rng.choice(non_edges, size=num_added, replace=False)]).astype(int)
    return graph.with_adjacency(_flip_pairs(graph, pairs), provenance={
        'attack': 'random', 'rate': budget.rate, 'seed': seed, 'requested_flips': requested,
        'flips': len(pairs), 'removed': num_removed, 'added': num_added, 'clipped': clipped})


def heuristic_attack(graph: Graph,
                     budget: PerturbationBudget,
                     seed: int) -> Graph:
    """Removes within-class edges and inserts between-class edges, choosing each of floor(rate * |E|) modifications
    by a fair coin.

    Raises:
        PreconditionError: if the graph has no labels

    Notes:
        When the pool drawn by the coin is exhausted the other pool is used; when both are, the budget is clipped
        and the provenance says so.
    """
    if graph.labels is None:
        raise PreconditionError('The heuristic attack needs node labels.')
    rng = np.random.default_rng([seed, 3])
    rows, cols = _upper_pairs(graph.n)
    upper = graph.adjacency[rows, cols]
    # pairs touching an unlabeled node are never modified
    both_labeled = (graph.labels[rows] >= 0) & (graph.labels[cols] >= 0)
    same_class = graph.labels[rows] == graph.labels[cols]
    removable = rng.permutation(np.flatnonzero((upper == 1) & same_class & both_labeled))
    addable = rng.permutation(np.flatnonzero((upper == 0) & ~same_class & both_labeled))

    requested = budget.flips(graph.num_edges)
    coins = rng.random(requested) < 0.5
    num_removed = num_added = 0
    for remove in coins:
        can_remove, can_add = num_removed < len(removable), num_added < len(addable)
        if not (can_remove or can_add):
            break
        if (remove and can_remove) or not can_add:
            num_removed += 1
        else:
            num_added += 1
    clipped = num_removed + num_added < requested
    if clipped:
        logger.warning('heuristic attack budget of %d exceeds the candidate pairs; clipping', requested)

    pairs = np.concatenate([removable[:num_removed], addable[:num_added]]).astype(int)
    return graph.with_adjacency(_flip_pairs(graph, pairs), provenance={
        'attack': 'heuristic', 'rate': budget.rate, 'seed': seed, 'requested_flips': requested,
        'flips': len(pairs), 'removed': num_removed, 'added': num_added, 'clipped': clipped})


def attacked_fraction(clean: Graph,
                      perturbed: Graph) -> float:
    """Returns the number of flipped node pairs as a fraction of the clean edge count."""
    flips = int(np.sum(clean.adjacency != perturbed.adjacency)) // 2
    return flips / clean.num_edges if clean.num_edges else 0.


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    raw: pd.DataFrame
    """one row per (method, attack, budget, seed) cell; failed cells hold NaN accuracy and an error message"""

    @property
    def failures(self) -> pd.DataFrame:
        return self.raw[self.raw['error'] != '']

    @property
    def summary(self) -> pd.DataFrame:
        """Mean and (population) standard deviation of the accuracy over seeds, per method, attack and budget."""
        grouped = self.raw.groupby(['method', 'attack', 'budget'], sort=False)['accuracy']
        return grouped.agg(mean='mean', std=lambda s: s.std(ddof=0), runs='count').reset_index()

    def to_csv(self) -> str:
        return self.raw[REPORT_COLUMNS].to_csv(index=False, float_format='%.10g')

    def to_table(self) -> str:
        """Formats the summary as a method x (attack, budget) table of 'mean ± std' percentages."""
        summary = self.summary
        summary['cell'] = [f'{100 * m:.2f} ± {100 * s:.2f}' if r else 'failed'
                           for m, s, r in zip(summary['mean'], summary['std'], summary['runs'])]
        summary['column'] = [f'{a} {100 * b:g}%' for a, b in zip(summary['attack'], summary['budget'])]
        table = summary.pivot(index='method', columns='column', values='cell')
        table = table.reindex(index=list(dict.fromkeys(summary['method'])),
                              columns=list(dict.fromkeys(summary['column'])))
        return table.to_string() + '\n'

    def write(self, directory: Path) -> tuple:
        """Writes report.csv and summary.txt into `directory`."""
        directory = Path(directory)
        return (atomic_write_text(directory / 'report.csv', self.to_csv()),
                atomic_write_text(directory / 'summary.txt', self.to_table()))


def _perturb(graph: Graph,
             attack: str,
             budget: float,
             seed: int,
             external: Graph = None) -> Graph:
    if attack == 'random':
        return random_flip(graph, PerturbationBudget(budget), seed)
    if attack == 'heuristic':
        return heuristic_attack(graph, PerturbationBudget(budget), seed)
    if attack == 'external':
        if external is None:
            raise ParameterError('The external attack needs a perturbed edge list.')
        return external
    raise ParameterError(f'Unknown attack: {attack}.')


def _run_cell(cell: tuple) -> dict:
    graph, method, attack, budget, seed, config, radii_source, external = cell
    row = {'method': method, 'attack': attack, 'budget': budget, 'seed': seed, 'accuracy': np.nan, 'error': ''}
    try:
        perturbed = _perturb(graph, attack, budget, seed, external)
        _, report, _ = train_method(perturbed, method, config.with_seed(seed),
                                    radii_graph=graph if radii_source == 'clean' else perturbed)
        row['accuracy'] = np.nan if report.test_accuracy is None else report.test_accuracy
    except Exception as e:
        row['error'] = f'{type(e).__name__}: {e}'
    return row


def run_experiment(graph: Graph,
                   methods: Sequence[str],
                   attacks: Sequence[str],
                   budgets: Sequence[float],
                   seeds: Sequence[int],
                   config: TrainConfig,
                   radii_source: str = 'perturbed',
                   external: Graph = None,
                   jobs: int = 1,
                   progress: bool = False) -> ExperimentReport:
    """Trains every method on every perturbed version of a graph and collects test accuracies.

    Args:
        graph: clean labeled graph
        methods: training methods
        attacks: perturbations among 'random', 'heuristic' and 'external'
        budgets: [-] perturbation rates (the external attack runs once per seed, at its measured rate)
        seeds: seeds of both the perturbation and the training of a cell
        config: training configuration (its seed is replaced by each cell's seed)
        radii_source: 'perturbed' (radii computed on the attacked graph) or 'clean'
        external: pre-attacked version of `graph` used by the external attack
        jobs: number of worker processes
        progress: shows a progress bar

    Returns:
        the report, rows ordered as the grid regardless of completion order
    """
    if not (methods and attacks and seeds) or (not budgets and set(attacks) != {'external'}):
        raise ParameterError('Experiments need at least one method, attack, budget and seed.')
    if radii_source not in ('perturbed', 'clean'):
        raise ParameterError(f'Unknown radii source: {radii_source}.')
    for attack in attacks:
        if attack not in ATTACKS:
            raise ParameterError(f'Unknown attack: {attack}.')
    methods = [normalize_method(m) for m in methods]

    cells = []
    for method in methods:
        for attack in attacks:
            cell_budgets = [attacked_fraction(graph, external) if external is not None else 0.] \
                if attack == 'external' else budgets
            for budget in cell_budgets:
                for seed in seeds:
                    cells.append((graph, method, attack, float(budget), int(seed), config, radii_source, external))

    logger.info('running %d experiment cells with %d job(s)', len(cells), jobs)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            rows = list(tqdm(executor.map(_run_cell, cells), total=len(cells), disable=not progress))
    else:
        rows = [_run_cell(cell) for cell in tqdm(cells, disable=not progress)]

    for row in rows:
        if row['error']:
            logger.error('cell %s/%s/%g/seed %d failed: %s',
                         row['method'], row['attack'], row['budget'], row['seed'], row['error'])
        else:
            logger.info('cell %s/%s/%g/seed %d: accuracy %.4f',
                        row['method'], row['attack'], row['budget'], row['seed'], row['accuracy'])
    return ExperimentReport(raw=pd.DataFrame(rows, columns=REPORT_COLUMNS + ['error']))


def component_sweep(graph: Graph,
                    q_values: Sequence[int],
                    config: TrainConfig) -> pd.DataFrame:
    """Trains the data-dependent curriculum starting from each initial component count.

    Returns:
        a frame with columns 'q' and 'accuracy' (test accuracy), one row per q value
    """
    rows = []
    for q in q_values:
        if not 1 <= q <= graph.n:
            raise ParameterError(f'Component counts must lie in [1, {graph.n}], got {q}.')
        _, report, _ = train_method(graph, 'rege_d', replace(config, q_min=int(q)))
        rows.append({'q': int(q), 'accuracy': report.test_accuracy})
        logger.info('component sweep q=%d: accuracy %s', q, report.test_accuracy)
    return pd.DataFrame(rows, columns=['q', 'accuracy'])


def write_sweep_csv(table: pd.DataFrame,
                    path: Path) -> Path:
    return atomic_write_text(path, table.to_csv(index=False, float_format='%.10g'))
