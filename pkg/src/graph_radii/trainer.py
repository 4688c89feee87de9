import json
import logging
import time
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from graph_radii.errors import ParameterError, PreconditionError
from graph_radii.formalisms import spectral
from graph_radii.formalisms.losses import calc_cross_entropy
from graph_radii.formalisms.optimizer import AdamState, adam_step
from graph_radii.gcn import GCNParams, backward, gcn_forward, init_gcn, predict
from graph_radii.graph import Graph, NormalizedAdjacency, normalize_adjacency, symmetric_normalize
from graph_radii.params import TrainConfig
from graph_radii.radii import RadiusVector
from graph_radii.utils import derive_seed
from graph_radii.views import ViewSequence

logger = logging.getLogger(__name__)


@dataclass
class StageRecord:
    components: int
    """number of spectral components of the stage's graph (n for the original graph)"""

    losses: List[float]
    """training loss of each epoch"""

    val_accuracy: float
    """validation accuracy on the original graph after the stage"""


@dataclass
class TrainReport:
    method: str
    config: TrainConfig
    history: List[StageRecord] = field(default_factory=list)
    best_stage: int = -1
    """index in `history` of the stage whose parameters were returned (the last one among equal accuracies)"""

    best_val_accuracy: float = float('nan')
    train_accuracy: float = float('nan')
    test_accuracy: Optional[float] = None
    """None when the graph has no test node"""

    stopped_early: bool = False
    wall_clock: float = 0.
    """[s] duration of the run, logged but never serialized"""

    @property
    def epochs(self) -> int:
        return sum(len(stage.losses) for stage in self.history)

    def to_dict(self) -> dict:
        return {'method': self.method,
                'config': asdict(self.config),
                'config_digest': self.config.digest(),
                'history': [asdict(stage) for stage in self.history],
                'best_stage': self.best_stage,
                'best_val_accuracy': self.best_val_accuracy,
                'train_accuracy': self.train_accuracy,
                'test_accuracy': self.test_accuracy,
                'stopped_early': self.stopped_early}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + '\n'


def evaluate(params: GCNParams,
             graph: Graph,
             mask: np.ndarray,
             a_hat: NormalizedAdjacency = None) -> float:
    """Calculates the classification accuracy of the masked nodes, in eval mode.

    Args:
        params: network weights
        graph: labeled graph
        mask: boolean vector of the evaluated nodes
        a_hat: propagation operator of `graph` when already available

    Raises:
        ParameterError: if the mask selects no node
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ParameterError('Evaluation needs at least one masked node.')
    if graph.labels is None:
        raise PreconditionError('Evaluation needs node labels.')
    logits, _ = predict(params, symmetric_normalize(graph) if a_hat is None else a_hat, graph.features)
    return float(np.mean(np.argmax(logits[mask], axis=1) == graph.labels[mask]))


def _fit(graph: Graph,
         stages: Sequence[tuple],
         epochs: int,
         radii: Optional[RadiusVector],
         config: TrainConfig,
         method: str) -> tuple:
    """Trains one GCN over a sequence of graphs, warm-starting each stage from the previous one.

    Args:
        graph: labeled graph, whose original adjacency is used for validation
        stages: (component count, propagation operator) pairs, trained in order
        epochs: number of epochs per stage
        radii: noise variances injected during training, or None
        config: training configuration
        method: name recorded in the report

    Returns:
        the parameters with the best validation accuracy, and the training report
    """
    graph.require_labels()
    if radii is not None and len(radii) != graph.n:
        raise PreconditionError(f'{len(radii)} radii for a graph of {graph.n} nodes.')
    start = time.perf_counter()

    original = symmetric_normalize(graph)
    val_mask = graph.val_mask
    if not val_mask.any():
        logger.warning('no validation node; early stopping monitors the training nodes')
        val_mask = graph.train_mask

    params = init_gcn(graph.features.shape[1], graph.num_classes, hidden=config.hidden, seed=config.seed)
    state = AdamState.zeros_like(params.tensors())
    weight_decay = [config.weight_decay, 0.]
    report = TrainReport(method=method, config=config)
    best_params, stale, step = params, 0, 0

    for index, (components, a_hat) in enumerate(stages):
        losses = []
        for _ in range(epochs):
            logits, _, trace = gcn_forward(params, a_hat, graph.features, radii=radii, mode='train',
                                           seed=derive_seed(config.seed, step), dropout=config.dropout)
            loss, loss_grad = calc_cross_entropy(logits, graph.labels, graph.train_mask)
            tensors, state = adam_step(params.tensors(), backward(trace, loss_grad), state, lr=config.lr,
                                       weight_decay=weight_decay)
            params = GCNParams.from_tensors(tensors)
            losses.append(loss)
            step += 1
            logger.debug('%s stage %d epoch %d: loss %.6f', method, index, len(losses), loss)

        val_accuracy = evaluate(params, graph, val_mask, a_hat=original)
        report.history.append(StageRecord(components=int(components), losses=losses, val_accuracy=val_accuracy))
        logger.info('%s stage %d (%d components): loss %.4f, validation accuracy %.4f',
                    method, index, components, losses[-1], val_accuracy)

        # a tie moves the best stage to the later, richer view
        if report.best_stage < 0 or val_accuracy >= report.best_val_accuracy:
            best_params, stale = params, 0
            report.best_stage, report.best_val_accuracy = index, val_accuracy
        else:
            stale += 1
            if stale >= config.patience_views and index < len(stages) - 1:
                report.stopped_early = True
                logger.info('%s: no validation improvement for %d stages, stopping after stage %d',
                            method, stale, index)
                break

    report.train_accuracy = evaluate(best_params, graph, graph.train_mask, a_hat=original)
    if graph.test_mask.any():
        report.test_accuracy = evaluate(best_params, graph, graph.test_mask, a_hat=original)
    report.wall_clock = time.perf_counter() - start
    logger.info('%s: %d epochs in %.2f s, best stage %d, test accuracy %s',
                method, report.epochs, report.wall_clock, report.best_stage, report.test_accuracy)
    return best_params, report


def curriculum_train(graph: Graph,
                     views: ViewSequence,
                     radii: RadiusVector,
                     config: TrainConfig,
                     method: str = 'curriculum') -> tuple:
    """Trains a GCN over views of increasing spectral complexity, with radius noise on every layer.

    Args:
        graph: labeled graph
        views: views of `graph`, simplest first
        radii: per-node noise variances
        config: training configuration (`epochs_per_view` epochs per view, early stopping after
            `patience_views` views without validation improvement)
        method: name recorded in the report

    Returns:
        the best-validation parameters and the training report
    """
    if views.count == 0:
        raise PreconditionError('Curriculum training needs at least one view.')
    counts = list(views.component_counts)
    if any(a >= b for a, b in zip(counts, counts[1:])):
        raise PreconditionError(f'Views must be ordered by increasing component count, got {counts}.')
    stages = [(k, normalize_adjacency(view)) for k, view in views]
    return _fit(graph, stages, config.epochs_per_view, radii, config, method)


def nct_stage_count(graph: Graph,
                    config: TrainConfig) -> int:
    """Returns the number of `epochs_per_view` blocks of training without curriculum."""
    if config.nct_stages:
        return config.nct_stages
    return len(spectral.calc_component_counts(graph.n, config.q_min, config.component_step))


def train_nct(graph: Graph,
              radii: RadiusVector,
              config: TrainConfig,
              method: str = 'nct') -> tuple:
    """Trains a GCN with radius noise on the original graph only.

    The epoch budget is split into `nct_stage_count` blocks of `epochs_per_view` epochs, validated and early-stopped
    like curriculum views.
    """
    original = symmetric_normalize(graph)
    stages = [(graph.n, original)] * nct_stage_count(graph, config)
    return _fit(graph, stages, config.epochs_per_view, radii, config, method)


def train_baseline(graph: Graph,
                   config: TrainConfig,
                   epochs: int = None,
                   method: str = 'baseline') -> tuple:
    """Trains a plain GCN (dropout only, no noise) on the original graph for `baseline_epochs` epochs."""
    epochs = config.baseline_epochs if epochs is None else epochs
    if epochs < 1:
        raise ParameterError(f'`epochs` must be a positive integer, got {epochs}.')
    return _fit(graph, [(graph.n, symmetric_normalize(graph))], epochs, None, config, method)
