import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from graph_radii.errors import DimensionError, ParameterError
from graph_radii.formalisms import conformal
from graph_radii.formalisms.losses import calc_student_loss
from graph_radii.formalisms.optimizer import AdamState, adam_step
from graph_radii.formalisms.radii import minmax_normalize
from graph_radii.gcn import GCNParams, predict
from graph_radii.graph import Graph, symmetric_normalize
from graph_radii.mlp import MLPParams, init_mlp, mlp_forward, mlp_backward
from graph_radii.params import TrainConfig
from graph_radii.radii import RadiusVector
from graph_radii.trainer import train_baseline
from graph_radii.utils import atomic_write_text, derive_seed, format_float

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TeacherArtifacts:
    params: GCNParams
    embeddings: np.ndarray
    """[-] n x d eval-mode outputs of the teacher distilled by the student"""

    target: str = 'hidden'
    """'hidden' (first-layer representation) or 'logits'"""


@dataclass(frozen=True, eq=False)
class StudentModel:
    """Feature-only MLP predicting the teacher outputs and their alpha/2 and 1 - alpha/2 quantiles."""

    params: MLPParams
    alpha: float

    @property
    def output_dim(self) -> int:
        return self.params.output_dim

    def predict(self, features: np.ndarray) -> dict:
        """Returns the 'mean', 'lower' and 'upper' head outputs in eval mode."""
        outputs, _ = mlp_forward(self.params, features, mode='eval')
        return outputs


@dataclass(frozen=True, eq=False)
class ConformalCalibration:
    alpha: float
    scores: np.ndarray
    """[-] m x d conformal scores of the calibration nodes"""

    q_hat: np.ndarray
    """[-] offset of each dimension"""


@dataclass(frozen=True, eq=False)
class ConformalIntervals:
    lower: np.ndarray
    upper: np.ndarray

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower


def train_teacher(graph: Graph,
                  config: TrainConfig) -> TeacherArtifacts:
    """Trains a plain GCN on the original graph and records its eval-mode outputs.

    Raises:
        PreconditionError: if the graph has no labels or no training node
    """
    graph.require_labels()
    params, report = train_baseline(graph, config, method='teacher')
    logits, hidden = predict(params, symmetric_normalize(graph), graph.features)
    embeddings = hidden if config.distill_target == 'hidden' else logits
    logger.info('teacher trained: train accuracy %.4f, %d-dimensional %s outputs',
                report.train_accuracy, embeddings.shape[1], config.distill_target)
    return TeacherArtifacts(params=params, embeddings=embeddings, target=config.distill_target)


def train_student(features: np.ndarray,
                  z: np.ndarray,
                  config: TrainConfig,
                  mask: np.ndarray = None) -> StudentModel:
    """Distills teacher outputs into an MLP that sees node features only.

    Args:
        features: [-] n x f node features
        z: [-] n x d teacher outputs
        config: training configuration (student_* fields, alpha, seed)
        mask: boolean vector of the training rows (all rows if None)

    Returns:
        the trained student; its mean head fits `z` in squared error, its lower and upper heads fit the alpha/2 and
        1 - alpha/2 quantiles in pinball loss
    """
    features = np.asarray(features, dtype=float)
    z = np.asarray(z, dtype=float)
    if features.shape[0] != z.shape[0]:
        raise DimensionError(f'{features.shape[0]} feature rows for {z.shape[0]} target rows.')
    rows = np.ones(len(z), dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if not rows.any():
        raise ParameterError('Student training needs at least one row.')
    x, target = features[rows], z[rows]

    params = init_mlp(x.shape[1], target.shape[1], hidden=config.student_hidden, num_layers=config.student_layers,
                      seed=config.seed)
    state = AdamState.zeros_like(params.tensors())
    for epoch in range(config.student_epochs):
        outputs, trace = mlp_forward(params, x, mode='train', seed=derive_seed(config.seed, epoch, 1),
                                     dropout=config.student_dropout)
        loss, head_grads = calc_student_loss(outputs, target, config.alpha)
        tensors, state = adam_step(params.tensors(), mlp_backward(trace, head_grads), state, lr=config.student_lr)
        params = params.with_tensors(tensors)
        logger.debug('student epoch %d: loss %.6f', epoch + 1, loss)
    logger.info('student trained on %d rows for %d epochs', len(x), config.student_epochs)
    return StudentModel(params=params, alpha=config.alpha)


def calibrate(student: StudentModel,
              features: np.ndarray,
              z: np.ndarray,
              mask: np.ndarray = None,
              pooled: bool = False) -> ConformalCalibration:
    """Computes the conformal offsets of the student's quantile heads on calibration rows.

    Args:
        student: trained student
        features: [-] n x f node features
        z: [-] n x d teacher outputs
        mask: boolean vector of the calibration rows (all rows if None)
        pooled: if True, one offset is computed over the scores of all dimensions
    """
    rows = np.ones(len(z), dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    z = np.asarray(z, dtype=float)[rows]
    outputs = student.predict(np.asarray(features, dtype=float)[rows])
    scores = conformal.calc_conformal_scores(outputs['lower'], outputs['upper'], z)
    if pooled:
        q_hat = np.full(scores.shape[1], conformal.compute_qhat(scores, student.alpha))
    else:
        q_hat = np.array([conformal.compute_qhat(column, student.alpha) for column in scores.T])
    return ConformalCalibration(alpha=student.alpha, scores=scores, q_hat=q_hat)


def conformal_intervals(student: StudentModel,
                        calib: ConformalCalibration,
                        features: np.ndarray) -> ConformalIntervals:
    """Widens the student's quantile heads by the calibrated offsets.

    Args:
        student: trained student model
        calib: conformal offsets of each output dimension
        features: [-] n x f node features

    Returns:
        n x d lower and upper interval bounds (the offsets may be negative, so bounds can cross)

    Raises:
        DimensionError: if the offsets and the student outputs differ in dimension
    """
    outputs = student.predict(features)
    if calib.q_hat.shape != (student.output_dim,):
        raise DimensionError(f'{calib.q_hat.shape[0]} offsets for a {student.output_dim}-dimensional student.')
    lower, upper = conformal.calc_intervals(outputs['lower'], outputs['upper'], calib.q_hat)
    return ConformalIntervals(lower=lower, upper=upper)


def mdr_radii(intervals: ConformalIntervals) -> RadiusVector:
    """Normalizes the mean (clamped) interval width of each node into a model-dependent radius."""
    raw = conformal.calc_mean_width(intervals.lower, intervals.upper)
    return RadiusVector(values=minmax_normalize(raw), kind='mdr')


def compute_mdr(graph: Graph,
                config: TrainConfig,
                teacher: TeacherArtifacts = None) -> RadiusVector:
    """Runs teacher training, distillation, calibration on the training nodes and interval averaging."""
    teacher = train_teacher(graph, config) if teacher is None else teacher
    student = train_student(graph.features, teacher.embeddings, config, mask=graph.train_mask)
    calib = calibrate(student, graph.features, teacher.embeddings, mask=graph.train_mask, pooled=config.pooled_qhat)
    radii = mdr_radii(conformal_intervals(student, calib, graph.features))
    logger.info('mdr radii: mean offset %.4f, median radius %.3f',
                float(np.mean(calib.q_hat)), float(np.median(radii.values)))
    return radii


def write_calibration_csv(calib: ConformalCalibration,
                          path: Path) -> Path:
    """Writes the CSV 'dimension,q_hat'."""
    lines = ['dimension,q_hat'] + [f'{j},{format_float(q)}' for j, q in enumerate(calib.q_hat)]
    return atomic_write_text(path, '\n'.join(lines) + '\n')
