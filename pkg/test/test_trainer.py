import json

import numpy as np
import pytest

from graph_radii import trainer
from graph_radii.errors import ParameterError, PreconditionError
from graph_radii.gcn import GCNParams
from graph_radii.graph import Graph, generate_sbm, karate
from graph_radii.methods import train_method
from graph_radii.params import TrainConfig
from graph_radii.radii import RadiusVector
from graph_radii.utils import assert_trend
from graph_radii.views import ViewSequence, generate_views


def _same_params(first, second):
    return all(np.array_equal(a, b) for a, b in zip(first.tensors(), second.tensors()))


def test_single_full_view_with_zero_radii_is_the_baseline():
    g = karate()
    config = TrainConfig(epochs_per_view=60, baseline_epochs=60, seed=3)
    baseline, baseline_report = trainer.train_baseline(g, config)

    views = ViewSequence(views=[g.adjacency], component_counts=[g.n])
    curriculum, report = trainer.curriculum_train(g, views, RadiusVector.zeros(g.n), config)
    assert _same_params(baseline, curriculum)
    assert report.history[0].losses == baseline_report.history[0].losses

    reconstructed = generate_views(g, q_min=g.n, step=5)
    curriculum, _ = trainer.curriculum_train(g, reconstructed, RadiusVector.zeros(g.n), config)
    assert _same_params(baseline, curriculum)

    nct, _ = trainer.train_nct(g, RadiusVector.zeros(g.n), TrainConfig(epochs_per_view=60, nct_stages=1, seed=3))
    assert _same_params(baseline, nct)


def test_training_is_deterministic():
    g = karate()
    config = TrainConfig(epochs_per_view=5, seed=7)
    radii = RadiusVector(values=np.linspace(0, 1, g.n), kind='ddr')
    views = generate_views(g, q_min=5, step=10)
    first, first_report = trainer.curriculum_train(g, views, radii, config)
    second, second_report = trainer.curriculum_train(g, views, radii, config)
    assert _same_params(first, second)
    assert first_report.to_json() == second_report.to_json()

    other, _ = trainer.curriculum_train(g, views, radii, config.with_seed(8))
    assert not _same_params(first, other)


def test_early_stopping_counts_views(mocker):
    g = karate()
    views = generate_views(g, q_min=5, step=10)
    mocker.patch('graph_radii.trainer.evaluate', side_effect=[0.8, 0.5, 1., 1.])
    _, report = trainer.curriculum_train(g, views, RadiusVector.zeros(g.n),
                                         TrainConfig(epochs_per_view=2, patience_views=1))
    assert views.count == 4
    assert len(report.history) == 2
    assert report.stopped_early
    assert report.best_stage == 0
    assert report.best_val_accuracy == 0.8
    assert report.epochs == 4


def test_best_stage_has_the_highest_validation_accuracy():
    g = generate_sbm(n=60, num_blocks=2, p_in=0.5, p_out=0.1, seed=2)
    views = generate_views(g, q_min=5, step=10)
    radii = RadiusVector(values=np.full(g.n, 0.5), kind='ddr')
    _, report = trainer.curriculum_train(g, views, radii, TrainConfig(epochs_per_view=20, patience_views=3))
    accuracies = [stage.val_accuracy for stage in report.history]
    assert report.best_val_accuracy == max(accuracies)
    assert len(accuracies) - 1 - accuracies[::-1].index(max(accuracies)) == report.best_stage


def test_tied_validation_accuracy_keeps_the_latest_view(mocker):
    g = karate()
    views = generate_views(g, q_min=5, step=10)
    mocker.patch('graph_radii.trainer.evaluate', side_effect=[0.9, 1., 1., 1., 1., 1.])
    _, report = trainer.curriculum_train(g, views, RadiusVector.zeros(g.n),
                                         TrainConfig(epochs_per_view=2, patience_views=1))
    assert len(report.history) == views.count == 4
    assert not report.stopped_early
    assert report.best_stage == 3
    assert report.history[report.best_stage].components == g.n


def test_preconditions():
    g = karate()
    views = generate_views(g, q_min=30, step=2)
    with pytest.raises(PreconditionError):
        trainer.curriculum_train(g, views, RadiusVector.zeros(5), TrainConfig(epochs_per_view=1))
    with pytest.raises(PreconditionError):
        trainer.curriculum_train(g, ViewSequence(views=list(reversed(views.views)),
                                                 component_counts=list(reversed(views.component_counts))),
                                 RadiusVector.zeros(g.n), TrainConfig(epochs_per_view=1))
    with pytest.raises(PreconditionError):
        trainer.train_baseline(Graph(adjacency=g.adjacency, features=g.features), TrainConfig())


def test_baseline_fits_karate():
    g = karate()
    params, report = trainer.train_baseline(g, TrainConfig(seed=0))
    assert report.train_accuracy == 1.
    assert report.epochs == 200
    losses = report.history[0].losses
    assert_trend(values=[np.mean(losses[i:i + 10]) for i in (0, 20, 40)], expected_trend='-')
    assert 'wall_clock' not in json.loads(report.to_json())


def test_evaluate():
    g = karate()
    params, _ = trainer.train_baseline(g, TrainConfig(seed=0))
    accuracy = trainer.evaluate(params, g, g.test_mask)
    assert 0. <= accuracy <= 1.

    w1, w2 = params.layer_weights
    rescaled = GCNParams(layer_weights=[w1, 3. * w2])
    assert trainer.evaluate(rescaled, g, g.test_mask) == accuracy

    constant = GCNParams(layer_weights=[w1, np.zeros_like(w2)])
    balanced = np.zeros(g.n, dtype=bool)
    balanced[[0, 1, 32, 33]] = True
    assert trainer.evaluate(constant, g, balanced) == 0.5

    with pytest.raises(ParameterError):
        trainer.evaluate(params, g, np.zeros(g.n, dtype=bool))


def test_nct_stage_count():
    g = karate()
    assert trainer.nct_stage_count(g, TrainConfig()) == 7
    assert trainer.nct_stage_count(g, TrainConfig(nct_stages=3)) == 3


@pytest.mark.slow
def test_methods_separate_a_separable_sbm():
    g = generate_sbm(n=60, num_blocks=2, p_in=0.9, p_out=0.05, seed=0)
    config = TrainConfig(seed=0)
    for method in ('rege_d', 'nct_d'):
        _, report, radii = train_method(g, method, config)
        assert report.test_accuracy >= 0.9
        assert len(radii) == g.n
