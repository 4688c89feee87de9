import numpy as np
import pandas as pd
import pytest

from graph_radii import perturb
from graph_radii.errors import ParameterError, PreconditionError
from graph_radii.graph import Graph, generate_sbm, karate
from graph_radii.methods import train_method
from graph_radii.params import TrainConfig
from graph_radii.trainer import TrainReport
from graph_radii.utils import is_almost_equal


def _hamming_flips(a, b):
    return int(np.sum(a.adjacency != b.adjacency)) // 2


def _check_graph_invariants(g):
    assert np.array_equal(g.adjacency, g.adjacency.T)
    assert not np.diag(g.adjacency).any()
    assert set(np.unique(g.adjacency)) <= {0, 1}


def test_perturbation_budget():
    assert perturb.PerturbationBudget(0.1).flips(78) == 7
    assert perturb.PerturbationBudget(0.).flips(78) == 0
    with pytest.raises(ParameterError):
        perturb.PerturbationBudget(1.5)


def test_random_flip():
    g = karate()
    assert np.array_equal(perturb.random_flip(g, perturb.PerturbationBudget(0.), seed=0).adjacency, g.adjacency)

    balanced = perturb.random_flip(g, perturb.PerturbationBudget(2 / 78), seed=1)
    assert balanced.num_edges == g.num_edges
    assert _hamming_flips(g, balanced) == 2

    perturbed = perturb.random_flip(g, perturb.PerturbationBudget(0.2), seed=2)
    _check_graph_invariants(perturbed)
    assert _hamming_flips(g, perturbed) == 15
    assert perturbed.num_edges == g.num_edges - 7 + 8
    assert perturbed.provenance['flips'] == 15 and not perturbed.provenance['clipped']
    assert np.array_equal(perturbed.adjacency,
                          perturb.random_flip(g, perturb.PerturbationBudget(0.2), seed=2).adjacency)
    assert np.array_equal(perturbed.labels, g.labels)


def test_random_flip_clips_the_budget():
    g = Graph(adjacency=np.ones((3, 3)) - np.eye(3), features=np.eye(3))
    perturbed = perturb.random_flip(g, perturb.PerturbationBudget(1.), seed=0)
    assert perturbed.provenance['clipped']
    assert perturbed.provenance['requested_flips'] == 3
    assert perturbed.num_edges == 2


def test_attacks_leave_the_global_random_state_alone():
    g = generate_sbm(n=40, num_blocks=2, p_in=0.3, p_out=0.05, seed=0)
    np.random.seed(0)
    before = np.random.get_state()[1].copy()
    first = perturb.random_flip(g, perturb.PerturbationBudget(0.1), seed=4)
    perturb.heuristic_attack(g, perturb.PerturbationBudget(0.1), seed=4)
    assert np.array_equal(np.random.get_state()[1], before)

    np.random.seed(1)
    again = perturb.random_flip(g, perturb.PerturbationBudget(0.1), seed=4)
    assert np.array_equal(first.adjacency, again.adjacency)
    assert (again.provenance['removed'], again.provenance['added']) == (first.provenance['removed'],
                                                                        first.provenance['added'])


def test_heuristic_attack():
    g = generate_sbm(n=60, num_blocks=2, p_in=0.3, p_out=0.05, seed=0)
    assert np.array_equal(perturb.heuristic_attack(g, perturb.PerturbationBudget(0.), seed=0).adjacency, g.adjacency)

    perturbed = perturb.heuristic_attack(g, perturb.PerturbationBudget(0.2), seed=3)
    _check_graph_invariants(perturbed)
    requested = perturb.PerturbationBudget(0.2).flips(g.num_edges)
    assert _hamming_flips(g, perturbed) == requested

    added = (perturbed.adjacency == 1) & (g.adjacency == 0)
    removed = (perturbed.adjacency == 0) & (g.adjacency == 1)
    rows, cols = np.nonzero(added)
    assert np.all(g.labels[rows] != g.labels[cols])
    rows, cols = np.nonzero(removed)
    assert np.all(g.labels[rows] == g.labels[cols])
    assert perturbed.provenance['removed'] + perturbed.provenance['added'] == requested

    with pytest.raises(PreconditionError):
        perturb.heuristic_attack(Graph(adjacency=g.adjacency, features=g.features), perturb.PerturbationBudget(0.1),
                                 seed=0)


def test_heuristic_attack_leaves_unlabeled_nodes_alone():
    g = generate_sbm(n=60, num_blocks=2, p_in=0.3, p_out=0.05, seed=0)
    labels = np.array(g.labels)
    labels[::4] = -1
    partial = Graph(adjacency=g.adjacency, features=g.features, labels=labels)
    perturbed = perturb.heuristic_attack(partial, perturb.PerturbationBudget(0.2), seed=1)

    assert _hamming_flips(partial, perturbed) == perturb.PerturbationBudget(0.2).flips(g.num_edges)
    changed = perturbed.adjacency != partial.adjacency
    assert not changed[labels < 0].any()


def _fake_train_method(graph, method, config, radii_graph=None, zero_radii=False):
    report = TrainReport(method=method, config=config)
    report.test_accuracy = 0.5 + 0.01 * config.seed + (0.1 if method == 'rege_d' else 0.)
    return None, report, None


def test_run_experiment_single_cell(mocker):
    mocker.patch('graph_radii.perturb.train_method', side_effect=_fake_train_method)
    report = perturb.run_experiment(karate(), ['baseline'], ['random'], [0.1], [0], TrainConfig())
    assert len(report.raw) == 1
    summary = report.summary
    assert len(summary) == 1
    assert summary['mean'][0] == report.raw['accuracy'][0]
    assert summary['std'][0] == 0.
    assert report.to_csv().splitlines()[0] == 'method,attack,budget,seed,accuracy'


def test_run_experiment_grid_aggregates_raw_rows(mocker):
    mocker.patch('graph_radii.perturb.train_method', side_effect=_fake_train_method)
    report = perturb.run_experiment(karate(), ['baseline', 'rege-d'], ['random', 'heuristic'], [0.01, 0.1],
                                    [0, 1, 2], TrainConfig())
    assert len(report.raw) == 2 * 2 * 2 * 3
    assert list(report.raw['method'].unique()) == ['baseline', 'rege_d']

    summary = report.summary
    assert len(summary) == 8
    for _, row in summary.iterrows():
        cell = report.raw[(report.raw['method'] == row['method']) & (report.raw['attack'] == row['attack'])
                          & (report.raw['budget'] == row['budget'])]['accuracy']
        assert is_almost_equal(row['mean'], cell.mean(), decimal=12)
        assert is_almost_equal(row['std'], np.std(cell.to_numpy()), decimal=12)
        assert row['runs'] == 3

    table = report.to_table()
    assert 'rege_d' in table and 'random 10%' in table


def test_run_experiment_records_failures(mocker):
    mocker.patch('graph_radii.perturb.train_method', side_effect=_fake_train_method)
    report = perturb.run_experiment(karate(), ['baseline'], ['external', 'random'], [0.1], [0], TrainConfig())
    assert len(report.failures) == 1
    assert report.failures['attack'].iloc[0] == 'external'
    assert pd.isna(report.failures['accuracy'].iloc[0])
    assert 'failed' in report.to_table()


def test_run_experiment_external_attack_and_clean_radii(mocker):
    spy = mocker.patch('graph_radii.perturb.train_method', side_effect=_fake_train_method)
    g = karate()
    external = perturb.random_flip(g, perturb.PerturbationBudget(0.1), seed=9)
    report = perturb.run_experiment(g, ['nct_d'], ['external'], [0.5, 0.9], [0, 1], TrainConfig(),
                                    radii_source='clean', external=external)
    assert len(report.raw) == 2
    assert np.allclose(report.raw['budget'], 7 / 78)
    trained_graph = spy.call_args.args[0]
    assert np.array_equal(trained_graph.adjacency, external.adjacency)
    assert spy.call_args.kwargs['radii_graph'] is g


def test_run_experiment_rejects_bad_grids():
    with pytest.raises(ParameterError):
        perturb.run_experiment(karate(), [], ['random'], [0.1], [0], TrainConfig())
    with pytest.raises(ParameterError):
        perturb.run_experiment(karate(), ['baseline'], ['meta'], [0.1], [0], TrainConfig())
    with pytest.raises(ParameterError):
        perturb.run_experiment(karate(), ['gat'], ['random'], [0.1], [0], TrainConfig())


def test_component_sweep(tmp_path):
    g = karate()
    config = TrainConfig(epochs_per_view=3, seed=0)
    table = perturb.component_sweep(g, [g.n, 30], config)
    assert list(table.columns) == ['q', 'accuracy']
    assert list(table['q']) == [34, 30]

    _, report, _ = train_method(g, 'rege_d', TrainConfig(epochs_per_view=3, seed=0, q_min=g.n))
    assert table['accuracy'][0] == report.test_accuracy

    lines = perturb.write_sweep_csv(table, tmp_path / 'sweep.csv').read_text().splitlines()
    assert lines[0] == 'q,accuracy' and len(lines) == 3

    with pytest.raises(ParameterError):
        perturb.component_sweep(g, [0], config)


@pytest.mark.slow
def test_radius_noise_withstands_the_heuristic_attack():
    g = generate_sbm(n=200, num_blocks=2, p_in=0.1, p_out=0.02, seed=0)
    report = perturb.run_experiment(g, ['baseline', 'rege_d', 'rege_m', 'nct_d', 'nct_m'], ['heuristic'], [0.1],
                                    list(range(10)), TrainConfig())
    assert report.failures.empty
    means = report.summary.set_index('method')['mean']
    assert means['rege_d'] >= means['baseline'] - 0.02
    assert means['rege_m'] >= means['baseline'] - 0.02
    assert means['rege_d'] >= means['nct_d'] - 0.02
    assert means['rege_m'] >= means['nct_m'] - 0.02


@pytest.mark.slow
def test_heuristic_attack_hurts_the_baseline():
    g = generate_sbm(n=200, num_blocks=2, p_in=0.1, p_out=0.02, seed=0)
    clean = perturb.run_experiment(g, ['baseline'], ['random'], [0.], list(range(10)), TrainConfig())
    attacked = perturb.run_experiment(g, ['baseline'], ['heuristic'], [0.2], list(range(10)), TrainConfig())
    assert attacked.summary['mean'][0] < clean.summary['mean'][0]
