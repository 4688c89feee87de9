import json

import pytest

from graph_radii import params
from graph_radii.errors import ParameterError


def test_train_config_defaults_are_valid():
    config = params.TrainConfig()
    assert config.epochs_per_view == 100
    assert config.patience_views == 25
    assert config.alpha == 0.05
    assert config.with_seed(3).seed == 3
    assert config.with_seed(3).digest() != config.digest()
    assert config.digest() == params.TrainConfig().digest()


@pytest.mark.parametrize('overrides', [
    {'epochs_per_view': 0},
    {'dropout': 1.},
    {'alpha': 0.},
    {'alpha': 1.},
    {'lr': 0.},
    {'nct_stages': -1},
    {'distill_target': 'output'},
    {'data_radii_kind': 'mdr'},
])
def test_train_config_rejects_out_of_range_values(overrides):
    with pytest.raises(ParameterError):
        params.TrainConfig(**overrides)


def test_from_dict_coerces_strings():
    config = params.TrainConfig.from_dict({'epochs_per_view': '7', 'alpha': '0.1', 'pooled_qhat': 'yes',
                                           'distill_target': 'logits'})
    assert config.epochs_per_view == 7
    assert config.alpha == 0.1
    assert config.pooled_qhat is True
    assert config.distill_target == 'logits'

    with pytest.raises(ParameterError, match='epochs_per_view'):
        params.TrainConfig.from_dict({'epochs_per_view': 'many'})
    with pytest.raises(ParameterError, match='pooled_qhat'):
        params.TrainConfig.from_dict({'pooled_qhat': 'maybe'})
    with pytest.raises(ParameterError, match='unknown_key'):
        params.TrainConfig.from_dict({'unknown_key': 1})


def test_run_config_from_dict():
    run = params.RunConfig.from_dict({'dataset': 'karate', 'methods': 'rege-d, NCT_m', 'budgets': '0.05,0.1',
                                      'seeds': [0, 1], 'seed': '4', 'jobs': 2})
    assert run.methods == ('rege_d', 'nct_m')
    assert run.budgets == (0.05, 0.1)
    assert run.seeds == (0, 1)
    assert run.train.seed == 4
    assert run.jobs == 2

    with pytest.raises(ParameterError):
        params.RunConfig.from_dict({'attacks': 'meta'})
    with pytest.raises(ParameterError):
        params.RunConfig.from_dict({'budgets': '1.5'})
    with pytest.raises(ParameterError):
        params.RunConfig.from_dict({'kind': 'degree'})
    with pytest.raises(ParameterError):
        params.RunConfig.from_dict({'epochs': 10})


def test_normalize_method():
    assert params.normalize_method('rege-d') == 'rege_d'
    assert params.normalize_method(' Baseline ') == 'baseline'
    with pytest.raises(ParameterError):
        params.normalize_method('gat')


def test_read_config_file(tmp_path):
    path = tmp_path / 'run.cfg'
    path.write_text('# experiment\ndataset = karate\n\nepochs_per_view=5  # short\nmethods=baseline,rege-d\n')
    assert params.read_config_file(path) == {'dataset': 'karate', 'epochs_per_view': '5',
                                             'methods': 'baseline,rege-d'}

    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'dataset': 'sbm', 'seeds': [1, 2]}))
    assert params.read_config_file(path) == {'dataset': 'sbm', 'seeds': [1, 2]}

    path = tmp_path / 'repeated.cfg'
    path.write_text('seed=1\nseed=2\n')
    with pytest.raises(ParameterError, match=':2:'):
        params.read_config_file(path)

    path = tmp_path / 'broken.cfg'
    path.write_text('seed 1\n')
    with pytest.raises(ParameterError, match=':1:'):
        params.read_config_file(path)
