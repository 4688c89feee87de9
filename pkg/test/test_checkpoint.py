import json

import numpy as np
import pytest

from graph_radii import checkpoint
from graph_radii.errors import DimensionError, ParameterError
from graph_radii.gcn import init_gcn
from graph_radii.params import TrainConfig


def test_save_and_load_params(tmp_path):
    params = init_gcn(num_features=5, num_classes=3, hidden=4, seed=2)
    config = TrainConfig(seed=2)
    path = checkpoint.save_params(params, config, tmp_path / 'run' / 'best.ckpt')

    loaded, manifest = checkpoint.load_params(path)
    assert all(np.array_equal(a, b) for a, b in zip(params.tensors(), loaded.tensors()))
    assert manifest['format_version'] == 1
    assert manifest['seed'] == 2
    assert manifest['config_digest'] == config.digest()
    assert [t['shape'] for t in manifest['tensors']] == [[5, 4], [4, 3]]

    assert path.read_text() == checkpoint.format_checkpoint(loaded, config)


def test_load_params_rejects_bad_files(tmp_path):
    params = init_gcn(num_features=2, num_classes=2, hidden=2, seed=0)
    content = json.loads(checkpoint.format_checkpoint(params, TrainConfig()))

    content['manifest']['format_version'] = 2
    path = tmp_path / 'future.ckpt'
    path.write_text(json.dumps(content))
    with pytest.raises(ParameterError):
        checkpoint.load_params(path)

    content['manifest']['format_version'] = 1
    content['manifest']['tensors'][0]['shape'] = [3, 2]
    path = tmp_path / 'bad_shape.ckpt'
    path.write_text(json.dumps(content))
    with pytest.raises(DimensionError):
        checkpoint.load_params(path)
