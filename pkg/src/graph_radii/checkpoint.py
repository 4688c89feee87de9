import json
from pathlib import Path

import numpy as np

from graph_radii.errors import DimensionError, ParameterError
from graph_radii.gcn import GCNParams
from graph_radii.params import TrainConfig
from graph_radii.utils import atomic_write_text

FORMAT_VERSION = 1


def format_checkpoint(params: GCNParams,
                      config: TrainConfig) -> str:
    manifest = {'format_version': FORMAT_VERSION,
                'seed': config.seed,
                'config_digest': config.digest(),
                'tensors': [{'name': name, 'shape': list(t.shape)} for name, t in zip(params.names, params.tensors())]}
    tensors = {name: [float(v) for v in t.ravel()] for name, t in zip(params.names, params.tensors())}
    return json.dumps({'manifest': manifest, 'tensors': tensors}, indent=1, sort_keys=True) + '\n'


def save_params(params: GCNParams,
                config: TrainConfig,
                path: Path) -> Path:
    """Writes GCN weights as a versioned JSON text dump (manifest of names, shapes, seed and config digest)."""
    return atomic_write_text(path, format_checkpoint(params, config))


def load_params(path: Path) -> tuple:
    """Reads a checkpoint written by `save_params`.

    Returns:
        the weights and the manifest

    Raises:
        ParameterError: if the format version is not supported
        DimensionError: if a tensor does not match its declared shape
    """
    with open(str(path), mode='r', encoding='utf-8') as f:
        content = json.load(f)
    manifest = content['manifest']
    if manifest.get('format_version') != FORMAT_VERSION:
        raise ParameterError(f'{path}: unsupported checkpoint format {manifest.get("format_version")}.')
    tensors = []
    for entry in manifest['tensors']:
        values = np.asarray(content['tensors'][entry['name']], dtype=float)
        if values.size != int(np.prod(entry['shape'])):
            raise DimensionError(f'{path}: tensor {entry["name"]} has {values.size} values for shape {entry["shape"]}.')
        tensors.append(values.reshape(entry['shape']))
    return GCNParams.from_tensors(tensors), manifest
