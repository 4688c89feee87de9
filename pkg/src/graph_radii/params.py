import json
import logging
from dataclasses import dataclass, field, fields, asdict, replace
from hashlib import sha256
from pathlib import Path
from typing import Mapping, Tuple

from graph_radii.errors import ParameterError

logger = logging.getLogger(__name__)

METHODS = ('baseline', 'rege_d', 'rege_m', 'nct_d', 'nct_m')
ATTACKS = ('random', 'heuristic', 'external')
RADII_KINDS = ('ddr', 'mdr', 'stddev', 'entropy')


class Constants:
    def __init__(self):
        self.adam_beta_1 = 0.9
        """[-] exponential decay rate of Adam's first-moment estimate"""

        self.adam_beta_2 = 0.999
        """[-] exponential decay rate of Adam's second-moment estimate"""

        self.adam_epsilon = 1.e-8
        """[-] Adam denominator offset"""

        self.split_fractions = (0.1, 0.1, 0.8)
        """[-] train, validation and test fractions of the seeded random split"""


@dataclass(frozen=True)
class TrainConfig:
    epochs_per_view: int = 100
    """[-] number of epochs spent on each graph view of the curriculum"""

    patience_views: int = 25
    """[-] number of consecutive views without validation improvement before stopping"""

    hidden: int = 16
    """[-] number of hidden units of the first GCN layer"""

    dropout: float = 0.5
    """[-] dropout probability applied after the first GCN layer"""

    lr: float = 0.01
    """[-] Adam learning rate of the GCN"""

    weight_decay: float = 5.e-4
    """[-] decoupled weight decay applied to the first-layer GCN weights"""

    alpha: float = 0.05
    """[-] miscoverage level of the conformal intervals (coverage is 1 - alpha)"""

    q_min: int = 5
    """[-] number of spectral components of the first (simplest) view"""

    component_step: int = 5
    """[-] increment of spectral components between consecutive views"""

    seed: int = 0
    """[-] seed of every random draw of a run"""

    baseline_epochs: int = 200
    """[-] epochs of plain GCN training (baseline and teacher)"""

    nct_stages: int = 0
    """[-] number of `epochs_per_view` blocks for training without curriculum.

    Notes:
        0 matches the number of views the curriculum would produce for the same graph.
    """

    student_hidden: int = 1024
    """[-] width of each hidden layer of the student MLP"""

    student_layers: int = 3
    """[-] number of hidden layers of the student MLP"""

    student_dropout: float = 0.5
    """[-] dropout probability after the first two hidden layers of the student"""

    student_epochs: int = 200
    """[-] full-batch epochs of student training"""

    student_lr: float = 0.001
    """[-] Adam learning rate of the student"""

    distill_target: str = 'hidden'
    """Teacher output distilled by the student: 'hidden' (first-layer embedding) or 'logits'"""

    pooled_qhat: bool = False
    """If True, a single conformal offset is computed over the scores of all dimensions"""

    ddr_incident_only: bool = False
    """If True, data-dependent radii average the deviation over entries observed in at least one view only"""

    data_radii_kind: str = 'ddr'
    """Row function used for data-dependent radii: 'ddr' (binary deviation), 'stddev' or 'entropy'"""

    def __post_init__(self):
        for name in ('epochs_per_view', 'patience_views', 'hidden', 'q_min', 'component_step', 'baseline_epochs',
                     'student_hidden', 'student_layers', 'student_epochs'):
            if getattr(self, name) < 1:
                raise ParameterError(f'`{name}` must be a positive integer, got {getattr(self, name)}.')
        if self.nct_stages < 0:
            raise ParameterError(f'`nct_stages` must be non-negative, got {self.nct_stages}.')
        for name in ('dropout', 'student_dropout'):
            if not 0 <= getattr(self, name) < 1:
                raise ParameterError(f'`{name}` must lie in [0, 1), got {getattr(self, name)}.')
        if not 0 < self.alpha < 1:
            raise ParameterError(f'`alpha` must lie in (0, 1), got {self.alpha}.')
        if self.lr <= 0 or self.student_lr <= 0 or self.weight_decay < 0:
            raise ParameterError('learning rates must be positive and `weight_decay` non-negative.')
        if self.distill_target not in ('hidden', 'logits'):
            raise ParameterError(f'Unknown distillation target: {self.distill_target}.')
        if self.data_radii_kind not in ('ddr', 'stddev', 'entropy'):
            raise ParameterError(f'Unknown data radii kind: {self.data_radii_kind}.')

    @classmethod
    def from_dict(cls, data: Mapping) -> 'TrainConfig':
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ParameterError(f'Unknown configuration keys: {", ".join(sorted(unknown))}.')
        return cls(**{k: _coerce(cls, k, v) for k, v in data.items()})

    def digest(self) -> str:
        """Returns a short hash identifying the configuration (used in checkpoint manifests)."""
        return sha256(json.dumps(asdict(self), sort_keys=True).encode('utf-8')).hexdigest()[:16]

    def with_seed(self, seed: int) -> 'TrainConfig':
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class RunConfig:
    dataset: str = None
    """Edge-list path, or one of the built-in datasets 'karate' and 'sbm'"""

    features: str = ''
    """CSV of node features (header, first column node id)"""

    labels: str = ''
    """CSV of node labels (header, first column node id)"""

    splits: str = ''
    """CSV 'node_id,split' with split in {train, val, test}"""

    perturbed_edges: str = ''
    """Edge list of an externally attacked version of the dataset"""

    out: str = 'out'
    """Output directory"""

    methods: Tuple[str, ...] = ('rege_d',)
    """Training methods, among 'baseline', 'rege_d', 'rege_m', 'nct_d', 'nct_m'"""

    attacks: Tuple[str, ...] = ('heuristic',)
    """Structural perturbations, among 'random', 'heuristic', 'external'"""

    budgets: Tuple[float, ...] = (0.1,)
    """Perturbation rates, as fractions of the number of edges"""

    seeds: Tuple[int, ...] = (0,)
    """Seeds of the experiment grid"""

    q_values: Tuple[int, ...] = ()
    """Initial component counts of the component sweep"""

    kind: str = 'ddr'
    """Radius kind written by the `radii` command"""

    radii_source: str = 'perturbed'
    """Graph on which experiment radii are computed: 'perturbed' or 'clean'"""

    jobs: int = 1
    """Maximum number of experiment cells run concurrently"""

    split_seed: int = 0
    """Seed of the random train/val/test split when no split file is given"""

    sbm_n: int = 200
    """[-] node count of the built-in SBM dataset"""

    sbm_blocks: int = 2
    """[-] block count of the built-in SBM dataset"""

    sbm_p_in: float = 0.1
    """[-] within-block edge probability of the built-in SBM dataset"""

    sbm_p_out: float = 0.02
    """[-] between-block edge probability of the built-in SBM dataset"""

    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        object.__setattr__(self, 'methods', tuple(normalize_method(m) for m in self.methods))
        for attack in self.attacks:
            if attack not in ATTACKS:
                raise ParameterError(f'Unknown attack: {attack}.')
        for budget in self.budgets:
            if not 0 <= budget <= 1:
                raise ParameterError(f'Perturbation budget must lie in [0, 1], got {budget}.')
        if self.kind not in RADII_KINDS:
            raise ParameterError(f'Unknown radius kind: {self.kind}.')
        if self.radii_source not in ('perturbed', 'clean'):
            raise ParameterError(f'Unknown radii source: {self.radii_source}.')
        if self.jobs < 1:
            raise ParameterError(f'`jobs` must be a positive integer, got {self.jobs}.')

    @classmethod
    def from_dict(cls, data: Mapping) -> 'RunConfig':
        """Builds a run configuration from a flat mapping mixing run and training keys.

        Args:
            data: mapping of key to value; values may be strings as read from a config file

        Raises:
            ParameterError: if a key is neither a run nor a training configuration key
        """
        run_keys = {f.name for f in fields(cls)} - {'train'}
        train_keys = {f.name for f in fields(TrainConfig)}
        unknown = set(data) - run_keys - train_keys
        if unknown:
            raise ParameterError(f'Unknown configuration keys: {", ".join(sorted(unknown))}.')
        train = TrainConfig.from_dict({k: v for k, v in data.items() if k in train_keys})
        return cls(train=train, **{k: _coerce(cls, k, v) for k, v in data.items() if k in run_keys})


def normalize_method(name: str) -> str:
    method = name.strip().lower().replace('-', '_')
    if method not in METHODS:
        raise ParameterError(f'Unknown method: {name}.')
    return method


def read_config_file(path: Path) -> dict:
    """Reads a configuration file into a flat dictionary.

    Args:
        path: a JSON file (`.json` suffix) or a plain `key=value` file where `#` starts a comment

    Returns:
        raw key-value pairs (values of `key=value` files are strings)

    Raises:
        ParameterError: if a non-empty line has no `=` or a key is repeated
    """
    path = Path(path)
    with open(str(path), mode='r', encoding='utf-8') as f:
        if path.suffix == '.json':
            return json.load(f)
        lines = f.readlines()

    data = {}
    for line_number, line in enumerate(lines, start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ParameterError(f'{path}:{line_number}: expected `key=value`, got "{line}".')
        key, value = (s.strip() for s in line.split('=', 1))
        if key in data:
            raise ParameterError(f'{path}:{line_number}: key `{key}` is repeated.')
        data[key] = value
    logger.debug('read %d configuration keys from %s', len(data), path)
    return data


_SEQUENCE_ITEM_TYPES = {'methods': str, 'attacks': str, 'budgets': float, 'seeds': int, 'q_values': int}


def _coerce(cls, name: str, value):
    """Converts a raw configuration value to the type of the field's default."""
    default = next(f for f in fields(cls) if f.name == name).default
    try:
        if name in _SEQUENCE_ITEM_TYPES:
            items = value.split(',') if isinstance(value, str) else value
            return tuple(_SEQUENCE_ITEM_TYPES[name](str(v).strip()) for v in items if str(v).strip())
        if not isinstance(value, str) or default is None:
            return value
        if isinstance(default, bool):
            if value.lower() not in ('true', 'false', '1', '0', 'yes', 'no'):
                raise ValueError(value)
            return value.lower() in ('true', '1', 'yes')
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
        return value
    except ValueError:
        raise ParameterError(f'Invalid value for `{name}`: {value!r}.') from None
