import logging

from graph_radii.graph import Graph
from graph_radii.mdr import compute_mdr
from graph_radii.params import TrainConfig, normalize_method
from graph_radii.radii import RadiusVector, compute_ddr
from graph_radii.trainer import curriculum_train, train_baseline, train_nct
from graph_radii.views import generate_views

logger = logging.getLogger(__name__)


def compute_method_radii(graph: Graph,
                         method: str,
                         config: TrainConfig,
                         views=None) -> RadiusVector:
    """Computes the radii a method injects: data-dependent for *_d methods, model-dependent for *_m methods."""
    if method.endswith('_m'):
        return compute_mdr(graph, config)
    return compute_ddr(graph, q_min=config.q_min, step=config.component_step, kind=config.data_radii_kind,
                       incident_only=config.ddr_incident_only, views=views)


def train_method(graph: Graph,
                 method: str,
                 config: TrainConfig,
                 radii_graph: Graph = None,
                 zero_radii: bool = False) -> tuple:
    """Runs a training method end to end.

    Args:
        graph: labeled graph trained on (and whose views make the curriculum)
        method: one of 'baseline', 'rege_d', 'rege_m', 'nct_d', 'nct_m' ('rege-d' spellings accepted)
        config: training configuration
        radii_graph: graph the radii are computed on (`graph` if None)
        zero_radii: replaces the computed radii by zeros

    Returns:
        the trained parameters, the training report and the radii used (None for the baseline)
    """
    method = normalize_method(method)
    if method == 'baseline':
        params, report = train_baseline(graph, config)
        return params, report, None

    radii_graph = graph if radii_graph is None else radii_graph
    views = generate_views(graph, config.q_min, config.component_step) if method.startswith('rege') else None
    if zero_radii:
        radii = RadiusVector.zeros(graph.n, kind='mdr' if method.endswith('_m') else config.data_radii_kind)
    else:
        radii = compute_method_radii(radii_graph, method, config, views=views if radii_graph is graph else None)

    if method.startswith('rege'):
        params, report = curriculum_train(graph, views, radii, config, method=method)
    else:
        params, report = train_nct(graph, radii, config, method=method)
    return params, report, radii
