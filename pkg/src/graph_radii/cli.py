"""Command-line entry point: `graph-radii {views,radii,train,experiment,sweep}`.

Configuration precedence is defaults < `--config` file < command-line flags.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List

from graph_radii import mdr
from graph_radii.checkpoint import save_params
from graph_radii.errors import GraphRadiiError, ParameterError
from graph_radii.formalisms import spectral
from graph_radii.graph import Graph, generate_sbm, karate, load_graph, read_adjacency
from graph_radii.methods import train_method
from graph_radii.params import RunConfig, read_config_file
from graph_radii.perturb import component_sweep, run_experiment, write_sweep_csv
from graph_radii.radii import compute_ddr, consensus, summarize, write_consensus_csv, write_radii_csv
from graph_radii.utils import atomic_write_text
from graph_radii.views import eigendecompose, generate_views, write_energy_table, write_views

logger = logging.getLogger(__name__)

_FLAG_KEYS = {'dataset': 'dataset', 'features': 'features', 'labels': 'labels', 'splits': 'splits',
              'seed': 'seed', 'out': 'out', 'q_min': 'q_min', 'step': 'component_step', 'alpha': 'alpha',
              'method': 'methods', 'attack': 'attacks', 'budget': 'budgets', 'seeds': 'seeds', 'jobs': 'jobs',
              'perturbed_edges': 'perturbed_edges', 'kind': 'kind', 'radii_source': 'radii_source',
              'q_values': 'q_values', 'split_seed': 'split_seed'}


def _shared_flags() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--dataset', help="edge-list path, or the built-in 'karate' or 'sbm'")
    parser.add_argument('--features', help='CSV of node features (first column node id)')
    parser.add_argument('--labels', help='CSV of node labels (first column node id)')
    parser.add_argument('--splits', help="CSV 'node_id,split', split in {train, val, test}")
    parser.add_argument('--split-seed', type=int, help='seed of the random split (and of the built-in SBM)')
    parser.add_argument('--config', help='key=value (or .json) configuration file')
    parser.add_argument('--seed', type=int, help='seed of every random draw of a run')
    parser.add_argument('--out', help='output directory')
    parser.add_argument('--q-min', type=int, help='spectral components of the first view')
    parser.add_argument('--step', type=int, help='increment of components between views')
    parser.add_argument('--alpha', type=float, help='miscoverage level of the model-dependent radii')
    parser.add_argument('--method', help='comma-separated methods among baseline, rege-d, rege-m, nct-d, nct-m')
    parser.add_argument('--attack', help='comma-separated attacks among random, heuristic, external')
    parser.add_argument('--budget', help='comma-separated perturbation rates')
    parser.add_argument('--jobs', type=int, help='maximum number of concurrent experiment cells')
    parser.add_argument('--perturbed-edges', help='edge list of an externally attacked version of the dataset')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='-v for INFO, -vv for DEBUG logging')
    return parser


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_flags()
    parser = argparse.ArgumentParser(prog='graph-radii',
                                     description='Radius-noise curriculum training of graph convolutional networks.')
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True

    views = commands.add_parser('views', parents=[shared], help='write spectral views and their retained energy')
    views.set_defaults(func=cmd_views)

    radii = commands.add_parser('radii', parents=[shared], help='write per-node radii')
    radii.add_argument('--kind', choices=['ddr', 'mdr', 'stddev', 'entropy'], help='radius kind')
    radii.set_defaults(func=cmd_radii)

    train = commands.add_parser('train', parents=[shared], help='train one method and write its checkpoint')
    train.add_argument('--radii-zero', action='store_true', help='replace the computed radii by zeros')
    train.set_defaults(func=cmd_train)

    experiment = commands.add_parser('experiment', parents=[shared], help='run a perturbation experiment grid')
    experiment.add_argument('--seeds', help='comma-separated seeds of the grid')
    experiment.add_argument('--radii-source', choices=['perturbed', 'clean'], help='graph the radii are computed on')
    experiment.set_defaults(func=cmd_experiment)

    sweep = commands.add_parser('sweep', parents=[shared], help='test accuracy against initial component count')
    sweep.add_argument('--q-values', help='comma-separated initial component counts')
    sweep.set_defaults(func=cmd_sweep)
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    data = read_config_file(Path(args.config)) if args.config else {}
    for flag, key in _FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            data[key] = value
    return RunConfig.from_dict(data)


def load_dataset(run: RunConfig) -> Graph:
    if not run.dataset:
        raise ParameterError('A dataset is required (--dataset PATH, karate or sbm).')
    if run.dataset == 'karate':
        return karate(split_seed=run.split_seed)
    if run.dataset == 'sbm':
        return generate_sbm(run.sbm_n, run.sbm_blocks, run.sbm_p_in, run.sbm_p_out, seed=run.split_seed)
    return load_graph(Path(run.dataset), features_path=run.features or None, labels_path=run.labels or None,
                      splits_path=run.splits or None, split_seed=run.split_seed)


def cmd_views(args: argparse.Namespace,
              run: RunConfig) -> int:
    graph = load_dataset(run)
    decomp = eigendecompose(graph)
    views = generate_views(graph, run.train.q_min, run.train.component_step, decomp=decomp, jobs=run.jobs)
    out = Path(run.out)
    write_views(views, graph.node_ids, out / 'views')
    write_energy_table(decomp, views.component_counts, out / 'energy.csv')
    print(f'{views.count} views written to {out / "views"}')
    return 0


def cmd_radii(args: argparse.Namespace,
              run: RunConfig) -> int:
    graph = load_dataset(run)
    config = run.train
    out = Path(run.out)
    if run.kind == 'mdr':
        teacher = mdr.train_teacher(graph, config)
        student = mdr.train_student(graph.features, teacher.embeddings, config, mask=graph.train_mask)
        calib = mdr.calibrate(student, graph.features, teacher.embeddings, mask=graph.train_mask,
                              pooled=config.pooled_qhat)
        radii = mdr.mdr_radii(mdr.conformal_intervals(student, calib, graph.features))
        mdr.write_calibration_csv(calib, out / 'calibration.csv')
    else:
        views = generate_views(graph, config.q_min, config.component_step, jobs=run.jobs)
        write_consensus_csv(consensus(views), graph.node_ids, out / 'consensus.csv')
        radii = compute_ddr(graph, q_min=config.q_min, step=config.component_step, kind=run.kind,
                            incident_only=config.ddr_incident_only, views=views)
    path = write_radii_csv(radii, graph.node_ids, out / f'radii_{run.kind}.csv')
    stats = summarize(radii)
    print(f'{run.kind} radii of {len(radii)} nodes written to {path}: '
          f'min {stats["min"]:.4f}, median {stats["median"]:.4f}, max {stats["max"]:.4f}')
    return 0


def cmd_train(args: argparse.Namespace,
              run: RunConfig) -> int:
    if len(run.methods) != 1:
        raise ParameterError(f'`train` runs a single method, got {", ".join(run.methods)}.')
    graph = load_dataset(run)
    method = run.methods[0]
    params, report, radii = train_method(graph, method, run.train, zero_radii=args.radii_zero)
    run_dir = Path(run.out) / f'{method}-seed{run.train.seed}'
    save_params(params, run.train, run_dir / 'best.ckpt')
    atomic_write_text(run_dir / 'report.json', report.to_json())
    if radii is not None:
        write_radii_csv(radii, graph.node_ids, run_dir / f'radii_{radii.kind}.csv')
    print(f'{method}: test accuracy {report.test_accuracy}')
    return 0


def cmd_experiment(args: argparse.Namespace,
                   run: RunConfig) -> int:
    graph = load_dataset(run)
    external = None
    if run.perturbed_edges:
        external = graph.with_adjacency(read_adjacency(Path(run.perturbed_edges), graph.node_ids),
                                        provenance={'source': run.perturbed_edges, 'attack': 'external'})
    report = run_experiment(graph, run.methods, run.attacks, run.budgets, run.seeds, run.train,
                            radii_source=run.radii_source, external=external, jobs=run.jobs,
                            progress=args.verbose > 0)
    report.write(Path(run.out))
    print(report.to_table(), end='')
    failures = len(report.failures)
    if failures:
        print(f'{failures} of {len(report.raw)} cells failed', file=sys.stderr)
        return 1
    return 0


def cmd_sweep(args: argparse.Namespace,
              run: RunConfig) -> int:
    graph = load_dataset(run)
    q_values = run.q_values or spectral.calc_component_counts(graph.n, run.train.q_min, run.train.component_step)
    table = component_sweep(graph, q_values, run.train)
    path = write_sweep_csv(table, Path(run.out) / 'sweep.csv')
    print(f'{len(table)} sweep points written to {path}')
    return 0


def main(argv: List[str] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        return args.func(args, build_config(args))
    except (GraphRadiiError, OSError) as e:
        print(f'graph-radii {args.command}: {e}', file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
