'''
Command line entry point: mhd-ensemble {converge,channel,energy} [flags]

Exit codes: 0 on success, 1 on configuration errors, 2 on solver failures (including a
convergence study that stopped early).
'''

import argparse
import logging
import os
import sys
import time

from ..exceptions import ConfigurationError, InvalidArgumentError, SolverError
from ..channel_bench import ChannelConfig, run_channel
from ..ensemble_scheme import PhysParams, SchemeParams
from ..linsolve import PerfCounters
from ..mms_verify import PerturbationEnsemble, convergence_study, halving_levels, refinement_levels, run_level
from .output import emit_energy_report, emit_perf_report, emit_rate_table, write_vtk_snapshot
from .perf import benchmark_sharing, perf_report
from .run_config import EXPERIMENTS, load_config

logger = logging.getLogger(__name__)

__all__ = []

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2


class _Parser(argparse.ArgumentParser):
    ''' argparse reports usage errors through ConfigurationError instead of exiting '''

    def error(self, message):
        raise ConfigurationError(f'{self.prog}: {message}')


# flag -> config key; all of these default to None so that unset flags do not override the file
_VALUE_FLAGS = (
    ('--nu', 'nu', float, None),
    ('--num', 'nu_m', float, None),
    ('--dt', 'dt', float, None),
    ('--T', 'T', float, None),
    ('--eps', 'eps', float, None),
    ('--levels', 'levels', int, None),
    ('--level', 'level', int, None),
    ('--J', 'J', int, None),
    ('--out', 'out', str, None),
    ('--threads', 'threads', int, None),
    ('--solver', 'solver', str, ('direct', 'iterative')),
    ('--convection', 'convection', str, ('standard', 'skew')),
    ('--bootstrap', 'bootstrap', str, ('be', 'exact')),
    ('--extrapolation', 'extrapolation', str, ('second', 'first')),
    ('--refinement', 'refinement', str, ('both', 'space', 'time')),
    ('--reference', 'reference', str, ('exact', 'interpolant')),
    ('--cells-per-unit', 'cells_per_unit', int, None),
    ('--snapshot-interval', 'snapshot_interval', int, None),
)


__all__.append("build_parser")
def build_parser():
    parser = _Parser(prog='mhd-ensemble', description='Ensemble simulation of 2D incompressible MHD flows')
    parser.add_argument('experiment', choices=EXPERIMENTS)
    parser.add_argument('--config', metavar='PATH', help='key=value or YAML configuration file')
    parser.add_argument('--preset', metavar='NAME', help='experiment_configs entry of a YAML file')
    for flag, key, kind, choices in _VALUE_FLAGS:
        parser.add_argument(flag, dest=key, type=kind, choices=choices, default=None)
    parser.add_argument('--naive', action='store_const', const=True, default=None,
                        help='assemble and factor one matrix per member')
    parser.add_argument('--perturb-magnetic', dest='perturb_magnetic', action='store_const', const=True,
                        default=None)
    parser.add_argument('--benchmark', action='store_const', const=True, default=None,
                        help='also time the shared and the naive path')
    parser.add_argument('-v', '--verbose', action='store_true')
    return parser


def _scheme(config):
    return SchemeParams(J=config.J, convection=config.convection, bootstrap=config.bootstrap,
                        solver=config.solver, threads=config.threads, naive=config.naive,
                        extrapolation=config.extrapolation, c_const=config.c_const,
                        ci_const=config.ci_const)


def _run_converge(config):
    levels = refinement_levels(config.refinement, config.T, config.levels)
    if config.dt is not None:
        logger.warning('converge: dt is set by the refinement levels, the dt setting is ignored')
    table = convergence_study(levels, eps=config.eps, nu=config.nu, nu_m=config.nu_m, T=config.T,
                              J=config.J, scheme=_scheme(config), reference=config.reference)
    emit_rate_table(table, os.path.join(config.out, 'rates.csv'))
    for row in table:
        logger.info(f'h={row.h:.6g} dt={row.dt:.6g} err_v={row.err_v:.4e} rate_v={row.rate_v} '
                    f'err_w={row.err_w:.4e} rate_w={row.rate_w}')
    if table.failure is not None:
        logger.error(f'convergence study stopped early: {table.failure}')
        return EXIT_SOLVER
    return EXIT_OK


def _run_channel(config):
    channel = ChannelConfig(cells_per_unit=config.cells_per_unit, dt=config.dt, T=config.T, eps=config.eps,
                            nu=config.nu, nu_m=config.nu_m, J=config.J,
                            perturb_magnetic=config.perturb_magnetic,
                            snapshot_interval=config.snapshot_interval, convection=config.convection,
                            bootstrap=config.bootstrap, solver=config.solver, threads=config.threads,
                            naive=config.naive)
    counters = PerfCounters()
    start = time.perf_counter()
    result = run_channel(channel, os.path.join(config.out, 'vtk'), write_vtk_snapshot, counters)
    elapsed = time.perf_counter() - start
    emit_energy_report(result.energy, os.path.join(config.out, 'energy.csv'))
    emit_perf_report(perf_report(counters, config.J, elapsed), os.path.join(config.out, 'perf_channel.csv'))
    if not result.energy.is_finite():
        logger.warning('channel run produced non-finite energies')
    return EXIT_OK


def _run_energy(config):
    n, dt = halving_levels(config.T, config.level)[-1]
    if config.dt is not None:
        dt = config.dt
    phys = PhysParams(config.nu, config.nu_m)
    counters = PerfCounters()
    _, result = run_level(n, dt, phys, PerturbationEnsemble(config.eps, config.J), config.T,
                          _scheme(config), config.reference, counters)
    emit_energy_report(result.energy, os.path.join(config.out, 'energy.csv'))
    stable = result.energy.stable
    if stable:
        logger.info(f'energy bound holds for every member ({config.convection} convection)')
    elif config.convection == 'skew':
        logger.warning('energy bound violated with skew-symmetric convection')
    else:
        logger.warning('energy bound violated; standard convection is not covered by the bound')
    return EXIT_OK


_DRIVERS = {
    'converge': _run_converge,
    'channel': _run_channel,
    'energy': _run_energy,
}


def _echo(config):
    os.makedirs(config.out, exist_ok=True)
    path = os.path.join(config.out, 'config.txt')
    with open(path, 'w') as out:
        out.write(config.echo())
    logger.info(f'configuration written to {path}')


__all__.append("main")
def main(argv=None):
    '''
    Returns:
        int: process exit code
    '''
    try:
        args = build_parser().parse_args(argv)
    except ConfigurationError as err:
        logging.basicConfig(level=logging.INFO)
        logger.error(str(err))
        return EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)

    flags = {key: value for key, value in vars(args).items()
             if key not in ('config', 'preset', 'verbose') and value is not None}
    try:
        config = load_config(args.config, flags, args.preset)
        _echo(config)
        code = _DRIVERS[config.experiment](config)
        if config.benchmark:
            benchmark = benchmark_sharing(config.bench_n, config.J, config.bench_steps, eps=config.eps,
                                          nu=config.nu, nu_m=config.nu_m, T=config.T, solver=config.solver)
            emit_perf_report(benchmark.report(), os.path.join(config.out, 'perf.csv'))
        return code
    except (ConfigurationError, InvalidArgumentError) as err:
        logger.error(f'configuration error: {err}')
        return EXIT_CONFIG
    except SolverError as err:
        logger.critical(f'solver failure: {err}')
        return EXIT_SOLVER
    except OSError as err:
        logger.error(f'cannot write output: {err}')
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
