#channel over a step with VTK snapshots; pass a preset name (default channel_desk).
import logging
import os
import sys

from mhd_ensemble.channel_bench import ChannelConfig, run_channel
from mhd_ensemble.io_cli import emit_energy_report, emit_perf_report, load_config, perf_report, write_vtk_snapshot
from mhd_ensemble.linsolve import PerfCounters

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

config_path = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'ensemble_configs.yaml')
preset = sys.argv[1] if len(sys.argv) > 1 else 'channel_desk'
config = load_config(config_path, preset=preset)

channel = ChannelConfig(cells_per_unit=config.cells_per_unit, dt=config.dt, T=config.T, eps=config.eps,
                        nu=config.nu, nu_m=config.nu_m, J=config.J, perturb_magnetic=config.perturb_magnetic,
                        snapshot_interval=config.snapshot_interval, bootstrap=config.bootstrap,
                        solver=config.solver, threads=config.threads)
counters = PerfCounters()
result = run_channel(channel, os.path.join(config.out, 'vtk'), write_vtk_snapshot, counters)

emit_energy_report(result.energy, os.path.join(config.out, 'energy.csv'))
emit_perf_report(perf_report(counters, config.J), os.path.join(config.out, 'perf_channel.csv'))
print(F"inlet flux per member: {result.inlet_flux}")
print(F"{len(result.snapshots)} snapshots in {os.path.join(config.out, 'vtk')}")
print(F"counters: {counters.as_dict()}")
