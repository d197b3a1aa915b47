#runs the convergence table for every perturbation size of ensemble_configs.yaml and prints the rates side by side.
import logging
import os

import yaml

from mhd_ensemble.io_cli import emit_rate_table, load_config
from mhd_ensemble.ensemble_scheme import SchemeParams
from mhd_ensemble.mms_verify import check_rates, convergence_study, refinement_levels
from mhd_ensemble.exceptions import MHDEnsembleError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

config_path = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'ensemble_configs.yaml')
with open(config_path) as config_file:
    configs = yaml.safe_load(config_file)
presets = [name for name in configs['experiment_configs'] if name.startswith('table_eps')]
print("  Perturbation sizes  ")
for name in presets:
    print(F"  {name}")

summary = {}
for name in presets:
    config = load_config(config_path, preset=name)
    scheme = SchemeParams(J=config.J, bootstrap=config.bootstrap, solver=config.solver, threads=config.threads)
    levels = refinement_levels(config.refinement, config.T, config.levels)
    table = convergence_study(levels, eps=config.eps, nu=config.nu, nu_m=config.nu_m, T=config.T, J=config.J,
                              scheme=scheme)
    emit_rate_table(table, os.path.join(config.out, 'rates.csv'))
    try:
        check_rates(table)
        passed = True
    except MHDEnsembleError as err:
        logger.warning(F"{name}: {err}")
        passed = False
    summary[name] = (table.rates('v'), table.rates('w'), passed)

for name, (rates_v, rates_w, passed) in summary.items():
    print(F"{name}: rate_v {rates_v}")
    print(F"{' ' * len(name)}  rate_w {rates_w}  {'ok' if passed else 'OUT OF RANGE'}")
