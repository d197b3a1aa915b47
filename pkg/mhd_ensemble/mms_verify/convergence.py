'''
Ensemble-mean error norms and convergence-rate tables for the manufactured ensemble.
'''

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..exceptions import InvalidArgumentError, MHDEnsembleError, SolverError
from ..ensemble_scheme import EXACT, EnsembleStepper, PhysParams, SchemeParams, TimeParams
from ..fem import MixedSpace, Quadrature, assemble_mass, assemble_stiffness
from ..linsolve import PerfCounters
from ..mesh import unit_square
from .manufactured import MMSProblem, PerturbationEnsemble

logger = logging.getLogger(__name__)

__all__ = []

EXACT_REFERENCE = 'exact'
__all__.append("EXACT_REFERENCE")
INTERPOLANT_REFERENCE = 'interpolant'
__all__.append("INTERPOLANT_REFERENCE")

REFINEMENTS = ('both', 'space', 'time')
__all__.append("REFINEMENTS")


__all__.append("ErrorNorms")
class ErrorNorms:
    '''
    err_v, err_w: (dt sum_{n=1}^{M} ||grad(<u>(t^n) - <u_h>^n)||^2)^{1/2} for u = v, w
    l2_v, l2_w: L2 errors of the ensemble means at the final time
    '''

    def __init__(self, err_v, err_w, l2_v, l2_w):
        self.err_v = err_v
        self.err_w = err_w
        self.l2_v = l2_v
        self.l2_w = l2_w

    def __repr__(self):
        return f'ErrorNorms(err_v={self.err_v:.4e}, err_w={self.err_w:.4e}, l2_v={self.l2_v:.4e}, l2_w={self.l2_w:.4e})'


__all__.append("error_norms")
def error_norms(result, problem, space, dt, reference=EXACT_REFERENCE, quadrature=None):
    '''
    Errors of the computed ensemble means of a run against the exact ensemble mean.

    With reference='exact' the analytic gradients are integrated by (5-point Gauss by default)
    quadrature; with reference='interpolant' the comparison is against the Q2 interpolant of
    the exact mean.
    '''
    if reference not in (EXACT_REFERENCE, INTERPOLANT_REFERENCE):
        raise InvalidArgumentError(f'unknown error reference "{reference}"')
    if not result.means or len(result.means) != len(result.times):
        raise InvalidArgumentError('run has no stored ensemble-mean history')
    quadrature = quadrature if quadrature is not None else Quadrature(5)

    def mean_v(x, y, t):
        return problem.exact_mean(t, x, y)[0]

    def mean_w(x, y, t):
        return problem.exact_mean(t, x, y)[1]

    def grad_v(x, y, t):
        return problem.exact_mean_gradients(t, x, y)[0]

    def grad_w(x, y, t):
        return problem.exact_mean_gradients(t, x, y)[1]

    if reference == INTERPOLANT_REFERENCE:
        mass, stiffness = assemble_mass(space), assemble_stiffness(space)

    sum_v = sum_w = 0.
    l2 = (0., 0.)
    for t, (computed_v, computed_w) in zip(result.times, result.means):
        if reference == EXACT_REFERENCE:
            l2_v, h1_v = space.error_norms_against(computed_v, mean_v, grad_v, t, quadrature)
            l2_w, h1_w = space.error_norms_against(computed_w, mean_w, grad_w, t, quadrature)
        else:
            e_v = space.interpolate_velocity(mean_v, t) - computed_v
            e_w = space.interpolate_velocity(mean_w, t) - computed_w
            h1_v, h1_w = (math.sqrt(max(float(e @ (stiffness @ e)), 0.)) for e in (e_v, e_w))
            l2_v, l2_w = (math.sqrt(max(float(e @ (mass @ e)), 0.)) for e in (e_v, e_w))
        sum_v += h1_v**2
        sum_w += h1_w**2
        l2 = (l2_v, l2_w)
    return ErrorNorms(math.sqrt(dt * sum_v), math.sqrt(dt * sum_w), *l2)


__all__.append("RateRow")
class RateRow:
    '''
    One refinement level. Rates are None on the first row.
    '''

    def __init__(self, h, dt, err_v, rate_v, err_w, rate_w, l2_v=None, l2_w=None, max_rho=None,
                 energy_stable=None):
        self.h = h
        self.dt = dt
        self.err_v = err_v
        self.rate_v = rate_v
        self.err_w = err_w
        self.rate_w = rate_w
        self.l2_v = l2_v
        self.l2_w = l2_w
        self.max_rho = max_rho
        self.energy_stable = energy_stable

    def as_tuple(self):
        return (self.h, self.dt, self.err_v, self.rate_v, self.err_w, self.rate_w)

    def __repr__(self):
        return f'RateRow{self.as_tuple()}'


def _observed_rate(previous, h, dt, err_previous, err):
    '''
    log(e_coarse / e_fine) / log(refinement ratio); the ratio is that of h when h changed,
    otherwise that of dt
    '''
    if previous is None or err <= 0. or err_previous <= 0.:
        return None
    if not math.isclose(previous.h, h):
        ratio = previous.h / h
    elif not math.isclose(previous.dt, dt):
        ratio = previous.dt / dt
    else:
        return None
    return math.log(err_previous / err) / math.log(ratio)


__all__.append("RateTable")
class RateTable:
    '''
    Error and observed-rate table of a convergence study.

    Attributes:
        rows (list of RateRow)
        failure (str|None): message of the error that stopped the study early
    '''

    def __init__(self, rows=None):
        self.rows = []
        self.failure = None
        for row in rows or []:
            self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def complete(self):
        return self.failure is None

    def add(self, h, dt, err_v, err_w, **extra):
        '''append a level; rates against the previous row'''
        previous = self.rows[-1] if self.rows else None
        rate_v = _observed_rate(previous, h, dt, previous.err_v if previous else 0., err_v)
        rate_w = _observed_rate(previous, h, dt, previous.err_w if previous else 0., err_w)
        row = RateRow(h, dt, err_v, rate_v, err_w, rate_w, **extra)
        self.rows.append(row)
        return row

    def rates(self, field='v'):
        return [getattr(row, f'rate_{field}') for row in self.rows[1:]]

    def errors(self, field='v'):
        return np.array([getattr(row, f'err_{field}') for row in self.rows])


__all__.append("halving_levels")
def halving_levels(T=1e-3, count=5):
    '''(n, dt) = (2^k, T / 2^(k+1)) for k = 1..count: h = 1/2 .. 1/32 with dt = T/4 .. T/64'''
    if count < 1:
        raise InvalidArgumentError(f'need at least one level, got {count}')
    return [(2**k, T / 2**(k + 1)) for k in range(1, count + 1)]


__all__.append("refinement_levels")
def refinement_levels(kind='both', T=1e-3, count=5):
    '''
    'both' halves h and dt together; 'space' halves h at the finest dt; 'time' halves dt on the
    finest mesh.
    '''
    if kind not in REFINEMENTS:
        raise InvalidArgumentError(f'unknown refinement "{kind}", expected one of {REFINEMENTS}')
    levels = halving_levels(T, count)
    if kind == 'space':
        return [(n, levels[-1][1]) for n, _ in levels]
    if kind == 'time':
        return [(levels[-1][0], dt) for _, dt in levels]
    return levels


class _LevelOutcome:
    def __init__(self, n, dt, errors=None, result=None, error=None):
        self.n = n
        self.dt = dt
        self.errors = errors
        self.result = result
        self.error = error


__all__.append("run_level")
def run_level(n, dt, phys, ensemble, T, scheme, reference=EXACT_REFERENCE, counters=None):
    '''
    One level of a study on unit_square(n).

    Returns:
        (ErrorNorms, RunResult)
    '''
    space = MixedSpace(unit_square(n))
    problem = MMSProblem(phys, ensemble)
    stepper = EnsembleStepper(space, problem, phys, TimeParams(dt, T), scheme, counters)
    result = stepper.run()
    errors = error_norms(result, problem, space, dt, reference)
    logger.info(f'level h=1/{n}, dt={dt:.6g}: {errors}, max rho {result.max_rho:.3g}, '
                f'energy bound {"met" if result.energy.stable else "not met"}')
    return errors, result


__all__.append("convergence_study")
def convergence_study(levels, eps=1e-3, nu=0.01, nu_m=0.001, T=1e-3, J=4, scheme=None,
                      reference=EXACT_REFERENCE, workers=1):
    '''
    Run the manufactured ensemble on each (n, dt) of levels and tabulate the errors of the
    ensemble means with their observed rates.

    A solver failure at some level ends the study; the table then holds the levels before it
    and records the failure.

    Args:
        levels (list of (n, dt)): unit_square(n) meshes and step sizes
        scheme (SchemeParams|None): defaults to J members with the exact bootstrap
        workers (int): levels run concurrently on this many threads
    '''
    if not levels:
        raise InvalidArgumentError('convergence study needs at least one level')
    phys = PhysParams(nu, nu_m)
    ensemble = PerturbationEnsemble(eps, J)
    scheme = scheme if scheme is not None else SchemeParams(J=J, bootstrap=EXACT)
    if scheme.J != J:
        raise InvalidArgumentError(f'scheme has J={scheme.J}, study has J={J}')
    logger.info(f'convergence study: eps={eps}, nu={nu}, nu_m={nu_m}, T={T}, J={J}, {len(levels)} levels')

    def attempt(level):
        n, dt = level
        try:
            errors, result = run_level(n, dt, phys, ensemble, T, scheme, reference, PerfCounters())
            return _LevelOutcome(n, dt, errors, result)
        except SolverError as err:
            logger.error(f'level h=1/{n}, dt={dt}: {err}')
            return _LevelOutcome(n, dt, error=err)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(attempt, levels))
    else:
        outcomes = []
        for level in levels:
            outcomes.append(attempt(level))
            if outcomes[-1].error is not None:
                break

    table = RateTable()
    for outcome in outcomes:
        if outcome.error is not None:
            table.failure = f'h=1/{outcome.n}, dt={outcome.dt}: {outcome.error}'
            break
        table.add(1. / outcome.n, outcome.dt, outcome.errors.err_v, outcome.errors.err_w,
                  l2_v=outcome.errors.l2_v, l2_w=outcome.errors.l2_w,
                  max_rho=outcome.result.max_rho, energy_stable=outcome.result.energy.stable)
    return table


__all__.append("check_rates")
def check_rates(table, low=1.8, high=2.1, pairs=2):
    '''
    Raise if the last `pairs` observed rates of either field leave [low, high]
    '''
    for field in ('v', 'w'):
        rates = [r for r in table.rates(field) if r is not None][-pairs:]
        if len(rates) < pairs:
            raise MHDEnsembleError(f'only {len(rates)} rates for {field}, need {pairs}')
        bad = [r for r in rates if not low <= r <= high]
        if bad:
            raise MHDEnsembleError(f'observed rates for {field} {rates} outside [{low}, {high}]')
    return True
