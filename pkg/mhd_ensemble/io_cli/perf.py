'''
Instrumentation reports and the shared-versus-naive benchmark.
'''

import logging
import time

from ..ensemble_scheme import EnsembleStepper, PhysParams, SchemeParams, TimeParams
from ..fem import MixedSpace
from ..linsolve import PerfCounters
from ..mesh import unit_square
from ..mms_verify import MMSProblem, PerturbationEnsemble

logger = logging.getLogger(__name__)

__all__ = []


__all__.append("perf_report")
def perf_report(counters, J=None, wall_clock=None):
    '''
    Flat report of a run's counters: totals, per-step rates and timings.
    With J given, the expected per-step rates of the shared scheme are added for comparison.
    '''
    report = counters.as_dict()
    for key, value in counters.per_step().items():
        report[f'{key}_per_step'] = value
    if J is not None:
        report['expected_solves_per_step'] = 2 * J
    if wall_clock is not None:
        report['wall_clock'] = wall_clock
    return report


__all__.append("BenchmarkResult")
class BenchmarkResult:
    '''
    Counters and timings of the same run with shared matrices and with one matrix per member
    '''

    def __init__(self, shared, naive, shared_time, naive_time):
        self.shared = shared
        self.naive = naive
        self.shared_time = shared_time
        self.naive_time = naive_time

    @property
    def speedup(self):
        return self.naive_time / self.shared_time if self.shared_time > 0. else float('inf')

    def report(self):
        out = {'speedup': self.speedup}
        for name, counters, elapsed in (('shared', self.shared, self.shared_time),
                                        ('naive', self.naive, self.naive_time)):
            for key, value in perf_report(counters, wall_clock=elapsed).items():
                out[f'{name}_{key}'] = value
        return out


__all__.append("benchmark_sharing")
def benchmark_sharing(n=16, J=4, M=8, eps=1e-3, nu=0.01, nu_m=0.001, T=1e-3, solver='direct'):
    '''
    Time M steps (backward-Euler start included) of the manufactured ensemble on unit_square(n)
    with matrix sharing and without.

    Returns:
        BenchmarkResult
    '''
    space = MixedSpace(unit_square(n))
    phys = PhysParams(nu, nu_m)
    problem = MMSProblem(phys, PerturbationEnsemble(eps, J))
    times = TimeParams(T / M, T)

    results = {}
    for naive in (False, True):
        counters = PerfCounters()
        scheme = SchemeParams(J=J, solver=solver, naive=naive)
        stepper = EnsembleStepper(space, problem, phys, times, scheme, counters)
        start = time.perf_counter()
        stepper.run(keep_history=False)
        results[naive] = (counters, time.perf_counter() - start)
        logger.info(f'{"naive" if naive else "shared"}: {results[naive][1]:.3f}s, {counters.as_dict()}')

    benchmark = BenchmarkResult(results[False][0], results[True][0], results[False][1], results[True][1])
    logger.info(f'speedup of shared matrices over naive assembly: {benchmark.speedup:.2f}')
    return benchmark
