'''
Physical, time-discretization and scheme settings of an ensemble run.
'''

import logging

from ..exceptions import InvalidArgumentError
from ..fem import CONVECTION_FORMS, STANDARD
from ..linsolve import BACKENDS, DIRECT

logger = logging.getLogger(__name__)

__all__ = []

BACKWARD_EULER = 'be'
__all__.append("BACKWARD_EULER")
EXACT = 'exact'
__all__.append("EXACT")
BOOTSTRAPS = (BACKWARD_EULER, EXACT)
__all__.append("BOOTSTRAPS")

SECOND_ORDER = 'second'
__all__.append("SECOND_ORDER")
FIRST_ORDER = 'first'
__all__.append("FIRST_ORDER")
EXTRAPOLATIONS = (SECOND_ORDER, FIRST_ORDER)
__all__.append("EXTRAPOLATIONS")


__all__.append("PhysParams")
class PhysParams:
    '''
    Viscosity nu and magnetic resistivity nu_m; alpha = nu + nu_m - |nu - nu_m| is the
    coercivity margin left after the cross-diffusion term is lagged.
    '''

    def __init__(self, nu, nu_m):
        if not nu > 0. or not nu_m > 0.:
            raise InvalidArgumentError(f'nu and nu_m must be positive, got nu={nu}, nu_m={nu_m}')
        self.nu = float(nu)
        self.nu_m = float(nu_m)
        self.alpha = self.nu + self.nu_m - abs(self.nu - self.nu_m)

    @property
    def diffusion(self):
        '''implicit diffusion coefficient (nu + nu_m) / 2'''
        return 0.5 * (self.nu + self.nu_m)

    @property
    def cross_diffusion(self):
        '''lagged cross-diffusion coefficient (nu - nu_m) / 2'''
        return 0.5 * (self.nu - self.nu_m)

    def __repr__(self):
        return f'PhysParams(nu={self.nu}, nu_m={self.nu_m}, alpha={self.alpha})'


__all__.append("TimeParams")
class TimeParams:
    '''
    Step size dt and end time T; T must be an integer number M of steps.
    '''

    def __init__(self, dt, T):
        if not dt > 0. or not T > 0.:
            raise InvalidArgumentError(f'dt and T must be positive, got dt={dt}, T={T}')
        self.dt = float(dt)
        self.T = float(T)
        self.M = int(round(self.T / self.dt))
        if self.M < 1 or abs(self.M * self.dt - self.T) > 1e-12:
            raise InvalidArgumentError(f'T={T} is not a whole number of steps dt={dt}')

    def time(self, n):
        return n * self.dt

    def __repr__(self):
        return f'TimeParams(dt={self.dt}, T={self.T}, M={self.M})'


__all__.append("SchemeParams")
class SchemeParams:
    '''
    Ensemble size and the algorithmic switches of the decoupled scheme.

    Args:
        J (int): ensemble size
        convection (str): 'standard' or 'skew'
        bootstrap (str): 'be' (one backward-Euler step) or 'exact' (interpolate the exact solution at t^1)
        solver (str): 'direct' or 'iterative'
        threads (int): worker threads for the two sub-steps and the member solves
        naive (bool): assemble and factor once per member instead of once per sub-step
        extrapolation (str): 'second' (2u^n - u^{n-1}) or 'first' (u^n, the lagged first-order variant)
        c_const, ci_const (float): constants of the time-step restriction monitor
        check_divergence (bool): raise if a solve leaves a discrete divergence residual above divergence_tol
    '''

    def __init__(self, J=4, convection=STANDARD, bootstrap=BACKWARD_EULER, solver=DIRECT, threads=1,
                 naive=False, extrapolation=SECOND_ORDER, c_const=1., ci_const=1.,
                 check_divergence=True, divergence_tol=1e-8):
        if int(J) < 1:
            raise InvalidArgumentError(f'ensemble size must be at least 1, got J={J}')
        if convection not in CONVECTION_FORMS:
            raise InvalidArgumentError(f'unknown convection form "{convection}"')
        if bootstrap not in BOOTSTRAPS:
            raise InvalidArgumentError(f'unknown bootstrap "{bootstrap}", expected one of {BOOTSTRAPS}')
        if solver not in BACKENDS:
            raise InvalidArgumentError(f'unknown solver "{solver}", expected one of {BACKENDS}')
        if extrapolation not in EXTRAPOLATIONS:
            raise InvalidArgumentError(f'unknown extrapolation "{extrapolation}", expected one of {EXTRAPOLATIONS}')
        if int(threads) < 1:
            raise InvalidArgumentError(f'thread count must be at least 1, got {threads}')
        self.J = int(J)
        self.convection = convection
        self.bootstrap = bootstrap
        self.solver = solver
        self.threads = int(threads)
        self.naive = bool(naive)
        self.extrapolation = extrapolation
        self.c_const = float(c_const)
        self.ci_const = float(ci_const)
        self.check_divergence = bool(check_divergence)
        self.divergence_tol = float(divergence_tol)

    def __repr__(self):
        return (f'SchemeParams(J={self.J}, convection={self.convection}, bootstrap={self.bootstrap}, '
                f'solver={self.solver}, threads={self.threads}, naive={self.naive}, '
                f'extrapolation={self.extrapolation})')
