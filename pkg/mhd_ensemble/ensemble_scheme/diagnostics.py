'''
Run diagnostics: the time-step restriction monitor, the discrete energy balance and the BDF2
polarization identity behind it.
'''

import logging
import numpy as np

from ..exceptions import InvalidArgumentError
from .elsasser import extrapolate, mean_and_fluctuations

logger = logging.getLogger(__name__)

__all__ = []


def _squared_norms(members, matrix):
    ''' x_j^T A x_j for each row of members '''
    members = np.atleast_2d(members)
    return np.einsum('ji,ji->j', members, (matrix @ members.T).T)


def _gradient_norms(members, stiffness):
    return np.sqrt(np.maximum(_squared_norms(members, stiffness), 0.))


__all__.append("fluctuation_gradient_norm")
def fluctuation_gradient_norm(state, stiffness):
    '''max_j max(||grad v_j'||, ||grad w_j'||) of the extrapolated fluctuations of a state'''
    largest = 0.
    for current, previous in ((state.v, state.v_prev), (state.w, state.w_prev)):
        _, fluct = mean_and_fluctuations(extrapolate(current, previous))
        largest = max(largest, float(_gradient_norms(fluct, stiffness).max()))
    return largest


__all__.append("monitor_dt")
def monitor_dt(state, phys, dt, h, stiffness, c_const=1., ci_const=1., quiet=False):
    '''
    Ratio of dt to the step size allowed by the stability restriction,

        rho = dt (3 (nu - nu_m)^2 C_i + 12 C^2 C_i^2 max_j max(||grad v_j'||, ||grad w_j'||)) / (alpha h^2)

    rho > 1 means the restriction is violated; this is reported, never enforced.
    h is the mesh size as a cell side, which the stepper takes from Mesh.h_edge.
    '''
    if not h > 0.:
        raise InvalidArgumentError(f'mesh size must be positive, got h={h}')
    fluct = fluctuation_gradient_norm(state, stiffness)
    numerator = 3. * (phys.nu - phys.nu_m)**2 * ci_const + 12. * c_const**2 * ci_const**2 * fluct
    rho = dt * numerator / (phys.alpha * h * h)
    if rho > 1. and not quiet:
        logger.warning(f'time-step restriction exceeded at step {state.n}: rho={rho:.4g} '
                       f'(dt={dt}, h={h:.4g}, max fluctuation gradient {fluct:.4g})')
    else:
        logger.debug(f'step {state.n}: rho={rho:.4g}')
    return rho


__all__.append("bdf2_identity_terms")
def bdf2_identity_terms(a, b, c, inner=None):
    '''
    Both sides of
        (3a - 4b + c, a) = (|a|^2 + |2a-b|^2)/2 - (|b|^2 + |2b-c|^2)/2 + |a - 2b + c|^2/2

    Args:
        inner (sparse matrix|None): Gram matrix of the inner product, Euclidean if None
    Returns:
        (lhs, rhs)
    '''
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    if inner is None:
        dot = np.dot
    else:
        def dot(x, y):
            return float(x @ (inner @ y))
    lhs = dot(3. * a - 4. * b + c, a)
    rhs = (0.5 * (dot(a, a) + dot(2. * a - b, 2. * a - b))
           - 0.5 * (dot(b, b) + dot(2. * b - c, 2. * b - c))
           + 0.5 * dot(a - 2. * b + c, a - 2. * b + c))
    return lhs, rhs


__all__.append("EnergyReport")
class EnergyReport:
    '''
    Terms of the discrete energy bound per member and per step.

    History arrays have one row per level n = 1..M and one column per member:
        norm_v, norm_w: ||v^n||^2, ||w^n||^2
        ext_v, ext_w: ||2v^n - v^{n-1}||^2, ||2w^n - w^{n-1}||^2
        dissipation: alpha dt sum_{k=2}^{n} (||grad v^k||^2 + ||grad w^k||^2)
        forcing: (12 dt / alpha) sum_{k=2}^{n} (||f1(t^k)|| + ||f2(t^k)||)

    The dual norms of the forcing are replaced by L2 norms (Poincare constant taken as 1).

    Attributes:
        lhs, rhs (J,): the two sides of the bound at the final level
        holds (J,): lhs <= rhs
    '''

    def __init__(self, norm_v, norm_w, ext_v, ext_w, dissipation, forcing):
        self.norm_v = np.asarray(norm_v, dtype=float)
        self.norm_w = np.asarray(norm_w, dtype=float)
        self.ext_v = np.asarray(ext_v, dtype=float)
        self.ext_w = np.asarray(ext_w, dtype=float)
        self.dissipation = np.asarray(dissipation, dtype=float)
        self.forcing = np.asarray(forcing, dtype=float)

        stored = self.norm_v + self.norm_w + self.ext_v + self.ext_w
        self.lhs = stored[-1] + self.dissipation[-1]
        self.rhs = stored[0] + self.forcing[-1]
        self.holds = self.lhs <= self.rhs * (1. + 1e-12)

    @property
    def n_levels(self):
        return len(self.norm_v)

    @property
    def stable(self):
        return bool(np.all(self.holds))

    def is_finite(self):
        return all(np.all(np.isfinite(x)) for x in
                   (self.norm_v, self.norm_w, self.ext_v, self.ext_w, self.dissipation, self.forcing))

    def rows(self):
        '''(n, member, norm_v, norm_w, ext_v, ext_w, dissipation, forcing) for every level and member'''
        for n in range(self.n_levels):
            for j in range(self.norm_v.shape[1]):
                yield (n + 1, j + 1, self.norm_v[n, j], self.norm_w[n, j], self.ext_v[n, j],
                       self.ext_w[n, j], self.dissipation[n, j], self.forcing[n, j])


__all__.append("EnergyAccumulator")
class EnergyAccumulator:
    '''
    Collects the energy terms while a run progresses; report() builds the EnergyReport.
    '''

    def __init__(self, mass, stiffness, phys, dt):
        self.mass = mass
        self.stiffness = stiffness
        self.phys = phys
        self.dt = dt
        self._rows = []

    def _level_terms(self, state):
        return (_squared_norms(state.v, self.mass), _squared_norms(state.w, self.mass),
                _squared_norms(extrapolate(state.v, state.v_prev), self.mass),
                _squared_norms(extrapolate(state.w, state.w_prev), self.mass))

    def start(self, state):
        '''level-1 state, holding level 0 as its previous level'''
        if state.v_prev is None:
            raise InvalidArgumentError('energy accounting starts from level 1 with level 0 attached')
        zeros = np.zeros(state.J)
        self._rows = [self._level_terms(state) + (zeros, zeros)]

    def record(self, state, forcing_norms):
        '''
        Level n+1 state and sum_j ||f1_j(t^{n+1})|| + ||f2_j(t^{n+1})|| of the step that produced it
        '''
        if not self._rows:
            raise InvalidArgumentError('call start() with the level-1 state first')
        dissipation = self._rows[-1][4] + self.phys.alpha * self.dt * (
            _squared_norms(state.v, self.stiffness) + _squared_norms(state.w, self.stiffness))
        forcing = self._rows[-1][5] + 12. * self.dt / self.phys.alpha * np.asarray(forcing_norms, dtype=float)
        self._rows.append(self._level_terms(state) + (dissipation, forcing))

    def report(self):
        if not self._rows:
            raise InvalidArgumentError('no levels recorded')
        columns = [np.array([row[k] for row in self._rows]) for k in range(6)]
        report = EnergyReport(*columns)
        if not report.stable:
            logger.warning(f'energy bound not met for members {np.flatnonzero(~report.holds) + 1}')
        return report


__all__.append("energy_report")
def energy_report(states, forcing_norms, mass, stiffness, phys, dt):
    '''
    Energy report of a stored history.

    Args:
        states (list of EnsembleState): levels 1..M, each holding its previous level
        forcing_norms (list of (J,) arrays): ||f1_j(t^n)|| + ||f2_j(t^n)|| for n = 2..M
    '''
    if len(forcing_norms) != len(states) - 1:
        raise InvalidArgumentError(f'{len(states)} levels need {len(states) - 1} forcing entries, '
                                   f'got {len(forcing_norms)}')
    accumulator = EnergyAccumulator(mass, stiffness, phys, dt)
    accumulator.start(states[0])
    for state, norms in zip(states[1:], forcing_norms):
        accumulator.record(state, norms)
    return accumulator.report()
