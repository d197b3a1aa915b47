'''
Manufactured Elsasser solution on the unit square and its perturbed ensemble.

    v = (cos y + s sin y, sin x + s cos x)
    w = (cos y - s sin y, sin x - s cos x),   s = 1 + t
    p = (x - y)(1 + t),  lambda = 0  (so q = r = p)

Member j scales v and w by member_factor(j, eps); the pressure is the same for every member.
'''

import logging
import numpy as np

from ..exceptions import InvalidArgumentError
from ..ensemble_scheme import EnsembleProblem

logger = logging.getLogger(__name__)

__all__ = []


def _zeros(x, y):
    return np.zeros(np.broadcast(x, y).shape)


__all__.append("ManufacturedSolution")
class ManufacturedSolution:
    '''
    Closed forms of the fields and their derivatives.

    Vector fields return arrays (2, ...), gradients (2, 2, ...) with [i, k] = d_k of component i.
    '''

    @staticmethod
    def _s(t):
        return 1. + t

    def v(self, x, y, t):
        s = self._s(t)
        return np.stack(np.broadcast_arrays(np.cos(y) + s * np.sin(y), np.sin(x) + s * np.cos(x)))

    def w(self, x, y, t):
        s = self._s(t)
        return np.stack(np.broadcast_arrays(np.cos(y) - s * np.sin(y), np.sin(x) - s * np.cos(x)))

    def grad_v(self, x, y, t):
        s = self._s(t)
        zero = _zeros(x, y)
        return np.array([[zero, -np.sin(y) + s * np.cos(y) + zero],
                         [np.cos(x) - s * np.sin(x) + zero, zero]])

    def grad_w(self, x, y, t):
        s = self._s(t)
        zero = _zeros(x, y)
        return np.array([[zero, -np.sin(y) - s * np.cos(y) + zero],
                         [np.cos(x) + s * np.sin(x) + zero, zero]])

    def v_t(self, x, y, t):
        return np.stack(np.broadcast_arrays(np.sin(y) + _zeros(x, y), np.cos(x) + _zeros(x, y)))

    def w_t(self, x, y, t):
        return -self.v_t(x, y, t)

    def laplacian_v(self, x, y, t):
        return -self.v(x, y, t)

    def laplacian_w(self, x, y, t):
        return -self.w(x, y, t)

    def p(self, x, y, t):
        return (x - y) * (1. + t)

    def grad_p(self, x, y, t):
        zero = _zeros(x, y)
        return np.array([zero + (1. + t), zero - (1. + t)])

    def lam(self, x, y, t):
        return _zeros(x, y)

    def divergence(self, field, x, y, t):
        '''divergence of 'v' or 'w' from the analytic gradient'''
        grad = self.grad_v(x, y, t) if field == 'v' else self.grad_w(x, y, t)
        return grad[0, 0] + grad[1, 1]


__all__.append("member_factor")
def member_factor(j, eps):
    '''
    Scale of member j = 1, 2, 3, ...: 1 + eps, 1 - eps, 1 + 2 eps, 1 - 2 eps, ...
    '''
    if j < 1:
        raise InvalidArgumentError(f'members are numbered from 1, got {j}')
    k = (j + 1) // 2
    return 1. + (-1)**(j - 1) * k * eps


__all__.append("PerturbationEnsemble")
class PerturbationEnsemble:
    '''
    J members with factors member_factor(j, eps); the factors of each +/- pair sum to 2.
    '''

    def __init__(self, eps, J=4):
        if int(J) < 1:
            raise InvalidArgumentError(f'ensemble size must be at least 1, got J={J}')
        self.eps = float(eps)
        self.J = int(J)
        self.factors = np.array([member_factor(j, self.eps) for j in range(1, self.J + 1)])

    @property
    def mean_factor(self):
        return float(self.factors.mean())

    def factor(self, j):
        return self.factors[j - 1]

    def __repr__(self):
        return f'PerturbationEnsemble(eps={self.eps}, J={self.J})'


__all__.append("forcing")
def forcing(j, t, x, y, ensemble, phys, solution=None):
    '''
    (f1, f2) of member j, the residual of the Elsasser equations at its scaled fields:

        f1 = c v_t + c^2 w.grad v + grad q - (nu+nu_m)/2 c lap v - (nu-nu_m)/2 c lap w
        f2 = c w_t + c^2 v.grad w + grad r - (nu+nu_m)/2 c lap w - (nu-nu_m)/2 c lap v

    with c the member factor and q = r = p.
    '''
    solution = solution if solution is not None else ManufacturedSolution()
    c = ensemble.factor(j)
    v, w = solution.v(x, y, t), solution.w(x, y, t)
    grad_v, grad_w = solution.grad_v(x, y, t), solution.grad_w(x, y, t)
    grad_p = solution.grad_p(x, y, t)
    lap_v, lap_w = solution.laplacian_v(x, y, t), solution.laplacian_w(x, y, t)

    w_dot_grad_v = np.einsum('k...,ik...->i...', w, grad_v)
    v_dot_grad_w = np.einsum('k...,ik...->i...', v, grad_w)

    f1 = (c * solution.v_t(x, y, t) + c * c * w_dot_grad_v + grad_p
          - phys.diffusion * c * lap_v - phys.cross_diffusion * c * lap_w)
    f2 = (c * solution.w_t(x, y, t) + c * c * v_dot_grad_w + grad_p
          - phys.diffusion * c * lap_w - phys.cross_diffusion * c * lap_v)
    return f1, f2


__all__.append("MMSProblem")
class MMSProblem(EnsembleProblem):
    '''
    Perturbed manufactured ensemble with inhomogeneous Dirichlet data on the unit square
    '''
    has_exact_solution = True

    def __init__(self, phys, ensemble, solution=None):
        EnsembleProblem.__init__(self, ensemble.J)
        self.phys = phys
        self.ensemble = ensemble
        self.solution = solution if solution is not None else ManufacturedSolution()

    def forcing(self, j, t, x, y):
        return forcing(j, t, x, y, self.ensemble, self.phys, self.solution)

    def initial(self, j, t, x, y):
        c = self.ensemble.factor(j)
        return c * self.solution.v(x, y, t), c * self.solution.w(x, y, t)

    def boundary_values(self, j, tag, t, x, y):
        return self.initial(j, t, x, y)

    def pressure(self, j, t, x, y):
        p = self.solution.p(x, y, t)
        return p, p

    def exact_mean(self, t, x, y):
        '''(<v>, <w>) of the exact member fields'''
        c = self.ensemble.mean_factor
        return c * self.solution.v(x, y, t), c * self.solution.w(x, y, t)

    def exact_mean_gradients(self, t, x, y):
        c = self.ensemble.mean_factor
        return c * self.solution.grad_v(x, y, t), c * self.solution.grad_w(x, y, t)
