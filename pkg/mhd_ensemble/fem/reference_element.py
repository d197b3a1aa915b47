'''
Reference square [-1,1]^2: tensor Gauss-Legendre quadrature and the nodal Q2/Q1 bases.
'''

import logging
import numpy as np
from scipy import special

from ..exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

__all__ = []

Q2 = 'Q2scalar'
__all__.append("Q2")
Q1 = 'Q1scalar'
__all__.append("Q1")

# (ix, iy) of each Q2 node on the 1D nodes (-1, 0, 1): corners ccw, edge midpoints, centre.
# Same ordering as VTK's biquadratic quad.
Q2_NODE_LATTICE = np.array([[0, 0], [2, 0], [2, 2], [0, 2],
                            [1, 0], [2, 1], [1, 2], [0, 1],
                            [1, 1]])
__all__.append("Q2_NODE_LATTICE")
Q2_NODES = np.array([-1., 0., 1.])[Q2_NODE_LATTICE]
__all__.append("Q2_NODES")
Q1_NODES = np.array([[-1., -1.], [1., -1.], [1., 1.], [-1., 1.]])
__all__.append("Q1_NODES")


__all__.append("Quadrature")
class Quadrature:
    '''
    Tensor-product Gauss-Legendre rule on [-1,1]^2.
    npoints per direction integrates polynomials of degree 2*npoints-1 in each variable exactly.
    '''

    def __init__(self, npoints=3):
        if npoints < 1:
            raise InvalidArgumentError(f'quadrature needs at least one point, got {npoints}')
        self.npoints = npoints
        self.points_1d, self.weights_1d = special.roots_legendre(npoints)
        gx, gy = np.meshgrid(self.points_1d, self.points_1d, indexing='ij')
        self.points = np.column_stack([gx.ravel(), gy.ravel()])
        self.weights = np.outer(self.weights_1d, self.weights_1d).ravel()

    def __len__(self):
        return len(self.weights)

    def __repr__(self):
        return f'Quadrature({self.npoints}x{self.npoints})'


def _lagrange_quadratic(s):
    ''' values and derivatives of the 1D quadratic Lagrange basis on nodes -1, 0, 1 '''
    values = np.stack([0.5 * s * (s - 1.), 1. - s * s, 0.5 * s * (s + 1.)], axis=-1)
    derivs = np.stack([s - 0.5, -2. * s, s + 0.5], axis=-1)
    return values, derivs


__all__.append("basis_eval")
def basis_eval(kind, points):
    '''
    Nodal basis values and reference gradients.

    Args:
        kind (str): Q2 (9 nodes) or Q1 (4 nodes)
        points (array-like): a single reference point (2,) or an array (nq, 2)

    Returns:
        (values, gradients): shapes (nb,), (nb,2) for one point, (nq,nb), (nq,nb,2) otherwise
    '''
    points = np.asarray(points, dtype=float)
    single = points.ndim == 1
    points = np.atleast_2d(points)
    xi, eta = points[:, 0], points[:, 1]

    if kind == Q2:
        lx, dlx = _lagrange_quadratic(xi)
        ly, dly = _lagrange_quadratic(eta)
        ix, iy = Q2_NODE_LATTICE[:, 0], Q2_NODE_LATTICE[:, 1]
        values = lx[:, ix] * ly[:, iy]
        gradients = np.stack([dlx[:, ix] * ly[:, iy], lx[:, ix] * dly[:, iy]], axis=-1)
    elif kind == Q1:
        sx, sy = Q1_NODES[:, 0], Q1_NODES[:, 1]
        fx = 1. + np.outer(xi, sx)
        fy = 1. + np.outer(eta, sy)
        values = 0.25 * fx * fy
        gradients = np.stack([0.25 * sx * fy, 0.25 * fx * sy], axis=-1)
    else:
        raise InvalidArgumentError(f'unknown basis kind "{kind}"')

    if single:
        return values[0], gradients[0]
    return values, gradients
