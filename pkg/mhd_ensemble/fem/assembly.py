'''
Assembly of the forms of the decoupled Oseen sub-steps on a MixedSpace.

Element matrices are scattered onto a fixed CSR pattern with np.bincount, so every matrix of a
given kind has the same structure and the summation order is the cell order, which makes
assembly bit-reproducible.
'''

import logging
import numpy as np
import scipy.sparse as sp

from ..exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

__all__ = []

STANDARD = 'standard'
__all__.append("STANDARD")
SKEW = 'skew'
__all__.append("SKEW")
CONVECTION_FORMS = (STANDARD, SKEW)
__all__.append("CONVECTION_FORMS")


__all__.append("ScatterPattern")
class ScatterPattern:
    '''
    Fixed CSR structure for element blocks with rows (C,a) and columns (C,b).
    '''

    def __init__(self, rows, cols, shape):
        n_cells, a = rows.shape
        b = cols.shape[1]
        r = np.broadcast_to(rows[:, :, None], (n_cells, a, b)).ravel()
        c = np.broadcast_to(cols[:, None, :], (n_cells, a, b)).ravel()
        keys, self.scatter = np.unique(r * shape[1] + c, return_inverse=True)
        self.scatter = self.scatter.ravel()
        self.shape = shape
        self.nnz = len(keys)
        self.indices = (keys % shape[1]).astype(np.int32)
        counts = np.bincount(keys // shape[1], minlength=shape[0])
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int32)

    def assemble(self, local):
        '''local element blocks (C,a,b) -> csr_matrix'''
        data = np.bincount(self.scatter, weights=local.ravel(), minlength=self.nnz)
        return sp.csr_matrix((data, self.indices.copy(), self.indptr.copy()), shape=self.shape)


def _patterns(space):
    ''' scatter patterns cached on the space '''
    if not hasattr(space, '_scatter_patterns'):
        space._scatter_patterns = {
            'q2q2': ScatterPattern(space.cell_nodes, space.cell_nodes, (space.n_nodes, space.n_nodes)),
            'q1q2': ScatterPattern(space.cell_pressure, space.cell_nodes, (space.n_p, space.n_nodes)),
            'q1q1': ScatterPattern(space.cell_pressure, space.cell_pressure, (space.n_p, space.n_p)),
        }
    return space._scatter_patterns


def _check_velocity(space, a, name='coefficient'):
    a = np.asarray(a, dtype=float)
    if a.shape != (space.n_u,):
        raise InvalidArgumentError(f'{name} has shape {a.shape}, expected ({space.n_u},)')
    return a


def _check_form(form):
    if form not in CONVECTION_FORMS:
        raise InvalidArgumentError(f'unknown convection form "{form}", expected one of {CONVECTION_FORMS}')


def _vector_block(scalar):
    return sp.block_diag((scalar, scalar), format='csr')


__all__.append("scalar_mass")
def scalar_mass(space):
    '''(phi_b, phi_a) on the scalar Q2 nodes'''
    g = space.geometry
    local = np.einsum('cq,qa,qb->cab', g.weights, g.q2_values, g.q2_values)
    return _patterns(space)['q2q2'].assemble(local)


__all__.append("scalar_stiffness")
def scalar_stiffness(space):
    '''(grad phi_b, grad phi_a) on the scalar Q2 nodes'''
    g = space.geometry
    local = np.einsum('cq,cqai,cqbi->cab', g.weights, g.q2_gradients, g.q2_gradients)
    return _patterns(space)['q2q2'].assemble(local)


def _advection_at_points(space, a):
    ''' a . grad phi_b at quadrature points, (C,nq,9) '''
    g = space.geometry
    a_values, _ = space.evaluate_velocity(a)
    return np.einsum('cqi,cqbi->cqb', a_values, g.q2_gradients)


__all__.append("scalar_convection")
def scalar_convection(space, a, form=STANDARD):
    '''
    (a . grad phi_b, phi_a) on the scalar Q2 nodes; row = test a, column = trial b.
    The skew form is the antisymmetric part of the element matrices.
    '''
    _check_form(form)
    a = _check_velocity(space, a)
    g = space.geometry
    local = np.einsum('cq,qa,cqb->cab', g.weights, g.q2_values, _advection_at_points(space, a))
    if form == SKEW:
        local = 0.5 * (local - local.transpose(0, 2, 1))
    return _patterns(space)['q2q2'].assemble(local)


__all__.append("assemble_mass")
def assemble_mass(space):
    '''
    Velocity mass matrix (n_u x n_u), symmetric positive definite
    '''
    return _vector_block(scalar_mass(space))


__all__.append("assemble_stiffness")
def assemble_stiffness(space):
    '''
    Velocity stiffness matrix for (grad v, grad chi), without viscosity factor.
    Symmetric positive semidefinite; constants per component span the nullspace.
    '''
    return _vector_block(scalar_stiffness(space))


__all__.append("assemble_convection")
def assemble_convection(space, a, form=STANDARD):
    '''
    Velocity convection matrix N(a) for (a . grad v, chi).

    With form='skew' the matrix is 1/2 (N - N^T), which agrees with
    N + 1/2 ((div a) v, chi) on test functions vanishing on the boundary and satisfies
    x^T N x = 0 for every x.
    '''
    return _vector_block(scalar_convection(space, a, form))


__all__.append("assemble_div")
def assemble_div(space):
    '''
    Pressure-velocity coupling B (n_p x n_u) with B[k, i] = -(psi_k, div phi_i)
    '''
    g = space.geometry
    pattern = _patterns(space)['q1q2']
    blocks = []
    for component in range(2):
        local = -np.einsum('cq,qk,cqb->ckb', g.weights, g.q1_values, g.q2_gradients[..., component])
        blocks.append(pattern.assemble(local))
    return sp.hstack(blocks, format='csr')


__all__.append("pressure_mass")
def pressure_mass(space):
    '''(psi_b, psi_a) on the Q1 pressure nodes'''
    g = space.geometry
    local = np.einsum('cq,qa,qb->cab', g.weights, g.q1_values, g.q1_values)
    return _patterns(space)['q1q1'].assemble(local)


__all__.append("load_vector")
def load_vector(space, gx, gy):
    '''
    (g, chi) for g given by its components at the assembly quadrature points, shapes (C,nq)
    '''
    g = space.geometry
    nodes = space.cell_nodes.ravel()
    parts = [np.bincount(nodes, weights=np.einsum('cq,cq,qa->ca', g.weights, gc, g.q2_values).ravel(),
                         minlength=space.n_nodes) for gc in (gx, gy)]
    return np.concatenate(parts)


__all__.append("l2_norm_at_points")
def l2_norm_at_points(space, gx, gy):
    '''L2 norm of a vector field given at the assembly quadrature points'''
    return float(np.sqrt(np.sum(space.geometry.weights * (gx**2 + gy**2))))


__all__.append("assemble_rhs")
def assemble_rhs(space, g, t=0.):
    '''
    Load vector of g(x, y, t) -> (gx, gy) by quadrature
    '''
    points = space.geometry.points
    gx, gy = g(points[..., 0], points[..., 1], t)
    shape = points.shape[:2]
    return load_vector(space, np.broadcast_to(gx, shape), np.broadcast_to(gy, shape))


__all__.append("convection_action")
def convection_action(space, a, u, form=STANDARD):
    '''
    N(a) u for the chosen convection form, assembled as a vector without forming N(a).
    '''
    _check_form(form)
    a = _check_velocity(space, a)
    u = _check_velocity(space, u, 'field')
    g = space.geometry
    a_values, _ = space.evaluate_velocity(a)
    u_values, u_gradients = space.evaluate_velocity(u)
    transported = np.einsum('cqk,cqik->cqi', a_values, u_gradients)
    local = np.einsum('cq,cqi,qa->cai', g.weights, transported, g.q2_values)
    if form == SKEW:
        advection = np.einsum('cqk,cqbk->cqb', a_values, g.q2_gradients)
        local = 0.5 * local - 0.5 * np.einsum('cq,cqa,cqi->cai', g.weights, advection, u_values)
    nodes = space.cell_nodes.ravel()
    return np.concatenate([np.bincount(nodes, weights=local[..., i].ravel(), minlength=space.n_nodes)
                           for i in range(2)])
