'''
Saddle-point systems for one Oseen sub-step and their Dirichlet constraints.

The unknown vector is [velocity (n_u), pressure (n_p)]. Constraints are imposed by symmetric
elimination: constrained rows and columns are zeroed, a unit diagonal is put in, and the
eliminated columns are moved to the right-hand side of every member separately. The constrained
matrix only depends on which DOFs are constrained, never on the boundary values, which is what
lets all ensemble members share one factorization.
'''

import logging
import numpy as np
import scipy.linalg
import scipy.sparse as sp

from ..exceptions import ConfigurationError, InvalidArgumentError
from .assembly import assemble_div, assemble_stiffness, pressure_mass
from .mixed_space import PINNED_PRESSURE_DOF

logger = logging.getLogger(__name__)

__all__ = []


__all__.append("saddle_point_matrix")
def saddle_point_matrix(space, scalar_block, div):
    '''
    [[S, 0, Bx^T], [0, S, By^T], [Bx, By, 0]] with S the scalar velocity block and B = [Bx By].
    The pressure block carries an explicit zero diagonal.
    '''
    zero_diagonal = sp.csr_matrix((np.zeros(space.n_p), np.arange(space.n_p), np.arange(space.n_p + 1)),
                                  shape=(space.n_p, space.n_p))
    velocity = sp.block_diag((scalar_block, scalar_block), format='csr')
    matrix = sp.bmat([[velocity, div.T], [div, zero_diagonal]], format='csr')
    matrix.sort_indices()
    return matrix


__all__.append("ConstrainedSystem")
class ConstrainedSystem:
    '''
    A saddle-point matrix with the Dirichlet DOFs of its space eliminated and pressure DOF
    PINNED_PRESSURE_DOF fixed to zero.

    Attributes:
        matrix (csr_matrix): constrained matrix, shared by every right-hand side
        dofs (ndarray): constrained velocity DOFs
        pinned (int): row of the pinned pressure DOF in the full system
    '''

    def __init__(self, space, matrix):
        n = space.n_u + space.n_p
        if matrix.shape != (n, n):
            raise InvalidArgumentError(f'system has shape {matrix.shape}, expected {(n, n)}')
        self.space = space
        self.dofs = space.dirichlet_dofs
        self.pinned = space.n_u + PINNED_PRESSURE_DOF

        constrained = np.zeros(n, dtype=bool)
        constrained[self.dofs] = True
        constrained[self.pinned] = True

        lifting = matrix.tocsc()[:, self.dofs].tocsr()
        keep = sp.diags((~constrained).astype(float))
        self._lifting = keep @ lifting

        matrix = matrix.copy()
        rows = np.repeat(np.arange(n), np.diff(matrix.indptr))
        matrix.data[constrained[rows] | constrained[matrix.indices]] = 0.
        fixed = np.flatnonzero(constrained)
        identity = sp.csr_matrix((np.ones(len(fixed)), (fixed, fixed)), shape=(n, n))
        self.matrix = (matrix + identity).tocsr()
        self.matrix.sort_indices()

    def rhs(self, load, values):
        '''
        Right-hand side for one member.

        Args:
            load (ndarray (n_u,) or (n_u+n_p,)): assembled load
            values (ndarray (len(dofs),)): boundary values on the constrained DOFs
        '''
        n = self.matrix.shape[0]
        values = np.asarray(values, dtype=float)
        if values.shape != self.dofs.shape:
            raise InvalidArgumentError(f'{values.shape} boundary values for {self.dofs.shape} constrained DOFs')
        b = np.zeros(n)
        b[:len(load)] = load
        b -= self._lifting @ values
        b[self.dofs] = values
        b[self.pinned] = 0.
        return b


__all__.append("boundary_values")
def boundary_values(space, bc, t):
    '''
    Values on space.dirichlet_dofs from per-tag functions.

    Args:
        bc (dict): tag -> callable (x, y, t) -> (gx, gy)
    Raises:
        ConfigurationError: a tag present on the mesh has no function
    '''
    missing = [tag for tag in space.mesh.tags_present() if tag not in bc]
    if missing:
        raise ConfigurationError(f'no boundary data for tagged facets: {missing}')
    nodes = space.dirichlet_nodes
    gx = np.zeros(len(nodes))
    gy = np.zeros(len(nodes))
    for tag in space.mesh.tags_present():
        which = space.dirichlet_node_tags == tag
        xy = space.node_coords[nodes[which]]
        fx, fy = bc[tag](xy[:, 0], xy[:, 1], t)
        gx[which] = fx
        gy[which] = fy
    return np.concatenate([gx, gy])


__all__.append("apply_dirichlet")
def apply_dirichlet(space, matrix, load, bc, t):
    '''
    Constrain one saddle-point system with boundary data bc at time t.

    Returns:
        (ConstrainedSystem, rhs)
    '''
    system = ConstrainedSystem(space, matrix)
    return system, system.rhs(load, boundary_values(space, bc, t))


__all__.append("divergence_residual")
def divergence_residual(space, div, v):
    '''
    ||B v|| / ||v|| over the continuity rows that are enforced (all but the pinned one;
    the pinned row carries the boundary-flux defect of interpolated Dirichlet data).
    '''
    residual = div @ v
    residual[PINNED_PRESSURE_DOF] = 0.
    norm = np.linalg.norm(v)
    if norm == 0.:
        return float(np.linalg.norm(residual))
    return float(np.linalg.norm(residual) / norm)


__all__.append("inf_sup_estimate")
def inf_sup_estimate(space):
    '''
    Smallest nonzero singular value of B between the H1-seminorm on boundary-free velocities and
    the L2 norm on pressures: the square root of the second eigenvalue of
    B K^{-1} B^T p = lambda M_p p. Dense, for small meshes only.
    '''
    free = np.setdiff1d(np.arange(space.n_u), space.dirichlet_dofs)
    stiffness = assemble_stiffness(space)[free][:, free].toarray()
    div = assemble_div(space)[:, free].toarray()
    schur = div @ scipy.linalg.solve(stiffness, div.T, assume_a='pos')
    values = scipy.linalg.eigh(0.5 * (schur + schur.T), pressure_mass(space).toarray(), eigvals_only=True)
    # constant pressures span the kernel of B^T
    beta = float(np.sqrt(max(values[1], 0.)))
    logger.debug(f'inf-sup estimate {beta:.4g} on {space!r}')
    return beta
