'''
Taylor-Hood Q2/Q1 space on a quadrilateral mesh: DOF numbering, cell geometry at quadrature
points, Dirichlet node sets, interpolation and evaluation helpers.

Velocity-type unknowns are component-blocked, [x-components of all Q2 nodes, y-components],
so n_u = 2 * n_nodes. Q2 nodes are numbered vertices first, then facet midpoints, then cell
centres. Pressure-type unknowns live on the mesh vertices.
'''

import logging
import numpy as np

from ..exceptions import InvalidArgumentError
from ..mesh import BOUNDARY_TAGS
from .reference_element import Quadrature, basis_eval, Q1, Q2

logger = logging.getLogger(__name__)

__all__ = []

# pressure DOF fixed to zero to remove the constant mode
PINNED_PRESSURE_DOF = 0
__all__.append("PINNED_PRESSURE_DOF")


__all__.append("CellGeometry")
class CellGeometry:
    '''
    Bilinear cell maps evaluated at the points of one quadrature rule.

    Attributes:
        points (C,nq,2): physical quadrature points
        weights (C,nq): quadrature weight times Jacobian determinant
        q2_values (nq,9), q2_gradients (C,nq,9,2): Q2 basis and physical gradients
        q1_values (nq,4), q1_gradients (C,nq,4,2): Q1 basis and physical gradients
    '''

    def __init__(self, mesh, quadrature):
        corners = mesh.vertices[mesh.cells]
        self.q1_values, q1_ref = basis_eval(Q1, quadrature.points)
        self.q2_values, q2_ref = basis_eval(Q2, quadrature.points)

        self.points = np.einsum('qa,cai->cqi', self.q1_values, corners)
        jac = np.einsum('cai,qak->cqik', corners, q1_ref)
        det = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
        inv = np.empty_like(jac)
        inv[..., 0, 0] = jac[..., 1, 1] / det
        inv[..., 0, 1] = -jac[..., 0, 1] / det
        inv[..., 1, 0] = -jac[..., 1, 0] / det
        inv[..., 1, 1] = jac[..., 0, 0] / det

        self.weights = det * quadrature.weights
        self.q2_gradients = np.einsum('qbk,cqki->cqbi', q2_ref, inv)
        self.q1_gradients = np.einsum('qbk,cqki->cqbi', q1_ref, inv)


__all__.append("MixedSpace")
class MixedSpace:
    '''
    Q2 vector field + Q1 scalar field on one mesh. Immutable after construction.
    '''

    def __init__(self, mesh, quadrature=None):
        '''
        Args:
            mesh (Mesh): the mesh
            quadrature (Quadrature): assembly rule, 3x3 Gauss by default
        '''
        self.mesh = mesh
        self.quadrature = quadrature if quadrature is not None else Quadrature(3)

        nv, nf, nc = mesh.n_vertices, mesh.n_facets, mesh.n_cells
        self.n_nodes = nv + nf + nc
        self.n_u = 2 * self.n_nodes
        self.n_p = nv
        self.cell_nodes = np.column_stack([mesh.cells, nv + mesh.cell_facets, nv + nf + np.arange(nc)])
        self.cell_pressure = mesh.cells
        self.node_coords = np.vstack([
            mesh.vertices,
            mesh.vertices[mesh.facets].mean(axis=1),
            mesh.vertices[mesh.cells].mean(axis=1),
        ])

        self._geometries = {}
        self.geometry = self.geometry_for(self.quadrature)
        self.pressure_weights = np.bincount(
            self.cell_pressure.ravel(),
            weights=np.einsum('cq,qa->ca', self.geometry.weights, self.geometry.q1_values).ravel(),
            minlength=self.n_p)
        self.area = float(self.pressure_weights.sum())

        self._resolve_dirichlet_nodes()
        logger.debug(f'space: n_u={self.n_u}, n_p={self.n_p}, constrained nodes={len(self.dirichlet_nodes)}')

    def __repr__(self):
        return f'MixedSpace(n_u={self.n_u}, n_p={self.n_p}, mesh={self.mesh!r})'

    def geometry_for(self, quadrature):
        '''Cell geometry for a quadrature rule, cached per rule size'''
        if quadrature.npoints not in self._geometries:
            self._geometries[quadrature.npoints] = CellGeometry(self.mesh, quadrature)
        return self._geometries[quadrature.npoints]

    def _resolve_dirichlet_nodes(self):
        '''
        Every boundary Q2 node gets exactly one tag. Where facets of different tags meet, the tag
        later in BOUNDARY_TAGS wins, so inlet/outlet data take precedence over walls at corners.
        '''
        nv = self.mesh.n_vertices
        node_tag = {}
        for tag in BOUNDARY_TAGS:
            facets = self.mesh.boundary_facets(tag)
            nodes = np.concatenate([self.mesh.facets[facets].ravel(), nv + facets])
            for node in np.unique(nodes).tolist():
                node_tag[node] = tag
        self.dirichlet_nodes = np.array(sorted(node_tag), dtype=np.int64)
        self.dirichlet_node_tags = np.array([node_tag[n] for n in self.dirichlet_nodes.tolist()], dtype='<U8')

    def boundary_nodes(self, tag=None):
        '''Q2 nodes carrying Dirichlet data, optionally those resolved to one tag'''
        if tag is None:
            return self.dirichlet_nodes
        return self.dirichlet_nodes[self.dirichlet_node_tags == tag]

    @property
    def dirichlet_dofs(self):
        '''Constrained velocity DOFs: x-components then y-components of the boundary nodes'''
        return np.concatenate([self.dirichlet_nodes, self.n_nodes + self.dirichlet_nodes])

    def split(self, u):
        '''x and y component views of a velocity vector'''
        u = np.asarray(u)
        if u.shape[-1] != self.n_u:
            raise InvalidArgumentError(f'velocity vector has length {u.shape[-1]}, expected {self.n_u}')
        return u[..., :self.n_nodes], u[..., self.n_nodes:]

    def interpolate_velocity(self, fn, t=0.):
        '''
        Nodal Q2 interpolant of fn(x, y, t) -> (fx, fy)
        '''
        fx, fy = fn(self.node_coords[:, 0], self.node_coords[:, 1], t)
        return np.concatenate([np.broadcast_to(fx, self.n_nodes), np.broadcast_to(fy, self.n_nodes)]).astype(float)

    def interpolate_pressure(self, fn, t=0.):
        '''Nodal Q1 interpolant of fn(x, y, t) -> scalar'''
        vertices = self.mesh.vertices
        return np.broadcast_to(fn(vertices[:, 0], vertices[:, 1], t), self.n_p).astype(float)

    def zero_mean_pressure(self, p):
        '''Shift a pressure vector so its integral vanishes'''
        return p - np.dot(self.pressure_weights, p) / self.area

    def evaluate_velocity(self, u, quadrature=None):
        '''
        Values (C,nq,2) and gradients (C,nq,2,2), [..., i, k] = d u_i / d x_k, at quadrature points
        '''
        geometry = self.geometry if quadrature is None else self.geometry_for(quadrature)
        ux, uy = self.split(u)
        nodal = np.stack([ux[self.cell_nodes], uy[self.cell_nodes]], axis=-1)
        values = np.einsum('qb,cbi->cqi', geometry.q2_values, nodal)
        gradients = np.einsum('cbi,cqbk->cqik', nodal, geometry.q2_gradients)
        return values, gradients

    def error_norms_against(self, u, exact_value, exact_gradient, t, quadrature=None):
        '''
        L2 norm and H1 seminorm of (exact - u_h) by quadrature.

        Args:
            exact_value (callable): (x, y, t) -> array (2, ...)
            exact_gradient (callable): (x, y, t) -> array (2, 2, ...), [i, k] = d u_i / d x_k
        Returns:
            (l2, h1_seminorm)
        '''
        quadrature = quadrature if quadrature is not None else Quadrature(5)
        geometry = self.geometry_for(quadrature)
        values, gradients = self.evaluate_velocity(u, quadrature)
        x, y = geometry.points[..., 0], geometry.points[..., 1]
        value_error = np.moveaxis(np.asarray(exact_value(x, y, t)), 0, -1) - values
        gradient_error = np.moveaxis(np.asarray(exact_gradient(x, y, t)), (0, 1), (-2, -1)) - gradients
        l2 = np.sqrt(np.sum(geometry.weights * np.sum(value_error**2, axis=-1)))
        h1 = np.sqrt(np.sum(geometry.weights * np.sum(gradient_error**2, axis=(-2, -1))))
        return l2, h1
