'''
Structured quadrilateral meshes with tagged boundary facets.

Two domains are provided: the unit square and the 40x10 channel with a unit step cut out of
the bottom wall at 5 <= x <= 6. Meshes are immutable after construction.
'''

import logging
import numpy as np

from ..exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

__all__ = []

INTERIOR = 'interior'
__all__.append("INTERIOR")
BOUNDARY_TAGS = ('wall', 'inlet', 'outlet', 'step')
__all__.append("BOUNDARY_TAGS")

CHANNEL_LENGTH = 40.
__all__.append("CHANNEL_LENGTH")
CHANNEL_HEIGHT = 10.
__all__.append("CHANNEL_HEIGHT")
STEP_BOX = (5., 6., 0., 1.) # x0, x1, y0, y1
__all__.append("STEP_BOX")

# local edge k joins local corners k and k+1
_LOCAL_EDGES = np.array([[0, 1], [1, 2], [2, 3], [3, 0]])


__all__.append("Mesh")
class Mesh:
    '''
    Conforming quadrilateral mesh.

    Attributes:
        vertices (ndarray (N,2)): vertex coordinates
        cells (ndarray (C,4)): vertex indices, counterclockwise
        facets (ndarray (F,2)): vertex pairs, sorted within each pair
        facet_tags (ndarray (F,)): 'interior' or one of BOUNDARY_TAGS
        cell_facets (ndarray (C,4)): facet index of local edge k (corners k, k+1)
        h_max (float): largest cell diameter
        h_edge (float): longest cell edge, 1/n on unit_square(n)
    '''

    def __init__(self, vertices, cells, tag_boundary):
        '''
        Args:
            vertices (array-like (N,2)): coordinates
            cells (array-like (C,4)): counterclockwise vertex indices
            tag_boundary (callable): maps (boundary facet pairs (B,2), vertices) to B tags
        '''
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.cells = np.ascontiguousarray(cells, dtype=np.int64)
        if self.cells.ndim != 2 or self.cells.shape[1] != 4 or len(self.cells) == 0:
            raise InvalidArgumentError('cells must be a nonempty (C,4) array')

        edges = np.sort(self.cells[:, _LOCAL_EDGES].reshape(-1, 2), axis=1)
        facets, inverse, counts = np.unique(edges, axis=0, return_inverse=True, return_counts=True)
        if np.any(counts > 2):
            raise InvalidArgumentError('non-conforming mesh: a facet is shared by more than two cells')
        self.facets = facets
        self.cell_facets = np.asarray(inverse).reshape(len(self.cells), 4)

        self.facet_tags = np.full(len(facets), INTERIOR, dtype='<U8')
        on_boundary = counts == 1
        self.facet_tags[on_boundary] = tag_boundary(facets[on_boundary], self.vertices)

        corners = self.vertices[self.cells]
        pairs = [(a, b) for a in range(4) for b in range(a+1, 4)]
        diameters = np.max([np.linalg.norm(corners[:, a] - corners[:, b], axis=1) for a, b in pairs], axis=0)
        self.h_max = float(diameters.max())
        self.h_edge = float(np.linalg.norm(np.diff(self.vertices[facets], axis=1)[:, 0], axis=1).max())

        if np.any(self.corner_jacobians() <= 0.):
            raise InvalidArgumentError('degenerate or clockwise cell found')
        logger.debug(f'mesh with {self.n_cells} cells, {self.n_vertices} vertices, h_max={self.h_max:.4g}')

    def __repr__(self):
        return f'Mesh(cells={self.n_cells}, vertices={self.n_vertices}, h_max={self.h_max:.4g}, tags={self.tags_present()})'

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_facets(self):
        return len(self.facets)

    def cell_areas(self):
        '''Shoelace area of every cell'''
        x = self.vertices[self.cells, 0]
        y = self.vertices[self.cells, 1]
        return 0.5 * np.sum(x * np.roll(y, -1, axis=1) - np.roll(x, -1, axis=1) * y, axis=1)

    def corner_jacobians(self):
        '''
        Jacobian determinant of the bilinear cell map at each of the 4 corners, shape (C,4).
        At corner k it is the cross product of the two edges leaving that corner.
        '''
        corners = self.vertices[self.cells]
        forward = np.roll(corners, -1, axis=1) - corners
        backward = np.roll(corners, 1, axis=1) - corners
        return forward[..., 0] * backward[..., 1] - forward[..., 1] * backward[..., 0]

    def boundary_facets(self, tag=None):
        '''Indices of boundary facets, optionally restricted to one tag'''
        if tag is None:
            return np.flatnonzero(self.facet_tags != INTERIOR)
        return np.flatnonzero(self.facet_tags == tag)

    def tags_present(self):
        '''Sorted boundary tags that occur on this mesh'''
        return sorted(set(self.facet_tags[self.facet_tags != INTERIOR].tolist()))


def _grid(xs, ys, keep_cell):
    '''
    Tensor grid vertices and counterclockwise cells, dropping cells where keep_cell is False
    and renumbering the vertices that are left.
    '''
    nx, ny = len(xs) - 1, len(ys) - 1
    gx, gy = np.meshgrid(xs, ys)
    vertices = np.column_stack([gx.ravel(), gy.ravel()])
    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    i, j = i.ravel(), j.ravel()
    base = j * (nx + 1) + i
    cells = np.column_stack([base, base + 1, base + nx + 2, base + nx + 1])
    centers = vertices[cells].mean(axis=1)
    cells = cells[keep_cell(centers[:, 0], centers[:, 1])]

    used = np.unique(cells)
    renumber = np.full(len(vertices), -1, dtype=np.int64)
    renumber[used] = np.arange(len(used))
    return vertices[used], renumber[cells]


__all__.append("unit_square")
def unit_square(n):
    '''
    n x n mesh of (0,1)^2; every boundary facet is tagged 'wall'.
    '''
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f'unit_square needs n >= 1, got {n}')
    n = int(n)
    xs = np.linspace(0., 1., n + 1)
    vertices, cells = _grid(xs, xs, lambda x, y: np.ones(len(x), dtype=bool))
    return Mesh(vertices, cells, lambda facets, verts: np.full(len(facets), 'wall'))


def _channel_tagger(facets, vertices):
    midpoints = vertices[facets].mean(axis=1)
    mx, my = midpoints[:, 0], midpoints[:, 1]
    tol = 1e-9 * CHANNEL_LENGTH
    x0, x1, y0, y1 = STEP_BOX
    on_step_sides = ((np.abs(mx - x0) < tol) | (np.abs(mx - x1) < tol)) & (my < y1 + tol)
    on_step_top = (np.abs(my - y1) < tol) & (mx > x0 - tol) & (mx < x1 + tol)

    tags = np.full(len(facets), 'wall', dtype='<U8')
    tags[on_step_sides | on_step_top] = 'step'
    tags[np.abs(mx) < tol] = 'inlet'
    tags[np.abs(mx - CHANNEL_LENGTH) < tol] = 'outlet'
    return tags


__all__.append("step_channel")
def step_channel(cells_per_unit):
    '''
    Uniform mesh of [0,40]x[0,10] minus the step [5,6]x[0,1].

    Facets on x=0 are 'inlet', on x=40 'outlet', on the three exposed step faces 'step',
    everything else on the boundary 'wall'.
    '''
    if int(cells_per_unit) != cells_per_unit or cells_per_unit < 1:
        raise InvalidArgumentError(f'step_channel needs cells_per_unit >= 1, got {cells_per_unit}')
    c = int(cells_per_unit)
    xs = np.linspace(0., CHANNEL_LENGTH, int(CHANNEL_LENGTH) * c + 1)
    ys = np.linspace(0., CHANNEL_HEIGHT, int(CHANNEL_HEIGHT) * c + 1)
    x0, x1, y0, y1 = STEP_BOX
    keep = lambda x, y: ~((x > x0) & (x < x1) & (y > y0) & (y < y1))
    vertices, cells = _grid(xs, ys, keep)
    return Mesh(vertices, cells, _channel_tagger)


__all__.append("refine")
def refine(m):
    '''
    Uniform refinement: every cell is split into 4 at its edge midpoints and centre.
    Boundary tags are inherited by the two halves of each boundary facet.
    '''
    nv, nf = m.n_vertices, m.n_facets
    vertices = np.vstack([
        m.vertices,
        m.vertices[m.facets].mean(axis=1),
        m.vertices[m.cells].mean(axis=1),
    ])
    v = m.cells
    e = nv + m.cell_facets
    c = nv + nf + np.arange(m.n_cells)
    cells = np.concatenate([
        np.column_stack([v[:, 0], e[:, 0], c, e[:, 3]]),
        np.column_stack([e[:, 0], v[:, 1], e[:, 1], c]),
        np.column_stack([c, e[:, 1], v[:, 2], e[:, 2]]),
        np.column_stack([e[:, 3], c, e[:, 2], v[:, 3]]),
    ])

    inherited = {}
    for f in m.boundary_facets():
        a, b = m.facets[f]
        mid = nv + f
        inherited[(min(a, mid), max(a, mid))] = m.facet_tags[f]
        inherited[(min(b, mid), max(b, mid))] = m.facet_tags[f]

    def tag_children(facets, verts):
        return np.array([inherited[(int(a), int(b))] for a, b in facets], dtype='<U8')

    return Mesh(vertices, cells, tag_children)
