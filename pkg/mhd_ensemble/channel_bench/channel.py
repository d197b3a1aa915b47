'''
MHD channel flow over a forward-backward step.

The channel [0,40]x[0,10] carries the step [5,6]x[0,1]. The velocity is no-slip on walls and
step and has the parabolic profile u = (y(10-y)/25, 0) at inlet and outlet; the magnetic field
is B = (0,1) on the whole boundary. Members scale the velocity data (initial and inflow) by the
perturbation factors 1 +/- eps, 1 +/- 2 eps, ...
'''

import logging
import os

import numpy as np

from ..exceptions import InvalidArgumentError
from ..ensemble_scheme import (BACKWARD_EULER, EnsembleProblem, EnsembleStepper, PhysParams,
                               SchemeParams, TimeParams, to_elsasser)
from ..fem import STANDARD, MixedSpace
from ..linsolve import DIRECT, PerfCounters
from ..mesh import BOUNDARY_TAGS, CHANNEL_HEIGHT, step_channel
from ..mms_verify import member_factor

logger = logging.getLogger(__name__)

__all__ = []


__all__.append("inflow_profile")
def inflow_profile(y):
    '''y (10 - y) / 25: zero on the walls, 1 on the centreline'''
    return y * (CHANNEL_HEIGHT - y) / 25.


__all__.append("channel_bc")
def channel_bc(tag, x, y, t=0.):
    '''
    Physical boundary data ((ux, uy), (Bx, By)) on facets tagged tag
    '''
    if tag not in BOUNDARY_TAGS:
        raise InvalidArgumentError(f'unknown boundary tag "{tag}", expected one of {BOUNDARY_TAGS}')
    zero = np.zeros(np.broadcast(x, y).shape)
    if tag in ('inlet', 'outlet'):
        u = np.stack([inflow_profile(y) + zero, zero])
    else:
        u = np.stack([zero, zero])
    B = np.stack([zero, zero + 1.])
    return u, B


__all__.append("ChannelConfig")
class ChannelConfig:
    '''
    Settings of a channel run; defaults are the benchmark values.

    Args:
        cells_per_unit (int): mesh resolution
        dt, T (float): step size and end time
        eps (float): perturbation size, eps >= 0
        nu, nu_m (float): viscosity and magnetic resistivity
        J (int): ensemble size
        perturb_magnetic (bool): scale the B data by the member factors as well
        snapshot_interval (int): steps between snapshots (the final step is always written)
        convection, bootstrap, solver, threads, naive: scheme switches, see SchemeParams
    '''

    def __init__(self, cells_per_unit=1, dt=0.001, T=2., eps=0.001, nu=0.001, nu_m=1., J=4,
                 perturb_magnetic=False, snapshot_interval=100, convection=STANDARD,
                 bootstrap=BACKWARD_EULER, solver=DIRECT, threads=1, naive=False):
        if int(cells_per_unit) < 1 or int(snapshot_interval) < 1:
            raise InvalidArgumentError('cells_per_unit and snapshot_interval must be positive integers')
        if eps < 0.:
            raise InvalidArgumentError(f'eps must be nonnegative, got {eps}')
        self.cells_per_unit = int(cells_per_unit)
        self.snapshot_interval = int(snapshot_interval)
        self.eps = float(eps)
        self.perturb_magnetic = bool(perturb_magnetic)
        self.phys = PhysParams(nu, nu_m)
        self.time = TimeParams(dt, T)
        self.scheme = SchemeParams(J=J, convection=convection, bootstrap=bootstrap, solver=solver,
                                   threads=threads, naive=naive)

    @property
    def J(self):
        return self.scheme.J

    def __repr__(self):
        return (f'ChannelConfig(cells_per_unit={self.cells_per_unit}, eps={self.eps}, {self.phys}, '
                f'{self.time}, {self.scheme})')


__all__.append("ChannelProblem")
class ChannelProblem(EnsembleProblem):
    '''
    Unforced channel ensemble with steady, member-scaled boundary data
    '''
    has_forcing = False
    steady_boundary = True

    def __init__(self, J=4, eps=0.001, perturb_magnetic=False):
        EnsembleProblem.__init__(self, J)
        self.eps = eps
        self.perturb_magnetic = perturb_magnetic

    def _scaled(self, j, u, B):
        s = member_factor(j, self.eps)
        return to_elsasser(s * u, s * B if self.perturb_magnetic else B)

    def boundary_values(self, j, tag, t, x, y):
        return self._scaled(j, *channel_bc(tag, x, y, t))

    def initial(self, j, t, x, y):
        zero = np.zeros(np.broadcast(x, y).shape)
        u = np.stack([inflow_profile(y) + zero, zero])
        B = np.stack([zero, zero + 1.])
        return self._scaled(j, u, B)


__all__.append("boundary_flux")
def boundary_flux(space, u, tag='inlet', component=0):
    '''
    Integral of one component of a Q2 velocity vector over the facets tagged tag.
    Along each straight facet the trace is quadratic, so Simpson's rule is exact.
    '''
    mesh = space.mesh
    facets = mesh.boundary_facets(tag)
    if len(facets) == 0:
        raise InvalidArgumentError(f'no facets tagged "{tag}"')
    values = space.split(u)[component]
    ends = mesh.facets[facets]
    lengths = np.linalg.norm(mesh.vertices[ends[:, 1]] - mesh.vertices[ends[:, 0]], axis=1)
    midpoints = mesh.n_vertices + facets
    simpson = values[ends[:, 0]] + 4. * values[midpoints] + values[ends[:, 1]]
    return float(np.sum(lengths * simpson) / 6.)


__all__.append("Snapshot")
class Snapshot:
    '''
    Physical fields of one level: ensemble means and every member, velocity-type vectors
    '''

    def __init__(self, step, t, mean_u, mean_B, member_u, member_B):
        self.step = step
        self.t = t
        self.mean_u = mean_u
        self.mean_B = mean_B
        self.member_u = member_u
        self.member_B = member_B

    @classmethod
    def from_state(cls, state):
        mean_u, mean_B = state.physical_means()
        member_u, member_B = state.physical()
        return cls(state.n, state.t, mean_u, mean_B, member_u, member_B)


__all__.append("ChannelResult")
class ChannelResult:
    '''
    Attributes:
        run (RunResult)
        space (MixedSpace)
        snapshots (list of (step, t, paths))
        inlet_flux (J,): imposed inflow of each member
    '''

    def __init__(self, run, space, snapshots, inlet_flux):
        self.run = run
        self.space = space
        self.snapshots = snapshots
        self.inlet_flux = inlet_flux

    @property
    def energy(self):
        return self.run.energy


__all__.append("run_channel")
def run_channel(config, out_dir=None, snapshot_writer=None, counters=None):
    '''
    Run the channel benchmark.

    Args:
        config (ChannelConfig)
        out_dir (str|None): directory for snapshots
        snapshot_writer (callable|None): (space, Snapshot, out_dir) -> list of paths, called every
            snapshot_interval steps and at the final step; nothing is written without it
    Returns:
        ChannelResult
    '''
    mesh = step_channel(config.cells_per_unit)
    space = MixedSpace(mesh)
    problem = ChannelProblem(config.J, config.eps, config.perturb_magnetic)
    stepper = EnsembleStepper(space, problem, config.phys, config.time, config.scheme,
                              counters if counters is not None else PerfCounters())
    logger.info(f'channel: {mesh}, {config}')
    if snapshot_writer is not None and out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)

    snapshots = []

    def observe(state):
        due = state.n % config.snapshot_interval == 0 or state.n == config.time.M
        if snapshot_writer is None or out_dir is None or not due:
            return
        paths = snapshot_writer(space, Snapshot.from_state(state), out_dir)
        snapshots.append((state.n, state.t, paths))
        logger.info(f'snapshot at step {state.n} (t={state.t:.6g}): {len(paths)} files')

    run = stepper.run(observer=observe, keep_history=False)

    boundary_v, boundary_w = stepper.boundary_data(0.)
    inlet_flux = []
    for j in range(config.J):
        v = np.zeros(space.n_u)
        w = np.zeros(space.n_u)
        v[space.dirichlet_dofs] = boundary_v[j]
        w[space.dirichlet_dofs] = boundary_w[j]
        inlet_flux.append(boundary_flux(space, 0.5 * (v + w), 'inlet'))
    logger.info(f'channel run finished: inlet flux {inlet_flux}, energy finite: {run.energy.is_finite()}')
    return ChannelResult(run, space, snapshots, np.array(inlet_flux))
