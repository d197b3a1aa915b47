'''
Decoupled time stepping of an ensemble of Elsasser systems.

Every step solves two Oseen problems, one for v and one for w. The implicit convection of each is
by the ensemble mean of the other variable's extrapolant, so its constrained matrix is the same
for all members: it is assembled and factored once per sub-step and then solved against J
right-hand sides. Member-dependent terms (lagged cross-diffusion, fluctuation convection,
forcing, boundary lifting) all go to the right-hand sides.

Step 1, for each member j (step 2 swaps v <-> w, f1 -> f2):

    (3/(2dt) M + (nu+nu_m)/2 K + N(<w>^n)) v_j^{n+1} + B^T q_j^{n+1}
        = f1_j(t^{n+1}) + M (4 v_j^n - v_j^{n-1})/(2dt)
          - (nu-nu_m)/2 K (2 w_j^n - w_j^{n-1}) - N(w_j'^n)(2 v_j^n - v_j^{n-1})
    B v_j^{n+1} = 0

Both sub-steps read only levels n and n-1 and may run concurrently.
'''

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..exceptions import ConfigurationError, InvalidArgumentError, SolverError
from ..fem import (ConstrainedSystem, assemble_div, assemble_mass, assemble_stiffness, boundary_values,
                   convection_action, divergence_residual, l2_norm_at_points, load_vector,
                   saddle_point_matrix, scalar_convection, scalar_mass, scalar_stiffness)
from ..linsolve import PerfCounters, SymbolicCache, factor, solve_many
from .diagnostics import EnergyAccumulator, monitor_dt
from .elsasser import (extrapolate, from_elsasser, mean_and_fluctuations, member_mean,
                       pressures_from_elsasser)
from .params import EXACT, FIRST_ORDER, SchemeParams

logger = logging.getLogger(__name__)

__all__ = []


__all__.append("EnsembleProblem")
class EnsembleProblem:
    '''
    Data of an ensemble run in Elsasser variables.

    Members are numbered j = 1..J. Coordinates x, y are arrays of any common shape and every
    returned component must broadcast to it.

    Class attributes:
        has_forcing: False lets the stepper skip forcing assembly
        has_exact_solution: initial() is the exact solution at any t (enables the exact bootstrap)
        steady_boundary: boundary data do not depend on t
    '''
    has_forcing = True
    has_exact_solution = False
    steady_boundary = False

    def __init__(self, J):
        if int(J) < 1:
            raise InvalidArgumentError(f'ensemble size must be at least 1, got J={J}')
        self.J = int(J)

    def forcing(self, j, t, x, y):
        '''((f1x, f1y), (f2x, f2y)) of member j'''
        return (0., 0.), (0., 0.)

    def boundary_values(self, j, tag, t, x, y):
        '''((vx, vy), (wx, wy)) on facets tagged tag'''
        raise NotImplementedError

    def initial(self, j, t, x, y):
        '''((vx, vy), (wx, wy)) at time t (t = 0 unless has_exact_solution)'''
        raise NotImplementedError

    def pressure(self, j, t, x, y):
        '''(q, r) of member j, zero unless known'''
        return 0., 0.


__all__.append("EnsembleState")
class EnsembleState:
    '''
    Member fields at level n (and n-1 once available).

    Attributes:
        v, w (J, n_u): Elsasser velocities at level n
        v_prev, w_prev (J, n_u) or None: level n-1
        q, r (J, n_p): Elsasser pressures at level n, zero mean
        n (int), t (float): level and time
    '''

    def __init__(self, v, w, q, r, n=0, t=0., v_prev=None, w_prev=None):
        self.v = np.atleast_2d(np.asarray(v, dtype=float))
        self.w = np.atleast_2d(np.asarray(w, dtype=float))
        self.q = np.atleast_2d(np.asarray(q, dtype=float))
        self.r = np.atleast_2d(np.asarray(r, dtype=float))
        if self.v.shape != self.w.shape or self.q.shape != self.r.shape or len(self.q) != len(self.v):
            raise InvalidArgumentError(f'inconsistent member arrays: v {self.v.shape}, w {self.w.shape}, '
                                       f'q {self.q.shape}, r {self.r.shape}')
        self.v_prev = v_prev
        self.w_prev = w_prev
        self.n = int(n)
        self.t = float(t)

    def __repr__(self):
        return f'EnsembleState(J={self.J}, n={self.n}, t={self.t:.6g})'

    @property
    def J(self):
        return len(self.v)

    def shifted(self, v, w, q, r, t):
        '''state at level n+1; the current level becomes the previous one'''
        return EnsembleState(v, w, q, r, self.n + 1, t, v_prev=self.v, w_prev=self.w)

    def physical(self):
        '''member velocities and magnetic fields (u, B), each (J, n_u)'''
        return from_elsasser(self.v, self.w)

    def physical_pressures(self):
        '''member pressures and magnetic pressures (p, lambda), each (J, n_p)'''
        return pressures_from_elsasser(self.q, self.r)

    def ensemble_means(self):
        '''plain means (<v>, <w>) of the level-n fields'''
        return member_mean(self.v), member_mean(self.w)

    def physical_means(self):
        '''plain means (<u>, <B>)'''
        return from_elsasser(*self.ensemble_means())


__all__.append("RunResult")
class RunResult:
    '''
    Outcome of EnsembleStepper.run.

    Attributes:
        state (EnsembleState): final state
        times (list): t^n for n = 1..M
        means (list): (<v>^n, <w>^n) for n = 1..M, empty when history was not kept
        rho (list): monitor ratios before each BDF2 step
        divergence (list): largest relative divergence residual of each solved step
        energy (EnergyReport)
        counters (PerfCounters)
    '''

    def __init__(self, state, times, means, rho, divergence, energy, counters):
        self.state = state
        self.times = times
        self.means = means
        self.rho = rho
        self.divergence = divergence
        self.energy = energy
        self.counters = counters

    @property
    def steps(self):
        return len(self.times)

    @property
    def max_rho(self):
        return max(self.rho) if self.rho else 0.


__all__.append("EnsembleStepper")
class EnsembleStepper:
    '''
    Drives an EnsembleProblem on one MixedSpace with the decoupled BDF2 scheme.
    '''

    def __init__(self, space, problem, phys, time, scheme=None, counters=None):
        '''
        Args:
            space (MixedSpace): shared by all members
            problem (EnsembleProblem): data
            phys (PhysParams), time (TimeParams), scheme (SchemeParams)
            counters (PerfCounters|None): instrumentation, a fresh one if None
        '''
        self.space = space
        self.problem = problem
        self.phys = phys
        self.time = time
        self.scheme = scheme if scheme is not None else SchemeParams(J=problem.J)
        if self.scheme.J != problem.J:
            raise InvalidArgumentError(f'scheme has J={self.scheme.J} but the problem has {problem.J} members')
        self.counters = counters if counters is not None else PerfCounters()
        self.cache = SymbolicCache()

        self._scalar_mass = scalar_mass(space)
        self._scalar_stiffness = scalar_stiffness(space)
        self.mass = assemble_mass(space)
        self.stiffness = assemble_stiffness(space)
        self.div = assemble_div(space)

        self._boundary_cache = None
        self.last_forcing_norms = np.zeros(problem.J)
        self.last_divergence = 0.
        # constrained matrices of the last step per sub-step, one per assembly
        self.last_matrices = {'v': [], 'w': []}

    @property
    def J(self):
        return self.problem.J

    def _member_fields(self, t):
        ''' interpolated initial() of every member at time t '''
        space = self.space
        v, w, q, r = [], [], [], []
        for j in range(1, self.J + 1):
            v.append(space.interpolate_velocity(lambda x, y, s: self.problem.initial(j, s, x, y)[0], t))
            w.append(space.interpolate_velocity(lambda x, y, s: self.problem.initial(j, s, x, y)[1], t))
            q.append(space.zero_mean_pressure(space.interpolate_pressure(
                lambda x, y, s: self.problem.pressure(j, s, x, y)[0], t)))
            r.append(space.zero_mean_pressure(space.interpolate_pressure(
                lambda x, y, s: self.problem.pressure(j, s, x, y)[1], t)))
        return np.array(v), np.array(w), np.array(q), np.array(r)

    def _forcing_loads(self, t):
        ''' member load vectors of f1 and f2 at t, and the sums of their L2 norms '''
        n_u = self.space.n_u
        if not self.problem.has_forcing:
            return np.zeros((self.J, n_u)), np.zeros((self.J, n_u)), np.zeros(self.J)
        points = self.space.geometry.points
        x, y = points[..., 0], points[..., 1]
        shape = x.shape
        loads_v, loads_w, norms = [], [], []
        for j in range(1, self.J + 1):
            f1, f2 = self.problem.forcing(j, t, x, y)
            f1 = [np.broadcast_to(c, shape) for c in f1]
            f2 = [np.broadcast_to(c, shape) for c in f2]
            loads_v.append(load_vector(self.space, *f1))
            loads_w.append(load_vector(self.space, *f2))
            norms.append(l2_norm_at_points(self.space, *f1) + l2_norm_at_points(self.space, *f2))
        return np.array(loads_v), np.array(loads_w), np.array(norms)

    def boundary_data(self, t):
        ''' values on the constrained DOFs for every member, (J, n_dofs) for v and for w '''
        if self._boundary_cache is not None:
            return self._boundary_cache
        tags = self.space.mesh.tags_present()
        data_v, data_w = [], []
        for j in range(1, self.J + 1):
            bc_v = {tag: (lambda x, y, s, tag=tag: self.problem.boundary_values(j, tag, s, x, y)[0])
                    for tag in tags}
            bc_w = {tag: (lambda x, y, s, tag=tag: self.problem.boundary_values(j, tag, s, x, y)[1])
                    for tag in tags}
            data_v.append(boundary_values(self.space, bc_v, t))
            data_w.append(boundary_values(self.space, bc_w, t))
        data = np.array(data_v), np.array(data_w)
        if self.problem.steady_boundary:
            self._boundary_cache = data
        return data

    def oseen_matrix(self, time_coefficient, convecting):
        '''
        Constrained saddle-point matrix of one sub-step:
        time_coefficient M + (nu+nu_m)/2 K + N(convecting), coupled with the divergence blocks.
        '''
        block = self._scalar_mass.copy()
        convection = scalar_convection(self.space, convecting, self.scheme.convection)
        # mass, stiffness and convection share one scatter pattern
        block.data = (time_coefficient * self._scalar_mass.data
                      + self.phys.diffusion * self._scalar_stiffness.data
                      + convection.data)
        system = ConstrainedSystem(self.space, saddle_point_matrix(self.space, block, self.div))
        self.counters.count('assemblies')
        return system

    def _member_loads(self, history, own_ext, other_ext, other_fluct, loads):
        ''' velocity parts of the J right-hand sides of one sub-step '''
        rhs = loads + (self.mass @ history.T).T
        if self.phys.cross_diffusion != 0.:
            rhs -= self.phys.cross_diffusion * (self.stiffness @ other_ext.T).T
        for j in range(self.J):
            if np.any(other_fluct[j]):
                rhs[j] -= convection_action(self.space, other_fluct[j], own_ext[j], self.scheme.convection)
        return rhs

    def _factor(self, system, step):
        try:
            return factor(system.matrix, self.scheme.solver, self.counters, self.cache)
        except SolverError as err:
            err.step = step
            logger.error(f'factorization failed at step {step}: {err}')
            raise

    def _substep(self, name, time_coefficient, history, own_ext, other_mean, other_ext, other_fluct,
                 loads, boundary, step):
        '''
        One Oseen sub-step for all members.

        Returns:
            (velocities (J, n_u), zero-mean pressures (J, n_p), largest divergence residual)
        '''
        space = self.space
        rhs_velocity = self._member_loads(history, own_ext, other_ext, other_fluct, loads)

        if self.scheme.naive:
            systems = [self.oseen_matrix(time_coefficient, other_mean) for _ in range(self.J)]
            solutions = []
            for j, system in enumerate(systems):
                F = self._factor(system, step)
                solutions.append(solve_many(F, system.rhs(rhs_velocity[j], boundary[j]), counters=self.counters)[0])
            solutions = np.array(solutions)
        else:
            system = self.oseen_matrix(time_coefficient, other_mean)
            systems = [system]
            F = self._factor(system, step)
            rhs = np.array([system.rhs(rhs_velocity[j], boundary[j]) for j in range(self.J)])
            solutions = solve_many(F, rhs, threads=self.scheme.threads, counters=self.counters)
        self.last_matrices[name] = [s.matrix for s in systems]

        velocity = solutions[:, :space.n_u]
        pressure = np.array([space.zero_mean_pressure(p) for p in solutions[:, space.n_u:]])

        residuals = [divergence_residual(space, self.div, x) for x in velocity]
        worst = max(residuals)
        logger.debug(f'step {step} sub-step {name}: divergence residual {worst:.3g}')
        if self.scheme.check_divergence and worst > self.scheme.divergence_tol:
            logger.error(f'divergence residual {worst:.3g} above {self.scheme.divergence_tol} at step {step}')
            raise SolverError(f'sub-step {name} left divergence residual {worst:.3g} at step {step}', step=step)
        return velocity, pressure, worst

    def _step(self, state, first_order_start):
        '''
        One decoupled step from state to level n+1; first_order_start selects the backward-Euler form.
        '''
        dt = self.time.dt
        step = state.n + 1
        t_next = self.time.time(step)

        if first_order_start:
            time_coefficient = 1. / dt
            history_v, history_w = state.v / dt, state.w / dt
            ext_v, ext_w = state.v.copy(), state.w.copy()
        else:
            time_coefficient = 1.5 / dt
            history_v = (4. * state.v - state.v_prev) / (2. * dt)
            history_w = (4. * state.w - state.w_prev) / (2. * dt)
            if self.scheme.extrapolation == FIRST_ORDER:
                ext_v, ext_w = state.v.copy(), state.w.copy()
            else:
                ext_v, ext_w = extrapolate(state.v, state.v_prev), extrapolate(state.w, state.w_prev)
        mean_v, fluct_v = mean_and_fluctuations(ext_v)
        mean_w, fluct_w = mean_and_fluctuations(ext_w)

        loads_v, loads_w, forcing_norms = self._forcing_loads(t_next)
        boundary_v, boundary_w = self.boundary_data(t_next)

        jobs = {
            'v': (time_coefficient, history_v, ext_v, mean_w, ext_w, fluct_w, loads_v, boundary_v, step),
            'w': (time_coefficient, history_w, ext_w, mean_v, ext_v, fluct_v, loads_w, boundary_w, step),
        }
        with self.counters.timer('step'):
            if self.scheme.threads > 1:
                with ThreadPoolExecutor(max_workers=2) as pool:
                    futures = {name: pool.submit(self._substep, name, *args) for name, args in jobs.items()}
                    results = {name: future.result() for name, future in futures.items()}
            else:
                results = {name: self._substep(name, *args) for name, args in jobs.items()}

        self.counters.count('steps')
        self.last_forcing_norms = forcing_norms
        v, q, div_v = results['v']
        w, r, div_w = results['w']
        self.last_divergence = max(div_v, div_w)
        return state.shifted(v, w, q, r, t_next)

    def initial_state(self):
        '''level 0 from the problem's initial data'''
        v, w, q, r = self._member_fields(0.)
        return EnsembleState(v, w, q, r, n=0, t=0.)

    def bootstrap_step(self, state):
        '''
        Level 1 from level 0: one backward-Euler decoupled step, or with bootstrap='exact' the
        interpolated exact solution at t^1.
        '''
        if state.n != 0:
            raise InvalidArgumentError(f'bootstrap starts from level 0, got level {state.n}')
        if self.scheme.bootstrap == EXACT:
            if not self.problem.has_exact_solution:
                raise ConfigurationError('exact bootstrap needs a problem with a known exact solution')
            t1 = self.time.time(1)
            self.last_divergence = 0.
            self.last_forcing_norms = np.zeros(self.J)
            return state.shifted(*self._member_fields(t1), t1)
        return self._step(state, first_order_start=True)

    def advance(self, state):
        '''level n+1 from levels n and n-1'''
        if state.v_prev is None:
            raise InvalidArgumentError('advance needs two levels; take a bootstrap step first')
        return self._step(state, first_order_start=False)

    def monitor(self, state, quiet=False):
        return monitor_dt(state, self.phys, self.time.dt, self.space.mesh.h_edge, self.stiffness,
                          self.scheme.c_const, self.scheme.ci_const, quiet=quiet)

    def run(self, observer=None, keep_history=True):
        '''
        Run from t = 0 to T.

        Args:
            observer (callable|None): called with every state, level 0 included
            keep_history (bool): store the ensemble means of every level in the result
        Returns:
            RunResult
        '''
        logger.info(f'running J={self.J} members for {self.time.M} steps of dt={self.time.dt} '
                    f'({self.space.n_u} velocity + {self.space.n_p} pressure unknowns per field)')
        energy = EnergyAccumulator(self.mass, self.stiffness, self.phys, self.time.dt)
        times, means, rho, divergence = [], [], [], []

        def record(state):
            times.append(state.t)
            divergence.append(self.last_divergence)
            if keep_history:
                means.append(state.ensemble_means())
            if observer is not None:
                observer(state)

        state = self.initial_state()
        if observer is not None:
            observer(state)
        state = self.bootstrap_step(state)
        energy.start(state)
        record(state)

        exceeded = 0
        for _ in range(1, self.time.M):
            ratio = self.monitor(state, quiet=exceeded > 0)
            rho.append(ratio)
            exceeded += ratio > 1.
            state = self.advance(state)
            energy.record(state, self.last_forcing_norms)
            record(state)

        if exceeded:
            logger.warning(f'time-step restriction exceeded in {exceeded} of {len(rho)} steps '
                           f'(largest rho {max(rho):.4g})')
        report = energy.report()
        logger.info(f'finished at t={state.t:.6g}: {self.counters.as_dict()}')
        return RunResult(state, times, means, rho, divergence, report, self.counters)
