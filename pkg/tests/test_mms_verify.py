import math
from types import SimpleNamespace

import numpy as np
import pytest

from mhd_ensemble.exceptions import InvalidArgumentError, MHDEnsembleError
from mhd_ensemble.ensemble_scheme import EXACT, FIRST_ORDER, PhysParams, SchemeParams
from mhd_ensemble.fem import MixedSpace
from mhd_ensemble.mesh import unit_square
from mhd_ensemble.mms_verify import (INTERPOLANT_REFERENCE, ManufacturedSolution, MMSProblem, PerturbationEnsemble,
                                     RateTable, check_rates, convergence_study, error_norms, forcing, member_factor,
                                     halving_levels, refinement_levels)

T = 1e-3


def test_member_factors():
    eps = 0.01
    assert [member_factor(j, eps) for j in range(1, 5)] == pytest.approx([1.01, 0.99, 1.02, 0.98], rel=1e-15)
    ensemble = PerturbationEnsemble(eps, 4)
    assert ensemble.mean_factor == pytest.approx(1., rel=1e-15)
    assert ensemble.factor(3) == pytest.approx(1.02, rel=1e-15)
    with pytest.raises(InvalidArgumentError):
        member_factor(0, eps)


def test_manufactured_fields_are_solenoidal():
    solution = ManufacturedSolution()
    x, y = np.random.default_rng(0).uniform(0., 1., size=(2, 50))
    for t in (0., 0.5):
        np.testing.assert_array_equal(solution.divergence('v', x, y, t), 0.)
        np.testing.assert_array_equal(solution.divergence('w', x, y, t), 0.)


def test_values_at_origin():
    solution = ManufacturedSolution()
    np.testing.assert_allclose(solution.v(0., 0., 0.), [1., 1.])
    np.testing.assert_allclose(solution.w(0., 0., 0.), [1., -1.])
    np.testing.assert_allclose(solution.v_t(0., 0., 0.), [0., 1.])


def _finite_difference_residual(solution, phys, x, y, t):
    ''' residuals of both Elsasser momentum equations by central differences '''
    dt, dx, dl = 1e-6, 1e-6, 1e-3

    def d_dt(field):
        return (field(x, y, t + dt) - field(x, y, t - dt)) / (2. * dt)

    def gradient(field):
        # [i, k] = d_k of component i
        return np.stack([(field(x + dx, y, t) - field(x - dx, y, t)) / (2. * dx),
                         (field(x, y + dx, t) - field(x, y - dx, t)) / (2. * dx)], axis=1)

    def laplacian(field):
        return (field(x + dl, y, t) + field(x - dl, y, t) + field(x, y + dl, t) + field(x, y - dl, t)
                - 4. * field(x, y, t)) / dl**2

    def grad_scalar(field):
        return np.array([(field(x + dx, y, t) - field(x - dx, y, t)) / (2. * dx),
                         (field(x, y + dx, t) - field(x, y - dx, t)) / (2. * dx)])

    v, w = solution.v(x, y, t), solution.w(x, y, t)
    grad_v, grad_w = gradient(solution.v), gradient(solution.w)
    lap_v, lap_w = laplacian(solution.v), laplacian(solution.w)
    grad_p = grad_scalar(solution.p)
    f1 = (d_dt(solution.v) + np.einsum('k,ik->i', w, grad_v) + grad_p
          - phys.diffusion * lap_v - phys.cross_diffusion * lap_w)
    f2 = (d_dt(solution.w) + np.einsum('k,ik->i', v, grad_w) + grad_p
          - phys.diffusion * lap_w - phys.cross_diffusion * lap_v)
    return f1, f2


@pytest.mark.parametrize('point', [(0., 0., 0.), (0.3, 0.7, 0.4)])
def test_forcing_matches_finite_differences(point):
    phys = PhysParams(0.01, 0.001)
    solution = ManufacturedSolution()
    x, y, t = point
    f1, f2 = forcing(1, t, x, y, PerturbationEnsemble(0., 1), phys, solution)
    fd1, fd2 = _finite_difference_residual(solution, phys, x, y, t)
    np.testing.assert_allclose(f1, fd1, atol=1e-6)
    np.testing.assert_allclose(f2, fd2, atol=1e-6)


def test_forcing_scaling_in_member_factor():
    phys = PhysParams(0.01, 0.001)
    solution = ManufacturedSolution()
    x, y, t = 0.21, 0.63, 0.37
    ensemble = PerturbationEnsemble(0.3, 2)
    c = ensemble.factor(2)
    linear = (solution.v_t(x, y, t) - phys.diffusion * solution.laplacian_v(x, y, t)
              - phys.cross_diffusion * solution.laplacian_w(x, y, t))
    advective = np.einsum('k,ik->i', solution.w(x, y, t), solution.grad_v(x, y, t))
    f1, _ = forcing(2, t, x, y, ensemble, phys, solution)
    np.testing.assert_allclose(f1, c * linear + c * c * advective + solution.grad_p(x, y, t),
                               rtol=1e-13, atol=1e-14)


def test_pressure_is_shared(phys):
    problem = MMSProblem(phys, PerturbationEnsemble(0.1, 2))
    q, r = problem.pressure(2, 0.3, 0.2, 0.9)
    assert q == r == pytest.approx((0.2 - 0.9) * 1.3)


def _interpolated_run(space, problem, dt, M):
    times = [n * dt for n in range(1, M + 1)]
    means = [(space.interpolate_velocity(lambda x, y, s: problem.exact_mean(s, x, y)[0], t),
              space.interpolate_velocity(lambda x, y, s: problem.exact_mean(s, x, y)[1], t)) for t in times]
    return SimpleNamespace(times=times, means=means)


def test_interpolant_errors_converge_at_second_order(mms_problem):
    errors = []
    for n in (4, 8):
        space = MixedSpace(unit_square(n))
        errors.append(error_norms(_interpolated_run(space, mms_problem, T / 4, 4), mms_problem, space, T / 4))
    assert 0. < errors[1].err_v < errors[0].err_v
    rate_v = math.log2(errors[0].err_v / errors[1].err_v)
    rate_w = math.log2(errors[0].err_w / errors[1].err_w)
    assert 1.8 <= rate_v <= 2.2
    assert 1.8 <= rate_w <= 2.2


def test_interpolant_reference_of_interpolant_is_zero(mms_problem, space4):
    run = _interpolated_run(space4, mms_problem, T / 4, 4)
    errors = error_norms(run, mms_problem, space4, T / 4, INTERPOLANT_REFERENCE)
    assert (errors.err_v, errors.err_w) == (0., 0.)


def test_error_norms_need_history(mms_problem, space4):
    with pytest.raises(InvalidArgumentError):
        error_norms(SimpleNamespace(times=[T], means=[]), mms_problem, space4, T)
    with pytest.raises(InvalidArgumentError):
        error_norms(_interpolated_run(space4, mms_problem, T, 1), mms_problem, space4, T, 'nodal')


def test_rate_arithmetic():
    table = RateTable()
    first = table.add(1. / 2, T / 4, 3.650e-4, 2.0e-4)
    second = table.add(1. / 4, T / 8, 1.008e-4, 5.0e-5)
    assert first.rate_v is None and first.rate_w is None
    assert second.rate_v == pytest.approx(1.857, abs=1e-3)
    assert second.rate_w == pytest.approx(2., rel=1e-12)
    assert table.rates('v') == [second.rate_v]
    np.testing.assert_array_equal(table.errors('w'), [2.0e-4, 5.0e-5])


def test_rates_in_time_only():
    table = RateTable()
    table.add(1. / 32, T / 4, 4e-4, 4e-4)
    row = table.add(1. / 32, T / 8, 1e-4, 2e-4)
    assert row.rate_v == pytest.approx(2., rel=1e-12)
    assert row.rate_w == pytest.approx(1., rel=1e-12)


def test_check_rates():
    table = RateTable()
    for k, h in enumerate((1. / 2, 1. / 4, 1. / 8)):
        table.add(h, T / 2**(k + 2), 1e-3 / 4**k, 2e-3 / 4**k)
    assert check_rates(table)
    bad = RateTable()
    for k, h in enumerate((1. / 2, 1. / 4, 1. / 8)):
        bad.add(h, T / 2**(k + 2), 1e-3 / 2**k, 1e-3 / 4**k)
    with pytest.raises(MHDEnsembleError):
        check_rates(bad)
    with pytest.raises(MHDEnsembleError):
        check_rates(RateTable(), pairs=1)


def test_levels():
    levels = halving_levels(T, 5)
    assert [n for n, _ in levels] == [2, 4, 8, 16, 32]
    assert [dt for _, dt in levels] == pytest.approx([T / 4, T / 8, T / 16, T / 32, T / 64])
    assert refinement_levels('space', T, 3) == [(2, T / 16), (4, T / 16), (8, T / 16)]
    assert refinement_levels('time', T, 3) == [(8, T / 4), (8, T / 8), (8, T / 16)]
    with pytest.raises(InvalidArgumentError):
        refinement_levels('h', T, 3)
    with pytest.raises(InvalidArgumentError):
        halving_levels(T, 0)


def test_small_convergence_study():
    table = convergence_study(halving_levels(T, 2))
    assert table.complete
    assert len(table) == 2
    assert table.rows[0].rate_v is None
    assert table.rows[1].rate_v is not None
    assert table.rows[1].err_v < table.rows[0].err_v
    assert all(row.energy_stable is not None for row in table)


def test_parallel_levels_match_serial():
    serial = convergence_study(halving_levels(T, 2))
    parallel = convergence_study(halving_levels(T, 2), workers=2)
    assert parallel.errors('v') == pytest.approx(serial.errors('v'), rel=1e-10)


def test_lagged_extrapolation_loses_accuracy_in_time():
    # h = 1/16 fixed, dt = T/4 .. T/32
    levels = refinement_levels('time', 0.5, 4)
    lagged = convergence_study(levels, T=0.5, scheme=SchemeParams(J=4, bootstrap=EXACT, extrapolation=FIRST_ORDER))
    extrapolated = convergence_study(levels, T=0.5)
    assert lagged.complete and extrapolated.complete
    assert max(lagged.rates('v')) < 1.5
    assert max(lagged.rates('w')) < 1.5
    assert lagged.rows[-1].err_v > 10 * extrapolated.rows[-1].err_v


@pytest.mark.slow
@pytest.mark.parametrize('eps', [1e-3, 1e-2, 1e-1])
def test_table_reproduction(eps):
    table = convergence_study(halving_levels(T, 5), eps=eps)
    assert table.complete
    assert len(table) == 5
    assert check_rates(table, 1.8, 2.1, pairs=2)
    assert 1.008e-4 / 2 <= table.rows[1].err_v <= 2 * 1.008e-4
    assert 4.992e-5 / 2 <= table.rows[2].err_w <= 2 * 4.992e-5
