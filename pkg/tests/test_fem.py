import numpy as np
import pytest
import scipy.sparse.linalg as spla
from scipy import integrate

from mhd_ensemble.exceptions import ConfigurationError, InvalidArgumentError
from mhd_ensemble.fem import (Q1, Q2, Q2_NODES, SKEW, STANDARD, ConstrainedSystem, MixedSpace, Quadrature,
                              apply_dirichlet, assemble_convection, assemble_div, assemble_mass, assemble_rhs,
                              assemble_stiffness, basis_eval, boundary_values, convection_action,
                              divergence_residual, inf_sup_estimate, pressure_mass, saddle_point_matrix, scalar_mass,
                              scalar_stiffness)
from mhd_ensemble.mesh import refine, step_channel, unit_square
from mhd_ensemble.mms_verify import ManufacturedSolution


def _random_boundary_free(space, rng):
    x = rng.standard_normal(space.n_u)
    x[space.dirichlet_dofs] = 0.
    return x


def test_q2_is_nodal():
    values, _ = basis_eval(Q2, Q2_NODES)
    np.testing.assert_allclose(values, np.eye(9), atol=1e-14)


@pytest.mark.parametrize('kind', [Q1, Q2])
def test_partition_of_unity(kind):
    points = np.random.default_rng(0).uniform(-1., 1., size=(20, 2))
    values, gradients = basis_eval(kind, points)
    np.testing.assert_allclose(values.sum(axis=1), 1., atol=1e-14)
    np.testing.assert_allclose(gradients.sum(axis=1), 0., atol=1e-13)


def test_q1_centre():
    values, _ = basis_eval(Q1, [0., 0.])
    np.testing.assert_allclose(values, 0.25)


def test_unknown_basis():
    with pytest.raises(InvalidArgumentError):
        basis_eval('P3', [0., 0.])


def test_quadrature_integrates_polynomials():
    rule = Quadrature(3)
    x, y = rule.points[:, 0], rule.points[:, 1]
    # int over [-1,1]^2 of x^4 y^2 = (2/5)(2/3)
    assert np.dot(rule.weights, x**4 * y**2) == pytest.approx(4. / 15., rel=1e-14)
    assert rule.weights.sum() == pytest.approx(4., rel=1e-14)


def test_space_sizes(space2):
    # 9 vertices + 12 facets + 4 centres
    assert space2.n_nodes == 25
    assert space2.n_u == 50
    assert space2.n_p == 9
    assert space2.area == pytest.approx(1., rel=1e-14)


def test_mass_matrix(space4):
    M = assemble_mass(space4)
    assert M.sum() == pytest.approx(2. * space4.area, rel=1e-12)
    x = np.random.default_rng(1).standard_normal(space4.n_u)
    assert x @ (M @ x) > 0.
    c = space4.interpolate_velocity(lambda x, y, t: (1., 0.))
    assert c @ (M @ c) == pytest.approx(1., rel=1e-12)


def test_stiffness_matrix(space4):
    K = assemble_stiffness(space4)
    constant = space4.interpolate_velocity(lambda x, y, t: (2., -3.))
    np.testing.assert_allclose(K @ constant, 0., atol=1e-12)
    linear = space4.interpolate_velocity(lambda x, y, t: (x, 0. * y))
    assert linear @ (K @ linear) == pytest.approx(1., rel=1e-12)
    assert abs(K - K.T).max() <= 1e-12


def test_same_pattern_for_scalar_blocks(space4):
    M, K = scalar_mass(space4), scalar_stiffness(space4)
    np.testing.assert_array_equal(M.indptr, K.indptr)
    np.testing.assert_array_equal(M.indices, K.indices)


def test_convection_of_zero_field(space4):
    N = assemble_convection(space4, np.zeros(space4.n_u))
    assert abs(N).max() == 0.


def test_skew_convection_is_antisymmetric(space4):
    rng = np.random.default_rng(2)
    a = rng.standard_normal(space4.n_u)
    N = assemble_convection(space4, a, SKEW)
    for _ in range(5):
        x = _random_boundary_free(space4, rng)
        assert abs(x @ (N @ x)) <= 1e-12 * (x @ x)
    assert abs(N + N.T).max() <= 1e-14


def test_standard_convection_of_constant(space4):
    a = space4.interpolate_velocity(lambda x, y, t: (1., 1.))
    constant = space4.interpolate_velocity(lambda x, y, t: (0.5, -2.))
    np.testing.assert_allclose(assemble_convection(space4, a) @ constant, 0., atol=1e-12)


@pytest.mark.parametrize('form', [STANDARD, SKEW])
def test_convection_action_matches_matrix(space4, form):
    rng = np.random.default_rng(3)
    a, u = rng.standard_normal(space4.n_u), rng.standard_normal(space4.n_u)
    expected = assemble_convection(space4, a, form) @ u
    np.testing.assert_allclose(convection_action(space4, a, u, form), expected, atol=1e-12)


def test_convection_checks_arguments(space4):
    with pytest.raises(InvalidArgumentError):
        assemble_convection(space4, np.zeros(3))
    with pytest.raises(InvalidArgumentError):
        assemble_convection(space4, np.zeros(space4.n_u), 'upwind')


def test_divergence_of_linear_fields(space4):
    B = assemble_div(space4)
    assert B.shape == (space4.n_p, space4.n_u)
    constant = space4.interpolate_velocity(lambda x, y, t: (1., 2.))
    np.testing.assert_allclose(B @ constant, 0., atol=1e-12)
    solenoidal = space4.interpolate_velocity(lambda x, y, t: (x, -y))
    np.testing.assert_allclose(B @ solenoidal, 0., atol=1e-12)


def test_divergence_residual_decays():
    solution = ManufacturedSolution()
    residuals = []
    for n in (4, 8):
        space = MixedSpace(unit_square(n))
        v = space.interpolate_velocity(solution.v, 0.)
        residuals.append(divergence_residual(space, assemble_div(space), v))
    assert residuals[1] < residuals[0]


def test_load_vectors(space4):
    np.testing.assert_array_equal(assemble_rhs(space4, lambda x, y, t: (0. * x, 0. * y)), 0.)
    load = assemble_rhs(space4, lambda x, y, t: (1., 0.))
    ux, uy = space4.split(load)
    assert ux.sum() == pytest.approx(space4.area, rel=1e-12)
    np.testing.assert_array_equal(uy, 0.)


def _quadratic_hat(s, left, right, at):
    '''1D quadratic Lagrange function on [left, right] equal to 1 at `at`'''
    value = 1.
    for point in (left, 0.5 * (left + right), right):
        if point != at:
            value *= (s - point) / (at - point)
    return value


def test_manufactured_load_matches_adaptive_quadrature(mms_problem):
    space = MixedSpace(unit_square(4), Quadrature(6))
    load = assemble_rhs(space, lambda x, y, t: mms_problem.forcing(1, t, x, y)[0], 0.)
    node = int(np.flatnonzero(np.all(np.isclose(space.node_coords, 0.5), axis=1))[0])
    assert node < space.mesh.n_vertices

    pieces = ((0.25, 0.5), (0.5, 0.75))
    for component, offset in enumerate((0, space.n_nodes)):
        expected = 0.
        for x0, x1 in pieces:
            for y0, y1 in pieces:
                def integrand(y, x):
                    f1 = mms_problem.forcing(1, 0., x, y)[0]
                    return f1[component] * _quadratic_hat(x, x0, x1, 0.5) * _quadratic_hat(y, y0, y1, 0.5)
                value, _ = integrate.dblquad(integrand, x0, x1, y0, y1, epsabs=1e-13, epsrel=1e-12)
                expected += value
        assert load[offset + node] == pytest.approx(expected, abs=1e-10)


def test_pressure_mass(space4):
    mass = pressure_mass(space4)
    ones = np.ones(space4.n_p)
    assert ones @ mass @ ones == pytest.approx(1., rel=1e-12)
    np.testing.assert_allclose((mass - mass.T).toarray(), 0., atol=1e-15)
    assert np.linalg.eigvalsh(mass.toarray()).min() > 0.


def test_inf_sup_estimate_is_mesh_stable():
    coarse = inf_sup_estimate(MixedSpace(unit_square(4)))
    fine = inf_sup_estimate(MixedSpace(refine(unit_square(4))))
    assert coarse > 0.05
    assert fine > 0.8 * coarse


def test_biquadratic_interpolation_is_exact(space4):
    def field(x, y, t):
        return x * x * y * y, x * y + y * y

    def gradient(x, y, t):
        return np.array([[2. * x * y * y, 2. * x * x * y], [y, x + 2. * y]])

    u = space4.interpolate_velocity(field)
    values, _ = space4.evaluate_velocity(u)
    points = space4.geometry.points
    expected = np.stack(field(points[..., 0], points[..., 1], 0.), axis=-1)
    np.testing.assert_allclose(values, expected, atol=1e-12)
    l2, h1 = space4.error_norms_against(u, lambda x, y, t: np.array(field(x, y, t)), gradient, 0.)
    assert l2 <= 1e-12
    assert h1 <= 1e-12


def _oseen_matrix(space):
    a = space.interpolate_velocity(lambda x, y, t: (1. + 0. * x, 0.5 + 0. * y))
    block = 10. * scalar_mass(space) + 0.1 * scalar_stiffness(space)
    block = block + assemble_convection(space, a)[:space.n_nodes, :space.n_nodes]
    return saddle_point_matrix(space, block, assemble_div(space))


def test_constrained_matrix_is_shared(space4):
    matrix = _oseen_matrix(space4)
    load = np.zeros(space4.n_u)
    solution = ManufacturedSolution()
    first, rhs_first = apply_dirichlet(space4, matrix, load, {'wall': lambda x, y, t: solution.v(x, y, t)}, 0.)
    second, rhs_second = apply_dirichlet(space4, matrix, load,
                                         {'wall': lambda x, y, t: 1.1 * solution.w(x, y, t)}, 0.5)
    np.testing.assert_array_equal(first.matrix.data, second.matrix.data)
    np.testing.assert_array_equal(first.matrix.indices, second.matrix.indices)
    np.testing.assert_array_equal(first.matrix.indptr, second.matrix.indptr)
    assert not np.array_equal(rhs_first, rhs_second)


@pytest.mark.parametrize('scale', [0., 1.])
def test_dirichlet_values_are_imposed(space4, scale):
    solution = ManufacturedSolution()
    bc = {'wall': lambda x, y, t: scale * solution.v(x, y, t)}
    system, rhs = apply_dirichlet(space4, _oseen_matrix(space4), np.zeros(space4.n_u), bc, 0.2)
    x = spla.splu(system.matrix.tocsc()).solve(rhs)
    expected = boundary_values(space4, bc, 0.2)
    np.testing.assert_allclose(x[system.dofs], expected, rtol=0., atol=1e-14)
    if scale == 0.:
        np.testing.assert_array_equal(x[system.dofs], 0.)
    nodes = space4.dirichlet_nodes
    exact = solution.v(space4.node_coords[nodes, 0], space4.node_coords[nodes, 1], 0.2)
    np.testing.assert_allclose(expected, scale * np.concatenate(exact), atol=1e-14)


def test_constrained_system_checks_sizes(space2):
    with pytest.raises(InvalidArgumentError):
        ConstrainedSystem(space2, assemble_mass(space2))
    system = ConstrainedSystem(space2, _oseen_matrix(space2))
    with pytest.raises(InvalidArgumentError):
        system.rhs(np.zeros(space2.n_u), np.zeros(3))


def test_missing_boundary_data():
    space = MixedSpace(step_channel(1))
    with pytest.raises(ConfigurationError):
        boundary_values(space, {'wall': lambda x, y, t: (0. * x, 0. * y)}, 0.)
