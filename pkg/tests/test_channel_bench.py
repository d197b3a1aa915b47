import os

import numpy as np
import pytest

from mhd_ensemble.exceptions import InvalidArgumentError
from mhd_ensemble.channel_bench import (ChannelConfig, ChannelProblem, boundary_flux, channel_bc, inflow_profile,
                                        run_channel)
from mhd_ensemble.ensemble_scheme import to_elsasser
from mhd_ensemble.fem import MixedSpace
from mhd_ensemble.io_cli import write_vtk_snapshot
from mhd_ensemble.mesh import step_channel
from mhd_ensemble.mms_verify import member_factor


def test_inflow_centreline():
    u, B = channel_bc('inlet', 0., 5.)
    np.testing.assert_allclose(u, [1., 0.], rtol=1e-15)
    np.testing.assert_array_equal(B, [0., 1.])
    v, w = to_elsasser(u, B)
    np.testing.assert_allclose(v, [1., 1.], rtol=1e-15)
    np.testing.assert_allclose(w, [1., -1.], rtol=1e-15)


@pytest.mark.parametrize('y', [0., 10.])
def test_inflow_vanishes_on_walls(y):
    u, _ = channel_bc('inlet', 0., y)
    np.testing.assert_array_equal(u, [0., 0.])


@pytest.mark.parametrize('tag', ['wall', 'step'])
def test_no_slip(tag):
    v, w = to_elsasser(*channel_bc(tag, 3., 0.))
    np.testing.assert_array_equal(v, [0., 1.])
    np.testing.assert_array_equal(w, [0., -1.])


def test_unknown_tag():
    with pytest.raises(InvalidArgumentError):
        channel_bc('slip', 0., 1.)


def test_inlet_flux_of_profile():
    space = MixedSpace(step_channel(1))
    u = space.interpolate_velocity(lambda x, y, t: (inflow_profile(y), 0. * y))
    assert boundary_flux(space, u, 'inlet') == pytest.approx(20. / 3., abs=1e-10)
    assert boundary_flux(space, u, 'outlet') == pytest.approx(20. / 3., abs=1e-10)


def test_member_scaling():
    problem = ChannelProblem(J=4, eps=0.01)
    y = np.linspace(0., 10., 7)
    x = np.zeros_like(y)
    v, w = problem.boundary_values(3, 'inlet', 0., x, y)
    s = member_factor(3, 0.01)
    np.testing.assert_allclose(np.asarray(v)[0], s * inflow_profile(y), rtol=1e-15)
    np.testing.assert_array_equal(np.asarray(v)[1], 1.)
    magnetic = ChannelProblem(J=4, eps=0.01, perturb_magnetic=True)
    v, w = magnetic.boundary_values(3, 'wall', 0., x, y)
    np.testing.assert_allclose(np.asarray(v)[1], s, rtol=1e-15)
    np.testing.assert_allclose(np.asarray(w)[1], -s, rtol=1e-15)


def test_config_defaults_and_checks():
    config = ChannelConfig()
    assert (config.phys.nu, config.phys.nu_m) == (0.001, 1.)
    assert config.time.M == 2000
    assert config.J == 4
    with pytest.raises(InvalidArgumentError):
        ChannelConfig(eps=-0.1)
    with pytest.raises(InvalidArgumentError):
        ChannelConfig(cells_per_unit=0)


def test_short_run_with_snapshots(tmp_path):
    config = ChannelConfig(T=0.002, dt=0.001, J=2, eps=0.001, snapshot_interval=1)
    result = run_channel(config, str(tmp_path), write_vtk_snapshot)
    assert result.run.steps == 2
    assert max(result.run.divergence) <= 1e-8
    assert result.energy.is_finite()
    np.testing.assert_allclose(result.inlet_flux, [member_factor(j, 0.001) * 20. / 3. for j in (1, 2)],
                               rtol=1e-12)

    assert [step for step, _, _ in result.snapshots] == [0, 1, 2]
    names = sorted(os.listdir(tmp_path))
    assert 'channel_ensemble_000002.vtk' in names
    assert 'channel_member2_000001.vtk' in names
    assert len(names) == 3 * (1 + 2)
    with open(tmp_path / 'channel_ensemble_000002.vtk') as snapshot:
        tokens = snapshot.read().split()
    assert 'UNSTRUCTURED_GRID' in tokens
    for field in ('u', 'B', 'B_magnitude'):
        assert field in tokens


def test_snapshot_interval_includes_final_step(tmp_path):
    config = ChannelConfig(T=0.003, dt=0.001, J=1, snapshot_interval=2)
    result = run_channel(config, str(tmp_path), write_vtk_snapshot)
    assert [step for step, _, _ in result.snapshots] == [0, 2, 3]


def test_boundary_values_stay_fixed_under_steady_inflow(tmp_path):
    captured = []

    def keep(space, snapshot, out_dir):
        captured.append(snapshot)
        return []

    config = ChannelConfig(T=0.003, dt=0.001, J=2, eps=0.01, snapshot_interval=1)
    result = run_channel(config, str(tmp_path), keep)
    space = result.space
    dofs = space.dirichlet_dofs
    assert [snapshot.step for snapshot in captured] == [0, 1, 2, 3]
    first = captured[1]
    for snapshot in captured[2:]:
        for j in range(config.J):
            np.testing.assert_allclose(snapshot.member_u[j][dofs], first.member_u[j][dofs], rtol=0., atol=1e-14)
            np.testing.assert_allclose(snapshot.member_B[j][dofs], first.member_B[j][dofs], rtol=0., atol=1e-14)

    inlet = space.boundary_nodes('inlet')
    y = space.node_coords[inlet, 1]
    for j in range(config.J):
        ux, uy = space.split(first.member_u[j])
        np.testing.assert_allclose(ux[inlet], member_factor(j + 1, 0.01) * inflow_profile(y), rtol=0., atol=1e-13)
        np.testing.assert_allclose(uy[inlet], 0., atol=1e-13)


def test_zero_perturbation_members_are_identical():
    config = ChannelConfig(T=0.002, dt=0.001, J=2, eps=0.)
    state = run_channel(config).run.state
    np.testing.assert_array_equal(state.v[1], state.v[0])
    np.testing.assert_array_equal(state.w[1], state.w[0])


@pytest.mark.slow
def test_desk_scale_run(tmp_path):
    config = ChannelConfig(cells_per_unit=1, T=0.1, dt=0.001, eps=0.001, nu=0.001, nu_m=1., J=4,
                           snapshot_interval=50)
    result = run_channel(config, str(tmp_path), write_vtk_snapshot)
    assert result.run.steps == 100
    assert max(result.run.divergence) <= 1e-8
    assert result.energy.is_finite()
    assert len(result.snapshots) >= 1
