import numpy as np
import pytest
import scipy.sparse as sp

from mhd_ensemble.exceptions import InvalidArgumentError, SingularMatrixError
from mhd_ensemble.linsolve import DIRECT, ITERATIVE, PerfCounters, SymbolicCache, factor, solve_many


def _random_spd(n, seed):
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((n, n))
    return sp.csr_matrix(R @ R.T + n * np.eye(n))


def _random_nonsymmetric(n, seed):
    rng = np.random.default_rng(seed)
    A = sp.random(n, n, density=0.1, random_state=seed, format='csr') + sp.diags(n + rng.random(n))
    return A.tocsr()


def test_identity_returns_rhs():
    b = np.arange(5.)
    np.testing.assert_array_equal(factor(sp.identity(5)).solve(b), b)


def test_diagonal():
    F = factor(sp.csr_matrix([[2., 0.], [0., 4.]]))
    np.testing.assert_allclose(F.solve([2., 8.]), [1., 2.], rtol=1e-15)


@pytest.mark.parametrize('backend', [DIRECT, ITERATIVE])
def test_spd_residual(backend):
    A = _random_spd(50, 0)
    b = np.random.default_rng(1).standard_normal(50)
    x = factor(A, backend).solve(b)
    assert np.linalg.norm(A @ x - b) / np.linalg.norm(b) <= 1e-10


def test_solve_many_single_rhs():
    A = _random_nonsymmetric(40, 2)
    b = np.random.default_rng(3).standard_normal(40)
    F = factor(A)
    np.testing.assert_array_equal(solve_many(F, b)[0], F.solve(b))


@pytest.mark.parametrize('threads', [1, 4])
def test_solve_many_is_linear(threads):
    A = _random_nonsymmetric(40, 4)
    b = np.random.default_rng(5).standard_normal(40)
    rhs = np.array([b, 2. * b, -b, 0. * b])
    counters = PerfCounters()
    x = solve_many(factor(A), rhs, threads=threads, counters=counters)
    assert x.shape == (4, 40)
    np.testing.assert_allclose(x[1], 2. * x[0], rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(x[2], -x[0], rtol=1e-12, atol=1e-14)
    np.testing.assert_array_equal(x[3], 0.)
    assert counters.solves == 4


def test_solve_many_threads_match_serial():
    A = _random_nonsymmetric(60, 6)
    rhs = np.random.default_rng(7).standard_normal((6, 60))
    F = factor(A)
    np.testing.assert_array_equal(solve_many(F, rhs, threads=3), solve_many(F, rhs))


def test_solve_checks_lengths():
    F = factor(sp.identity(3))
    with pytest.raises(InvalidArgumentError):
        F.solve(np.zeros(4))
    with pytest.raises(InvalidArgumentError):
        solve_many(F, np.zeros((2, 4)))


def test_structurally_singular():
    with pytest.raises(SingularMatrixError) as info:
        factor(sp.csr_matrix([[1., 0.], [0., 0.]]))
    assert info.value.pivot == 1


@pytest.mark.parametrize('dense, pivot', [
    ([[1., 1.], [1., 1.]], 1),
    ([[2., 0., 2.], [0., 1., 0.], [1., 0., 1.]], 2),
    ([[1., 2., 0., 0.], [0., 0., 1., 0.], [2., 4., 0., 0.], [0., 0., 0., 3.]], 1),
])
def test_numerically_singular_names_pivot(dense, pivot):
    with pytest.raises(SingularMatrixError) as info:
        factor(sp.csr_matrix(dense))
    assert info.value.pivot == pivot
    with pytest.raises(SingularMatrixError) as info:
        factor(sp.csr_matrix(dense), cache=SymbolicCache())
    assert info.value.pivot == pivot


def test_invalid_arguments():
    with pytest.raises(InvalidArgumentError):
        factor(sp.identity(3), backend='cholesky')
    with pytest.raises(InvalidArgumentError):
        factor(sp.csr_matrix(np.ones((2, 3))))


def test_ordering_is_reused_for_same_pattern():
    A = _random_nonsymmetric(80, 8)
    B = A.copy()
    B.data = B.data * (1. + np.random.default_rng(9).random(B.nnz))
    cache = SymbolicCache()
    counters = PerfCounters()
    first = factor(A, cache=cache, counters=counters)
    second = factor(B, cache=cache, counters=counters)
    assert not first.reused_symbolic
    assert second.reused_symbolic
    assert (cache.hits, cache.misses, len(cache)) == (1, 1, 1)
    assert counters.factorizations == 2

    b = np.random.default_rng(10).standard_normal(80)
    for matrix, F in ((A, first), (B, second)):
        x = F.solve(b)
        assert np.linalg.norm(matrix @ x - b) / np.linalg.norm(b) <= 1e-10


def test_cache_keys_depend_on_pattern():
    A = _random_nonsymmetric(30, 11)
    B = _random_nonsymmetric(30, 12)
    assert SymbolicCache.key(A) == SymbolicCache.key(A.copy())
    assert SymbolicCache.key(A) != SymbolicCache.key(B)


def test_counters():
    counters = PerfCounters()
    counters.count('assemblies', 2)
    counters.count('factorizations', 2)
    counters.count('solves', 8)
    counters.count('steps')
    with counters.timer('step'):
        pass
    assert counters.per_step() == {'assemblies': 2., 'factorizations': 2., 'solves': 8.}
    summary = counters.as_dict()
    assert summary['factorizations'] == 2
    assert 'time_step' in summary
    counters.reset()
    assert counters.as_dict() == {'steps': 0, 'assemblies': 0, 'factorizations': 0, 'solves': 0}
