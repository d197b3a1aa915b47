'''
Reusable factorizations of the constrained saddle-point matrices.

One factorization per Oseen sub-step is reused for the J right-hand sides of that sub-step.
The direct backend is SuperLU; its fill-reducing column ordering is cached per sparsity pattern
so that refactoring a matrix with the same structure skips the ordering phase.
'''

import hashlib
import logging
import threading
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..exceptions import InvalidArgumentError, SingularMatrixError, SolverError

logger = logging.getLogger(__name__)

__all__ = []

DIRECT = 'direct'
__all__.append("DIRECT")
ITERATIVE = 'iterative'
__all__.append("ITERATIVE")
BACKENDS = (DIRECT, ITERATIVE)
__all__.append("BACKENDS")

# larger singular matrices are reported without a pivot index
PIVOT_SCAN_LIMIT = 4000
__all__.append("PIVOT_SCAN_LIMIT")


__all__.append("PerfCounters")
class PerfCounters:
    '''
    Instrumentation shared by assembly, factorization and solves of one run.
    '''

    def __init__(self):
        self.reset()

    def reset(self):
        self._lock = threading.Lock()
        self.assemblies = 0
        self.factorizations = 0
        self.solves = 0
        self.steps = 0
        self.timings = defaultdict(float)

    def count(self, name, amount=1):
        with self._lock:
            setattr(self, name, getattr(self, name) + amount)

    def add_time(self, key, seconds):
        with self._lock:
            self.timings[key] += seconds

    @contextmanager
    def timer(self, key):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.add_time(key, time.perf_counter() - start)

    def as_dict(self):
        summary = {
            'steps': self.steps,
            'assemblies': self.assemblies,
            'factorizations': self.factorizations,
            'solves': self.solves,
        }
        summary.update({f'time_{key}': value for key, value in sorted(self.timings.items())})
        return summary

    def per_step(self):
        '''counts divided by the number of completed steps'''
        steps = max(self.steps, 1)
        return {
            'assemblies': self.assemblies / steps,
            'factorizations': self.factorizations / steps,
            'solves': self.solves / steps,
        }


__all__.append("SymbolicCache")
class SymbolicCache:
    '''
    Column orderings keyed by sparsity pattern
    '''

    def __init__(self):
        self._orderings = {}
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(matrix):
        digest = hashlib.sha1()
        digest.update(np.asarray(matrix.shape, dtype=np.int64).tobytes())
        digest.update(np.ascontiguousarray(matrix.indptr, dtype=np.int64).tobytes())
        digest.update(np.ascontiguousarray(matrix.indices, dtype=np.int64).tobytes())
        return digest.hexdigest()

    def get(self, key):
        ordering = self._orderings.get(key)
        if ordering is None:
            self.misses += 1
        else:
            self.hits += 1
        return ordering

    def put(self, key, ordering):
        self._orderings[key] = ordering

    def __len__(self):
        return len(self._orderings)


def _first_empty_index(matrix):
    ''' first row or column without a nonzero entry, None if there is none '''
    magnitude = abs(matrix)
    rows = np.flatnonzero(np.asarray(magnitude.sum(axis=1)).ravel() == 0.)
    cols = np.flatnonzero(np.asarray(magnitude.sum(axis=0)).ravel() == 0.)
    candidates = [int(i[0]) for i in (rows, cols) if len(i)]
    return min(candidates) if candidates else None


def _first_failing_pivot(matrix):
    '''
    Column of the first vanishing pivot of a partially pivoted LU in the natural column order:
    the first column in the span of the ones before it. SuperLU does not report it, so this is a
    dense rescan, None above PIVOT_SCAN_LIMIT.
    '''
    if matrix.shape[0] > PIVOT_SCAN_LIMIT:
        return None
    _, _, upper = scipy.linalg.lu(matrix.toarray())
    pivots = np.abs(np.diag(upper))
    tol = matrix.shape[0] * np.finfo(float).eps * max(float(np.abs(upper).max()), 1.)
    small = np.flatnonzero(pivots <= tol)
    return int(small[0]) if len(small) else None


__all__.append("Factorization")
class Factorization:
    '''
    Handle to a factored square matrix.

    Attributes:
        backend (str): 'direct' or 'iterative'
        shape (tuple): matrix shape
        fill (int): nonzeros of the factors (L+U or the incomplete factors)
        reused_symbolic (bool): the column ordering came from the cache
    '''

    def __init__(self, matrix, backend, factors, ordering=None, reused_symbolic=False, tol=1e-10, maxiter=500):
        self.matrix = matrix
        self.backend = backend
        self.shape = matrix.shape
        self._factors = factors
        self._ordering = ordering
        self.reused_symbolic = reused_symbolic
        self.tol = tol
        self.maxiter = maxiter
        self.fill = int(factors.L.nnz + factors.U.nnz)

    def __repr__(self):
        return f'Factorization({self.backend}, shape={self.shape}, fill={self.fill})'

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        if b.shape != (self.shape[0],):
            raise InvalidArgumentError(f'right-hand side has shape {b.shape}, expected ({self.shape[0]},)')
        if self.backend == ITERATIVE:
            return self._solve_iterative(b)
        y = self._factors.solve(b)
        if self._ordering is None:
            return y
        x = np.empty_like(y)
        x[self._ordering] = y
        return x

    def _solve_iterative(self, b):
        preconditioner = spla.LinearOperator(self.shape, self._factors.solve)
        x, info = spla.gmres(self.matrix, b, M=preconditioner, rtol=self.tol, atol=0.,
                             restart=50, maxiter=self.maxiter)
        if info != 0:
            logger.warning(f'gmres stopped with info={info}')
            raise SolverError(f'gmres did not reach rtol={self.tol} within {self.maxiter} restarts (info={info})')
        return x


__all__.append("factor")
def factor(A, backend=DIRECT, counters=None, cache=None, tol=1e-10, maxiter=500):
    '''
    Factor a square sparse matrix for repeated solves.

    Args:
        A (sparse matrix): square, nonsingular
        backend (str): 'direct' (SuperLU) or 'iterative' (ILU-preconditioned GMRES)
        counters (PerfCounters|None): instrumentation to update
        cache (SymbolicCache|None): ordering cache; without one every call orders from scratch
        tol, maxiter: iterative backend settings
    Raises:
        SingularMatrixError: with the first failing pivot index when it can be identified
    '''
    if backend not in BACKENDS:
        raise InvalidArgumentError(f'unknown solver backend "{backend}", expected one of {BACKENDS}')
    A = sp.csr_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f'cannot factor a non-square matrix of shape {A.shape}')

    empty = _first_empty_index(A)
    if empty is not None:
        logger.error(f'structurally singular matrix, empty row/column {empty}')
        raise SingularMatrixError(f'matrix is structurally singular at index {empty}', pivot=empty)

    start = time.perf_counter()
    reused = False
    ordering = None
    try:
        if backend == ITERATIVE:
            factors = spla.spilu(A.tocsc(), drop_tol=1e-6, fill_factor=20)
        elif cache is None:
            factors = spla.splu(A.tocsc())
        else:
            key = SymbolicCache.key(A)
            ordering = cache.get(key)
            if ordering is None:
                factors = spla.splu(A.tocsc())
                cache.put(key, np.argsort(factors.perm_c))
            else:
                factors = spla.splu(A.tocsc()[:, ordering], permc_spec='NATURAL')
                reused = True
    except RuntimeError as err:
        logger.error(f'factorization failed: {err}')
        pivot = _first_failing_pivot(A)
        raise SingularMatrixError(f'matrix is numerically singular at pivot {pivot} ({err})', pivot=pivot) from err

    if backend == DIRECT:
        zeros = np.flatnonzero(factors.U.diagonal() == 0.)
        if len(zeros):
            pivot = _first_failing_pivot(A)
            if pivot is None:
                # U position -> column of the factored matrix -> column of A
                columns = np.argsort(factors.perm_c)
                pivot = int((ordering[columns] if ordering is not None else columns)[zeros[0]])
            logger.error(f'zero pivot in column {pivot}')
            raise SingularMatrixError(f'zero pivot in column {pivot}', pivot=pivot)

    elapsed = time.perf_counter() - start
    if counters is not None:
        counters.count("factorizations")
        counters.add_time("factor", elapsed)
    logger.debug(f'factored {A.shape} ({backend}) in {elapsed:.3g}s, reused ordering: {reused}')
    return Factorization(A, backend, factors, ordering, reused, tol, maxiter)


__all__.append("solve_many")
def solve_many(F, rhs, threads=1, counters=None):
    '''
    Solve F x_j = b_j for every row b_j of rhs with the one factorization F.

    Each right-hand side is solved on its own, so the result is bit-identical to calling
    F.solve for each one in turn; with threads > 1 the solves run on a thread pool.

    Returns:
        ndarray (J, n)
    '''
    rhs = np.atleast_2d(np.asarray(rhs, dtype=float))
    if rhs.shape[1] != F.shape[0]:
        raise InvalidArgumentError(f'right-hand sides have length {rhs.shape[1]}, expected {F.shape[0]}')

    start = time.perf_counter()
    if threads > 1 and len(rhs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            solutions = list(pool.map(F.solve, rhs))
    else:
        solutions = [F.solve(b) for b in rhs]

    if counters is not None:
        counters.count("solves", len(rhs))
        counters.add_time("solve", time.perf_counter() - start)
    return np.array(solutions)
