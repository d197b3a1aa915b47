'''
Elsasser variables and the extrapolated ensemble mean.

    v = u + B,  w = u - B,  q = p + lambda,  r = p - lambda

All functions work on arrays whose last axis is the DOF axis, with members stacked on the first
axis where an ensemble is involved.
'''

import logging
import numpy as np

from ..exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

__all__ = []


def _pair(a, b, names):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InvalidArgumentError(f'{names[0]} and {names[1]} have shapes {a.shape} and {b.shape}')
    return a, b


__all__.append("to_elsasser")
def to_elsasser(u, B):
    '''(u, B) -> (v, w) = (u + B, u - B)'''
    u, B = _pair(u, B, ('u', 'B'))
    return u + B, u - B


__all__.append("from_elsasser")
def from_elsasser(v, w):
    '''(v, w) -> (u, B) = ((v + w)/2, (v - w)/2)'''
    v, w = _pair(v, w, ('v', 'w'))
    return 0.5 * (v + w), 0.5 * (v - w)


__all__.append("pressures_from_elsasser")
def pressures_from_elsasser(q, r):
    '''(q, r) -> (p, lambda) = ((q + r)/2, (q - r)/2)'''
    return from_elsasser(q, r)


__all__.append("physical_to_elsasser_forcing")
def physical_to_elsasser_forcing(f, curl_g):
    '''
    Momentum forcing f and induction forcing curl g -> (f1, f2) = (f + curl g, f - curl g)
    '''
    f, curl_g = _pair(f, curl_g, ('f', 'curl g'))
    return f + curl_g, f - curl_g


__all__.append("extrapolate")
def extrapolate(current, previous=None):
    '''2 u^n - u^{n-1}; u^n itself when there is no previous level'''
    current = np.asarray(current, dtype=float)
    if previous is None:
        return current.copy()
    current, previous = _pair(current, previous, ('level n', 'level n-1'))
    return 2. * current - previous


__all__.append("member_mean")
def member_mean(members):
    '''
    Mean over the first axis.

    Values are summed in sorted order, so relabelling the members leaves the result bit-for-bit
    unchanged; identical members give back that member exactly.
    '''
    members = np.asarray(members, dtype=float)
    if all(np.array_equal(members[0], m) for m in members[1:]):
        return members[0].copy()
    return np.sort(members, axis=0).sum(axis=0) / len(members)


__all__.append("mean_and_fluctuations")
def mean_and_fluctuations(extrapolants):
    '''
    Split member extrapolants (J, n) into their ensemble mean (n,) and the deviations (J, n)
    '''
    extrapolants = np.asarray(extrapolants, dtype=float)
    if extrapolants.ndim != 2 or len(extrapolants) == 0:
        raise InvalidArgumentError(f'need a nonempty (J, n) member array, got shape {extrapolants.shape}')
    mean = member_mean(extrapolants)
    return mean, extrapolants - mean


__all__.append("ensemble_mean_fluct")
def ensemble_mean_fluct(current, previous=None):
    '''
    <u>^n = (1/J) sum_j (2 u_j^n - u_j^{n-1}) and u_j'^n = 2 u_j^n - u_j^{n-1} - <u>^n.

    Args:
        current (array (J, n)): members at level n
        previous (array (J, n) or None): members at level n-1; without it the mean and
            fluctuations of the level-n fields themselves are returned
    Returns:
        (mean (n,), fluctuations (J, n))
    '''
    current = np.asarray(current, dtype=float)
    if current.ndim != 2 or len(current) == 0:
        raise InvalidArgumentError(f'need at least one member, got array of shape {current.shape}')
    return mean_and_fluctuations(extrapolate(current, previous))
