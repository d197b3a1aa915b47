'''
Exceptions raised by the ensemble simulator.

Each carries a return code string; the command line maps them onto process exit codes.
'''

__all__ = []

__all__.append("MHDEnsembleError")
class MHDEnsembleError(Exception):
    '''
    Base class for all errors raised by mhd_ensemble
    '''
    return_code = 'error'

    def __init__(self, message, return_code=None):
        Exception.__init__(self, message)
        if return_code is not None:
            self.return_code = return_code


__all__.append("InvalidArgumentError")
class InvalidArgumentError(MHDEnsembleError, ValueError):
    '''
    An operation received an argument outside its domain (n=0, J=0, length mismatch, ...)
    '''
    return_code = 'invalid_argument'


__all__.append("ConfigurationError")
class ConfigurationError(MHDEnsembleError):
    '''
    Problems with the run configuration or with boundary data coverage
    '''
    return_code = 'configuration_error'


__all__.append("SolverError")
class SolverError(MHDEnsembleError):
    '''
    A linear solve failed. `step` is the time-step index when known.
    '''
    return_code = 'solver_error'

    def __init__(self, message, step=None, return_code=None):
        MHDEnsembleError.__init__(self, message, return_code)
        self.step = step


__all__.append("SingularMatrixError")
class SingularMatrixError(SolverError):
    '''
    Factorization hit a zero pivot; `pivot` is the first failing index (None if unknown)
    '''
    return_code = 'singular_matrix'

    def __init__(self, message, pivot=None, step=None):
        SolverError.__init__(self, message, step=step)
        self.pivot = pivot
