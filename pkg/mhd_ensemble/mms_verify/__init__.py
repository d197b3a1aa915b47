__all__ = []

from .manufactured import *
from .manufactured import __all__ as __manufactured_all
__all__ += __manufactured_all

from .convergence import *
from .convergence import __all__ as __convergence_all
__all__ += __convergence_all
