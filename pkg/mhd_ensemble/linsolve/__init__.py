__all__ = []

from .factorization import *
from .factorization import __all__ as __factorization_all
__all__ += __factorization_all
