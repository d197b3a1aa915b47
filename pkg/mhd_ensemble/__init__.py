__all__ = []

from importlib import metadata

version = '0.0.0' #updated from the installed distribution below
try:
    version = metadata.version('mhd-ensemble')
except metadata.PackageNotFoundError:
    pass
__all__.append("version")

from .exceptions import *
from .exceptions import __all__ as __exceptions_all
__all__ += __exceptions_all
