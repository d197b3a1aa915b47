__all__ = []

from .quad_mesh import *
from .quad_mesh import __all__ as __quad_mesh_all
__all__ += __quad_mesh_all
