__all__ = []

from .reference_element import *
from .reference_element import __all__ as __reference_element_all
__all__ += __reference_element_all

from .mixed_space import *
from .mixed_space import __all__ as __mixed_space_all
__all__ += __mixed_space_all

from .assembly import *
from .assembly import __all__ as __assembly_all
__all__ += __assembly_all

from .dirichlet import *
from .dirichlet import __all__ as __dirichlet_all
__all__ += __dirichlet_all
