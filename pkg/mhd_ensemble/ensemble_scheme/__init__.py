__all__ = []

from .params import *
from .params import __all__ as __params_all
__all__ += __params_all

from .elsasser import *
from .elsasser import __all__ as __elsasser_all
__all__ += __elsasser_all

from .diagnostics import *
from .diagnostics import __all__ as __diagnostics_all
__all__ += __diagnostics_all

from .stepper import *
from .stepper import __all__ as __stepper_all
__all__ += __stepper_all
