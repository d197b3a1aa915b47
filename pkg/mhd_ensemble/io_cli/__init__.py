__all__ = []

from .run_config import *
from .run_config import __all__ as __run_config_all
__all__ += __run_config_all

from .output import *
from .output import __all__ as __output_all
__all__ += __output_all

from .perf import *
from .perf import __all__ as __perf_all
__all__ += __perf_all

from .cli import *
from .cli import __all__ as __cli_all
__all__ += __cli_all
