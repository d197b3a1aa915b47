__all__ = []

from .channel import *
from .channel import __all__ as __channel_all
__all__ += __channel_all
