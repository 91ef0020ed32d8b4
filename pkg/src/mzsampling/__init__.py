"""Marcinkiewicz-Zygmund sampling: frame bounds, least squares and quadrature."""

from .approx import *  # noqa: F401,F403
from .basis import *  # noqa: F401,F403
from .errors import *  # noqa: F401,F403
from .mzfamily import *  # noqa: F401,F403
from .quadrature import *  # noqa: F401,F403
from . import approx, basis, errors, mzfamily, quadrature

__all__ = approx.__all__ + basis.__all__ + errors.__all__ + mzfamily.__all__ + quadrature.__all__
__version__ = "0.1.0"
