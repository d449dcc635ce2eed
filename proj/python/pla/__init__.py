from ._pla import *  # noqa: F401,F403
from ._pla import __doc__  # noqa: F401
