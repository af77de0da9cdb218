"""Well-posedness diagnostics for stochastic inversion problems Y* = g(X) + eps."""

from ._wellposed import *  # noqa: F401,F403
from ._wellposed import __version__  # noqa: F401
