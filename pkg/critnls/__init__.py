"""
critnls
=======

Radial simulator and variational toolkit for the combined-term nonlinear
Schrödinger equation  i u_t + Δu = -|u|^4 u + |u|^2 u  in three dimensions.
"""

__version__ = "0.3.0"
__license__ = "MIT"

from .config import SimConfig  # noqa: E402
from .core import DichotomyLab  # noqa: E402

__all__ = ["DichotomyLab", "SimConfig", "__version__"]
