"""Three waveguide-coupled qubits: dynamics, closed-form propagator and two-pulse phase tomography."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
