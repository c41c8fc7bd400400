"""EP-based soft MIMO detection and turbo decoding simulator."""

from ._mimoep import *  # noqa: F401,F403
from ._mimoep import __doc__  # noqa: F401

__version__ = "0.1.0"
