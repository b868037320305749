"""Laser-induced tunneling in an STM junction: TDSE, flux-form, SFA and saddle-point solvers."""
from .errors import (AttostmError, ConfigError, DetectionError, DomainError, InputError, NumericError,
                     PoleError, QuadratureError)
from .units import JunctionConfig, PulseConfig, Quantity, Unit, au, from_atomic, keldysh_gamma, to_atomic

__version__ = "0.1.0"
