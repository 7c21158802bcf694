"""Time-dependent harmonic oscillator dynamics through the SO(2,1) evolution matrix."""

from . import cyclic, model, oracles, propagate, scan, so21, wavepacket
from .cyclic import CyclicKind, fixed_vector, verdict
from .errors import ConfigError, NumericalError, TDHOError
from .model import FamilySpec, LinearPhase, Profile, RegimeKind, constant_profile, family_profile, regime
from .propagate import PhaseReport, Trajectory, integrate, phases

__version__ = "0.1.0"
