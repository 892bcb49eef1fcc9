"""Superradiant resonance energy transfer: rates and fidelities in vacuum."""
from .errors import (AcceptorInsideSphere, AcceptorInsideSupport, BadAngles, BadShell,
                     CoincidentPoints, DegenerateEnsemble, EmptyGrid, InvalidDistribution,
                     NonUnitDipole, SrretError)
from .greens import Regime, amplitude, green_vacuum, trace_pair

__version__ = "0.1.0"
