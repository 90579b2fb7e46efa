"""Floquet analysis of linear periodic systems with the frequency as a free parameter."""

from .trigmat import OMEGA, OmegaPoly, OmegaPolyMatrix, TrigMatrix, ExpTrigMatrix

__all__ = ["OMEGA", "OmegaPoly", "OmegaPolyMatrix", "TrigMatrix", "ExpTrigMatrix"]
__version__ = "0.1.0"
