"""
Exception types raised by the secure-cwpcn engine.

Library code raises these; only the command-line entry point turns them
into exit codes and log lines.
"""

from typing import Optional


class CwpcnError(Exception):
    """Base class for all engine errors."""


class ConfigurationError(CwpcnError):
    """Raised when a configuration or experiment file is missing or invalid."""


class InfeasibleProblemError(CwpcnError):
    """
    Raised when the primary secrecy constraint cannot be met.

    Attributes:
        eps_p: Outage probability without cooperation
        eps_0: Required outage target (eps_p minus the requested reduction)
        min_eps_ps: Smallest outage the greedy probe reached, if it was run
    """

    def __init__(
        self, message: str, eps_p: float, eps_0: float, min_eps_ps: Optional[float] = None
    ):
        super().__init__(message)
        self.eps_p = eps_p
        self.eps_0 = eps_0
        self.min_eps_ps = min_eps_ps


class OracleDimensionError(CwpcnError):
    """Raised when the exhaustive oracle is asked for a network it cannot enumerate."""
