"""Channel model and rate evaluation."""

from .channel import (
    FadingState,
    Topology,
    dbw_to_watts,
    draw_fading_state,
    generate_ensemble,
    pathloss_linear,
    sample_topology,
)
from .rates import (
    Allocation,
    SecrecyMode,
    SecrecyReport,
    coop_secrecy,
    no_coop_secrecy,
    outage_indicator,
    per_eav_secrecy,
    su_rate,
)

__all__ = [
    "FadingState",
    "Topology",
    "dbw_to_watts",
    "draw_fading_state",
    "generate_ensemble",
    "pathloss_linear",
    "sample_topology",
    "Allocation",
    "SecrecyMode",
    "SecrecyReport",
    "coop_secrecy",
    "no_coop_secrecy",
    "outage_indicator",
    "per_eav_secrecy",
    "su_rate",
]
