"""Evaluation metrics for a routed network state.

All metric functions return exact Fractions; the CSV layer converts to
floats at the very end.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import LinkKey, RoutingState, Topology, UtilityInterval, as_fraction


@dataclass(frozen=True)
class LinkClassification:
    """Interval classification of one active link.

    The link's utility is the max of its two directed utilities; a link
    is in-interval when u_min <= utility <= u_max (both ends inclusive).
    """

    link: LinkKey
    utility: Fraction
    in_interval: bool


def classify_links(
    state: RoutingState, topology: Topology, interval: UtilityInterval
) -> list[LinkClassification]:
    """Classification for every active link, in canonical link order."""
    out = []
    for key in topology.active_link_keys():
        u = state.link_utility(key)
        out.append(LinkClassification(key, u, interval.contains(u)))
    return out


def resdn(state: RoutingState, topology: Topology, interval: UtilityInterval) -> Fraction:
    """Share of active links whose utility lies inside the interval.

    With no active links the ratio is vacuous and defined as 1 (an empty
    network has every powered link operating profitably).
    """
    classes = classify_links(state, topology, interval)
    if not classes:
        return Fraction(1)
    return Fraction(sum(1 for c in classes if c.in_interval), len(classes))


def links_saved(topology: Topology) -> Fraction:
    """Percentage of links turned off relative to all links."""
    total = len(topology.link_keys)
    if total == 0:
        raise ValueError("empty topology")
    return 100 * (1 - Fraction(len(topology.active_links), total))


def avg_path_length(state: RoutingState) -> Fraction:
    """Mean assigned path length in hops."""
    if not state.assignment:
        raise ValueError("no flows")
    total_hops = sum(path.hops for path in state.assignment.values())
    return Fraction(total_hops, len(state.assignment))


def traffic_proportionality(
    traffic_volume: Fraction, topology: Topology, m=3, n=1
) -> Fraction:
    """Normalized ratio of traffic volume to weighted active-component share.

    Equals the traffic volume exactly when every switch and link is
    active; 1.0 means energy use scales perfectly with load.
    """
    traffic_volume = as_fraction(traffic_volume)
    m, n = as_fraction(m), as_fraction(n)
    if m <= 0 or n <= 0:
        raise ValueError("weights must be positive")
    if not topology.switches or not topology.link_keys:
        raise ValueError("need at least one switch and one link")
    if not 0 <= traffic_volume <= 1:
        raise ValueError(f"traffic volume {traffic_volume} outside [0, 1]")
    if traffic_volume == 0:
        return Fraction(0)
    switch_share = Fraction(len(topology.active_switches), len(topology.switches))
    link_share = Fraction(len(topology.active_links), len(topology.link_keys))
    denom = m * switch_share + n * link_share
    if denom == 0:
        raise ValueError("inconsistent state: positive volume with nothing active")
    return traffic_volume / denom * (m + n)


CSV_COLUMNS = [
    "heuristic",
    "traffic_volume",
    "u_min",
    "u_max",
    "status",
    "resdn",
    "links_saved_pct",
    "avg_path_length",
    "traffic_proportionality",
    "active_switches",
    "total_switches",
    "active_links",
    "total_links",
    "flows",
    "fallback_flows",
    "total_power_w",
    "avg_power_active_w",
    "avg_power_all_w",
    "profile",
    "max_paths",
    "hop_slack",
    "message",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, Fraction):
        return "%.10g" % float(value)
    if isinstance(value, float):
        return "%.10g" % value
    return str(value)


@dataclass
class MetricsReport:
    """One experiment cell: all metrics for a (heuristic, volume) run."""

    heuristic: str
    traffic_volume: Fraction
    u_min: Fraction
    u_max: Fraction
    status: str = "ok"
    resdn: Fraction | None = None
    links_saved_pct: Fraction | None = None
    avg_path_length: Fraction | None = None
    traffic_proportionality: Fraction | None = None
    active_switches: int | None = None
    total_switches: int | None = None
    active_links: int | None = None
    total_links: int | None = None
    flows: int | None = None
    fallback_flows: int | None = None
    total_power_w: float | None = None
    avg_power_active_w: float | None = None
    avg_power_all_w: float | None = None
    profile: str = ""
    max_paths: int | None = None
    hop_slack: int | None = None
    message: str = ""

    def to_csv_row(self) -> list[str]:
        return [_fmt(getattr(self, col)) for col in CSV_COLUMNS]
