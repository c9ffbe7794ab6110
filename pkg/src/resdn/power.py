"""Switch power model: base + per-port configuration + control-plane terms.

Ships the three measured OpenFlow switch profiles (NEC PF 5240, Open
vSwitch, Zodiac FX). Per-packet energies are stored in microwatts per
packet and converted to watts here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .model import RoutingState, SwitchId, Topology, as_fraction


@dataclass(frozen=True)
class SwitchPowerProfile:
    """Power constants of one switch model.

    port_w is None when the switch has no measured per-port draw (the
    virtual switch); its configuration term is then 0.
    """

    name: str
    base_w: float
    port_w: float | None
    e_packet_in_uw: float  # microwatts per PacketIn packet
    e_flow_mod_uw: float  # microwatts per FlowMod packet

    def __post_init__(self):
        if self.base_w < 0 or self.e_packet_in_uw < 0 or self.e_flow_mod_uw < 0:
            raise ValueError(f"negative power constant in profile {self.name!r}")
        if self.port_w is not None and self.port_w < 0:
            raise ValueError(f"negative port power in profile {self.name!r}")


NEC_PF5240 = SwitchPowerProfile("nec", 118.33, 0.52, 711.30, 29.25)
OVS = SwitchPowerProfile("ovs", 48.7397, None, 775.53, 356.743)
ZODIAC_FX = SwitchPowerProfile("zodiac", 15.0, 0.15, 775.53, 1455.13)

PROFILES = {p.name: p for p in (NEC_PF5240, OVS, ZODIAC_FX)}


def get_profile(name: str) -> SwitchPowerProfile:
    try:
        return PROFILES[name.lower()]
    except KeyError:
        raise ValueError(
            f"unknown power profile {name!r} (built-in: {', '.join(sorted(PROFILES))})"
        ) from None


def load_profile(text: str) -> SwitchPowerProfile:
    """Load a profile from a JSON config: name plus the four constants."""
    data = json.loads(text)
    try:
        return SwitchPowerProfile(
            name=data["name"],
            base_w=float(data["base_w"]),
            port_w=None if data.get("port_w") is None else float(data["port_w"]),
            e_packet_in_uw=float(data["e_packet_in_uw"]),
            e_flow_mod_uw=float(data["e_flow_mod_uw"]),
        )
    except KeyError as missing:
        raise ValueError(f"profile config missing field {missing}") from None


@dataclass(frozen=True)
class ControlRates:
    """Controller message rates seen by one switch, in packets per second."""

    r_packet_in: Fraction
    r_flow_mod: Fraction

    def __post_init__(self):
        object.__setattr__(self, "r_packet_in", as_fraction(self.r_packet_in))
        object.__setattr__(self, "r_flow_mod", as_fraction(self.r_flow_mod))
        if self.r_packet_in < 0 or self.r_flow_mod < 0:
            raise ValueError("control rates must be nonnegative")


NO_CONTROL = ControlRates(Fraction(0), Fraction(0))


def p_config(profile: SwitchPowerProfile, loads: list[Fraction]) -> float:
    """Configuration power: sum of port load shares times per-port draw."""
    for c in loads:
        if not 0 <= c <= 1:
            raise ValueError(f"port load {c} outside [0, 1]")
    if profile.port_w is None:
        return 0.0
    return float(sum(float(c) for c in loads)) * profile.port_w


def p_control(profile: SwitchPowerProfile, rates: ControlRates) -> float:
    """Control power: message rates times per-packet energies (uW -> W)."""
    return (
        float(rates.r_packet_in) * profile.e_packet_in_uw
        + float(rates.r_flow_mod) * profile.e_flow_mod_uw
    ) / 1e6


def switch_power(
    profile: SwitchPowerProfile,
    loads: list[Fraction],
    rates: ControlRates = NO_CONTROL,
) -> float:
    """Total power of an active switch: base + config + control."""
    return profile.base_w + p_config(profile, loads) + p_control(profile, rates)


def derive_port_loads(
    topology: Topology, state: RoutingState, switch: SwitchId
) -> list[Fraction]:
    """Port load per active incident link: the link's max directed utility.

    A link driven past its nominal capacity still runs the port at full
    line speed, so loads clamp at 1. Inactive switches have no powered
    ports and yield an empty vector.
    """
    if not topology.is_active_switch(switch):
        return []
    one = Fraction(1)
    loads = []
    for key in topology.incident_links(switch):
        if key in topology.active_links:
            loads.append(min(state.link_utility(key), one))
    return loads


def derive_control_rates(
    state: RoutingState, window_s=900
) -> dict[SwitchId, ControlRates]:
    """Model OpenFlow reactive flow setup over one demand window.

    Each flow triggers one PacketIn at its ingress switch and one
    FlowMod at every switch on its path, spread over the window.
    """
    window_s = as_fraction(window_s)
    if window_s <= 0:
        raise ValueError("window must be positive")
    packet_in: dict[SwitchId, int] = {}
    flow_mod: dict[SwitchId, int] = {}
    for flow, path in state.assignment.items():
        ingress = path.nodes[0]
        packet_in[ingress] = packet_in.get(ingress, 0) + 1
        for node in path.nodes:
            flow_mod[node] = flow_mod.get(node, 0) + 1
    switches = sorted(set(packet_in) | set(flow_mod))
    return {
        s: ControlRates(
            Fraction(packet_in.get(s, 0)) / window_s,
            Fraction(flow_mod.get(s, 0)) / window_s,
        )
        for s in switches
    }


@dataclass(frozen=True)
class PowerReport:
    """Per-switch power and network-level aggregates, in watts."""

    per_switch: dict[SwitchId, float]
    total_w: float
    avg_active_w: float  # mean over active switches
    avg_all_w: float  # mean over all switches, inactive counted as 0
    active_switches: int
    no_active_switches: bool


def network_power_report(
    topology: Topology,
    state: RoutingState,
    profile: SwitchPowerProfile,
    window_s=900,
) -> PowerReport:
    """Power of every switch under the profile; inactive switches draw 0."""
    rates = derive_control_rates(state, window_s)
    per_switch: dict[SwitchId, float] = {}
    total = 0.0
    for s in topology.switches:
        if not topology.is_active_switch(s):
            per_switch[s] = 0.0
            continue
        loads = derive_port_loads(topology, state, s)
        watts = switch_power(profile, loads, rates.get(s, NO_CONTROL))
        per_switch[s] = watts
        total += watts
    n_active = len(topology.active_switches)
    return PowerReport(
        per_switch=per_switch,
        total_w=total,
        avg_active_w=total / n_active if n_active else 0.0,
        avg_all_w=total / len(topology.switches) if topology.switches else 0.0,
        active_switches=n_active,
        no_active_switches=n_active == 0,
    )
