"""Network model: capacitated topology, flows, paths and link utilities.

Rates, bandwidths and utilities are kept as exact `Fraction`s so that
zero tests and interval membership are exact; callers convert to float
only when reporting.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

SwitchId = str
LinkKey = tuple[SwitchId, SwitchId]  # canonical: (min, max)
DirectedLink = tuple[SwitchId, SwitchId]


def as_fraction(value) -> Fraction:
    """Convert a number to an exact Fraction.

    Floats are interpreted through their shortest decimal repr, so 0.31
    becomes 31/100 rather than the nearest binary fraction.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


def link_key(a: SwitchId, b: SwitchId) -> LinkKey:
    """Canonical unordered key for the link between a and b."""
    return (a, b) if a <= b else (b, a)


class TopologyError(ValueError):
    """Raised when a topology description violates a structural rule."""


class Topology:
    """Switches and bidirectional capacitated links with active flags.

    Instances are immutable by convention: mutating operations return a
    new Topology. A link is active only if both endpoint switches are,
    which `with_inactive` maintains.
    """

    def __init__(
        self,
        switches: Iterable[SwitchId],
        links: Iterable[tuple[SwitchId, SwitchId, Fraction]],
        active_switches: Iterable[SwitchId] | None = None,
        active_links: Iterable[LinkKey] | None = None,
    ):
        self.switches: tuple[SwitchId, ...] = tuple(sorted(switches))
        if len(set(self.switches)) != len(self.switches):
            raise TopologyError("duplicate switch id")

        self._bandwidth: dict[LinkKey, Fraction] = {}
        switch_set = set(self.switches)
        for a, b, bw in links:
            if a == b:
                raise TopologyError(f"self-loop on {a!r}")
            if a not in switch_set or b not in switch_set:
                missing = a if a not in switch_set else b
                raise TopologyError(f"unknown endpoint {missing!r}")
            key = link_key(a, b)
            if key in self._bandwidth:
                raise TopologyError(f"duplicate link {key[0]}-{key[1]}")
            bw = as_fraction(bw)
            if bw <= 0:
                raise TopologyError(f"non-positive bandwidth on {key[0]}-{key[1]}")
            self._bandwidth[key] = bw

        self.link_keys: tuple[LinkKey, ...] = tuple(sorted(self._bandwidth))

        self.active_switches: frozenset[SwitchId] = (
            frozenset(self.switches) if active_switches is None else frozenset(active_switches)
        )
        if not self.active_switches <= switch_set:
            raise TopologyError("active switch not in topology")
        self.active_links: frozenset[LinkKey] = (
            frozenset(self.link_keys) if active_links is None else frozenset(active_links)
        )
        if not self.active_links <= set(self.link_keys):
            raise TopologyError("active link not in topology")
        for a, b in self.active_links:
            if a not in self.active_switches or b not in self.active_switches:
                raise TopologyError(f"link {a}-{b} active but an endpoint switch is not")

        self._adjacency: dict[SwitchId, list[SwitchId]] = {s: [] for s in self.switches}
        for a, b in self.link_keys:
            if (a, b) in self.active_links:
                self._adjacency[a].append(b)
                self._adjacency[b].append(a)
        for nbrs in self._adjacency.values():
            nbrs.sort()

        # memo for path enumeration; safe because the instance never mutates
        self._path_cache: dict = {}

    # -- queries ---------------------------------------------------------

    def has_link(self, a: SwitchId, b: SwitchId) -> bool:
        return link_key(a, b) in self._bandwidth

    def bandwidth(self, a: SwitchId, b: SwitchId) -> Fraction:
        return self._bandwidth[link_key(a, b)]

    def is_active_link(self, a: SwitchId, b: SwitchId) -> bool:
        return link_key(a, b) in self.active_links

    def is_active_switch(self, s: SwitchId) -> bool:
        return s in self.active_switches

    def neighbors(self, s: SwitchId) -> list[SwitchId]:
        """Neighbors of s over active links (sorted)."""
        return self._adjacency[s]

    def incident_links(self, s: SwitchId) -> list[LinkKey]:
        """All link keys touching s, active or not (sorted)."""
        return [k for k in self.link_keys if s in k]

    def active_link_keys(self) -> list[LinkKey]:
        return [k for k in self.link_keys if k in self.active_links]

    def directed_active_links(self) -> list[DirectedLink]:
        out = []
        for a, b in self.active_link_keys():
            out.append((a, b))
            out.append((b, a))
        return out

    def total_directed_capacity(self) -> Fraction:
        """Sum of directed link capacities (each bidirectional link twice)."""
        return 2 * sum(self._bandwidth.values(), Fraction(0))

    # -- derivation ------------------------------------------------------

    def with_inactive(
        self,
        links: Iterable[LinkKey] = (),
        switches: Iterable[SwitchId] = (),
    ) -> "Topology":
        """Copy with the given links/switches deactivated.

        Links incident to a deactivated switch are deactivated as well,
        so the link-switch consistency rule always holds.
        """
        off_switches = set(switches)
        off_links = {link_key(a, b) for a, b in links}
        new_switches = self.active_switches - off_switches
        new_links = {
            k
            for k in self.active_links
            if k not in off_links and k[0] in new_switches and k[1] in new_switches
        }
        return Topology(
            self.switches,
            [(a, b, self._bandwidth[(a, b)]) for a, b in self.link_keys],
            active_switches=new_switches,
            active_links=new_links,
        )

    def __repr__(self):
        return (
            f"Topology({len(self.switches)} switches, {len(self.link_keys)} links, "
            f"{len(self.active_switches)} / {len(self.active_links)} active)"
        )


@dataclass(frozen=True)
class NodeDecl:
    name: SwitchId
    line: int = 0


@dataclass(frozen=True)
class LinkDecl:
    a: SwitchId
    b: SwitchId
    bandwidth_mbps: Fraction
    line: int = 0


@dataclass(frozen=True)
class TopologyDescription:
    """Structurally parsed topology file; entries carry source line numbers."""

    nodes: tuple[NodeDecl, ...]
    links: tuple[LinkDecl, ...]


def build_topology(description: TopologyDescription) -> Topology:
    """Construct an all-active Topology, naming the offending line on rejection."""
    seen_nodes: set[SwitchId] = set()
    for node in description.nodes:
        if node.name in seen_nodes:
            raise TopologyError(f"line {node.line}: duplicate node {node.name!r}")
        seen_nodes.add(node.name)

    seen_links: set[LinkKey] = set()
    links = []
    for decl in description.links:
        where = f"line {decl.line}: "
        if decl.a == decl.b:
            raise TopologyError(f"{where}self-loop on {decl.a!r}")
        for end in (decl.a, decl.b):
            if end not in seen_nodes:
                raise TopologyError(f"{where}unknown endpoint {end!r}")
        key = link_key(decl.a, decl.b)
        if key in seen_links:
            raise TopologyError(f"{where}duplicate link {key[0]}-{key[1]}")
        seen_links.add(key)
        bw = as_fraction(decl.bandwidth_mbps)
        if bw <= 0:
            raise TopologyError(f"{where}non-positive bandwidth {decl.bandwidth_mbps}")
        links.append((decl.a, decl.b, bw))

    return Topology(seen_nodes, links)


@dataclass(frozen=True)
class Flow:
    """A unidirectional traffic demand."""

    src: SwitchId
    dst: SwitchId
    rate: Fraction  # Mbps

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError(f"flow source equals destination: {self.src!r}")
        object.__setattr__(self, "rate", as_fraction(self.rate))
        if self.rate <= 0:
            raise ValueError(f"non-positive flow rate for {self.src}->{self.dst}")


@dataclass(frozen=True)
class Path:
    """A simple path as an ordered node sequence (at least one hop)."""

    nodes: tuple[SwitchId, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if len(self.nodes) < 2:
            raise ValueError("path needs at least one hop")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError(f"path repeats a node: {self.nodes}")

    @property
    def hops(self) -> int:
        return len(self.nodes) - 1

    def directed_links(self) -> list[DirectedLink]:
        return list(zip(self.nodes, self.nodes[1:]))

    def link_keys(self) -> list[LinkKey]:
        return [link_key(a, b) for a, b in self.directed_links()]

    def __contains__(self, node: SwitchId) -> bool:
        return node in self.nodes


@dataclass(frozen=True)
class UtilityInterval:
    """The (u_min, u_max) pair governing profitable link operation."""

    u_min: Fraction
    u_max: Fraction

    def __post_init__(self):
        object.__setattr__(self, "u_min", as_fraction(self.u_min))
        object.__setattr__(self, "u_max", as_fraction(self.u_max))
        if not (0 <= self.u_min <= self.u_max <= 1):
            raise ValueError(f"invalid utility interval [{self.u_min}, {self.u_max}]")

    @classmethod
    def from_percentages(cls, u_min_pct, u_max_pct) -> "UtilityInterval":
        return cls(as_fraction(u_min_pct) / 100, as_fraction(u_max_pct) / 100)

    def contains(self, utility: Fraction) -> bool:
        """Inclusive at both ends."""
        return self.u_min <= utility <= self.u_max


@dataclass(frozen=True)
class PathBounds:
    """Caps for path enumeration.

    max_hops bounds path length absolutely; when None, each query uses
    its shortest-path length plus hop_slack. max_paths caps how many
    paths are returned (shortest kept first).
    """

    max_hops: int | None = None
    hop_slack: int = 2
    max_paths: int = 50


def validate_path(topology: Topology, path: Path) -> None:
    """Raise if the path does not run over active links of the topology."""
    for a, b in path.directed_links():
        if not topology.has_link(a, b):
            raise ValueError(f"path uses nonexistent link {a}-{b}")
        if not topology.is_active_link(a, b):
            raise ValueError(f"path uses inactive link {a}-{b}")


def shortest_hop_counts(topology: Topology, src: SwitchId) -> dict[SwitchId, int]:
    """BFS hop counts from src over active links/switches."""
    if not topology.is_active_switch(src):
        return {}
    dist = {src: 0}
    frontier = [src]
    while frontier:
        nxt = []
        for node in frontier:
            for nbr in topology.neighbors(node):
                if nbr not in dist:
                    dist[nbr] = dist[node] + 1
                    nxt.append(nbr)
        frontier = nxt
    return dist


def enumerate_paths(
    topology: Topology,
    src: SwitchId,
    dst: SwitchId,
    bounds: PathBounds = PathBounds(),
) -> list[Path]:
    """All simple paths src->dst over active links, within bounds.

    Sorted by hop count, ties broken lexicographically by node sequence;
    truncated to bounds.max_paths after sorting so the shortest
    alternatives are always kept. Returns [] when dst is unreachable.
    """
    if src == dst:
        raise ValueError("src equals dst")
    cache_key = (src, dst, bounds)
    cached = topology._path_cache.get(cache_key)
    if cached is not None:
        return list(cached)

    if not (topology.is_active_switch(src) and topology.is_active_switch(dst)):
        return []
    dist_to_dst = shortest_hop_counts(topology, dst)
    if src not in dist_to_dst:
        return []
    bound = bounds.max_hops if bounds.max_hops is not None else dist_to_dst[src] + bounds.hop_slack

    found: list[tuple[SwitchId, ...]] = []
    stack = [src]
    on_stack = {src}

    def dfs(node: SwitchId) -> None:
        depth = len(stack) - 1
        for nbr in topology.neighbors(node):
            if nbr == dst:
                if depth + 1 <= bound:
                    found.append(tuple(stack) + (dst,))
                continue
            if nbr in on_stack:
                continue
            # prune branches that cannot reach dst within the bound
            remaining = dist_to_dst.get(nbr)
            if remaining is None or depth + 1 + remaining > bound:
                continue
            stack.append(nbr)
            on_stack.add(nbr)
            dfs(nbr)
            stack.pop()
            on_stack.remove(nbr)

    dfs(src)
    found.sort(key=lambda nodes: (len(nodes), nodes))
    paths = [Path(nodes) for nodes in found[: bounds.max_paths]]
    topology._path_cache[cache_key] = paths
    return list(paths)


def compute_utilities(
    topology: Topology, assignment: Mapping[Flow, Path]
) -> dict[DirectedLink, Fraction]:
    """Directed link utilities from an assignment (rate sums over bandwidth).

    Every directed active link gets an entry; links carrying no flow
    have utility 0. Values above 1 are returned as-is for the
    constraint verifier to flag.
    """
    utilities: dict[DirectedLink, Fraction] = {
        d: Fraction(0) for d in topology.directed_active_links()
    }
    for flow, path in assignment.items():
        validate_path(topology, path)
        for a, b in path.directed_links():
            utilities[(a, b)] += flow.rate / topology.bandwidth(a, b)
    return utilities


@dataclass(frozen=True)
class RoutingState:
    """A committed flow->path assignment plus derived directed utilities."""

    assignment: dict[Flow, Path]
    utilities: dict[DirectedLink, Fraction]

    @classmethod
    def from_assignment(
        cls, topology: Topology, assignment: Mapping[Flow, Path]
    ) -> "RoutingState":
        assignment = dict(assignment)
        return cls(assignment=assignment, utilities=compute_utilities(topology, assignment))

    def utility(self, a: SwitchId, b: SwitchId) -> Fraction:
        return self.utilities.get((a, b), Fraction(0))

    def link_utility(self, key: LinkKey) -> Fraction:
        """Utility of a bidirectional link: the max of its two directions."""
        a, b = key
        return max(self.utility(a, b), self.utility(b, a))

    def flows_on_link(self, key: LinkKey) -> list[Flow]:
        """Flows whose path crosses the link in either direction (assignment order)."""
        a, b = link_key(*key)
        out = []
        for flow, path in self.assignment.items():
            for u, v in path.directed_links():
                if link_key(u, v) == (a, b):
                    out.append(flow)
                    break
        return out


def prune_idle(state: RoutingState, topology: Topology) -> Topology:
    """Deactivate links whose both directions are idle, then stranded switches.

    Never deactivates a link with positive utility and never activates
    anything; idempotent.
    """
    idle_links = [
        key for key in topology.active_link_keys() if state.link_utility(key) == 0
    ]
    pruned = topology.with_inactive(links=idle_links)
    idle_switches = [
        s
        for s in pruned.active_switches
        if not any(k in pruned.active_links for k in pruned.incident_links(s))
    ]
    return pruned.with_inactive(switches=idle_switches)
