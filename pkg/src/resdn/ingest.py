"""Parsers for topology and traffic-matrix files, plus demand scaling.

Topology file: line-oriented, `node <id>` and `link <id> <id> <bw_mbps>`,
`#` comments, ids matching [A-Za-z0-9_]+. Traffic matrix: CSV lines
`src,dst,rate_mbps` with optional header and `#` comments.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .model import (
    Flow,
    LinkDecl,
    NodeDecl,
    SwitchId,
    Topology,
    TopologyDescription,
    as_fraction,
)

_ID_RE = re.compile(r"^[A-Za-z0-9_]+$")

DEFAULT_WINDOW_S = 900  # demands aggregate over 15-minute windows


class ParseError(ValueError):
    """Input file rejected; message carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _strip_comment(raw: str) -> str:
    return raw.split("#", 1)[0].strip()


def _parse_rate(token: str, line: int) -> Fraction:
    try:
        rate = Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ParseError(line, f"bad rate {token!r}") from None
    if rate < 0:
        raise ParseError(line, f"negative rate {token}")
    return rate


def parse_topology(text: str) -> TopologyDescription:
    """Parse topology text into a structurally validated description."""
    nodes: list[NodeDecl] = []
    links: list[LinkDecl] = []
    seen_nodes: set[SwitchId] = set()
    seen_links: set[tuple[SwitchId, SwitchId]] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        tokens = line.split()
        kind = tokens[0].lower()
        if kind == "node":
            if len(tokens) != 2:
                raise ParseError(lineno, "expected: node <id>")
            name = tokens[1]
            if not _ID_RE.match(name):
                raise ParseError(lineno, f"bad node id {name!r}")
            if name in seen_nodes:
                raise ParseError(lineno, f"duplicate node {name!r}")
            seen_nodes.add(name)
            nodes.append(NodeDecl(name, lineno))
        elif kind == "link":
            if len(tokens) != 4:
                raise ParseError(lineno, "expected: link <id> <id> <bandwidth_mbps>")
            a, b, bw_token = tokens[1], tokens[2], tokens[3]
            for end in (a, b):
                if not _ID_RE.match(end):
                    raise ParseError(lineno, f"bad node id {end!r}")
            if a == b:
                raise ParseError(lineno, f"self-loop on {a!r}")
            try:
                bw = Fraction(bw_token)
            except (ValueError, ZeroDivisionError):
                raise ParseError(lineno, f"bad bandwidth {bw_token!r}") from None
            if bw <= 0:
                raise ParseError(lineno, f"non-positive bandwidth {bw_token}")
            key = (a, b) if a <= b else (b, a)
            if key in seen_links:
                raise ParseError(lineno, f"duplicate link {key[0]}-{key[1]}")
            seen_links.add(key)
            links.append(LinkDecl(a, b, bw, lineno))
        else:
            raise ParseError(lineno, f"unknown directive {tokens[0]!r}")

    return TopologyDescription(nodes=tuple(nodes), links=tuple(links))


@dataclass(frozen=True)
class TrafficMatrix:
    """Positive traffic demands over one aggregation window."""

    entries: tuple[Flow, ...]
    window_s: Fraction = field(default_factory=lambda: Fraction(DEFAULT_WINDOW_S))

    def __post_init__(self):
        object.__setattr__(self, "window_s", as_fraction(self.window_s))
        if self.window_s <= 0:
            raise ValueError("window length must be positive")

    def total_rate(self) -> Fraction:
        return sum((f.rate for f in self.entries), Fraction(0))

    def volume(self, topology: Topology) -> Fraction:
        """Aggregate demand as a fraction of total directed capacity."""
        return self.total_rate() / topology.total_directed_capacity()


def parse_traffic_matrix(text: str, window_s=DEFAULT_WINDOW_S) -> TrafficMatrix:
    """Parse `src,dst,rate_mbps` CSV text.

    Zero-rate entries are dropped; duplicate (src, dst) pairs are merged
    by summing their rates. Unknown node ids are deferred to binding.
    """
    demands: dict[tuple[SwitchId, SwitchId], Fraction] = {}
    header_allowed = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise ParseError(lineno, "expected: src,dst,rate_mbps")
        src, dst, rate_token = parts
        if header_allowed and not _looks_numeric(rate_token):
            header_allowed = False  # optional header row
            continue
        header_allowed = False
        for end in (src, dst):
            if not _ID_RE.match(end):
                raise ParseError(lineno, f"bad node id {end!r}")
        if src == dst:
            raise ParseError(lineno, f"flow source equals destination {src!r}")
        rate = _parse_rate(rate_token, lineno)
        if rate == 0:
            continue
        demands[(src, dst)] = demands.get((src, dst), Fraction(0)) + rate

    entries = tuple(Flow(src, dst, rate) for (src, dst), rate in demands.items())
    return TrafficMatrix(entries=entries, window_s=window_s)


def _looks_numeric(token: str) -> bool:
    try:
        Fraction(token)
    except (ValueError, ZeroDivisionError):
        return False
    return True


def scale_to_volume(
    matrix: TrafficMatrix, topology: Topology, target_pct: Fraction
) -> TrafficMatrix:
    """Rescale all rates by one factor so that volume(topology) == target_pct."""
    target_pct = as_fraction(target_pct)
    if not matrix.entries:
        raise ValueError("nothing to scale: empty traffic matrix")
    if not 0 < target_pct <= 1:
        raise ValueError(f"target volume {target_pct} outside (0, 1]")
    factor = target_pct * topology.total_directed_capacity() / matrix.total_rate()
    scaled = tuple(Flow(f.src, f.dst, f.rate * factor) for f in matrix.entries)
    return TrafficMatrix(entries=scaled, window_s=matrix.window_s)


def bind_flows(matrix: TrafficMatrix, topology: Topology) -> list[Flow]:
    """Check that all endpoints exist in the topology; returns the flow list."""
    known = set(topology.switches)
    for f in matrix.entries:
        for end in (f.src, f.dst):
            if end not in known:
                raise ValueError(f"unknown endpoint {end!r} in traffic matrix")
    return list(matrix.entries)
