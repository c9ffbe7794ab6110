"""Synthetic 22-node / 36-link evaluation network and seeded demand matrices.

The topology mirrors the European research-network shape used for the
published measurements: a meshed core, regional rings, and degree-2
transit nodes that alternative routes can bypass. Demand matrices are
generated from a seed with flow counts in [82, 462], rates log-normal
around a 7.79 Mbps mean, and a strong bias toward short-distance pairs
so that high traffic volumes remain mostly routable.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

from .ingest import TrafficMatrix, parse_topology
from .model import Flow, Topology, build_topology, shortest_hop_counts

# (a, b, capacity Mbps): core links are wider than regional and edge links
GEANT_LIKE_LINKS = [
    ("AT", "CH", 100),
    ("AT", "CZ", 100),
    ("AT", "DE", 200),
    ("AT", "HU", 100),
    ("AT", "SI", 50),
    ("BE", "FR", 50),
    ("BE", "NL", 50),
    ("CH", "DE", 200),
    ("CH", "FR", 100),
    ("CH", "IT", 100),
    ("CZ", "DE", 100),
    ("CZ", "PL", 50),
    ("CZ", "SK", 50),
    ("DE", "FR", 200),
    ("DE", "IT", 200),
    ("DE", "LU", 50),
    ("DE", "NL", 200),
    ("DE", "SE", 100),
    ("ES", "FR", 100),
    ("ES", "IT", 100),
    ("ES", "PT", 50),
    ("FR", "LU", 50),
    ("FR", "UK", 200),
    ("GR", "IL", 50),
    ("GR", "IT", 50),
    ("HR", "HU", 50),
    ("HR", "SI", 50),
    ("HU", "SK", 50),
    ("IE", "NY", 50),
    ("IE", "UK", 50),
    ("IL", "IT", 100),
    ("IT", "NY", 100),
    ("NL", "UK", 200),
    ("NY", "UK", 100),
    ("PL", "SE", 50),
    ("PT", "UK", 50),
]

# degree-2 transit nodes with a same-length-or-shorter bypass; they host
# no demand endpoints, so routing decides whether they stay powered
TRANSIT_NODES = ("BE", "GR", "IE", "LU", "PL", "SI", "SK")

MEAN_RATE_MBPS = Fraction("7.79")
MIN_FLOWS = 82
MAX_FLOWS = 462


def geant_like_topology_text() -> str:
    nodes = sorted({n for a, b, _ in GEANT_LIKE_LINKS for n in (a, b)})
    lines = ["# synthetic 22-node / 36-link research-network fixture"]
    lines += [f"node {n}" for n in nodes]
    lines += [f"link {a} {b} {w}" for a, b, w in GEANT_LIKE_LINKS]
    return "\n".join(lines) + "\n"


def geant_like_topology() -> Topology:
    return build_topology(parse_topology(geant_like_topology_text()))


def generate_traffic(
    topology: Topology,
    seed: int,
    n_flows: int | None = None,
    decay: float = 0.03,
    sigma_near: float = 0.12,
    sigma_far: float = 0.5,
) -> TrafficMatrix:
    """Seeded demand matrix over the non-transit nodes.

    Every adjacent endpoint pair carries demand roughly proportional to
    its link capacity (log-normal spread sigma_near); the remaining
    flows go to more distant pairs with rates shrunk by `decay` per
    extra hop, so the aggregate stays routable even at high traffic
    volumes. n_flows defaults to a uniform draw in [82, 462], clamped
    to the number of available ordered pairs; the overall mean rate is
    normalized to 7.79 Mbps.
    """
    rng = random.Random(seed)
    if n_flows is None:
        n_flows = rng.randint(MIN_FLOWS, MAX_FLOWS)

    endpoints = [s for s in topology.switches if s not in TRANSIT_NODES]
    near: list[tuple[str, str]] = []
    far: list[tuple[str, str, int]] = []
    for src in endpoints:
        dist = shortest_hop_counts(topology, src)
        for dst in endpoints:
            if dst == src:
                continue
            if dist[dst] == 1:
                near.append((src, dst))
            else:
                far.append((src, dst, dist[dst]))
    n_flows = min(n_flows, len(near) + len(far))

    adjacent_caps = [float(topology.bandwidth(a, b)) for a, b in near]
    mean_adjacent_cap = sum(adjacent_caps) / len(adjacent_caps)

    rates: dict[tuple[str, str], float] = {}
    for (src, dst), cap in zip(near, adjacent_caps):
        spread = rng.lognormvariate(-sigma_near * sigma_near / 2, sigma_near)
        rates[(src, dst)] = cap / mean_adjacent_cap * spread

    n_far = max(0, n_flows - len(near))
    pool = sorted(far)
    weights = [decay ** (d - 1) for _, _, d in pool]
    for _ in range(n_far):
        total = sum(weights)
        pick = rng.random() * total
        acc = 0.0
        idx = len(pool) - 1
        for k, w in enumerate(weights):
            acc += w
            if pick <= acc:
                idx = k
                break
        src, dst, d = pool.pop(idx)
        weights.pop(idx)
        spread = rng.lognormvariate(-sigma_far * sigma_far / 2, sigma_far)
        rates[(src, dst)] = decay ** (d - 1) * spread

    scale = float(MEAN_RATE_MBPS) * len(rates) / sum(rates.values())
    entries = [
        Flow(src, dst, Fraction(f"{rate * scale:.6f}"))
        for (src, dst), rate in sorted(rates.items())
    ]
    return TrafficMatrix(entries=tuple(entries))


def traffic_csv_text(matrix: TrafficMatrix) -> str:
    lines = ["src,dst,rate_mbps"]
    lines += [f"{f.src},{f.dst},{float(f.rate):.6f}" for f in matrix.entries]
    return "\n".join(lines) + "\n"
