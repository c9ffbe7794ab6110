"""Routing strategies: greedy interval maximization, under-utilized link
draining (next-shortest-path and next-maximum-utility), the four flow
ordering heuristics, and the best-of composition.

Every heuristic is a pure function: topology and flows in, outcome out.
Identical inputs give identical outcomes; all tie-breaks are by hop
count then lexicographic node sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .metrics import links_saved, resdn as resdn_metric
from .model import (
    DirectedLink,
    Flow,
    LinkKey,
    Path,
    PathBounds,
    RoutingState,
    SwitchId,
    Topology,
    UtilityInterval,
    enumerate_paths,
    prune_idle,
    shortest_hop_counts,
)

ORDERINGS = ("spf", "spl", "sdf", "hdf")
HEURISTIC_NAMES = ("maxresdn", "nsp", "nmu") + ORDERINGS + ("b",)


class RoutingError(ValueError):
    """A flow cannot be bound or routed at all."""


@dataclass(frozen=True)
class HeuristicOutcome:
    """Result of one heuristic run.

    topology is the final pruned network; state is rebuilt against it.
    fallback_flows were routed despite violating the interval/capacity
    guard (the alternative would be dropping demand).
    """

    name: str
    state: RoutingState
    topology: Topology
    fallback_flows: tuple[Flow, ...] = ()
    candidates_processed: tuple[LinkKey, ...] = ()
    resdn_trace: tuple[Fraction, ...] = ()
    provenance: str = ""


class _Router:
    """Mutable assignment/utility scratchpad over a fixed link universe."""

    def __init__(self, topology: Topology, assignment: Mapping[Flow, Path] | None = None):
        self.topology = topology
        self.assignment: dict[Flow, Path] = {}
        self.utilities: dict[DirectedLink, Fraction] = {}
        if assignment:
            for flow, path in assignment.items():
                self.commit(flow, path)

    def utility(self, a: SwitchId, b: SwitchId) -> Fraction:
        return self.utilities.get((a, b), Fraction(0))

    def link_utility(self, key: LinkKey) -> Fraction:
        a, b = key
        return max(self.utility(a, b), self.utility(b, a))

    def commit(self, flow: Flow, path: Path) -> None:
        self.assignment[flow] = path
        for a, b in path.directed_links():
            self.utilities[(a, b)] = self.utility(a, b) + flow.rate / self.topology.bandwidth(a, b)

    def replace(self, flow: Flow, new_path: Path) -> None:
        """Swap a flow's path, keeping its position in the assignment."""
        old = self.assignment[flow]
        for a, b in old.directed_links():
            self.utilities[(a, b)] -= flow.rate / self.topology.bandwidth(a, b)
        for a, b in new_path.directed_links():
            self.utilities[(a, b)] = self.utility(a, b) + flow.rate / self.topology.bandwidth(a, b)
        self.assignment[flow] = new_path


def _check_bindable(topology: Topology, flows: Sequence[Flow]) -> None:
    known = set(topology.switches)
    for f in flows:
        for end in (f.src, f.dst):
            if end not in known:
                raise RoutingError(f"unknown endpoint {end!r} for flow {f.src}->{f.dst}")
    if len(set(flows)) != len(flows):
        raise RoutingError("duplicate flow in input")


def _post_add_utility(router: _Router, flow: Flow, a: SwitchId, b: SwitchId) -> Fraction:
    return router.utility(a, b) + flow.rate / router.topology.bandwidth(a, b)


def _carrying_deltas(
    router: _Router, interval: UtilityInterval, flow: Flow, path: Path
) -> tuple[int, int]:
    """How the flow on this path changes the carrying-link counts.

    Returns (d_carrying, d_in_interval): the change in the number of
    links with positive utility, and in how many of those lie inside
    the interval. Links the network would prune stay out of both.
    """
    d_pos = 0
    d_int = 0
    for a, b in path.directed_links():
        u_ab = router.utility(a, b)
        u_ba = router.utility(b, a)
        before = max(u_ab, u_ba)
        after = max(_post_add_utility(router, flow, a, b), u_ba)
        d_pos += int(after > 0) - int(before > 0)
        d_int += int(interval.contains(after)) - int(before > 0 and interval.contains(before))
    return d_pos, d_int


def _max_post_utility(router: _Router, flow: Flow, path: Path) -> Fraction:
    return max(_post_add_utility(router, flow, a, b) for a, b in path.directed_links())


def _select_path_max_interval(
    router: _Router,
    flow: Flow,
    interval: UtilityInterval,
    bounds: PathBounds,
    carrying: int,
    in_interval: int,
) -> tuple[Path, bool, int, int]:
    """Pick the candidate whose tentative network in-interval ratio is best.

    The tentative ratio counts carrying (positive-utility) links only,
    i.e. the value the network would score after pruning idle links.
    Candidates where any link would exceed u_max after adding the flow
    are filtered out; if none survive, fall back to the path with the
    least loaded worst link. Returns (path, fallback_flag, d_carrying,
    d_in_interval).
    """
    candidates = enumerate_paths(router.topology, flow.src, flow.dst, bounds)
    if not candidates:
        raise RoutingError(f"disconnected: no path {flow.src}->{flow.dst}")

    best = None
    for path in candidates:
        if any(
            _post_add_utility(router, flow, a, b) > interval.u_max
            for a, b in path.directed_links()
        ):
            continue
        d_pos, d_int = _carrying_deltas(router, interval, flow, path)
        # a routed flow always leaves at least one carrying link
        score = Fraction(in_interval + d_int, carrying + d_pos)
        rank = (-score, path.hops, path.nodes)
        if best is None or rank < best[0]:
            best = (rank, path, d_pos, d_int)
    if best is not None:
        return best[1], False, best[2], best[3]

    # all candidates breach u_max: route anyway, spreading the damage
    fallback = min(
        candidates,
        key=lambda p: (_max_post_utility(router, flow, p), p.hops, p.nodes),
    )
    d_pos, d_int = _carrying_deltas(router, interval, flow, fallback)
    return fallback, True, d_pos, d_int


def _count_carrying(router: _Router, topology: Topology, interval: UtilityInterval) -> tuple[int, int]:
    carrying = 0
    hits = 0
    for key in topology.active_link_keys():
        u = router.link_utility(key)
        if u > 0:
            carrying += 1
            if interval.contains(u):
                hits += 1
    return carrying, hits


def path_max_resdn(
    state: RoutingState,
    topology: Topology,
    flow: Flow,
    interval: UtilityInterval,
    bounds: PathBounds = PathBounds(),
) -> tuple[Path, bool]:
    """Path for one flow that maximizes the tentative network in-interval
    ratio, with fallback flag when every candidate breaches u_max."""
    router = _Router(topology, state.assignment)
    carrying, hits = _count_carrying(router, topology, interval)
    path, fallback, _, _ = _select_path_max_interval(
        router, flow, interval, bounds, carrying, hits
    )
    return path, fallback


def max_resdn(
    topology: Topology,
    flows: Sequence[Flow],
    interval: UtilityInterval,
    bounds: PathBounds = PathBounds(),
) -> HeuristicOutcome:
    """Assign flows in input order, each to its interval-maximizing path,
    then turn off links left idle and strand-prune switches."""
    _check_bindable(topology, flows)
    router = _Router(topology)
    fallbacks: list[Flow] = []
    trace: list[Fraction] = []
    carrying = 0
    in_interval = 0
    for flow in flows:
        path, fell_back, d_pos, d_int = _select_path_max_interval(
            router, flow, interval, bounds, carrying, in_interval
        )
        router.commit(flow, path)
        if fell_back:
            fallbacks.append(flow)
        carrying += d_pos
        in_interval += d_int
        trace.append(Fraction(in_interval, carrying) if carrying else Fraction(1))
    return _finalize("maxresdn", topology, router.assignment, fallbacks, resdn_trace=trace)


def shortest_path_assignment(
    topology: Topology, flows: Sequence[Flow], bounds: PathBounds = PathBounds()
) -> dict[Flow, Path]:
    """Every flow on its shortest path (lexicographically first among ties)."""
    _check_bindable(topology, flows)
    assignment = {}
    for flow in flows:
        paths = enumerate_paths(topology, flow.src, flow.dst, bounds)
        if not paths:
            raise RoutingError(f"disconnected: no path {flow.src}->{flow.dst}")
        assignment[flow] = paths[0]
    return assignment


def _splice(path: Path, hop: DirectedLink, replacement: list[SwitchId]) -> Path | None:
    """Replace one hop of a path with a node sequence between its endpoints.

    Returns None when the spliced sequence would repeat a node.
    """
    nodes = path.nodes
    for idx in range(len(nodes) - 1):
        if (nodes[idx], nodes[idx + 1]) == hop:
            spliced = nodes[:idx] + tuple(replacement) + nodes[idx + 2 :]
            if len(set(spliced)) != len(spliced):
                return None
            return Path(spliced)
    raise ValueError(f"hop {hop} not on path {nodes}")


def _drain_candidates(
    name: str,
    topology: Topology,
    flows: Sequence[Flow],
    interval: UtilityInterval,
    bounds: PathBounds,
    initial: Mapping[Flow, Path] | None,
    pick_replacement: Callable[[_Router, list[Path]], Path],
) -> HeuristicOutcome:
    """Common machinery of the link-draining passes.

    Links with 0 < utility < u_min are candidates; flows crossing a
    candidate are spliced onto a replacement path between its endpoints
    (chosen by `pick_replacement` among guard-passing alternatives that
    avoid all candidate links); a candidate drained to zero utility is
    turned off.
    """
    _check_bindable(topology, flows)
    if initial is None:
        initial = shortest_path_assignment(topology, flows, bounds)
    else:
        initial = dict(initial)
        if set(initial) != set(flows):
            raise RoutingError("initial assignment does not cover the flow set")

    router = _Router(topology, initial)
    working = topology
    candidates = [
        key
        for key in working.active_link_keys()
        if 0 < router.link_utility(key) < interval.u_min
    ]
    candidate_set = set(candidates)
    processed: list[LinkKey] = []
    trace: list[Fraction] = []

    for key in candidates:
        # earlier moves may have loaded or drained this link since selection
        if not (0 < router.link_utility(key) < interval.u_min):
            continue
        i, j = key
        detour_topo = working.with_inactive(links=candidate_set)
        alternatives = enumerate_paths(detour_topo, i, j, bounds)
        u_ij = router.utility(i, j)
        u_ji = router.utility(j, i)
        passing = [
            p
            for p in alternatives
            if all(
                router.utility(a, b) + u_ij <= interval.u_max
                and router.utility(b, a) + u_ji <= interval.u_max
                for a, b in p.directed_links()
            )
        ]
        if not passing:
            continue  # exhausted the alternatives; flows stay put
        replacement = pick_replacement(router, passing)

        crossing = [f for f in flows if key in router.assignment[f].link_keys()]
        for flow in crossing:
            path = router.assignment[flow]
            if (i, j) in path.directed_links():
                spliced = _splice(path, (i, j), list(replacement.nodes))
            else:
                spliced = _splice(path, (j, i), list(reversed(replacement.nodes)))
            if spliced is None:
                continue  # rerouting would loop this flow through a visited node
            router.replace(flow, spliced)

        processed.append(key)
        if router.link_utility(key) == 0:
            working = working.with_inactive(links=[key])
        trace.append(_resdn_of(router, working, interval))

    return _finalize(
        name,
        working,
        router.assignment,
        fallbacks=[],
        candidates_processed=processed,
        resdn_trace=trace,
    )


def _resdn_of(router: _Router, topology: Topology, interval: UtilityInterval) -> Fraction:
    active = topology.active_link_keys()
    if not active:
        return Fraction(1)
    hits = sum(1 for key in active if interval.contains(router.link_utility(key)))
    return Fraction(hits, len(active))


def nsp(
    topology: Topology,
    flows: Sequence[Flow],
    interval: UtilityInterval,
    bounds: PathBounds = PathBounds(),
    initial: Mapping[Flow, Path] | None = None,
) -> HeuristicOutcome:
    """Drain under-utilized links onto the next shortest alternative path."""
    return _drain_candidates(
        "nsp", topology, flows, interval, bounds, initial,
        pick_replacement=lambda router, passing: passing[0],
    )


def nmu(
    topology: Topology,
    flows: Sequence[Flow],
    interval: UtilityInterval,
    bounds: PathBounds = PathBounds(),
    initial: Mapping[Flow, Path] | None = None,
) -> HeuristicOutcome:
    """Drain under-utilized links onto the path through the busiest link."""

    def pick(router: _Router, passing: list[Path]) -> Path:
        return min(
            passing,
            key=lambda p: (
                -max(router.link_utility(k) for k in p.link_keys()),
                p.hops,
                p.nodes,
            ),
        )

    return _drain_candidates(
        "nmu", topology, flows, interval, bounds, initial, pick_replacement=pick
    )


def ordered_greedy(
    topology: Topology,
    flows: Sequence[Flow],
    ordering: str,
    bounds: PathBounds = PathBounds(),
) -> HeuristicOutcome:
    """Sort flows, give the first its shortest path, then assign each
    subsequent flow the capacity-feasible path that activates the fewest
    weighted new components (switches weigh 3, links 1)."""
    ordering = ordering.lower()
    if ordering not in ORDERINGS:
        raise ValueError(f"unknown ordering {ordering!r} (one of {ORDERINGS})")
    _check_bindable(topology, flows)

    if ordering in ("spf", "spl"):
        hop_counts = {}
        for flow in flows:
            dist = shortest_hop_counts(topology, flow.src).get(flow.dst)
            if dist is None:
                raise RoutingError(f"disconnected: no path {flow.src}->{flow.dst}")
            hop_counts[flow] = dist
        key_fn = lambda f: hop_counts[f]
        reverse = ordering == "spl"
    else:
        key_fn = lambda f: f.rate
        reverse = ordering == "hdf"
    ordered = sorted(flows, key=key_fn, reverse=reverse)  # stable: input order ties

    router = _Router(topology)
    used_switches: set[SwitchId] = set()
    used_links: set[LinkKey] = set()
    fallbacks: list[Flow] = []

    for pos, flow in enumerate(ordered):
        candidates = enumerate_paths(topology, flow.src, flow.dst, bounds)
        if not candidates:
            raise RoutingError(f"disconnected: no path {flow.src}->{flow.dst}")
        if pos == 0:
            path = candidates[0]
        else:
            feasible = [
                p
                for p in candidates
                if all(
                    _post_add_utility(router, flow, a, b) <= 1
                    for a, b in p.directed_links()
                )
            ]
            if feasible:
                path = min(
                    feasible,
                    key=lambda p: (
                        3 * sum(1 for s in p.nodes if s not in used_switches)
                        + sum(1 for k in p.link_keys() if k not in used_links),
                        p.hops,
                        p.nodes,
                    ),
                )
            else:
                path = min(
                    candidates,
                    key=lambda p: (_max_post_utility(router, flow, p), p.hops, p.nodes),
                )
                fallbacks.append(flow)
        router.commit(flow, path)
        used_switches.update(path.nodes)
        used_links.update(path.link_keys())

    return _finalize(ordering, topology, router.assignment, fallbacks)


_B_VARIANTS = (
    "spf", "spl", "sdf", "hdf",
    "spf+nsp", "spf+nmu", "spl+nsp", "spl+nmu",
    "sdf+nsp", "sdf+nmu", "hdf+nsp", "hdf+nmu",
)


def best_combination(
    topology: Topology,
    flows: Sequence[Flow],
    interval: UtilityInterval,
    bounds: PathBounds = PathBounds(),
) -> HeuristicOutcome:
    """Best of the four ordering heuristics, each alone and with the two
    draining post-passes, judged by links saved (ties: higher in-interval
    ratio, then fixed variant order)."""
    bases = {name: ordered_greedy(topology, flows, name, bounds) for name in ORDERINGS}
    outcomes: dict[str, HeuristicOutcome] = dict(bases)
    for base_name, base in bases.items():
        for post_name, post in (("nsp", nsp), ("nmu", nmu)):
            out = post(
                base.topology,
                flows,
                interval,
                bounds,
                initial=base.state.assignment,
            )
            outcomes[f"{base_name}+{post_name}"] = HeuristicOutcome(
                name=out.name,
                state=out.state,
                topology=out.topology,
                fallback_flows=base.fallback_flows,
                candidates_processed=out.candidates_processed,
                resdn_trace=out.resdn_trace,
            )

    def rank(variant: str):
        out = outcomes[variant]
        return (
            -links_saved(out.topology),
            -resdn_metric(out.state, out.topology, interval),
            _B_VARIANTS.index(variant),
        )

    winner = min(_B_VARIANTS, key=rank)
    chosen = outcomes[winner]
    return HeuristicOutcome(
        name="b",
        state=chosen.state,
        topology=chosen.topology,
        fallback_flows=chosen.fallback_flows,
        candidates_processed=chosen.candidates_processed,
        resdn_trace=chosen.resdn_trace,
        provenance=winner.upper(),
    )


def _finalize(
    name: str,
    topology: Topology,
    assignment: Mapping[Flow, Path],
    fallbacks: Iterable[Flow],
    candidates_processed: Sequence[LinkKey] = (),
    resdn_trace: Sequence[Fraction] = (),
) -> HeuristicOutcome:
    state = RoutingState.from_assignment(topology, assignment)
    final_topology = prune_idle(state, topology)
    final_state = RoutingState.from_assignment(final_topology, assignment)
    return HeuristicOutcome(
        name=name,
        state=final_state,
        topology=final_topology,
        fallback_flows=tuple(fallbacks),
        candidates_processed=tuple(candidates_processed),
        resdn_trace=tuple(resdn_trace),
    )


def run_heuristic(
    name: str,
    topology: Topology,
    flows: Sequence[Flow],
    interval: UtilityInterval,
    bounds: PathBounds = PathBounds(),
) -> HeuristicOutcome:
    """Dispatch a heuristic by its CLI name."""
    name = name.lower()
    if name == "maxresdn":
        return max_resdn(topology, flows, interval, bounds)
    if name == "nsp":
        return nsp(topology, flows, interval, bounds)
    if name == "nmu":
        return nmu(topology, flows, interval, bounds)
    if name in ORDERINGS:
        return ordered_greedy(topology, flows, name, bounds)
    if name == "b":
        return best_combination(topology, flows, interval, bounds)
    raise ValueError(f"unknown heuristic {name!r} (one of {', '.join(HEURISTIC_NAMES)})")
