"""Time-stamped link graphs: +Grid inter-satellite links, ground-satellite
links, light-speed latencies and shortest-path routing."""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import cached_property
from typing import Iterable, Sequence

from .orbits import (
    EARTH,
    EarthModel,
    GroundStation,
    Position,
    SatelliteId,
    ShellConfig,
    constellation_positions,
    ground_position,
    visible,
)

SPEED_OF_LIGHT_KM_S = 299792.458


class NodeKind(IntEnum):
    # satellites sort before ground stations
    SATELLITE = 0
    GROUND = 1

    @property
    def label(self) -> str:
        return "Satellite" if self is NodeKind.SATELLITE else "Ground"


class LinkKind(str, Enum):
    ISL = "ISL"
    GSL = "GSL"


@dataclass(frozen=True, order=True)
class NodeId:
    kind: NodeKind
    index: int

    @classmethod
    def sat(cls, index: int) -> NodeId:
        return cls(NodeKind.SATELLITE, index)

    @classmethod
    def ground(cls, index: int) -> NodeId:
        return cls(NodeKind.GROUND, index)

    def __str__(self) -> str:
        return f"{self.kind.label}[{self.index}]"


def latency_ms_for(length_km: float) -> float:
    return length_km / SPEED_OF_LIGHT_KM_S * 1000.0


@dataclass(frozen=True)
class Link:
    a: NodeId
    b: NodeId
    kind: LinkKind
    length_km: float
    latency_ms: float

    @classmethod
    def between(cls, a: NodeId, b: NodeId, kind: LinkKind, length_km: float) -> Link:
        if a == b:
            raise ValueError(f"self-link on {a}")
        lo, hi = (a, b) if a < b else (b, a)
        return cls(lo, hi, kind, length_km, latency_ms_for(length_km))


class NoPathError(LookupError):
    """Raised when no route joins two nodes of a snapshot."""

    def __init__(self, src: NodeId, dst: NodeId):
        super().__init__(f"no path from {src} to {dst}")
        self.src = src
        self.dst = dst


@dataclass(frozen=True)
class LinkGraph:
    """Immutable snapshot of the network at ``timestamp_s``.

    ``nodes`` is kept sorted (satellites first, then ground stations) and
    ``links`` sorted by endpoint pair, so equal inputs give equal graphs.
    ``shell`` and ``earth`` are retained so ground links can be attached to
    the same snapshot later.
    """

    timestamp_s: float
    nodes: tuple[NodeId, ...]
    links: tuple[Link, ...]
    shell: ShellConfig | None = field(default=None, compare=False)
    earth: EarthModel = field(default=EARTH, compare=False)

    def __post_init__(self) -> None:
        seen: set[tuple[NodeId, NodeId]] = set()
        for link in self.links:
            key = (link.a, link.b)
            if key in seen:
                raise ValueError(f"duplicate link {link.a} - {link.b}")
            seen.add(key)
            if link.kind is LinkKind.GSL and {link.a.kind, link.b.kind} != {
                NodeKind.SATELLITE,
                NodeKind.GROUND,
            }:
                raise ValueError(f"GSL {link.a} - {link.b} must join a satellite and a station")

    @cached_property
    def _ordinal(self) -> dict[NodeId, int]:
        return {n: i for i, n in enumerate(self.nodes)}

    @cached_property
    def _adjacency(self) -> list[list[tuple[int, float]]]:
        adj: list[list[tuple[int, float]]] = [[] for _ in self.nodes]
        ordinal = self._ordinal
        for link in self.links:
            i, j = ordinal[link.a], ordinal[link.b]
            adj[i].append((j, link.latency_ms))
            adj[j].append((i, link.latency_ms))
        for row in adj:
            row.sort()
        return adj

    def satellites(self) -> list[NodeId]:
        return [n for n in self.nodes if n.kind is NodeKind.SATELLITE]

    def grounds(self) -> list[NodeId]:
        return [n for n in self.nodes if n.kind is NodeKind.GROUND]

    def degree(self, node: NodeId, kind: LinkKind | None = None) -> int:
        return sum(
            1
            for link in self.links
            if node in (link.a, link.b) and (kind is None or link.kind is kind)
        )

    def neighbors(self, node: NodeId) -> list[tuple[NodeId, float]]:
        return [(self.nodes[j], w) for j, w in self._adjacency[self._index_of(node)]]

    def _index_of(self, node: NodeId) -> int:
        try:
            return self._ordinal[node]
        except KeyError:
            raise KeyError(f"{node} is not in the graph") from None

    def to_dict(self) -> dict:
        return {
            "timestamp_s": self.timestamp_s,
            "nodes": [{"kind": n.kind.label, "index": n.index} for n in self.nodes],
            "links": [
                {
                    "a": {"kind": link.a.kind.label, "index": link.a.index},
                    "b": {"kind": link.b.kind.label, "index": link.b.index},
                    "kind": link.kind.value,
                    "length_km": link.length_km,
                    "latency_ms": link.latency_ms,
                }
                for link in self.links
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _make_graph(
    t_s: float,
    nodes: Iterable[NodeId],
    links: Iterable[Link],
    shell: ShellConfig | None,
    earth: EarthModel,
) -> LinkGraph:
    return LinkGraph(
        timestamp_s=t_s,
        nodes=tuple(sorted(nodes)),
        links=tuple(sorted(links, key=lambda l: (l.a, l.b))),
        shell=shell,
        earth=earth,
    )


def _norm3(p, q) -> float:
    return math.sqrt((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 + (p[2] - q[2]) ** 2)


def build_isl_grid(
    shell: ShellConfig,
    t_s: float,
    earth: EarthModel = EARTH,
    *,
    seam_links: bool = True,
) -> LinkGraph:
    """+Grid ISL snapshot: fore/aft neighbours in-plane plus same-slot
    neighbours in the adjacent planes, with torus wraparound.

    With ``seam_links=False`` the links between the last and first plane are
    dropped.
    """
    P, S = shell.num_planes, shell.sats_per_plane
    if P < 3 or S < 3:
        raise ValueError(f"+Grid needs at least 3 planes and 3 slots per plane, got {P}x{S}")
    pos = constellation_positions(shell, t_s, earth).tolist()
    links = []
    for p in range(P):
        for s in range(S):
            i = p * S + s
            j = p * S + (s + 1) % S
            links.append(Link.between(NodeId.sat(i), NodeId.sat(j), LinkKind.ISL, _norm3(pos[i], pos[j])))
            if p == P - 1 and not seam_links:
                continue
            k = ((p + 1) % P) * S + s
            links.append(Link.between(NodeId.sat(i), NodeId.sat(k), LinkKind.ISL, _norm3(pos[i], pos[k])))
    nodes = [NodeId.sat(i) for i in range(shell.total)]
    return _make_graph(t_s, nodes, links, shell, earth)


def attach_gsl(
    graph: LinkGraph,
    stations: Sequence[GroundStation],
    t_s: float,
    earth: EarthModel | None = None,
) -> LinkGraph:
    """Return a copy of ``graph`` with one ground node per station and a GSL
    to every satellite the station sees at ``t_s``."""
    if graph.shell is None:
        raise ValueError("graph carries no shell; build it with build_isl_grid")
    if t_s != graph.timestamp_s:
        raise ValueError(f"graph snapshot is at t={graph.timestamp_s}, not t={t_s}")
    earth = earth or graph.earth
    pos = constellation_positions(graph.shell, t_s, earth).tolist()
    sat_positions = [Position(*row) for row in pos]
    offset = len(graph.grounds())
    nodes = list(graph.nodes)
    links = list(graph.links)
    for k, gs in enumerate(stations):
        g_node = NodeId.ground(offset + k)
        nodes.append(g_node)
        g_pos = ground_position(gs, t_s, earth)
        g_xyz = (g_pos.x_km, g_pos.y_km, g_pos.z_km)
        for i, sat_pos in enumerate(sat_positions):
            if visible(sat_pos, gs, g_pos):
                links.append(Link.between(g_node, NodeId.sat(i), LinkKind.GSL, _norm3(pos[i], g_xyz)))
    return _make_graph(t_s, nodes, links, graph.shell, earth)


def snapshot(
    shell: ShellConfig,
    stations: Sequence[GroundStation],
    t_s: float,
    earth: EarthModel = EARTH,
    *,
    seam_links: bool = True,
) -> LinkGraph:
    """ISL grid plus ground links at one instant."""
    return attach_gsl(build_isl_grid(shell, t_s, earth, seam_links=seam_links), stations, t_s, earth)


def shortest_path(graph: LinkGraph, src: NodeId, dst: NodeId) -> tuple[list[NodeId], float]:
    """Minimum-latency route from ``src`` to ``dst``.

    Among routes of equal latency the lexicographically smallest node
    sequence wins. Raises :class:`NoPathError` if ``dst`` is unreachable.
    """
    s, t = graph._index_of(src), graph._index_of(dst)
    adj = graph._adjacency
    best: dict[int, tuple[float, tuple[int, ...]]] = {s: (0.0, (s,))}
    heap: list[tuple[float, tuple[int, ...], int]] = [(0.0, (s,), s)]
    done: set[int] = set()
    while heap:
        d, path, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == t:
            return [graph.nodes[i] for i in path], d
        for v, w in adj[u]:
            if v in done:
                continue
            cand = (d + w, path + (v,))
            if v not in best or cand < best[v]:
                best[v] = cand
                heapq.heappush(heap, (cand[0], cand[1], v))
    raise NoPathError(src, dst)


def latencies_from(graph: LinkGraph, src: NodeId) -> dict[NodeId, float]:
    """One-way latency (ms) from ``src`` to every reachable node."""
    s = graph._index_of(src)
    adj = graph._adjacency
    dist = {s: 0.0}
    heap = [(0.0, s)]
    done: set[int] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in adj[u]:
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return {graph.nodes[i]: d for i, d in dist.items()}


def rtt_ms(graph: LinkGraph, sat: NodeId, gs: NodeId) -> float:
    """Round-trip propagation time: twice the one-way shortest-path latency.

    The route is always computed from the ground-side endpoint (or from the
    smaller node for two nodes of the same kind), so ``rtt_ms(a, b)`` and
    ``rtt_ms(b, a)`` agree bit for bit.
    """
    a, b = sat, gs
    if a.kind is NodeKind.GROUND and b.kind is not NodeKind.GROUND:
        src, dst = a, b
    elif b.kind is NodeKind.GROUND and a.kind is not NodeKind.GROUND:
        src, dst = b, a
    else:
        src, dst = min(a, b), max(a, b)
    _, one_way = shortest_path(graph, src, dst)
    return 2.0 * one_way


def satellite_node(shell: ShellConfig, sat: SatelliteId) -> NodeId:
    return NodeId.sat(sat.index(shell))
