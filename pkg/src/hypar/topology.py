"""Interconnect topologies for the 2^H accelerator array.

The H-tree mirrors the hierarchical bipartition: every level-h group pair
crosses one switch, modeled as a pair of directed logical links whose
bandwidth doubles per level toward the root while the number of crossings
halves (leaf-to-root aggregate bandwidth is level-invariant; leaf links
run at the configured link bandwidth).

The torus is a 2D grid with wraparound and uniform directed links.
Hierarchy groups map onto the grid by alternating column/row bisection, so
level-h partners sit a fixed grid offset apart; flows take dimension-order
routes (rows first), wrapping whichever direction is shorter.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

from .errors import ValidationError

HTREE = "htree"
TORUS = "torus"

Link = Hashable  # opaque link ids; each is an independent FIFO resource


@dataclass(frozen=True)
class Topology:
    kind: str
    levels: int

    def __post_init__(self):
        if self.kind not in (HTREE, TORUS):
            raise ValidationError(f"unknown topology {self.kind!r}")
        if self.levels < 0:
            raise ValidationError("topology levels must be >= 0")

    @property
    def node_count(self) -> int:
        return 2 ** self.levels


def level_bandwidth(topo: Topology, link_bandwidth_bps: float, level: int) -> float:
    """Bytes/s of one directed link used by hierarchy level ``level`` (0 = root)."""
    leaf_bytes = link_bandwidth_bps / 8.0
    if topo.kind == HTREE:
        return leaf_bytes * (2 ** (topo.levels - 1 - level))
    return leaf_bytes


def grid_shape(levels: int) -> tuple[int, int]:
    """Torus grid (rows, cols) for 2^levels nodes; cols take the extra bit."""
    cols = 2 ** ((levels + 1) // 2)
    rows = 2 ** (levels // 2)
    return rows, cols


def node_coord(index: int, levels: int) -> tuple[int, int]:
    """Grid position of a node: bisection levels alternate column/row splits."""
    row = col = 0
    for h in range(levels):
        bit = (index >> (levels - 1 - h)) & 1
        if h % 2 == 0:
            col = (col << 1) | bit
        else:
            row = (row << 1) | bit
    return row, col


def _axis_steps(src: int, dst: int, size: int) -> list[int]:
    """Positions visited moving src -> dst (exclusive src), shortest wrap way."""
    if src == dst:
        return []
    forward = (dst - src) % size
    backward = (src - dst) % size
    step = 1 if forward <= backward else -1
    hops = min(forward, backward)
    return [(src + step * (k + 1)) % size for k in range(hops)]


def torus_path(src: tuple[int, int], dst: tuple[int, int],
               shape: tuple[int, int]) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Directed links of the dimension-order route (row moves, then column)."""
    rows, cols = shape
    path = []
    cur = src
    for r in _axis_steps(src[0], dst[0], rows):
        nxt = (r, cur[1])
        path.append((cur, nxt))
        cur = nxt
    for c in _axis_steps(src[1], dst[1], cols):
        nxt = (cur[0], c)
        path.append((cur, nxt))
        cur = nxt
    return path


def level_groups(levels: int, level: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """The group pairs split at hierarchy ``level`` (0 = whole-array split)."""
    pairs = []
    width = 2 ** (levels - level)
    for parent in range(2 ** level):
        base = parent * width
        half = width // 2
        pairs.append((tuple(range(base, base + half)),
                      tuple(range(base + half, base + width))))
    return pairs


def _undirected(edge: tuple[tuple[int, int], tuple[int, int]]) -> Link:
    a, b = edge
    return (TORUS, min(a, b), max(a, b))


def _pair_links(a: int, b: int, levels: int,
                shape: tuple[int, int]) -> list[Link]:
    """Links of one node pair's exchange: both directions share the
    canonical dimension-order route from the lower-indexed node (a fetch's
    reply retraces the request's path)."""
    lo, hi = (a, b) if a < b else (b, a)
    path = torus_path(node_coord(lo, levels), node_coord(hi, levels), shape)
    return [_undirected(edge) for edge in path]


def level_flows(topo: Topology, level: int, pair_index: int,
                total_bytes: float) -> list[tuple[Link, float]]:
    """Per-link byte loads for one group pair exchanging ``total_bytes``.

    A link is a single serial resource carrying both directions (the
    array's total network bandwidth counts one link per leaf). On the
    H-tree the whole exchange crosses the pair's ancestor link; on the
    torus each member pairs with its mirror node in the sibling group and
    the pair's full exchange loads its route.
    """
    if topo.kind == HTREE:
        return [((HTREE, level, pair_index), total_bytes)]
    shape = grid_shape(topo.levels)
    left, right = level_groups(topo.levels, level)[pair_index]
    per_pair = total_bytes / len(left)
    loads: dict[Link, float] = {}
    for a, b in zip(left, right):
        for link in _pair_links(a, b, topo.levels, shape):
            loads[link] = loads.get(link, 0.0) + per_pair
    return sorted(loads.items(), key=lambda kv: str(kv[0]))


def _group_level(topo: Topology, src: frozenset[int], dst: frozenset[int]) -> tuple[int, int]:
    """Locate the hierarchy level whose split separates src from dst."""
    for level in range(topo.levels):
        for pair_index, (left, right) in enumerate(level_groups(topo.levels, level)):
            if (src == frozenset(left) and dst == frozenset(right)) or \
               (src == frozenset(right) and dst == frozenset(left)):
                return level, pair_index
    raise ValidationError(
        "groups are not an aligned sibling pair of the hierarchy")


def route(topo: Topology, src_group: Sequence[int], dst_group: Sequence[int],
          total_bytes: float) -> list[tuple[Link, float]]:
    """Per-link byte assignment for one group-to-group exchange.

    H-tree groups must be an aligned sibling pair; their traffic crosses at
    the lowest common ancestor. Torus groups may be any equal-size node
    sets: members pair up in index order and each pair's flows are
    dimension-order routed.
    """
    src, dst = frozenset(src_group), frozenset(dst_group)
    if not src or not dst or src & dst:
        raise ValidationError("groups must be disjoint and non-empty")
    if topo.kind == HTREE:
        level, pair_index = _group_level(topo, src, dst)
        return level_flows(topo, level, pair_index, total_bytes)
    if len(src) != len(dst):
        raise ValidationError("torus groups must pair up (equal sizes)")
    shape = grid_shape(topo.levels)
    per_pair = total_bytes / len(src)
    loads: dict[Link, float] = {}
    for a, b in zip(sorted(src), sorted(dst)):
        for link in _pair_links(a, b, topo.levels, shape):
            loads[link] = loads.get(link, 0.0) + per_pair
    return sorted(loads.items(), key=lambda kv: str(kv[0]))
