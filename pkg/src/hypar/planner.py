"""Communication-minimal parallelism plans.

``partition_two`` runs the layer-wise dynamic program for one bipartition
in O(L); ``brute_force`` is the exponential oracle it is checked against;
``hierarchical_partition`` stacks bipartitions into a plan matrix for a
2^H accelerator array.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .commcost import (CommCost, Parallelism, inter_elements, intra_elements,
                       plan_cost)
from .errors import ValidationError
from .netspec import LayerShapes

MODE_PAPER_LITERAL = "paper-literal"
MODE_SHAPE_PROP = "shape-prop"
MODES = (MODE_PAPER_LITERAL, MODE_SHAPE_PROP)

_DP = Parallelism.DP
_MP = Parallelism.MP

BRUTE_FORCE_MAX_LAYERS = 24


@dataclass(frozen=True)
class DpTable:
    """Accumulators and backpointers of the layer-wise dynamic program.

    ``com_dp[l]``/``com_mp[l]`` hold the cheapest total communication of
    any plan for layers 0..l whose layer-l choice is dp/mp; ``prev_dp``/
    ``prev_mp`` record which predecessor state achieved it.
    """

    com_dp: tuple[int, ...]
    com_mp: tuple[int, ...]
    prev_dp: tuple[Parallelism, ...]
    prev_mp: tuple[Parallelism, ...]


def dp_table(shapes: LayerShapes) -> DpTable:
    if len(shapes) == 0:
        raise ValidationError("cannot partition an empty network")
    com_dp: list[int] = []
    com_mp: list[int] = []
    prev_dp: list[Parallelism] = []
    prev_mp: list[Parallelism] = []
    for l in range(len(shapes)):
        intra_dp = intra_elements(shapes, l, _DP)
        intra_mp = intra_elements(shapes, l, _MP)
        if l == 0:
            com_dp.append(intra_dp)
            com_mp.append(intra_mp)
            prev_dp.append(_DP)
            prev_mp.append(_DP)
            continue
        via = {
            (_DP, _DP): com_dp[l - 1] + inter_elements(shapes, l, _DP, _DP),
            (_MP, _DP): com_mp[l - 1] + inter_elements(shapes, l, _MP, _DP),
            (_DP, _MP): com_dp[l - 1] + inter_elements(shapes, l, _DP, _MP),
            (_MP, _MP): com_mp[l - 1] + inter_elements(shapes, l, _MP, _MP),
        }
        # Ties prefer the dp predecessor: it composes with the free dp-dp
        # transition and keeps the output deterministic.
        if via[(_DP, _DP)] <= via[(_MP, _DP)]:
            com_dp.append(via[(_DP, _DP)] + intra_dp)
            prev_dp.append(_DP)
        else:
            com_dp.append(via[(_MP, _DP)] + intra_dp)
            prev_dp.append(_MP)
        if via[(_DP, _MP)] <= via[(_MP, _MP)]:
            com_mp.append(via[(_DP, _MP)] + intra_mp)
            prev_mp.append(_DP)
        else:
            com_mp.append(via[(_MP, _MP)] + intra_mp)
            prev_mp.append(_MP)
    return DpTable(tuple(com_dp), tuple(com_mp), tuple(prev_dp), tuple(prev_mp))


def partition_two(shapes: LayerShapes) -> tuple[CommCost, tuple[Parallelism, ...]]:
    """Minimum-communication plan for one bipartition, in O(L).

    Returns the exact minimum of ``plan_cost`` over all 2^L assignments;
    re-evaluating the returned plan reproduces the returned cost.
    """
    table = dp_table(shapes)
    last = len(shapes) - 1
    state = _DP if table.com_dp[last] <= table.com_mp[last] else _MP
    total = min(table.com_dp[last], table.com_mp[last])
    plan = [state]
    for l in range(last, 0, -1):
        state = table.prev_dp[l] if state is _DP else table.prev_mp[l]
        plan.append(state)
    plan.reverse()
    return CommCost.of(total, shapes.precision_bytes), tuple(plan)


def brute_force(shapes: LayerShapes) -> tuple[CommCost, tuple[Parallelism, ...]]:
    """Exhaustive minimum over all 2^L plans (the oracle the DP is held to).

    Ties break toward dp at the lowest-index differing layer, which is the
    first strict minimum in lexicographic enumeration order.
    """
    n = len(shapes)
    if n == 0:
        raise ValidationError("cannot partition an empty network")
    if n > BRUTE_FORCE_MAX_LAYERS:
        raise ValidationError(
            f"brute force capped at {BRUTE_FORCE_MAX_LAYERS} layers, got {n}")
    # Plain per-layer cost tables; candidate totals are naive summations.
    intra = [(intra_elements(shapes, l, _DP), intra_elements(shapes, l, _MP))
             for l in range(n)]
    inter = [{(a, b): inter_elements(shapes, l, a, b)
              for a in (_DP, _MP) for b in (_DP, _MP)}
             for l in range(1, n)]
    best_total = None
    best_plan = None
    for plan in itertools.product((_DP, _MP), repeat=n):
        total = intra[0][plan[0]]
        for l in range(1, n):
            total += inter[l - 1][(plan[l - 1], plan[l])] + intra[l][plan[l]]
        if best_total is None or total < best_total:
            best_total = total
            best_plan = plan
    return CommCost.of(best_total, shapes.precision_bytes), best_plan


def isolated_choice(shapes: LayerShapes, layer: int) -> Parallelism:
    """Single-layer preference judged from tensor sizes alone.

    Flags mp whenever the gradient tensor is strictly smaller than the
    output feature map; equal or larger sizes settle on dp, whose matching
    dp-dp transitions cost nothing. Used to audit fixed conv-to-dp /
    fc-to-mp assignments layer by layer.
    """
    geom = shapes[layer]
    if geom.elems_weight < geom.elems_raw_output:
        return _MP
    return _DP


def halve_shapes(shapes: LayerShapes,
                 row: tuple[Parallelism, ...]) -> LayerShapes:
    """Subproblem geometry after one bipartition (shape-propagating mode).

    A dp layer halves its batch; an mp layer halves its own kernel slice
    (out-channel count). The produced feature map of an mp layer ends up
    replicated in both groups, so the successor's input width is left
    untouched. Halving rounds up so dimensions stay positive.
    """
    layers = []
    for g, p in zip(shapes.layers, row):
        if p is _DP:
            layers.append(g.scaled(batch=-(-g.batch // 2)))
        else:
            layers.append(g.scaled(out_channels=-(-g.out_channels // 2)))
    return LayerShapes(tuple(layers), shapes.precision_bytes)


@dataclass(frozen=True)
class PlanMatrix:
    """dp/mp choice per weighted layer per hierarchy level.

    Row 0 is the coarsest bipartition (the whole array split in two);
    row h splits each of the 2^h groups of the previous level.
    """

    levels: int
    rows: tuple[tuple[Parallelism, ...], ...]
    total: CommCost
    mode: str

    @property
    def node_count(self) -> int:
        return 2 ** self.levels

    def payload(self, network: str) -> dict:
        return {
            "network": network,
            "levels": self.levels,
            "rows": [[p.label for p in row] for row in self.rows],
            "total_elements": self.total.elements,
            "total_bytes": self.total.bytes,
            "mode": self.mode,
        }


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValidationError(f"unknown hierarchy mode {mode!r}")


def level_shapes(shapes: LayerShapes, rows: tuple[tuple[Parallelism, ...], ...],
                 mode: str) -> list[LayerShapes]:
    """Effective geometry seen by each hierarchy level under ``rows``."""
    _check_mode(mode)
    out = []
    cur = shapes
    for row in rows:
        out.append(cur)
        if mode == MODE_SHAPE_PROP:
            cur = halve_shapes(cur, row)
    return out


def hierarchical_cost(shapes: LayerShapes,
                      rows: tuple[tuple[Parallelism, ...], ...],
                      mode: str) -> CommCost:
    """Recompute a matrix's total: level h repeats across 2^h group pairs."""
    total = 0
    for h, (row, level) in enumerate(zip(rows, level_shapes(shapes, rows, mode))):
        total += (2 ** h) * plan_cost(level, row).elements
    return CommCost.of(total, shapes.precision_bytes)


def hierarchical_partition(shapes: LayerShapes, levels: int,
                           mode: str = MODE_PAPER_LITERAL) -> PlanMatrix:
    """Optimize each hierarchy level in turn; zero levels plan nothing.

    In paper-literal mode every level solves the identical full-size
    problem (rows repeat and the total is (2^H - 1) times one level); in
    shape-propagating mode each level re-optimizes the halved subproblem
    left by its parent.
    """
    _check_mode(mode)
    if levels < 0:
        raise ValidationError("hierarchy levels must be >= 0")
    rows: list[tuple[Parallelism, ...]] = []
    total = 0
    cur = shapes
    for h in range(levels):
        cost, plan = partition_two(cur)
        rows.append(plan)
        total += (2 ** h) * cost.elements
        if mode == MODE_SHAPE_PROP:
            cur = halve_shapes(cur, plan)
    return PlanMatrix(levels, tuple(rows), CommCost.of(total, shapes.precision_bytes),
                      mode)


def uniform_matrix(shapes: LayerShapes, levels: int, choice: Parallelism,
                   mode: str = MODE_PAPER_LITERAL) -> PlanMatrix:
    """The degenerate all-dp or all-mp plan (uppercase baselines)."""
    rows = tuple(tuple(choice for _ in range(len(shapes)))
                 for _ in range(levels))
    return PlanMatrix(levels, rows, hierarchical_cost(shapes, rows, mode), mode)


def plan_trick(shapes: LayerShapes, levels: int,
               mode: str = MODE_PAPER_LITERAL) -> PlanMatrix:
    """Fixed heuristic: conv layers dp, fully connected layers mp, everywhere."""
    row = tuple(_DP if g.kind == "conv" else _MP for g in shapes.layers)
    rows = tuple(row for _ in range(levels))
    return PlanMatrix(levels, rows, hierarchical_cost(shapes, rows, mode), mode)


BASELINES = ("dp", "mp", "trick", "hypar")


def baseline_matrix(shapes: LayerShapes, levels: int, kind: str,
                    mode: str = MODE_PAPER_LITERAL) -> PlanMatrix:
    if kind == "dp":
        return uniform_matrix(shapes, levels, _DP, mode)
    if kind == "mp":
        return uniform_matrix(shapes, levels, _MP, mode)
    if kind == "trick":
        return plan_trick(shapes, levels, mode)
    if kind == "hypar":
        return hierarchical_partition(shapes, levels, mode)
    raise ValidationError(f"unknown baseline {kind!r} (choose from {BASELINES})")


def matrix_from_rows(shapes: LayerShapes, rows: list[list[str]],
                     mode: str = MODE_PAPER_LITERAL) -> PlanMatrix:
    """Build a matrix from explicit dp/mp labels, recomputing its total."""
    parsed = tuple(tuple(Parallelism.from_label(x) for x in row) for row in rows)
    for row in parsed:
        if len(row) != len(shapes):
            raise ValidationError(
                f"matrix row length {len(row)} != layer count {len(shapes)}")
    return PlanMatrix(len(parsed), parsed,
                      hierarchical_cost(shapes, parsed, mode), mode)
