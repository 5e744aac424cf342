"""Communication volumes for layer-wise parallelism choices.

Per layer, each of the three training multiplications either needs no
remote data or needs a partial-sum / layout fetch from the peer group:

* intra-layer, data parallelism:  the peer's gradient partial sum (the
  whole kernel-shaped tensor) is fetched before the weight update.
* intra-layer, model parallelism: the peer's output partial sum (the raw
  multiply output, before any pooling) is fetched in the forward pass.
* inter-layer: converting one layer's output layout into the next layer's
  required input layout costs, per boundary-tensor pair (feature map F and
  error E, always equal element counts):
      dp-dp 0 | dp-mp F/4 + E/4 | mp-mp E/2 | mp-dp E/2

Table entries are single-side element counts; byte counts carry a factor
of 2 because both groups symmetrically fetch the remote partial sum
(which is what makes a 70x100 fc gradient cost 56 KB at 4 B/element).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .errors import ValidationError
from .netspec import LayerShapes

# Both sides of a bipartition fetch the remote tensor, so wire bytes are
# twice the single-tensor volume.
PAIR_FACTOR = 2


class Parallelism(enum.IntEnum):
    """Per-layer parallelism choice; DP < MP gives deterministic ties."""

    DP = 0
    MP = 1

    @property
    def label(self) -> str:
        return "dp" if self is Parallelism.DP else "mp"

    @classmethod
    def from_label(cls, label: str) -> "Parallelism":
        try:
            return {"dp": cls.DP, "mp": cls.MP}[label.lower()]
        except KeyError:
            raise ValidationError(f"unknown parallelism {label!r}") from None


@dataclass(frozen=True)
class CommCost:
    """Exchanged volume in elements, and on-the-wire bytes."""

    elements: int
    bytes: int

    @classmethod
    def of(cls, elements: int, precision_bytes: int) -> "CommCost":
        return cls(elements, elements * precision_bytes * PAIR_FACTOR)

    def __add__(self, other: "CommCost") -> "CommCost":
        return CommCost(self.elements + other.elements, self.bytes + other.bytes)


def _ceil_div(num: int, den: int) -> int:
    return -(-num // den)


def intra_elements(shapes: LayerShapes, layer: int, p: Parallelism) -> int:
    geom = shapes[layer]
    if p is Parallelism.DP:
        return geom.elems_weight
    return geom.elems_raw_output


def intra_cost(shapes: LayerShapes, layer: int, p: Parallelism) -> CommCost:
    """Remote traffic of layer ``layer``'s own three-phase computation."""
    if not 0 <= layer < len(shapes):
        raise ValidationError(f"layer index {layer} out of range")
    return CommCost.of(intra_elements(shapes, layer, p), shapes.precision_bytes)


def inter_elements(shapes: LayerShapes, layer: int,
                   prev: Parallelism, nxt: Parallelism) -> int:
    """Layout-conversion volume at the boundary entering ``layer``.

    The boundary tensors are the feature map handed over by layer-1 (its
    pooled output) and the matching error tensor (equal sizes). The dp-mp
    quarter factors are applied to the two tensors jointly (ceil of the
    summed quarter) so that the three non-zero transitions stay exactly
    equal for odd sizes too.
    """
    boundary = shapes[layer - 1].elems_output
    if prev is Parallelism.DP and nxt is Parallelism.DP:
        return 0
    if prev is Parallelism.DP and nxt is Parallelism.MP:
        return _ceil_div(boundary + boundary, 4)
    # mp-mp and mp-dp both fetch half of the error tensor.
    return _ceil_div(boundary, 2)


def inter_forward_elements(shapes: LayerShapes, layer: int,
                           prev: Parallelism, nxt: Parallelism) -> int:
    """Feature-map part of the boundary conversion (moves in the forward pass)."""
    if prev is Parallelism.DP and nxt is Parallelism.MP:
        return _ceil_div(shapes[layer - 1].elems_output, 4)
    return 0


def inter_backward_elements(shapes: LayerShapes, layer: int,
                            prev: Parallelism, nxt: Parallelism) -> int:
    """Error part of the boundary conversion (moves in the backward pass)."""
    return (inter_elements(shapes, layer, prev, nxt)
            - inter_forward_elements(shapes, layer, prev, nxt))


def inter_cost(shapes: LayerShapes, layer: int,
               prev: Parallelism, nxt: Parallelism) -> CommCost:
    """Traffic for the transition between layer-1's and layer's parallelism."""
    if not 1 <= layer < len(shapes):
        raise ValidationError(f"boundary index {layer} out of range")
    return CommCost.of(inter_elements(shapes, layer, prev, nxt),
                       shapes.precision_bytes)


def plan_cost(shapes: LayerShapes, plan: Sequence[Parallelism],
              training: bool = True) -> CommCost:
    """Total communication of a per-layer plan between two groups.

    With ``training=False`` only forward-pass traffic is counted: no
    gradient exchanges and no error-tensor conversions, which is why an
    all-DP plan moves nothing at inference.
    """
    if len(plan) != len(shapes):
        raise ValidationError(
            f"plan length {len(plan)} != layer count {len(shapes)}")
    total = 0
    for l, p in enumerate(plan):
        if training:
            total += intra_elements(shapes, l, p)
        elif p is Parallelism.MP:
            total += intra_elements(shapes, l, p)  # forward partial sums
        if l >= 1:
            if training:
                total += inter_elements(shapes, l, plan[l - 1], p)
            else:
                total += inter_forward_elements(shapes, l, plan[l - 1], p)
    return CommCost.of(total, shapes.precision_bytes)
