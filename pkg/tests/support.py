"""Shared helpers for the test suite."""
import math
import random

from hypar.netspec import CONV, FC, LayerGeometry, LayerShapes, PoolSpec


def random_geometry(rng: random.Random) -> LayerGeometry:
    if rng.random() < 0.5:
        return LayerGeometry(
            kind=FC, batch=rng.randint(1, 97),
            in_channels=rng.randint(1, 211), out_channels=rng.randint(1, 211))
    kernel = rng.randint(1, 3)
    side = rng.randint(kernel + 1, kernel + 9)
    stride = rng.randint(1, 2)
    padding = rng.randint(0, 1)
    conv_side = (side + 2 * padding - kernel) // stride + 1
    pool = PoolSpec(2, 2) if rng.random() < 0.3 and conv_side >= 2 else None
    return LayerGeometry(
        kind=CONV, batch=rng.randint(1, 65),
        in_channels=rng.randint(1, 33), out_channels=rng.randint(1, 33),
        kernel=kernel, stride=stride, padding=padding,
        pool=pool, in_h=side, in_w=side)


def random_shapes(rng: random.Random, max_layers: int = 12) -> LayerShapes:
    """A synthetic layer chain with independent random per-layer geometry
    (odd sizes included, to stress the ceiling arithmetic)."""
    count = rng.randint(1, max_layers)
    return LayerShapes(tuple(random_geometry(rng) for _ in range(count)))


def geomean(values) -> float:
    vals = list(values)
    return math.exp(sum(math.log(v) for v in vals) / len(vals))
