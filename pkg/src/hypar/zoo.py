"""Built-in evaluation networks, embedded in model-file form.

sfc / sconv are the single-kind extremes (all fc, all conv); lenet-c and
cifar-c are the small image classifiers; alexnet and the vgg family cover
the large ImageNet-scale models. Weighted-layer counts run from 4 to 19.
cifar-c stands in for the classic CIFAR-10 quick topology (3 conv + 1 fc).
"""
from __future__ import annotations

from functools import lru_cache

from .errors import ValidationError
from .netspec import NetworkModel, parse_model

_VGG_FC_TAIL = """\
fc 4096 act relu
fc 4096 act relu
fc 1000
"""

MODEL_TEXTS: dict[str, str] = {
    "sfc": """\
name sfc
batch 256
input 28 28 1
fc 8192 act relu
fc 8192 act relu
fc 8192 act relu
fc 10
""",
    "sconv": """\
name sconv
batch 256
input 28 28 1
conv 20 k5 s1 p0 act relu
conv 50 k5 s1 p0 pool 2 2 act relu
conv 50 k5 s1 p0 act relu
conv 10 k5 s1 p0 pool 2 2 act relu
""",
    "lenet-c": """\
name lenet-c
batch 256
input 28 28 1
conv 20 k5 s1 p0 pool 2 2 act relu
conv 50 k5 s1 p0 pool 2 2 act relu
fc 500 act relu
fc 10
""",
    "cifar-c": """\
name cifar-c
batch 256
input 32 32 3
conv 32 k5 s1 p2 pool 3 2 act relu
conv 32 k5 s1 p2 pool 3 2 act relu
conv 64 k5 s1 p2 pool 3 2 act relu
fc 10
""",
    "alexnet": """\
name alexnet
batch 256
input 227 227 3
conv 96 k11 s4 p0 pool 3 2 act relu
conv 256 k5 s1 p2 pool 3 2 act relu
conv 384 k3 s1 p1 act relu
conv 384 k3 s1 p1 act relu
conv 256 k3 s1 p1 pool 3 2 act relu
fc 4096 act relu
fc 4096 act relu
fc 1000
""",
    "vgg-a": """\
name vgg-a
batch 256
input 224 224 3
conv 64 k3 s1 p1 pool 2 2 act relu
conv 128 k3 s1 p1 pool 2 2 act relu
conv 256 k3 s1 p1 act relu
conv 256 k3 s1 p1 pool 2 2 act relu
conv 512 k3 s1 p1 act relu
conv 512 k3 s1 p1 pool 2 2 act relu
conv 512 k3 s1 p1 act relu
conv 512 k3 s1 p1 pool 2 2 act relu
""" + _VGG_FC_TAIL,
    "vgg-b": """\
name vgg-b
batch 256
input 224 224 3
conv 64 k3 s1 p1 act relu
conv 64 k3 s1 p1 pool 2 2 act relu
conv 128 k3 s1 p1 act relu
conv 128 k3 s1 p1 pool 2 2 act relu
conv 256 k3 s1 p1 act relu
conv 256 k3 s1 p1 pool 2 2 act relu
conv 512 k3 s1 p1 act relu
conv 512 k3 s1 p1 pool 2 2 act relu
conv 512 k3 s1 p1 act relu
conv 512 k3 s1 p1 pool 2 2 act relu
""" + _VGG_FC_TAIL,
    "vgg-c": """\
name vgg-c
batch 256
input 224 224 3
conv 64 k3 s1 p1 act relu
conv 64 k3 s1 p1 pool 2 2 act relu
conv 128 k3 s1 p1 act relu
conv 128 k3 s1 p1 pool 2 2 act relu
conv 256 k3 s1 p1 act relu
conv 256 k3 s1 p1 act relu
conv 256 k1 s1 p0 pool 2 2 act relu
conv 512 k3 s1 p1 act relu
conv 512 k3 s1 p1 act relu
conv 512 k1 s1 p0 pool 2 2 act relu
conv 512 k3 s1 p1 act relu
conv 512 k3 s1 p1 act relu
conv 512 k1 s1 p0 pool 2 2 act relu
""" + _VGG_FC_TAIL,
    "vgg-d": """\
name vgg-d
batch 256
input 224 224 3
conv 64 k3 s1 p1 act relu
conv 64 k3 s1 p1 pool 2 2 act relu
conv 128 k3 s1 p1 act relu
conv 128 k3 s1 p1 pool 2 2 act relu
conv 256 k3 s1 p1 act relu
conv 256 k3 s1 p1 act relu
conv 256 k3 s1 p1 pool 2 2 act relu
conv 512 k3 s1 p1 act relu
conv 512 k3 s1 p1 act relu
conv 512 k3 s1 p1 pool 2 2 act relu
conv 512 k3 s1 p1 act relu
conv 512 k3 s1 p1 act relu
conv 512 k3 s1 p1 pool 2 2 act relu
""" + _VGG_FC_TAIL,
    "vgg-e": """\
name vgg-e
batch 256
input 224 224 3
conv 64 k3 s1 p1 act relu
conv 64 k3 s1 p1 pool 2 2 act relu
conv 128 k3 s1 p1 act relu
conv 128 k3 s1 p1 pool 2 2 act relu
conv 256 k3 s1 p1 act relu
conv 256 k3 s1 p1 act relu
conv 256 k3 s1 p1 act relu
conv 256 k3 s1 p1 pool 2 2 act relu
conv 512 k3 s1 p1 act relu
conv 512 k3 s1 p1 act relu
conv 512 k3 s1 p1 act relu
conv 512 k3 s1 p1 pool 2 2 act relu
conv 512 k3 s1 p1 act relu
conv 512 k3 s1 p1 act relu
conv 512 k3 s1 p1 act relu
conv 512 k3 s1 p1 pool 2 2 act relu
""" + _VGG_FC_TAIL,
}

NAMES = tuple(MODEL_TEXTS)


def names() -> tuple[str, ...]:
    return NAMES


@lru_cache(maxsize=None)
def get(name: str) -> NetworkModel:
    """Return a validated built-in model; unknown names list what exists."""
    key = name.lower()
    if key not in MODEL_TEXTS:
        raise ValidationError(
            f"unknown network {name!r}; available: {', '.join(NAMES)}")
    return parse_model(MODEL_TEXTS[key])


def text(name: str) -> str:
    """Model-file source of a built-in network."""
    get(name)  # validates the name
    return MODEL_TEXTS[name.lower()]
