"""Model descriptions, validation, and tensor-shape / FLOP derivation.

A network is an ordered list of weighted layers (conv or fully connected).
Pooling and activations are folded into the weighted layer that produces
them: they change downstream geometry but are never separate layers.
All counts are exact integers.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, Optional

from .errors import ModelParseError, ValidationError

CONV = "conv"
FC = "fc"

ACTIVATIONS = ("none", "relu", "sigmoid", "tanh")

DEFAULT_PRECISION_BYTES = 4


@dataclass(frozen=True)
class PoolSpec:
    """Pooling window attached to a conv layer (applied after activation)."""

    window: int
    stride: int

    def validate(self) -> None:
        if self.window < 1 or self.stride < 1:
            raise ValidationError("pool window and stride must be positive")


@dataclass(frozen=True)
class LayerSpec:
    """One weighted layer's hyperparameters.

    ``in_channels`` is derived while building the network: for the first
    fully connected layer after a conv stack it is the flattened H*W*C of
    the preceding feature map (a free reinterpretation, no communication).
    """

    kind: str
    in_channels: int
    out_channels: int
    kernel: int = 0
    stride: int = 1
    padding: int = 0
    pool: Optional[PoolSpec] = None
    activation: str = "none"

    def validate(self) -> None:
        if self.kind not in (CONV, FC):
            raise ValidationError(f"unknown layer kind {self.kind!r}")
        if self.in_channels < 1 or self.out_channels < 1:
            raise ValidationError("channel counts must be strictly positive")
        if self.activation not in ACTIVATIONS:
            raise ValidationError(f"unknown activation {self.activation!r}")
        if self.kind == CONV:
            if self.kernel < 1:
                raise ValidationError("conv layers require kernel >= 1")
            if self.stride < 1:
                raise ValidationError("conv layers require stride >= 1")
            if self.padding < 0:
                raise ValidationError("padding must be non-negative")
            if self.pool is not None:
                self.pool.validate()
        else:
            # A fully connected layer treats its whole input as one
            # dot-product axis; spatial hyperparameters are meaningless.
            if self.kernel or self.padding or self.pool is not None or self.stride != 1:
                raise ValidationError(
                    "fc layers must not carry kernel/stride/padding/pool"
                )


@dataclass(frozen=True)
class NetworkModel:
    """A validated network: input geometry plus ordered weighted layers."""

    name: str
    batch: int
    input_h: int
    input_w: int
    input_c: int
    layers: tuple[LayerSpec, ...]
    precision_bytes: int = DEFAULT_PRECISION_BYTES

    def validate(self) -> None:
        if self.batch < 1:
            raise ValidationError("batch must be positive")
        if min(self.input_h, self.input_w, self.input_c) < 1:
            raise ValidationError("input dimensions must be positive")
        if not self.layers:
            raise ValidationError("network must contain at least one weighted layer")
        for spec in self.layers:
            spec.validate()
        seen_fc = False
        for i, spec in enumerate(self.layers):
            if spec.kind == FC:
                seen_fc = True
            elif seen_fc:
                raise ValidationError(f"layer {i}: conv after fully connected")
        # Channel chaining (including the conv->fc flattening) is checked by
        # re-deriving the expected in_channels for every layer.
        for i, (spec, expected) in enumerate(zip(self.layers, self._expected_inputs())):
            if spec.in_channels != expected:
                raise ValidationError(
                    f"layer {i}: in_channels {spec.in_channels} != expected {expected}"
                )

    def _expected_inputs(self) -> Iterator[int]:
        h, w, c = self.input_h, self.input_w, self.input_c
        for spec in self.layers:
            if spec.kind == CONV:
                yield c
                h, w = _conv_output(h, w, spec)
                c = spec.out_channels
            else:
                yield h * w * c
                h, w, c = 1, 1, spec.out_channels

    def with_batch(self, batch: int) -> "NetworkModel":
        return replace(self, batch=batch)

    @classmethod
    def build(
        cls,
        name: str,
        batch: int,
        input_hwc: tuple[int, int, int],
        layer_defs: list[dict],
        precision_bytes: int = DEFAULT_PRECISION_BYTES,
    ) -> "NetworkModel":
        """Assemble a model from raw layer definitions, deriving in_channels."""
        h, w, c = input_hwc
        if min(h, w, c) < 1:
            raise ValidationError("input dimensions must be positive")
        layers = []
        for i, raw in enumerate(layer_defs):
            kind = raw["kind"]
            if kind == CONV:
                spec = LayerSpec(
                    kind=CONV,
                    in_channels=c,
                    out_channels=raw["out_channels"],
                    kernel=raw["kernel"],
                    stride=raw.get("stride", 1),
                    padding=raw.get("padding", 0),
                    pool=raw.get("pool"),
                    activation=raw.get("activation", "none"),
                )
                spec.validate()
                h, w = _conv_output(h, w, spec)
                if h < 1 or w < 1:
                    raise ValidationError(
                        f"layer {i}: output feature map underflows to {h}x{w}"
                    )
                c = spec.out_channels
            elif kind == FC:
                spec = LayerSpec(
                    kind=FC,
                    in_channels=h * w * c,
                    out_channels=raw["out_channels"],
                    activation=raw.get("activation", "none"),
                )
                spec.validate()
                h, w, c = 1, 1, spec.out_channels
            else:
                raise ValidationError(f"layer {i}: unknown kind {kind!r}")
            layers.append(spec)
        model = cls(name, batch, input_hwc[0], input_hwc[1], input_hwc[2],
                    tuple(layers), precision_bytes)
        model.validate()
        return model


def _conv_output(h: int, w: int, spec: LayerSpec) -> tuple[int, int]:
    """Post-pool output sides of a conv layer (floor arithmetic)."""
    ch = (h + 2 * spec.padding - spec.kernel) // spec.stride + 1
    cw = (w + 2 * spec.padding - spec.kernel) // spec.stride + 1
    if spec.pool is not None and ch >= 1 and cw >= 1:
        ch = (ch - spec.pool.window) // spec.pool.stride + 1
        cw = (cw - spec.pool.window) // spec.pool.stride + 1
    return ch, cw


@dataclass(frozen=True)
class LayerGeometry:
    """Derived per-layer tensor geometry and operation counts.

    ``elems_raw_output`` is the multiply output before pooling (the tensor
    whose partial sums are exchanged under model parallelism); for fc layers
    and unpooled convs it equals ``elems_output``, the tensor handed to the
    next layer.  Error tensors mirror the feature maps and the gradient
    mirrors the kernel, so only feature/kernel counts are stored.
    """

    kind: str
    batch: int
    in_channels: int
    out_channels: int
    kernel: int = 0
    stride: int = 1
    padding: int = 0
    pool: Optional[PoolSpec] = None
    in_h: int = 1
    in_w: int = 1

    def __post_init__(self):
        if self.batch < 1 or self.in_channels < 1 or self.out_channels < 1:
            raise ValidationError("geometry dimensions must be positive")
        if self.kind == CONV:
            ch = (self.in_h + 2 * self.padding - self.kernel) // self.stride + 1
            cw = (self.in_w + 2 * self.padding - self.kernel) // self.stride + 1
            if ch < 1 or cw < 1:
                raise ValidationError(
                    f"conv output underflows to {ch}x{cw} "
                    f"(input {self.in_h}x{self.in_w}, kernel {self.kernel})"
                )
            ph, pw = ch, cw
            if self.pool is not None:
                ph = (ch - self.pool.window) // self.pool.stride + 1
                pw = (cw - self.pool.window) // self.pool.stride + 1
                if ph < 1 or pw < 1:
                    raise ValidationError(f"pool output underflows to {ph}x{pw}")
            object.__setattr__(self, "conv_h", ch)
            object.__setattr__(self, "conv_w", cw)
            object.__setattr__(self, "out_h", ph)
            object.__setattr__(self, "out_w", pw)
        else:
            object.__setattr__(self, "conv_h", 1)
            object.__setattr__(self, "conv_w", 1)
            object.__setattr__(self, "out_h", 1)
            object.__setattr__(self, "out_w", 1)

    @property
    def elems_input(self) -> int:
        if self.kind == CONV:
            return self.batch * self.in_h * self.in_w * self.in_channels
        return self.batch * self.in_channels

    @property
    def elems_weight(self) -> int:
        if self.kind == CONV:
            return self.kernel * self.kernel * self.in_channels * self.out_channels
        return self.in_channels * self.out_channels

    @property
    def elems_raw_output(self) -> int:
        if self.kind == CONV:
            return self.batch * self.conv_h * self.conv_w * self.out_channels
        return self.batch * self.out_channels

    @property
    def elems_output(self) -> int:
        if self.kind == CONV:
            return self.batch * self.out_h * self.out_w * self.out_channels
        return self.batch * self.out_channels

    @property
    def macs(self) -> int:
        if self.kind == CONV:
            return (self.batch * self.kernel * self.kernel * self.in_channels
                    * self.out_channels * self.conv_h * self.conv_w)
        return self.batch * self.in_channels * self.out_channels

    # Backward and gradient multiplications move the same volume as the
    # forward one with transposed operands, so all three phases count the
    # same MACs.
    @property
    def flops_forward(self) -> int:
        return 2 * self.macs

    @property
    def flops_backward(self) -> int:
        return 2 * self.macs

    @property
    def flops_gradient(self) -> int:
        return 2 * self.macs

    def scaled(self, batch: int | None = None, in_channels: int | None = None,
               out_channels: int | None = None) -> "LayerGeometry":
        """Same layer with some dimensions replaced; derived counts recompute."""
        return replace(
            self,
            batch=self.batch if batch is None else batch,
            in_channels=self.in_channels if in_channels is None else in_channels,
            out_channels=self.out_channels if out_channels is None else out_channels,
        )


@dataclass(frozen=True)
class LayerShapes:
    """Tensor geometry for every weighted layer of one network."""

    layers: tuple[LayerGeometry, ...]
    precision_bytes: int = DEFAULT_PRECISION_BYTES

    def __len__(self) -> int:
        return len(self.layers)

    def __getitem__(self, i: int) -> LayerGeometry:
        return self.layers[i]

    @property
    def total_flops(self) -> int:
        return sum(g.flops_forward + g.flops_backward + g.flops_gradient
                   for g in self.layers)


def infer_shapes(model: NetworkModel) -> LayerShapes:
    """Derive tensor geometry and per-phase operation counts for all layers.

    Raises ValidationError on shape underflow or broken channel chaining.
    """
    model.validate()
    h, w, c = model.input_h, model.input_w, model.input_c
    geoms = []
    for spec in model.layers:
        if spec.kind == CONV:
            g = LayerGeometry(
                kind=CONV, batch=model.batch,
                in_channels=c, out_channels=spec.out_channels,
                kernel=spec.kernel, stride=spec.stride, padding=spec.padding,
                pool=spec.pool, in_h=h, in_w=w,
            )
            h, w, c = g.out_h, g.out_w, g.out_channels
        else:
            g = LayerGeometry(
                kind=FC, batch=model.batch,
                in_channels=h * w * c, out_channels=spec.out_channels,
            )
            h, w, c = 1, 1, spec.out_channels
        geoms.append(g)
    return LayerShapes(tuple(geoms), model.precision_bytes)


# ---------------------------------------------------------------------------
# Model-file format: line oriented text.
#
#   # comment
#   name lenet-c
#   batch 256
#   input 28 28 1
#   conv 20 k5 s1 p0 pool 2 2 act relu
#   fc 500 act relu
# ---------------------------------------------------------------------------

def parse_model(text: str) -> NetworkModel:
    """Parse model-file text into a validated NetworkModel.

    Parsing is total: any input either yields a model or raises
    ModelParseError / ValidationError with a line/column diagnostic.
    """
    name = None
    batch = None
    input_hwc = None
    layer_defs: list[dict] = []

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0]
        if not line.strip():
            continue
        tokens = _tokenize(line, lineno)
        word = tokens.take("directive")
        if word.text == "name":
            name = tokens.take("network name").text
        elif word.text == "batch":
            batch = tokens.take_int("batch size")
        elif word.text == "input":
            input_hwc = (tokens.take_int("input height"),
                         tokens.take_int("input width"),
                         tokens.take_int("input channels"))
        elif word.text == CONV:
            layer_defs.append(_parse_conv(tokens))
        elif word.text == FC:
            layer_defs.append(_parse_fc(tokens))
        else:
            raise ModelParseError(f"unknown directive {word.text!r}",
                                  lineno, word.column)
        tokens.expect_end()

    if name is None:
        raise ModelParseError("missing 'name' line", 1, 1)
    if batch is None:
        raise ModelParseError("missing 'batch' line", 1, 1)
    if input_hwc is None:
        raise ModelParseError("missing 'input' line", 1, 1)
    return NetworkModel.build(name, batch, input_hwc, layer_defs)


def emit_model(model: NetworkModel) -> str:
    """Canonical model-file text; parse(emit(model)) == model."""
    lines = [f"name {model.name}",
             f"batch {model.batch}",
             f"input {model.input_h} {model.input_w} {model.input_c}"]
    for spec in model.layers:
        if spec.kind == CONV:
            parts = [f"conv {spec.out_channels}", f"k{spec.kernel}",
                     f"s{spec.stride}", f"p{spec.padding}"]
            if spec.pool is not None:
                parts.append(f"pool {spec.pool.window} {spec.pool.stride}")
        else:
            parts = [f"fc {spec.out_channels}"]
        if spec.activation != "none":
            parts.append(f"act {spec.activation}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


@dataclass
class _Token:
    text: str
    column: int


class _TokenStream:
    def __init__(self, tokens: list[_Token], lineno: int, line_len: int):
        self._tokens = tokens
        self._pos = 0
        self.lineno = lineno
        self._line_len = line_len

    def take(self, what: str) -> _Token:
        if self._pos >= len(self._tokens):
            raise ModelParseError(f"expected {what}", self.lineno, self._line_len + 1)
        tok = self._tokens[self._pos]
        self._pos += 1
        return tok

    def take_int(self, what: str, minimum: int = 1) -> int:
        tok = self.take(what)
        try:
            value = int(tok.text)
        except ValueError:
            raise ModelParseError(f"expected integer {what}, got {tok.text!r}",
                                  self.lineno, tok.column) from None
        if value < minimum:
            raise ModelParseError(f"{what} must be >= {minimum}",
                                  self.lineno, tok.column)
        return value

    def peek(self) -> Optional[_Token]:
        return self._tokens[self._pos] if self._pos < len(self._tokens) else None

    def expect_end(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise ModelParseError(f"unexpected trailing token {tok.text!r}",
                                  self.lineno, tok.column)


def _tokenize(line: str, lineno: int) -> _TokenStream:
    tokens = []
    col = 0
    for piece in line.split():
        col = line.index(piece, col)
        tokens.append(_Token(piece, col + 1))
        col += len(piece)
    return _TokenStream(tokens, lineno, len(line))


def _take_prefixed_int(tokens: _TokenStream, prefix: str, what: str) -> int:
    tok = tokens.take(what)
    if not tok.text.startswith(prefix) or len(tok.text) <= len(prefix):
        raise ModelParseError(f"expected {prefix}<n> for {what}, got {tok.text!r}",
                              tokens.lineno, tok.column)
    try:
        return int(tok.text[len(prefix):])
    except ValueError:
        raise ModelParseError(f"expected integer after {prefix!r} in {what}",
                              tokens.lineno, tok.column) from None


def _parse_act(tokens: _TokenStream) -> str:
    tok = tokens.take("activation name")
    if tok.text not in ACTIVATIONS:
        raise ModelParseError(f"unknown activation {tok.text!r}",
                              tokens.lineno, tok.column)
    return tok.text


def _parse_conv(tokens: _TokenStream) -> dict:
    raw: dict = {"kind": CONV, "out_channels": tokens.take_int("out channels")}
    raw["kernel"] = _take_prefixed_int(tokens, "k", "kernel size")
    while (tok := tokens.peek()) is not None:
        if tok.text.startswith("s") and tok.text != "sigmoid":
            raw["stride"] = _take_prefixed_int(tokens, "s", "stride")
        elif tok.text.startswith("p") and tok.text != "pool":
            raw["padding"] = _take_prefixed_int(tokens, "p", "padding")
        elif tok.text == "pool":
            tokens.take("pool keyword")
            raw["pool"] = PoolSpec(tokens.take_int("pool window"),
                                   tokens.take_int("pool stride"))
        elif tok.text == "act":
            tokens.take("act keyword")
            raw["activation"] = _parse_act(tokens)
        else:
            break
    return raw


def _parse_fc(tokens: _TokenStream) -> dict:
    raw: dict = {"kind": FC, "out_channels": tokens.take_int("out channels")}
    tok = tokens.peek()
    if tok is not None and tok.text == "act":
        tokens.take("act keyword")
        raw["activation"] = _parse_act(tokens)
    return raw
