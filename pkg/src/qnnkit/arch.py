"""Declarative network architectures and their on-disk text format.

An architecture is a list of layers over a power-of-two input dimension:

- ``v``: variational blocks on the log2(input_dim) input qubits;
  ``repeat`` stacks blocks (more trainable angles).
- ``u``: weighted-sum neurons consuming the amplitude stage; at most one,
  directly after the v stage.
- ``n``: per-channel normalization; width always equals the previous
  layer's width.
- ``p``: probability-product neurons; may alternate with ``n``.

The file format is line-oriented and hand-writable::

    input_dim 16
    classes 2
    layer v width=4 r=2
    layer u width=2

Header keys come first; each ``layer`` line takes ``width=``, optional
``r=`` (v only) and optional ``theta=shared|per-channel`` (n only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

VALID_KINDS = ("v", "u", "n", "p")
THETA_MODES = ("per-channel", "shared")


class ArchitectureError(ValueError):
    """Structurally invalid architecture."""


class ArchitectureParseError(ValueError):
    """Unparseable architecture file; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass
class LayerSpec:
    kind: str
    width: int
    repeat: int = 1
    theta_mode: str = "per-channel"


@dataclass
class ArchitectureSpec:
    input_dim: int
    num_classes: int
    layers: list[LayerSpec] = field(default_factory=list)

    @property
    def n_qubits(self) -> int:
        return int(math.log2(self.input_dim))

    @property
    def name(self) -> str:
        """Compact label like 'v*2+u' for reports and CSV rows."""
        parts = []
        for layer in self.layers:
            parts.append(f"{layer.kind}*{layer.repeat}" if layer.repeat > 1 else layer.kind)
        return "+".join(parts)

    def validate_shape(self) -> None:
        """Structural checks; junction feasibility lives in qnnkit.rules."""
        if self.input_dim < 2 or 2 ** self.n_qubits != self.input_dim:
            raise ArchitectureError(
                f"input_dim must be a power of two >= 2, got {self.input_dim}"
            )
        # num_classes = 1 is allowed for verification-only networks; the
        # loss is what insists on >= 2 classes.
        if self.num_classes < 1:
            raise ArchitectureError(f"need at least 1 output, got {self.num_classes}")
        if not self.layers:
            raise ArchitectureError("architecture has no layers")

        for layer in self.layers:
            if layer.kind not in VALID_KINDS:
                raise ArchitectureError(f"unknown layer kind {layer.kind!r}")
            if layer.width < 1:
                raise ArchitectureError(f"{layer.kind}-layer width must be >= 1")
            if layer.repeat < 1:
                raise ArchitectureError(f"{layer.kind}-layer repeat must be >= 1")
            if layer.repeat > 1 and layer.kind != "v":
                raise ArchitectureError("only v-layers take a repeat count")
            if layer.theta_mode not in THETA_MODES:
                raise ArchitectureError(f"bad theta mode {layer.theta_mode!r}")

        # Width bookkeeping; junction feasibility and the stricter trainer
        # pipeline shape are checked elsewhere, so that the rule engine can
        # analyze deliberately broken architectures.
        for i, layer in enumerate(self.layers):
            prev_width = self.n_qubits if i == 0 else self.layers[i - 1].width
            if layer.kind == "v" and layer.width != self.n_qubits:
                raise ArchitectureError(
                    f"v-layer width must be log2(input_dim) = {self.n_qubits}, "
                    f"got {layer.width}"
                )
            if layer.kind == "n" and layer.width != prev_width:
                raise ArchitectureError(
                    f"n-layer width must match its input ({prev_width}), "
                    f"got {layer.width}"
                )

        last = self.layers[-1]
        if last.kind == "v":
            if self.num_classes > self.n_qubits:
                raise ArchitectureError(
                    f"a v-final network reads one qubit per class: "
                    f"{self.num_classes} classes need >= {self.num_classes} qubits, "
                    f"have {self.n_qubits}"
                )
        elif last.width != self.num_classes:
            raise ArchitectureError(
                f"last layer width must equal num_classes ({self.num_classes}), "
                f"got {last.width}"
            )


# ---------------------------------------------------------------------------
# templates
# ---------------------------------------------------------------------------


def vqc_architecture(input_dim: int, num_classes: int, r1: int = 1) -> ArchitectureSpec:
    """Pure variational baseline; classes read off the first qubits."""
    n = int(math.log2(input_dim))
    arch = ArchitectureSpec(input_dim, num_classes, [LayerSpec("v", n, repeat=r1)])
    arch.validate_shape()
    return arch


def vu_architecture(
    input_dim: int, num_classes: int, r1: int = 1, include_n: bool = False
) -> ArchitectureSpec:
    """v*r1 + u(classes), optionally with a trailing normalization layer."""
    n = int(math.log2(input_dim))
    layers = [LayerSpec("v", n, repeat=r1), LayerSpec("u", num_classes)]
    if include_n:
        layers.append(LayerSpec("n", num_classes))
    arch = ArchitectureSpec(input_dim, num_classes, layers)
    arch.validate_shape()
    return arch


def vup_architecture(
    input_dim: int,
    num_classes: int,
    r1: int = 1,
    hidden: int = 4,
    include_n: bool = True,
) -> ArchitectureSpec:
    """v*r1 + u(hidden) [+ n(hidden)] + p(classes)."""
    n = int(math.log2(input_dim))
    layers = [LayerSpec("v", n, repeat=r1), LayerSpec("u", hidden)]
    if include_n:
        layers.append(LayerSpec("n", hidden))
    layers.append(LayerSpec("p", num_classes))
    arch = ArchitectureSpec(input_dim, num_classes, layers)
    arch.validate_shape()
    return arch


def vp_architecture(
    input_dim: int, num_classes: int, r1: int = 1, include_n: bool = False
) -> ArchitectureSpec:
    """v*r1 (probability view) [+ n] + p(classes)."""
    n = int(math.log2(input_dim))
    layers = [LayerSpec("v", n, repeat=r1)]
    if include_n:
        layers.append(LayerSpec("n", n))
    layers.append(LayerSpec("p", num_classes))
    arch = ArchitectureSpec(input_dim, num_classes, layers)
    arch.validate_shape()
    return arch


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------


def parse_architecture(text: str) -> ArchitectureSpec:
    input_dim = None
    num_classes = None
    layers: list[LayerSpec] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        key = tokens[0].lower()
        if key in ("input_dim", "classes"):
            if len(tokens) != 2:
                raise ArchitectureParseError(line_no, f"{key} takes one value")
            try:
                value = int(tokens[1])
            except ValueError:
                raise ArchitectureParseError(line_no, f"{key} must be an integer")
            if key == "input_dim":
                input_dim = value
            else:
                num_classes = value
        elif key == "layer":
            if len(tokens) < 3:
                raise ArchitectureParseError(line_no, "layer needs a kind and width=")
            kind = tokens[1].lower()
            if kind not in VALID_KINDS:
                raise ArchitectureParseError(line_no, f"unknown layer kind {kind!r}")
            width = None
            repeat = 1
            theta_mode = "per-channel"
            for tok in tokens[2:]:
                if "=" not in tok:
                    raise ArchitectureParseError(line_no, f"expected key=value, got {tok!r}")
                k, v = tok.split("=", 1)
                if k == "width":
                    width = _parse_int(line_no, "width", v)
                elif k == "r":
                    repeat = _parse_int(line_no, "r", v)
                elif k == "theta":
                    if v not in THETA_MODES:
                        raise ArchitectureParseError(
                            line_no, f"theta must be shared or per-channel, got {v!r}"
                        )
                    theta_mode = v
                else:
                    raise ArchitectureParseError(line_no, f"unknown layer option {k!r}")
            if width is None:
                raise ArchitectureParseError(line_no, "layer is missing width=")
            layers.append(LayerSpec(kind, width, repeat=repeat, theta_mode=theta_mode))
        else:
            raise ArchitectureParseError(line_no, f"unknown directive {key!r}")

    if input_dim is None:
        raise ArchitectureParseError(1, "missing input_dim header")
    if num_classes is None:
        raise ArchitectureParseError(1, "missing classes header")
    arch = ArchitectureSpec(input_dim, num_classes, layers)
    try:
        arch.validate_shape()
    except ArchitectureError as exc:
        raise ArchitectureParseError(1, str(exc)) from exc
    return arch


def _parse_int(line_no: int, key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ArchitectureParseError(line_no, f"{key} must be an integer, got {value!r}")


def serialize_architecture(arch: ArchitectureSpec) -> str:
    lines = [f"input_dim {arch.input_dim}", f"classes {arch.num_classes}"]
    for layer in arch.layers:
        parts = [f"layer {layer.kind} width={layer.width}"]
        if layer.repeat != 1:
            parts.append(f"r={layer.repeat}")
        if layer.kind == "n" and layer.theta_mode != "per-channel":
            parts.append(f"theta={layer.theta_mode}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def load_architecture(path) -> ArchitectureSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_architecture(fh.read())
