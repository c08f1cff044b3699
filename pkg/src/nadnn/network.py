"""Discrete non-Archimedean deep networks.

Layer l has one neuron per element of G_l.  The state of layer l - 1
is first copied onto G_l through the projection G_l -> G_{l-1}
(``lift_state``), then mixed by a dense p**l x p**l matrix or by a
kernel over the group (convolutional case), shifted by a bias and
squashed by sigma_M = M * tanh.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .localfield import Characteristic, FieldConfig, group_size, sub_table
from .testfn import TestFunction


class NumericError(ArithmeticError):
    """A non-finite value appeared while propagating through a network."""


@dataclass(frozen=True)
class Activation:
    """sigma_M(u) = M tanh(u), with values in (-M, M)."""

    M: float = 2.0
    kind: str = "scaled_tanh"

    def __post_init__(self):
        if self.kind != "scaled_tanh":
            raise ValueError(f"unsupported activation {self.kind!r}")
        if not (self.M > 0 and math.isfinite(self.M)):
            raise ValueError(f"M must be a positive finite number, got {self.M}")

    def __call__(self, z):
        return self.M * np.tanh(z)

    def derivative(self, z):
        t = np.tanh(z)
        return self.M * (1.0 - t * t)

    def inverse(self, y):
        y = np.asarray(y, dtype=np.float64)
        if np.any(np.abs(y) >= self.M):
            raise ValueError(f"sigma_M^-1 is only defined on (-{self.M}, {self.M})")
        return np.arctanh(y / self.M)

    @property
    def lipschitz(self) -> float:
        return self.M


def _frozen(a, dtype=np.float64) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Layer:
    """Weights and bias of the layer living on G_level.

    ``kind == "dense"``: weights has shape (p**l, p**l), entry [j, k] = w(j, k).
    ``kind == "conv"``: weights has shape (p**l,), entry [d] = w(d); the
    effective matrix is w(j - k) with the group subtraction.
    """

    level: int
    kind: str
    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        if self.kind not in ("dense", "conv"):
            raise ValueError(f"layer kind must be 'dense' or 'conv', got {self.kind!r}")
        w = _frozen(self.weights)
        b = _frozen(self.bias).reshape(-1)
        n = b.shape[0]
        expected = (n, n) if self.kind == "dense" else (n,)
        if self.kind == "dense" and w.ndim == 1 and w.size == n * n:
            w = _frozen(w.reshape(n, n))
        if w.shape != expected:
            raise ValueError(f"{self.kind} weights must have shape {expected}, got {w.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError(f"layer {self.level} has non-finite parameters")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def size(self) -> int:
        return self.bias.shape[0]

    def matrix(self, cfg: FieldConfig) -> np.ndarray:
        if self.kind == "dense":
            return self.weights
        return self.weights[sub_table(cfg, self.level)]

    def replace(self, weights=None, bias=None) -> "Layer":
        return Layer(
            self.level,
            self.kind,
            self.weights if weights is None else weights,
            self.bias if bias is None else bias,
        )


@dataclass(frozen=True, eq=False)
class Network:
    cfg: FieldConfig
    input_level: int
    activation: Activation
    layers: tuple[Layer, ...]

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if self.input_level < 1:
            raise ValueError("input level L must be >= 1")
        if not self.layers:
            raise ValueError("a network needs at least one layer (depth >= 1)")
        for offset, layer in enumerate(self.layers, start=1):
            want = self.input_level + offset
            if layer.level != want:
                raise ValueError(f"layer {offset} has level {layer.level}, expected {want}")
            if layer.size != self.cfg.size(want):
                raise ValueError(f"layer at level {want} must have {self.cfg.size(want)} neurons")

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def output_level(self) -> int:
        return self.input_level + self.depth

    @property
    def M(self) -> float:
        return self.activation.M

    def with_layers(self, layers: Sequence[Layer]) -> "Network":
        return Network(self.cfg, self.input_level, self.activation, tuple(layers))

    def n_parameters(self) -> int:
        return sum(layer.weights.size + layer.bias.size for layer in self.layers)

    def to_json(self) -> dict:
        return {
            "p": self.cfg.p,
            "char": self.cfg.char.value,
            "L": self.input_level,
            "delta": self.depth,
            "M": self.M,
            "layers": [
                {
                    "level": layer.level,
                    "kind": layer.kind,
                    "weights": [float(v) for v in layer.weights.reshape(-1)],
                    "bias": [float(v) for v in layer.bias],
                }
                for layer in self.layers
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Network":
        cfg = FieldConfig(int(obj["p"]), Characteristic.parse(obj["char"]))
        layers = []
        for entry in obj["layers"]:
            n = cfg.size(int(entry["level"]))
            w = np.asarray(entry["weights"], dtype=np.float64)
            if entry["kind"] == "dense":
                w = w.reshape(n, n)
            layers.append(Layer(int(entry["level"]), entry["kind"], w, entry["bias"]))
        net = cls(cfg, int(obj["L"]), Activation(float(obj["M"])), tuple(layers))
        if net.depth != int(obj["delta"]):
            raise ValueError(f"delta={obj['delta']} but {net.depth} layers were given")
        return net

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path: str | Path) -> "Network":
        return cls.from_json(json.loads(Path(path).read_text()))


@dataclass
class Trace:
    """Everything forward computes: lifted inputs, weighted inputs and states per layer."""

    states: list[np.ndarray] = field(default_factory=list)  # X^[L], ..., X^[L+delta]
    lifted: list[np.ndarray] = field(default_factory=list)  # lifted X^[l-1] for each layer
    weighted: list[np.ndarray] = field(default_factory=list)  # Z^[l] for each layer

    @property
    def output(self) -> np.ndarray:
        return self.states[-1]


def _is_power(n: int, p: int) -> bool:
    while n > 1 and n % p == 0:
        n //= p
    return n == 1


def lift_state(cfg: FieldConfig, x: np.ndarray) -> np.ndarray:
    """Copy a state on G_{l-1} onto G_l: out[k] = x[rank of the parent of k]."""
    x = np.asarray(x)
    if not _is_power(x.shape[-1], cfg.p):
        raise ValueError(f"state length {x.shape[-1]} is not a power of {cfg.p}")
    # little-endian ranks: parent(k) = k mod p**(l-1), so the lift tiles x p times
    return np.tile(x, cfg.p)


def lift_adjoint(cfg: FieldConfig, v: np.ndarray) -> np.ndarray:
    """Adjoint of lift_state: sum the values of each parent's p children."""
    v = np.asarray(v)
    n = v.shape[-1]
    if n < cfg.p or not _is_power(n, cfg.p):
        raise ValueError(f"state length {n} is not a positive power of {cfg.p}")
    return v.reshape(cfg.p, n // cfg.p).sum(axis=0)


def conv_to_dense(cfg: FieldConfig, layer: Layer) -> Layer:
    if layer.kind != "conv":
        raise ValueError("conv_to_dense expects a convolutional layer")
    return Layer(layer.level, "dense", layer.matrix(cfg), layer.bias)


def _affine(cfg: FieldConfig, layer: Layer, lifted: np.ndarray) -> np.ndarray:
    if layer.kind == "dense":
        return layer.weights @ lifted + layer.bias
    return layer.matrix(cfg) @ lifted + layer.bias


def forward(net: Network, x_in: TestFunction | np.ndarray) -> tuple[TestFunction, Trace]:
    """Propagate an input of level L to the output of level L + delta."""
    if isinstance(x_in, TestFunction):
        if x_in.cfg != net.cfg:
            raise ValueError(f"input field {x_in.cfg} does not match network field {net.cfg}")
        if x_in.level != net.input_level:
            raise ValueError(f"input has level {x_in.level}, network expects {net.input_level}")
        x = np.asarray(x_in.coeffs, dtype=np.float64)
    else:
        x = np.asarray(x_in, dtype=np.float64).reshape(-1)
        if x.shape[0] != net.cfg.size(net.input_level):
            raise ValueError(f"input must have {net.cfg.size(net.input_level)} entries")
    trace = Trace(states=[x])
    sigma = net.activation
    for layer in net.layers:
        lifted = lift_state(net.cfg, x)
        with np.errstate(over="ignore", invalid="ignore"):
            z = _affine(net.cfg, layer, lifted)
        if not np.all(np.isfinite(z)):
            raise NumericError(f"non-finite weighted input at layer {layer.level}")
        x = sigma(z)
        trace.lifted.append(lifted)
        trace.weighted.append(z)
        trace.states.append(x)
    return TestFunction(net.cfg, net.output_level, x), trace


def predict(net: Network, x_in: TestFunction | np.ndarray) -> TestFunction:
    return forward(net, x_in)[0]


def zero_network(
    cfg: FieldConfig, input_level: int, depth: int, M: float = 2.0, kind: str = "dense"
) -> Network:
    layers = []
    for level in range(input_level + 1, input_level + depth + 1):
        n = group_size(cfg.p, level)
        w = np.zeros((n, n)) if kind == "dense" else np.zeros(n)
        layers.append(Layer(level, kind, w, np.zeros(n)))
    return Network(cfg, input_level, Activation(M), tuple(layers))


def random_network(
    cfg: FieldConfig,
    input_level: int,
    depth: int,
    rng,
    M: float = 2.0,
    kind: str = "dense",
    scale: float = 1.0,
) -> Network:
    """Network with weights uniform in +-scale/sqrt(fan-in) and biases uniform in +-0.1*scale.

    ``rng`` is anything with a ``uniform(low, high, size)`` method.
    """
    layers = []
    for level in range(input_level + 1, input_level + depth + 1):
        n = group_size(cfg.p, level)
        bound = scale / math.sqrt(n)
        shape = (n, n) if kind == "dense" else (n,)
        w = np.asarray(rng.uniform(-bound, bound, shape), dtype=np.float64)
        b = np.asarray(rng.uniform(-0.1 * scale, 0.1 * scale, n), dtype=np.float64)
        layers.append(Layer(level, kind, w.reshape(shape), b))
    return Network(cfg, input_level, Activation(M), tuple(layers))
