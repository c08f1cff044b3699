"""Quadratic cost, backpropagation and (stochastic) gradient descent.

The cost of one sample is ``0.5 * sum_k (Y_k - X_k)**2`` over the output
coefficients (plain Euclidean metric).  Passing ``haar=True`` weights
every term by the Haar mass p**-(L+delta) of its ball instead, which
turns the cost into half the squared L^2 distance of test functions.

Backward pass through the copy operator: the transpose of the weight
matrix maps the layer-(l+1) errors to G_{l+1}; summing over the p lifts
of each vertex (``lift_adjoint``) brings them back to G_l.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .localfield import iter_level, sub_table
from .network import Network, NumericError, Trace, forward, lift_adjoint
from .prng import Lcg64
from .testfn import TestFunction, coarsen, translate


@dataclass(frozen=True)
class TrainingSample:
    input: TestFunction
    target: TestFunction


@dataclass
class Gradient:
    """Per-layer partial derivatives, shaped like the network's parameters."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @classmethod
    def zeros_like(cls, net: Network) -> "Gradient":
        return cls(
            [np.zeros_like(layer.weights) for layer in net.layers],
            [np.zeros_like(layer.bias) for layer in net.layers],
        )

    def __add__(self, other: "Gradient") -> "Gradient":
        return Gradient(
            [a + b for a, b in zip(self.weights, other.weights)],
            [a + b for a, b in zip(self.biases, other.biases)],
        )

    def scale(self, factor: float) -> "Gradient":
        return Gradient([factor * w for w in self.weights], [factor * b for b in self.biases])

    def flat(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.reshape(-1))
            parts.append(b.reshape(-1))
        return np.concatenate(parts)


@dataclass(frozen=True)
class Schedule:
    epochs: int
    batch_size: int
    eta: float
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if not self.eta > 0:
            raise ValueError("learning rate eta must be > 0")


def _check_sample(net: Network, sample: TrainingSample) -> None:
    if sample.input.level != net.input_level or sample.target.level != net.output_level:
        raise ValueError(
            f"sample levels ({sample.input.level}, {sample.target.level}) do not match "
            f"network levels ({net.input_level}, {net.output_level})"
        )


def _output_weight(net: Network, haar: bool) -> float:
    return float(net.cfg.p) ** (-net.output_level) if haar else 1.0


def sample_cost(net: Network, sample: TrainingSample, haar: bool = False) -> float:
    _check_sample(net, sample)
    out, _ = forward(net, sample.input)
    r = sample.target.coeffs - out.coeffs
    return 0.5 * _output_weight(net, haar) * float(np.dot(r, r))


def cost(net: Network, samples: Sequence[TrainingSample], haar: bool = False) -> float:
    """Mean over samples of half the squared distance between target and output."""
    if len(samples) == 0:
        raise ValueError("cost needs at least one sample")
    total = sum(sample_cost(net, s, haar) for s in samples)
    return total / len(samples)


def backprop(
    net: Network, sample: TrainingSample, haar: bool = False, trace: Trace | None = None
) -> Gradient:
    _check_sample(net, sample)
    if trace is None:
        _, trace = forward(net, sample.input)
    if len(trace.weighted) != net.depth:
        raise ValueError("forward trace does not match the network depth")
    sigma = net.activation
    grad_w: list[np.ndarray] = [None] * net.depth  # type: ignore[list-item]
    grad_b: list[np.ndarray] = [None] * net.depth  # type: ignore[list-item]

    residual = trace.output - sample.target.coeffs
    delta = sigma.derivative(trace.weighted[-1]) * residual * _output_weight(net, haar)
    for i in range(net.depth - 1, -1, -1):
        layer = net.layers[i]
        lifted = trace.lifted[i]
        grad_b[i] = delta.copy()
        if layer.kind == "dense":
            grad_w[i] = np.outer(delta, lifted)
        else:
            # w(d) feeds every (j, k) with j - k = d
            table = sub_table(net.cfg, layer.level)
            grad_w[i] = np.bincount(
                table.reshape(-1),
                weights=np.outer(delta, lifted).reshape(-1),
                minlength=layer.size,
            )
        if i > 0:
            v = layer.matrix(net.cfg).T @ delta
            delta = sigma.derivative(trace.weighted[i - 1]) * lift_adjoint(net.cfg, v)
    return Gradient(grad_w, grad_b)


def batch_gradient(
    net: Network, batch: Sequence[TrainingSample], haar: bool = False
) -> Gradient:
    """Mean of per-sample gradients, reduced in batch order."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    total = Gradient.zeros_like(net)
    for sample in batch:
        total = total + backprop(net, sample, haar)
    return total.scale(1.0 / len(batch))


def apply_update(net: Network, grad: Gradient, step: float) -> Network:
    """Theta <- Theta - step * grad."""
    with np.errstate(over="ignore", invalid="ignore"):
        moved = [
            (layer.weights - step * gw, layer.bias - step * gb)
            for layer, gw, gb in zip(net.layers, grad.weights, grad.biases)
        ]
    for layer, (w, b) in zip(net.layers, moved):
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise NumericError(f"update produced non-finite parameters at layer {layer.level}")
    return net.with_layers([layer.replace(w, b) for layer, (w, b) in zip(net.layers, moved)])


def sgd_step(
    net: Network, batch: Sequence[TrainingSample], eta: float, haar: bool = False
) -> Network:
    if not eta > 0:
        raise ValueError(f"learning rate must be > 0, got {eta}")
    grad = batch_gradient(net, batch, haar)
    if not np.all(np.isfinite(grad.flat())):
        raise NumericError("non-finite gradient")
    return apply_update(net, grad, eta)


def train(
    net: Network,
    samples: Sequence[TrainingSample],
    schedule: Schedule,
    haar: bool = False,
) -> tuple[Network, list[float]]:
    """Mini-batch SGD; returns the trained network and the full-data cost after each epoch."""
    samples = list(samples)
    if schedule.epochs and not samples:
        raise ValueError("no training samples")
    rng = Lcg64(schedule.seed)
    log: list[float] = []
    for _ in range(schedule.epochs):
        order = rng.permutation(len(samples))
        for start in range(0, len(order), schedule.batch_size):
            batch = [samples[i] for i in order[start : start + schedule.batch_size]]
            net = sgd_step(net, batch, schedule.eta, haar)
        c = cost(net, samples, haar)
        if not np.isfinite(c):
            raise NumericError(f"cost diverged after epoch {len(log) + 1}")
        log.append(c)
    return net, log


def format_log(log: Iterable[float]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["epoch", "cost"])
    for epoch, c in enumerate(log, start=1):
        writer.writerow([epoch, f"{c:.17g}"])
    return buf.getvalue()


def finite_difference_gradient(
    net: Network, sample: TrainingSample, h: float = 1e-6, haar: bool = False
) -> Gradient:
    """Central differences of the sample cost, one parameter at a time.

    The cost is recomputed from the layer equations directly, without
    going through ``forward``, so it can serve as an oracle for backprop.
    """
    _check_sample(net, sample)
    p, M = net.cfg.p, net.M
    tables = [sub_table(net.cfg, layer.level) if layer.kind == "conv" else None
              for layer in net.layers]
    weights = [layer.weights.copy() for layer in net.layers]
    biases = [layer.bias.copy() for layer in net.layers]
    x0 = np.asarray(sample.input.coeffs, dtype=np.float64)
    y = np.asarray(sample.target.coeffs, dtype=np.float64)
    scale = 0.5 * _output_weight(net, haar)

    def c() -> float:
        x = x0
        for w, b, table in zip(weights, biases, tables):
            mat = w if table is None else w[table]
            x = M * np.tanh(mat @ np.tile(x, p) + b)
        r = y - x
        return scale * float(r @ r)

    grad = Gradient.zeros_like(net)
    for params, outs in ((weights, grad.weights), (biases, grad.biases)):
        for arr, out in zip(params, outs):
            flat, gflat = arr.reshape(-1), out.reshape(-1)
            for idx in range(flat.size):
                keep = flat[idx]
                flat[idx] = keep + h
                up = c()
                flat[idx] = keep - h
                down = c()
                flat[idx] = keep
                gflat[idx] = (up - down) / (2 * h)
    return grad


def translation_dataset(target: TestFunction, input_level: int) -> list[TrainingSample]:
    """One sample per shift a in G_level: input = coarse view of x -> target(x + a)."""
    if input_level >= target.level:
        raise ValueError("input level must be coarser than the target level")
    samples = []
    for a in iter_level(target.cfg, target.level):
        shifted = translate(target, a)
        samples.append(TrainingSample(coarsen(shifted, input_level), shifted))
    return samples
