"""Constructive universal approximation with explicit robustness radii.

A target phi in D^{L+delta} with ||phi||_inf < M is reproduced exactly
by the network whose weights all vanish and whose last bias is
sigma_M^-1(phi): every output neuron sees Z = theta.  Perturbing theta
by at most delta_eps/2 and every last-layer weight by at most
delta_eps / (2 p**(L+delta) B), where B bounds the state fed into the
last layer, moves each Z by less than delta_eps; since sigma_M is
M-Lipschitz, delta_eps = eps / M keeps the output within eps.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .localfield import TreeIndex, group_size
from .network import Network, forward, zero_network
from .testfn import TestFunction, distance, embed, lp_norm


@dataclass(frozen=True)
class RobustnessBall:
    """Half-widths of the sup-norm boxes around the constructed theta and w = 0."""

    theta_radius: float
    weight_radius: float
    epsilon: float


@dataclass(frozen=True)
class AffineChart:
    """The ball center + u**N O_K, with N >= 0 and center of level <= N."""

    center: TreeIndex
    N: int

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("charts need N >= 0 (balls inside the unit ball)")
        if self.center.level > self.N:
            raise ValueError(f"center of level {self.center.level} is finer than N = {self.N}")

    def prefix(self) -> tuple[int, ...]:
        """First N digits shared by every point of the chart."""
        return self.center.digits + (0,) * (self.N - self.center.level)

    def overlaps(self, other: "AffineChart") -> bool:
        a, b = self.prefix(), other.prefix()
        k = min(len(a), len(b))
        return a[:k] == b[:k]

    def to_json(self) -> dict:
        return {"center": self.center.to_text(), "N": self.N}

    @classmethod
    def from_json(cls, obj: dict) -> "AffineChart":
        return cls(TreeIndex.parse(obj["center"]), int(obj["N"]))


IDENTITY_CHART = AffineChart(TreeIndex(()), 0)


def robustness_ball(
    p: int, output_level: int, M: float, epsilon: float, input_bound: float
) -> RobustnessBall:
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    delta_eps = epsilon / M
    if input_bound == 0:
        weight_radius = math.inf
    else:
        weight_radius = delta_eps / (2 * p**output_level * input_bound)
    return RobustnessBall(delta_eps / 2, weight_radius, epsilon)


def constructive_network(
    target: TestFunction,
    M: float,
    input_level: int,
    *,
    epsilon: float = 0.1,
    input_bound: float = 1.0,
    kind: str = "dense",
) -> tuple[Network, RobustnessBall]:
    """Network of input level L that outputs ``target`` for every input.

    ``input_bound`` bounds ||X||_inf of the inputs the robustness radii
    must cover.  With more than one layer the last layer is fed by
    sigma_M states, so the bound used there is max(input_bound, M).
    """
    depth = target.level - input_level
    if depth < 1:
        raise ValueError(
            f"target level {target.level} must exceed the input level {input_level}"
        )
    if np.iscomplexobj(target.coeffs):
        raise TypeError("target must be real")
    sup = lp_norm(target, math.inf)
    if sup >= M:
        worst = int(np.argmax(np.abs(target.coeffs)))
        raise ValueError(
            f"||target||_inf = {sup} must be < M = {M} "
            f"(coefficient of rank {worst} is {target.coeffs[worst]})"
        )
    base = zero_network(target.cfg, input_level, depth, M, kind)
    last = base.layers[-1]
    theta = base.activation.inverse(target.coeffs)
    layers = base.layers[:-1] + (last.replace(bias=theta),)
    net = base.with_layers(layers)
    bound = input_bound if depth == 1 else max(input_bound, M)
    return net, robustness_ball(target.p, target.level, M, epsilon, bound)


def approximate_lp(
    f: TestFunction,
    epsilon: float,
    rho: float,
    M: float,
    input_level: int,
    *,
    kind: str = "dense",
) -> Network:
    """Network whose output is within epsilon of f in L^rho (and in sup norm)."""
    if f.level <= input_level:
        raise ValueError(
            f"f has level {f.level} <= input level {input_level}; "
            "embed it at a finer level first"
        )
    if not lp_norm(f, rho) < M:
        raise ValueError(f"||f||_{rho} must be < M = {M}")
    net, _ = constructive_network(f, M, input_level, epsilon=epsilon, kind=kind)
    return net


# -- direct products ---------------------------------------------------------


@dataclass(frozen=True)
class NetworkBundle:
    members: tuple[tuple[AffineChart, Network], ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        cfgs = {net.cfg for _, net in self.members}
        if len(cfgs) > 1:
            raise ValueError("all networks of a bundle must share p and the characteristic")
        charts = [c for c, _ in self.members]
        for i in range(len(charts)):
            for j in range(i + 1, len(charts)):
                if charts[i] != IDENTITY_CHART and charts[i].overlaps(charts[j]):
                    raise ValueError(f"charts {i} and {j} overlap")

    @property
    def networks(self) -> list[Network]:
        return [net for _, net in self.members]

    @property
    def charts(self) -> list[AffineChart]:
        return [c for c, _ in self.members]

    def __len__(self) -> int:
        return len(self.members)

    def to_json(self) -> list:
        return [{"chart": c.to_json(), "model": net.to_json()} for c, net in self.members]

    @classmethod
    def from_json(cls, obj: list) -> "NetworkBundle":
        return cls(
            tuple((AffineChart.from_json(m["chart"]), Network.from_json(m["model"])) for m in obj)
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path: str | Path) -> "NetworkBundle":
        return cls.from_json(json.loads(Path(path).read_text()))


def direct_product(
    networks: Sequence[Network], charts: Sequence[AffineChart] | None = None
) -> NetworkBundle:
    if charts is None:
        charts = [IDENTITY_CHART] * len(networks)
    if len(charts) != len(networks):
        raise ValueError("one chart per network is required")
    return NetworkBundle(tuple(zip(charts, networks)))


def forward_bundle(
    bundle: NetworkBundle, inputs: Sequence[TestFunction]
) -> list[TestFunction]:
    if len(inputs) != len(bundle):
        raise ValueError(f"expected {len(bundle)} inputs, got {len(inputs)}")
    return [forward(net, x)[0] for net, x in zip(bundle.networks, inputs)]


def bundle_error(
    outputs: Sequence[TestFunction], targets: Sequence[TestFunction], rho: float
) -> float:
    """max_i ||Y_i - f_i||_rho."""
    if len(outputs) != len(targets):
        raise ValueError("outputs and targets differ in length")
    return max(distance(y, f, rho) for y, f in zip(outputs, targets))


# -- affine charts -----------------------------------------------------------


def chart_pullback(f: TestFunction, chart: AffineChart) -> TestFunction:
    """x -> f(center + u**N x) as a test function on the unit ball.

    f lives on the unit ball at a level >= N; only its values on the
    chart are read.  Written in digits, the point center + u**N x has
    the chart prefix followed by the digits of x (no carries occur since
    the prefix has exactly N digits).
    """
    if f.level < chart.N:
        raise ValueError(f"f has level {f.level}, coarser than the chart scale N = {chart.N}")
    p = f.p
    level = f.level - chart.N
    base = TreeIndex(chart.prefix()).rank(p)
    ranks = base + p**chart.N * np.arange(group_size(p, level), dtype=np.int64)
    return TestFunction(f.cfg, level, f.coeffs[ranks])


def chart_pushforward(y: TestFunction, chart: AffineChart) -> TestFunction:
    """The function center + u**N x -> y(x) on the chart, zero off the chart."""
    p = y.p
    level = y.level + chart.N
    out = np.zeros(group_size(p, level), dtype=y.coeffs.dtype)
    base = TreeIndex(chart.prefix()).rank(p)
    out[base + p**chart.N * np.arange(group_size(p, y.level), dtype=np.int64)] = y.coeffs
    return TestFunction(y.cfg, level, out)


def restrict_to_chart(f: TestFunction, chart: AffineChart) -> TestFunction:
    """f times the indicator of the chart."""
    return chart_pushforward(chart_pullback(f, chart), chart)


def chart_scale(p: int, N: int, rho: float) -> float:
    """Factor p**(N/rho) by which pulling back scales L^rho norms (1 for rho = inf)."""
    return 1.0 if math.isinf(rho) else float(p) ** (N / rho)


def approximate_on_compact(
    pieces: Sequence[tuple[AffineChart, TestFunction]],
    epsilon: float,
    rho: float,
    M: float,
    input_level: int,
    *,
    kind: str = "dense",
) -> NetworkBundle:
    """One constructive network per chart, each run at M_i = p**(N_i/rho) M and
    accuracy epsilon / p**(N_i/rho) in its own coordinates.
    """
    nets = []
    for chart, f in pieces:
        g = chart_pullback(f, chart)
        if g.level <= input_level:
            g = embed(g, input_level + 1)
        gamma = chart_scale(f.p, chart.N, rho)
        net, _ = constructive_network(g, gamma * M, input_level, epsilon=epsilon / gamma, kind=kind)
        nets.append(net)
    return direct_product(nets, [c for c, _ in pieces])


def glue(bundle: NetworkBundle, outputs: Sequence[TestFunction]) -> TestFunction:
    """Push each chart's output forward and add them up on a common level."""
    pushed = [chart_pushforward(y, c) for c, y in zip(bundle.charts, outputs)]
    level = max(t.level for t in pushed)
    total = sum(embed(t, level).coeffs for t in pushed)
    return TestFunction(pushed[0].cfg, level, total)
