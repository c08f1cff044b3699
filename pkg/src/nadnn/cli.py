"""Command-line driver: ``nadnn <subcommand> [options]``.

Every subcommand accepts ``--config FILE`` with a JSON object such as::

    {"field": {"p": 2, "characteristic": "pos"},
     "network": {"L": 3, "delta": 2, "M": 2.0, "kind": "dense"},
     "training": {"epochs": 200, "batch": 8, "eta": 0.05, "seed": 0},
     "target": "sin2pi",
     "norms": [1, 2, "inf"]}

Flags given on the command line override the file.  Exit codes: 0
success, 1 nothing to do (or training did not lower the cost), 2 invalid
configuration, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path
from typing import Callable

import numpy as np

from .approx import AffineChart, IDENTITY_CHART, constructive_network, direct_product
from .encoding import rho_encode, sample_function, to_field
from .localfield import Characteristic, FieldConfig, TreeIndex
from .network import Network, NumericError, predict, random_network
from .prng import Lcg64
from .testfn import TestFunction, coarsen, distance, embed
from .training import Schedule, cost, format_log, train, translation_dataset
from .walsh import truncation_errors, walsh_expand

EXIT_OK = 0
EXIT_NOOP = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

DEFAULTS = {
    "p": 2,
    "char": "pos",
    "L": 2,
    "delta": 2,
    "M": 2.0,
    "kind": "dense",
    "epochs": 200,
    "batch": 8,
    "eta": 0.05,
    "seed": 0,
    "metric": "euclidean",
    "init_scale": 1.0,
    "target": "sin2pi",
    "norms": ["1", "2", "inf"],
    "epsilon": 0.1,
    "ref_level": None,
    "level": 4,
    "mode": "average",
    "subsamples": 8,
    "basis": "raw",
    "tol": 1e-12,
}

# config-file sections and the flat keys they hold
_SECTIONS = {
    "field": {"p": "p", "characteristic": "char", "char": "char"},
    "network": {"L": "L", "delta": "delta", "M": "M", "kind": "kind"},
    "training": {
        "epochs": "epochs",
        "batch": "batch",
        "eta": "eta",
        "seed": "seed",
        "init_scale": "init_scale",
        "metric": "metric",
    },
}


class ConfigError(ValueError):
    pass


# -- targets -----------------------------------------------------------------


def _poly(coeffs: list[float]) -> Callable[[float], float]:
    def f(x: float) -> float:
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * x + c
        return acc

    return f


BUILTINS: dict[str, Callable[[float], float]] = {
    "sin2pi": lambda x: math.sin(2 * math.pi * x),
    "absaw": lambda x: abs(2 * x - 1),
    "abs-saw": lambda x: abs(2 * x - 1),
    "step": lambda x: 1.0 if x >= 0.5 else 0.0,
}


def builtin_function(name: str) -> Callable[[float], float]:
    """Look up sin2pi, absaw, step or poly:c0,c1,... (coefficients of 1, x, x**2, ...)."""
    if name.startswith("poly:"):
        try:
            coeffs = [float(c) for c in name[5:].split(",") if c.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad polynomial {name!r}: {exc}") from None
        if not coeffs:
            raise ConfigError("poly: needs at least one coefficient")
        return _poly(coeffs)
    if name not in BUILTINS:
        raise ConfigError(
            f"unknown target {name!r}; use sin2pi, absaw, step, poly:<c0,c1,...> or a JSON file"
        )
    return BUILTINS[name]


def _is_file_target(name: str) -> bool:
    return name.endswith(".json") or Path(name).is_file()


def reference_function(settings: dict, cfg: FieldConfig, level: int) -> TestFunction:
    """The target as a test function of the given level.

    Builtins are cell-averaged at that level; a TestFunction file is
    embedded or averaged down to it.
    """
    name = str(settings["target"])
    if _is_file_target(name):
        path = Path(name)
        if not path.is_file():
            raise ConfigError(f"target file {name} does not exist")
        phi = TestFunction.load(path)
        if phi.cfg != cfg:
            raise ConfigError(f"target file is over {phi.cfg}, expected {cfg}")
        return embed(phi, level) if phi.level <= level else coarsen(phi, level)
    f = builtin_function(name)
    return sample_function(f, cfg, level, mode=settings["mode"], subsamples=settings["subsamples"])


# -- settings ----------------------------------------------------------------


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {path} does not exist")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    flat = {}
    for key, value in raw.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"config section {key!r} must be an object")
            for sub, v in value.items():
                if sub not in _SECTIONS[key]:
                    raise ConfigError(f"unknown key {key}.{sub} in config file")
                flat[_SECTIONS[key][sub]] = v
        elif key in DEFAULTS:
            flat[key] = value
        else:
            raise ConfigError(f"unknown key {key!r} in config file")
    return flat


def _settings(args: argparse.Namespace) -> dict:
    out = dict(DEFAULTS)
    out.update(_load_config(getattr(args, "config", None)))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    if isinstance(out["norms"], (str, int, float)):
        out["norms"] = str(out["norms"]).split(",")
    out["norms"] = [str(n).strip().lower() for n in out["norms"]]
    for n in out["norms"]:
        if n not in ("1", "2", "inf"):
            raise ConfigError(f"norm {n!r} is not one of 1, 2, inf")
    for key in ("p", "L", "delta", "epochs", "batch", "seed", "level", "subsamples"):
        out[key] = int(out[key])
    for key in ("M", "eta", "init_scale", "epsilon", "tol"):
        out[key] = float(out[key])
    if out["L"] < 0 or out["delta"] < 1:
        raise ConfigError("need L >= 0 and delta >= 1")
    if not out["M"] > 0:
        raise ConfigError("M must be > 0")
    if out["metric"] not in ("euclidean", "haar"):
        raise ConfigError(f"metric must be euclidean or haar, got {out['metric']!r}")
    if out["kind"] not in ("dense", "conv"):
        raise ConfigError(f"layer kind must be dense or conv, got {out['kind']!r}")
    return out


def _field(settings: dict) -> FieldConfig:
    return FieldConfig(settings["p"], Characteristic.parse(settings["char"]))


def _norm_value(name: str) -> float:
    return math.inf if name == "inf" else float(name)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


# -- subcommands ---------------------------------------------------------------


def cmd_encode(args: argparse.Namespace) -> int:
    x = float(args.x)
    u = rho_encode(x, args.p, args.depth)
    idx = to_field(u)
    print(str(u))
    print(f"tree index: level {idx.level}, rank {idx.rank(args.p)}")
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    s = _settings(args)
    cfg = _field(s)
    phi = reference_function(s, cfg, s["level"])
    _write_text(args.out, json.dumps(phi.to_json()) + "\n")
    return EXIT_OK


def cmd_approx(args: argparse.Namespace) -> int:
    s = _settings(args)
    cfg = _field(s)
    top = s["L"] + s["delta"]
    ref_level = s["ref_level"] if s["ref_level"] is not None else max(8, top)
    ref_level = int(ref_level)
    if ref_level < top:
        raise ConfigError(f"reference level {ref_level} is below L + delta = {top}")
    reference = reference_function(s, cfg, ref_level)
    target = coarsen(reference, top)
    net, ball = constructive_network(
        target, s["M"], s["L"], epsilon=s["epsilon"], kind=s["kind"]
    )
    y = predict(net, TestFunction.constant(cfg, s["L"], 0.0))
    rows = [["quantity", "value"]]
    for n in s["norms"]:
        rows.append([f"error_L{n}", _fmt(distance(y, reference, _norm_value(n)))])
    rows.append(["theta_radius", _fmt(ball.theta_radius)])
    rows.append(["weight_radius", _fmt(ball.weight_radius)])
    rows.append(["epsilon", _fmt(ball.epsilon)])
    if args.out:
        net.save(args.out)
    _write_text(args.report, _csv(rows))
    return EXIT_OK


def run_training(s: dict) -> tuple[Network, float, list[float]]:
    """Build the translation dataset, initialize from the seed and train."""
    cfg = _field(s)
    top = s["L"] + s["delta"]
    target = reference_function(s, cfg, top)
    samples = translation_dataset(target, s["L"])
    rng = Lcg64(s["seed"])
    net = random_network(
        cfg, s["L"], s["delta"], rng, M=s["M"], kind=s["kind"], scale=s["init_scale"]
    )
    haar = s["metric"] == "haar"
    initial = cost(net, samples, haar)
    schedule = Schedule(s["epochs"], s["batch"], s["eta"], s["seed"])
    net, log = train(net, samples, schedule, haar)
    return net, initial, log


def cmd_train(args: argparse.Namespace) -> int:
    s = _settings(args)
    start = time.perf_counter()
    net, initial, log = run_training(s)
    if args.out:
        net.save(args.out)
    _write_text(args.log, format_log(log))
    if not log:
        print("no epochs run; nothing to do", file=sys.stderr)
        return EXIT_NOOP
    final = log[-1]
    print(
        f"initial cost {_fmt(initial)}, final cost {_fmt(final)}, "
        f"ratio {final / initial:.6g} ({time.perf_counter() - start:.2f} s)",
        file=sys.stderr,
    )
    return EXIT_OK if final < initial else EXIT_NOOP


def cmd_walsh(args: argparse.Namespace) -> int:
    s = _settings(args)
    cfg = _field(s)
    phi = reference_function(s, cfg, s["level"])
    coeffs = walsh_expand(phi, s["basis"])
    rows = [["level", "a_digits", "re", "im", "modulus"]]
    for c in coeffs:
        if abs(c.value) <= s["tol"]:
            continue
        rows.append(
            [
                c.character.level,
                c.character.a.to_text(),
                _fmt(c.value.real),
                _fmt(c.value.imag),
                _fmt(abs(c.value)),
            ]
        )
    _write_text(args.out, _csv(rows))
    errors = [["level", "l2_error"]]
    errors += [[l, _fmt(e)] for l, e in enumerate(truncation_errors(phi, coeffs))]
    if args.errors:
        Path(args.errors).write_text(_csv(errors))
    return EXIT_OK


def _parse_chart(text: str, p: int) -> AffineChart:
    """'center:N', e.g. '01:2'; an empty center is written ':N'."""
    if ":" not in text:
        raise ConfigError(f"chart {text!r} must look like CENTER:N")
    center, n = text.rsplit(":", 1)
    return AffineChart(TreeIndex.parse(center, p) if center else TreeIndex(()), int(n))


def cmd_product(args: argparse.Namespace) -> int:
    nets = []
    for path in args.models:
        if not Path(path).is_file():
            raise ConfigError(f"model file {path} does not exist")
        nets.append(Network.load(path))
    if args.charts:
        charts = [_parse_chart(c, nets[0].cfg.p) for c in args.charts]
    else:
        charts = [IDENTITY_CHART] * len(nets)
    bundle = direct_product(nets, charts)
    _write_text(args.out, json.dumps(bundle.to_json()) + "\n")
    return EXIT_OK


# -- argument parsing --------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser, *groups: str) -> None:
    sub.add_argument("--config", help="JSON config file; flags override it")
    sub.add_argument("--p", type=int)
    sub.add_argument("--char", choices=["pos", "zero"], help="characteristic")
    sub.add_argument("--target", help="sin2pi, absaw, step, poly:c0,c1,... or a TestFunction JSON file")
    sub.add_argument("--mode", choices=["left", "average"], help="how builtins are sampled")
    sub.add_argument("--subsamples", type=int)
    if "network" in groups:
        sub.add_argument("--L", type=int, help="input level")
        sub.add_argument("--delta", type=int, help="number of layers")
        sub.add_argument("--M", type=float, help="activation scale")
        sub.add_argument("--kind", choices=["dense", "conv"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nadnn", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    enc = subs.add_parser("encode", help="base-p digits of x in [0, 1]")
    enc.add_argument("x")
    enc.add_argument("--p", type=int, default=2)
    enc.add_argument("--depth", type=int, default=8)
    enc.set_defaults(func=cmd_encode)

    smp = subs.add_parser("sample", help="write a target as TestFunction JSON")
    _add_common(smp)
    smp.add_argument("--level", type=int)
    smp.add_argument("--out")
    smp.set_defaults(func=cmd_sample)

    apx = subs.add_parser("approx", help="constructive network and its error report")
    _add_common(apx, "network")
    apx.add_argument("--epsilon", type=float)
    apx.add_argument("--norms", help="comma-separated subset of 1,2,inf")
    apx.add_argument("--ref-level", dest="ref_level", type=int)
    apx.add_argument("--out", help="model JSON path")
    apx.add_argument("--report", help="error report CSV path (default stdout)")
    apx.set_defaults(func=cmd_approx)

    trn = subs.add_parser("train", help="SGD on the translates of a target")
    _add_common(trn, "network")
    trn.add_argument("--epochs", type=int)
    trn.add_argument("--batch", type=int)
    trn.add_argument("--eta", type=float)
    trn.add_argument("--seed", type=int)
    trn.add_argument(
        "--metric",
        choices=["euclidean", "haar"],
        help="cost metric; haar weights each output term by p**-(L+delta)",
    )
    trn.add_argument("--init-scale", dest="init_scale", type=float)
    trn.add_argument("--out", help="model JSON path")
    trn.add_argument("--log", help="cost CSV path (default stdout)")
    trn.set_defaults(func=cmd_train)

    wal = subs.add_parser("walsh", help="character expansion of a target")
    _add_common(wal)
    wal.add_argument("--level", type=int, help="maximal character level")
    wal.add_argument("--basis", choices=["raw", "theta", "gamma"])
    wal.add_argument("--tol", type=float, help="omit coefficients with modulus <= tol")
    wal.add_argument("--out", help="coefficient CSV path (default stdout)")
    wal.add_argument("--errors", help="truncation-error CSV path")
    wal.set_defaults(func=cmd_walsh)

    prd = subs.add_parser("product", help="bundle model files into a direct product")
    prd.add_argument("models", nargs="+")
    prd.add_argument("--charts", nargs="+", help="one CENTER:N per model")
    prd.add_argument("--out")
    prd.set_defaults(func=cmd_product)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        with np.errstate(over="raise", invalid="raise"):
            return args.func(args)
    except (NumericError, FloatingPointError, OverflowError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, KeyError, OSError, MemoryError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
