"""``cohsmooth`` command line: measures, smoothing, one-shot searches, campaigns.

Exit status: 0 on success, 1 on invalid input, 2 when ``propcheck`` finds a
property violation (for P3 the expected counterexample failing to appear
counts as the violation).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

from .io import dumps, load_json, load_state, reports_to_csv
from .measures import MeasureKind, c_trace_distance, coherence
from .states import ValidationError

SEED_ENV = "COHSMOOTH_SEED"
COMMANDS = ("measure", "smooth", "oneshot", "propcheck")

logger = logging.getLogger("cohsmooth")


@dataclass
class RunConfig:
    command: str
    state: str | None = None
    measure: str = "l1"
    distance: str = "trace"
    epsilon: float | None = None
    mode: str | None = None
    seed: int = 0
    output: str | None = None
    format: str = "json"
    csv: str | None = None
    oracle: bool | None = None
    resolution: int | None = None
    prop: list = field(default_factory=list)
    eta: float | None = None
    samples: int | None = None
    m_min: int | None = None
    m_max: int | None = None
    solver: dict = field(default_factory=dict)
    campaign: dict = field(default_factory=dict)
    family: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise ValidationError(f"format must be json or csv, got {self.format!r}")
        if self.epsilon is not None:
            eps = float(self.epsilon)
            if not math.isfinite(eps) or eps < 0.0:
                raise ValidationError(f"epsilon must be a finite number >= 0, got {self.epsilon!r}")
            self.epsilon = eps
        if self.eta is not None and not (0.0 < float(self.eta) <= 1.0):
            raise ValidationError(f"eta must lie in (0, 1], got {self.eta!r}")
        if self.samples is not None and int(self.samples) < 0:
            raise ValidationError("samples must be >= 0")
        if self.resolution is not None and int(self.resolution) < 3:
            raise ValidationError("resolution must be >= 3")
        try:
            self.seed = int(self.seed)
        except (TypeError, ValueError):
            raise ValidationError(f"seed must be an integer, got {self.seed!r}") from None
        for key in ("solver", "campaign", "family"):
            if not isinstance(getattr(self, key), dict):
                raise ValidationError(f"{key} must be a JSON object")
        if self.command in ("measure", "smooth", "oneshot") and not self.state:
            raise ValidationError(f"{self.command} needs --state")
        if self.command in ("smooth", "oneshot") and self.epsilon is None:
            raise ValidationError(f"{self.command} needs --epsilon")
        return self


_CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {"command"}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file supplying any flag; flags override it")
    common.add_argument("--seed", type=int, help=f"random seed (fallback: ${SEED_ENV}, then 0)")
    common.add_argument("--output", "-o", help="write the result here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--log-level", default="WARNING")

    p = argparse.ArgumentParser(prog="cohsmooth", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", parents=[common], help="coherence of a state")
    m.add_argument("--state")
    m.add_argument("--measure")

    s = sub.add_parser("smooth", parents=[common], help="smoothed minimum or maximum")
    s.add_argument("--state")
    s.add_argument("--mode", choices=("min", "max"))
    s.add_argument("--measure")
    s.add_argument("--distance", choices=("trace", "relative-entropy", "relent"))
    s.add_argument("--epsilon", type=float)
    s.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=None,
                   help="cross-check qubits against the Bloch grid")
    s.add_argument("--resolution", type=int, help="Bloch grid points per axis")

    o = sub.add_parser("oneshot", parents=[common], help="one-shot distillation or cost")
    o.add_argument("--state")
    o.add_argument("--mode", choices=("distill", "cost"))
    o.add_argument("--measure")
    o.add_argument("--distance", choices=("trace", "relative-entropy", "relent"))
    o.add_argument("--epsilon", type=float)
    o.add_argument("--m-min", type=int, dest="m_min")
    o.add_argument("--m-max", type=int, dest="m_max")

    c = sub.add_parser("propcheck", parents=[common], help="run property campaigns")
    c.add_argument("--prop", action="append", help="property id (repeatable; default: all)")
    c.add_argument("--eta", type=float, help="block weight of the P3 counterexample")
    c.add_argument("--epsilon", type=float, help="ball radius of the P3 counterexample")
    c.add_argument("--samples", type=int, help="override every sample count")
    c.add_argument("--csv", help="also write the CSV summary here")
    return p


def build_config(argv=None) -> tuple[RunConfig, str]:
    args = _parser().parse_args(argv)
    data: dict = {}
    if args.config:
        data = load_json(args.config)
        if not isinstance(data, dict):
            raise ValidationError("config file must hold a JSON object")
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    merged = dict(data)
    for key, val in vars(args).items():
        if key in _CONFIG_KEYS and val is not None:
            merged[key] = val
    if "seed" not in merged:
        env = os.environ.get(SEED_ENV)
        merged["seed"] = env if env not in (None, "") else 0
    if isinstance(merged.get("prop"), (str, int)):
        merged["prop"] = [merged["prop"]]
    cfg = RunConfig(command=args.command, **merged)
    return cfg.validate(), args.log_level


def _solver(cfg: RunConfig):
    from .smoothing import SmoothConfig

    base = SmoothConfig.from_dict(cfg.solver)
    over = {"seed": cfg.seed}
    if cfg.oracle is not None:
        over["oracle"] = bool(cfg.oracle)
    if cfg.resolution is not None:
        over["oracle_resolution"] = int(cfg.resolution)
    data = base.to_dict()
    data.update(over)
    return SmoothConfig.from_dict(data)


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_measure(cfg: RunConfig) -> int:
    rho = load_state(cfg.state)
    kind = MeasureKind.parse(cfg.measure)
    out = {"measure": kind.tag}
    if kind is MeasureKind.TRACE_DISTANCE:
        res = c_trace_distance(rho, _solver(cfg).tdc)
        out.update(value=res.value, gap=res.gap, witness=res.witness.probs.tolist())
    elif kind is MeasureKind.GEOMETRIC_PURE:
        from .measures import c_geometric_pure

        out["value"] = c_geometric_pure(rho)
    else:
        out["value"] = coherence(rho, kind)
    _emit(dumps(out), cfg)
    return 0


def _cmd_smooth(cfg: RunConfig) -> int:
    from .smoothing import BallSpec, smooth_max, smooth_min

    rho = load_state(cfg.state)
    ball = BallSpec(cfg.distance, cfg.epsilon)
    solver = _solver(cfg)
    mode = cfg.mode or "min"
    fn = smooth_min if mode == "min" else smooth_max
    res = fn(rho, ball, cfg.measure, solver)
    _emit(dumps(res.to_dict()), cfg)
    return 0


def _cmd_oneshot(cfg: RunConfig) -> int:
    from .oneshot import OperationFamily, cost_one_shot, distill_one_shot

    rho = load_state(cfg.state)
    try:
        family = OperationFamily(rho.dim, **cfg.family)
    except TypeError as exc:
        raise ValidationError(f"bad family settings: {exc}") from None
    m_range = None
    if cfg.m_min is not None or cfg.m_max is not None:
        m_range = range(cfg.m_min or 1, (cfg.m_max or rho.dim) + 1)
    fn = distill_one_shot if (cfg.mode or "distill") == "distill" else cost_one_shot
    res = fn(rho, cfg.epsilon, family, cfg.measure, m_range, distance=cfg.distance)
    _emit(dumps(res.to_dict()), cfg)
    return 0


def _cmd_propcheck(cfg: RunConfig) -> int:
    from .harness import DEFAULT_SAMPLES, Campaign, reports_to_json, run_campaign

    data = dict(cfg.campaign)
    data["seed"] = cfg.seed
    if cfg.solver:
        data["smooth"] = cfg.solver
    if cfg.family:
        data["family"] = cfg.family
    if cfg.eta is not None:
        data["eta"] = float(cfg.eta)
    if cfg.epsilon is not None:
        data["prop3_epsilon"] = float(cfg.epsilon)
    if cfg.samples is not None:
        data["samples"] = {k: int(cfg.samples) for k in DEFAULT_SAMPLES}
    campaign = Campaign.from_dict(data)
    props = None
    if cfg.prop and not any(str(p).lower() == "all" for p in cfg.prop):
        props = cfg.prop
    reports = run_campaign(campaign, props)
    text = reports_to_json(reports) if cfg.format == "json" else reports_to_csv(reports)
    _emit(text, cfg)
    if cfg.csv:
        Path(cfg.csv).write_text(reports_to_csv(reports))
    failed = [r.prop_id for r in reports if not r.passed]
    if failed:
        logger.warning("property checks failed: %s", ", ".join(failed))
        return 2
    return 0


_COMMANDS = {"measure": _cmd_measure, "smooth": _cmd_smooth, "oneshot": _cmd_oneshot,
             "propcheck": _cmd_propcheck}


def run(cfg: RunConfig) -> int:
    cfg.validate()
    return _COMMANDS[cfg.command](cfg)


def main(argv=None) -> int:
    try:
        cfg, level = build_config(argv)
        logging.basicConfig(level=getattr(logging, str(level).upper(), logging.WARNING),
                            format="%(levelname)s %(name)s: %(message)s")
        return run(cfg)
    except (ValidationError, FileNotFoundError, IsADirectoryError, json.JSONDecodeError) as exc:
        print(f"cohsmooth: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
