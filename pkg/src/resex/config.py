"""Scenario configuration: an INI-style text format, with JSON as an alternative.

Grammar (``#`` or ``;`` start comments)::

    [scenario]
    experiment = dqd-coeffs      ; one of EXPERIMENTS
    output = out/coeffs          ; path prefix for CSV/SVG files

    [params]                     ; model parameters, rad/s and s
    bzL = 20 GHz                 ; a number may carry one unit suffix
    by2R = 2e6
    jlist = 1 MHz, 1 MHz         ; comma-separated lists

    [sweep]
    field = t
    start = 0
    stop = 8 us
    points = 801
    scale = linear               ; or log

    [noise]                      ; optional
    sigma_rel = 0.01
    samples = 10000
    seed = 1

    [options]                    ; experiment-specific extras

Unit suffixes: kHz, MHz, GHz (angular, 1 MHz = 1e6 rad/s), ns, us, s.
"""

import configparser
import json
import math
import os
import re
from dataclasses import dataclass, field

from .models import DqdParams
from .noise import NoiseSpec
from .units import GHz, MHz, kHz, ns, us

UNITS = {"kHz": kHz, "MHz": MHz, "GHz": GHz, "ns": ns, "us": us, "s": 1.0}
_NUM = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)\s*$")

DQD_FIELDS = tuple(DqdParams.__dataclass_fields__)
CHAIN_FIELDS = ("n", "bz", "by1", "phi", "omega", "jlist", "by0", "b", "j0", "j", "dbz", "k")

# name -> (model kind, allowed sweep fields, allowed option keys)
EXPERIMENTS = {
    "dqd-coeffs": ("dqd", ("t",), ()),
    "dqd-fid": ("dqd", ("j",), ("b_values",)),
    "chain-y": ("chain", ("t",), ("j0_values", "b_values", "j0_scan")),
    "chain-simul": ("chain", ("j0",), ("n_values", "allow_large")),
    "swap": ("chain", ("t",), ("j0_values", "j_values")),
    "report": ("dqd", (), ("gate", "time")),
}


class ConfigError(ValueError):
    """Invalid scenario; ``problems`` lists every issue found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid scenario config:\n  " + "\n  ".join(self.problems))


@dataclass(frozen=True)
class Sweep:
    field: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def values(self):
        import numpy as np

        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass
class ScenarioConfig:
    experiment: str
    params: dict = field(default_factory=dict)
    sweep: Sweep | None = None
    noise: NoiseSpec | None = None
    output: str = "out/resex"
    options: dict = field(default_factory=dict)

    @property
    def kind(self):
        return EXPERIMENTS[self.experiment][0]

    def to_dict(self):
        out = {"scenario": {"experiment": self.experiment, "output": self.output},
               "params": dict(self.params)}
        if self.sweep:
            out["sweep"] = {"field": self.sweep.field, "start": self.sweep.start,
                            "stop": self.sweep.stop, "points": self.sweep.points,
                            "scale": self.sweep.scale}
        if self.noise:
            out["noise"] = {"sigma_rel": self.noise.sigma_rel, "samples": self.noise.samples,
                            "seed": self.noise.seed, "correlated": self.noise.correlated}
        if self.options:
            out["options"] = dict(self.options)
        return out


def parse_value(text):
    """Number (with optional unit), list of numbers, bool or bare string."""
    if isinstance(text, list):
        return [parse_value(x) for x in text]
    if isinstance(text, (int, float, bool)):
        return text
    text = text.strip()
    if "," in text:
        return [parse_value(part) for part in text.split(",") if part.strip()]
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    m = _NUM.match(text)
    if m:
        num, unit = m.groups()
        if unit and unit not in UNITS:
            raise ValueError(f"unknown unit {unit!r} in {text!r}")
        if not unit and re.fullmatch(r"[-+]?\d+", num):
            return int(num)
        return float(num) * UNITS.get(unit, 1.0)
    return text


def format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return ", ".join(format_value(x) for x in v) + ("," if len(v) == 1 else "")
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _from_sections(sections):
    problems = []
    scen = sections.get("scenario", {})
    experiment = scen.get("experiment")
    if experiment not in EXPERIMENTS:
        problems.append(f"scenario.experiment must be one of {sorted(EXPERIMENTS)}, got {experiment!r}")
        raise ConfigError(problems)
    kind, sweep_fields, option_keys = EXPERIMENTS[experiment]

    def val(section, key, raw):
        try:
            return parse_value(raw)
        except ValueError as exc:
            problems.append(f"{section}.{key}: {exc}")
            return None

    params = {k: val("params", k, v) for k, v in sections.get("params", {}).items()}
    allowed = DQD_FIELDS if kind == "dqd" else CHAIN_FIELDS
    for k in params:
        if k not in allowed:
            problems.append(f"params.{k}: unknown field for a {kind} scenario")

    sweep = None
    if "sweep" in sections:
        s = {k: val("sweep", k, v) for k, v in sections["sweep"].items()}
        fld = s.get("field")
        if fld not in sweep_fields:
            problems.append(f"sweep.field must be one of {list(sweep_fields)} for {experiment}, got {fld!r}")
        points = s.get("points", 2)
        if not isinstance(points, int) or points < 2:
            problems.append(f"sweep.points must be an integer >= 2, got {points!r}")
        scale = s.get("scale", "linear")
        if scale not in ("linear", "log"):
            problems.append(f"sweep.scale must be linear or log, got {scale!r}")
        start, stop = s.get("start"), s.get("stop")
        for key, v in (("start", start), ("stop", stop)):
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                problems.append(f"sweep.{key} must be a finite number, got {v!r}")
        if scale == "log" and isinstance(start, (int, float)) and isinstance(stop, (int, float)):
            if start <= 0 or stop <= 0:
                problems.append("sweep: log scale needs positive start and stop")
        extra = set(s) - {"field", "start", "stop", "points", "scale"}
        problems.extend(f"sweep.{k}: unknown key" for k in sorted(extra))
        if not any(p.startswith("sweep") for p in problems):
            sweep = Sweep(fld, float(start), float(stop), points, scale)
    elif sweep_fields:
        problems.append(f"[sweep] section required for {experiment}")

    noise = None
    if "noise" in sections:
        n = {k: val("noise", k, v) for k, v in sections["noise"].items()}
        extra = set(n) - {"sigma_rel", "samples", "seed", "correlated"}
        problems.extend(f"noise.{k}: unknown key" for k in sorted(extra))
        try:
            noise = NoiseSpec(float(n.get("sigma_rel", 0.01)), int(n.get("samples", 10_000)),
                              int(n.get("seed", 0)), bool(n.get("correlated", False)))
        except (ValueError, TypeError) as exc:
            problems.append(f"noise: {exc}")

    options = {k: val("options", k, v) for k, v in sections.get("options", {}).items()}
    for k in options:
        if k not in option_keys:
            problems.append(f"options.{k}: not used by {experiment} (allowed: {list(option_keys)})")
    for section in sections:
        if section not in ("scenario", "params", "sweep", "noise", "options"):
            problems.append(f"unknown section [{section}]")
    extra = set(scen) - {"experiment", "output"}
    problems.extend(f"scenario.{k}: unknown key" for k in sorted(extra))
    if problems:
        raise ConfigError(problems)
    return ScenarioConfig(experiment, params, sweep, noise, str(scen.get("output", "out/resex")), options)


def loads(text):
    """Parse JSON (if the text starts with '{') or the INI grammar."""
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"JSON: {exc}"]) from None
        if not isinstance(data, dict):
            raise ConfigError(["JSON config must be an object of sections"])
        return _from_sections(data)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from None
    return _from_sections({s: dict(cp[s]) for s in cp.sections()})


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc}"]) from None


def dumps(cfg, fmt="ini"):
    data = cfg.to_dict()
    if fmt == "json":
        return json.dumps(data, indent=2, sort_keys=False) + "\n"
    lines = []
    for section, items in data.items():
        lines.append(f"[{section}]")
        lines.extend(f"{k} = {format_value(v)}" for k, v in items.items())
        lines.append("")
    return "\n".join(lines)


def check_output(prefix):
    """Create the output directory if needed and make sure it is writable."""
    directory = os.path.dirname(os.path.abspath(prefix))
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as exc:
        raise ConfigError([f"output directory {directory}: {exc}"]) from None
    if not os.access(directory, os.W_OK):
        raise ConfigError([f"output directory {directory} is not writable"])
