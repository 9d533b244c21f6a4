"""Scenario files: schema, validation and the built-in catalogue.

Scenario files are YAML (``.yaml``/``.yml``) or JSON (``.json``). See the
README for the full schema.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from .errors import FiberwaveError, ValidationError
from .guide_geometry import ArchimedeanSpiral, CircularArc, Composite, Helix, Straight
from .spin_algebra import parse_magnetic, parse_spin

log = logging.getLogger(__name__)

DEFAULT_TOLERANCES = {
    "track": 1e-10,
    "transport": 1e-8,  # relative to k * turning rate
    "norm": 1e-10,
    "fidelity": 1e-8,  # on 1 - F
    "helicity": 1e-8,
    "populations": 1e-8,
    "dynamical_phase": 1e-6,  # relative to |omega|
    "schrodinger": 1e-5,  # relative to turning rate
    "lvn": 1e-5,  # relative to turning rate
    "eigen": 1e-10,
    "momentum": 1e-9,  # relative to k
    "phase": 1e-6,  # radians
    "oracle": 1e-7,
    "arc_length": 1e-3,  # relative
}

_TOP_KEYS = {
    "name", "description", "path", "k_mag", "j", "m", "t_end", "steps", "frame",
    "run_oracle_integrator", "emit_states", "tolerances", "expect",
}
_EXPECT_KEYS = {"phase", "min_windings", "arc_length"}


class ScenarioError(FiberwaveError):
    """One or more field-level problems in a scenario description."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class Scenario:
    name: str
    path: dict
    j: Fraction
    m: object  # Fraction, or dict {Fraction: complex} for a superposition
    k_mag: float = 1.0
    t_end: float = None
    steps: int = 1000
    frame: str = "working"
    run_oracle_integrator: bool = False
    emit_states: bool = False
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    expect: dict = field(default_factory=dict)
    description: str = ""

    @property
    def pure_m(self):
        return not isinstance(self.m, dict)

    def build_path(self):
        return build_path(self.path)

    def to_dict(self):
        """Plain, JSON-serializable form (used to echo the scenario in reports)."""
        if self.pure_m:
            m = _fraction_out(self.m)
        else:
            m = {str(k): [v.real, v.imag] for k, v in self.m.items()}
        return {
            "name": self.name,
            "description": self.description,
            "path": self.path,
            "k_mag": self.k_mag,
            "j": _fraction_out(self.j),
            "m": m,
            "t_end": self.t_end,
            "steps": self.steps,
            "frame": self.frame,
            "run_oracle_integrator": self.run_oracle_integrator,
            "emit_states": self.emit_states,
            "tolerances": self.tolerances,
            "expect": self.expect,
        }


def _fraction_out(value):
    return int(value) if value.denominator == 1 else str(value)


def _number(value, name, positive=False, allow_zero=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"must be a number, got {value!r}", field=name)
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"must be finite, got {value!r}", field=name)
    if positive and (value < 0.0 or (value == 0.0 and not allow_zero)):
        raise ValidationError(f"must be {'non-negative' if allow_zero else 'positive'}, got {value!r}", field=name)
    return value


_PATH_PARAMS = {
    "straight": {"direction", "speed", "length"},
    "circular_arc": {"radius", "speed", "turns"},
    "helix": {"radius", "pitch", "cone_angle", "speed", "turns"},
    "archimedean_spiral": {"inner_radius", "spacing", "arc_length", "turns", "speed"},
    "composite": {"segments"},
}


def build_path(spec, prefix="path"):
    """Construct a GuidePath from its dictionary description."""
    if not isinstance(spec, dict):
        raise ValidationError("must be a mapping with a 'kind' key", field=prefix)
    kind = spec.get("kind")
    if kind not in _PATH_PARAMS:
        raise ValidationError(f"unknown kind {kind!r}; expected one of {sorted(_PATH_PARAMS)}", field=f"{prefix}.kind")
    unknown = set(spec) - _PATH_PARAMS[kind] - {"kind"}
    if unknown:
        raise ValidationError(f"unexpected parameters {sorted(unknown)} for {kind}", field=prefix)

    def num(key, default=None, **kw):
        if key not in spec:
            if default is None:
                raise ValidationError("is required", field=f"{prefix}.{key}")
            return default
        return _number(spec[key], f"{prefix}.{key}", **kw)

    def wrap(factory):
        try:
            return factory()
        except ValidationError as exc:
            if exc.field and not exc.field.startswith(prefix):
                raise ValidationError(str(exc).split(": ", 1)[-1], field=f"{prefix}.{exc.field}") from None
            raise

    speed = num("speed", 1.0, positive=True)
    if kind == "straight":
        direction = spec.get("direction", [0.0, 0.0, 1.0])
        if not isinstance(direction, (list, tuple)) or len(direction) != 3:
            raise ValidationError("must be a list of three numbers", field=f"{prefix}.direction")
        direction = [_number(x, f"{prefix}.direction") for x in direction]
        length = num("length", positive=True) if "length" in spec else None
        return wrap(lambda: Straight(direction=tuple(direction), speed=speed, length=length))
    if kind == "circular_arc":
        turns = num("turns", positive=True) if "turns" in spec else None
        return wrap(lambda: CircularArc(radius=num("radius", positive=True), speed=speed, turns=turns))
    if kind == "helix":
        turns = num("turns", positive=True) if "turns" in spec else None
        radius = num("radius", 1.0, positive=True)
        if ("pitch" in spec) == ("cone_angle" in spec):
            raise ValidationError("give exactly one of 'pitch' or 'cone_angle'", field=prefix)
        if "cone_angle" in spec:
            angle = num("cone_angle")
            return wrap(lambda: Helix.from_cone_angle(angle, radius=radius, speed=speed, turns=turns))
        return wrap(lambda: Helix(radius=radius, pitch=num("pitch"), speed=speed, turns=turns))
    if kind == "archimedean_spiral":
        turns = num("turns", positive=True)
        inner = num("inner_radius", 1.0, positive=True, allow_zero=True)
        if ("spacing" in spec) == ("arc_length" in spec):
            raise ValidationError("give exactly one of 'spacing' or 'arc_length'", field=prefix)
        if "arc_length" in spec:
            length = num("arc_length", positive=True)
            return wrap(lambda: ArchimedeanSpiral.from_arc_length(length, turns, inner_radius=inner, speed=speed))
        return wrap(lambda: ArchimedeanSpiral(inner, num("spacing", positive=True), turns, speed))
    segments = spec.get("segments")
    if not isinstance(segments, list) or not segments:
        raise ValidationError("must be a non-empty list of paths", field=f"{prefix}.segments")
    built = tuple(build_path(seg, f"{prefix}.segments[{i}]") for i, seg in enumerate(segments))
    return wrap(lambda: Composite(segments=built))


def parse_scenario(data, source="<scenario>"):
    """Validate a raw mapping and return (Scenario, warnings).

    Raises ScenarioError listing every field-level problem found.
    """
    if not isinstance(data, dict):
        raise ScenarioError([f"{source}: top level must be a mapping"])
    problems, warnings = [], []

    def attempt(fn):
        try:
            return fn()
        except ValidationError as exc:
            problems.append(str(exc))
        except (TypeError, ValueError) as exc:
            problems.append(str(exc))
        return None

    for key in sorted(set(data) - _TOP_KEYS):
        warnings.append(f"{key}: unknown field ignored")

    name = data.get("name")
    if not isinstance(name, str) or not name.strip() or any(c in name for c in "/\\"):
        problems.append("name: must be a non-empty string without path separators")
        name = None

    if "path" not in data:
        problems.append("path: is required")
        path = None
    else:
        path = attempt(lambda: build_path(data["path"]))

    if "k_mag" in data:
        k_mag = attempt(lambda: _number(data["k_mag"], "k_mag", positive=True))
    else:
        k_mag = 1.0
        warnings.append("k_mag: missing, defaulting to 1")

    if "j" not in data:
        problems.append("j: is required")
        j = None
    else:
        j = attempt(lambda: parse_spin(data["j"]))

    m = None
    if "m" not in data:
        problems.append("m: is required")
    elif j is not None:
        raw_m = data["m"]
        if isinstance(raw_m, dict):
            def superposition():
                if not raw_m:
                    raise ValidationError("superposition is empty", field="m")
                out = {}
                for key, amp in raw_m.items():
                    mm = parse_magnetic(key, j)
                    if isinstance(amp, (list, tuple)) and len(amp) == 2:
                        amp = complex(_number(amp[0], f"m[{key}]"), _number(amp[1], f"m[{key}]"))
                    else:
                        amp = complex(_number(amp, f"m[{key}]"))
                    out[mm] = out.get(mm, 0) + amp
                if sum(abs(a) ** 2 for a in out.values()) == 0.0:
                    raise ValidationError("superposition has zero norm", field="m")
                return out
            m = attempt(superposition)
        else:
            m = attempt(lambda: parse_magnetic(raw_m, j))

    steps = data.get("steps", 1000)
    if "steps" not in data:
        warnings.append("steps: missing, defaulting to 1000")
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 2:
        problems.append(f"steps: must be an integer >= 2, got {steps!r}")
        steps = None

    t_end = None
    if data.get("t_end") is not None:
        t_end = attempt(lambda: _number(data["t_end"], "t_end", positive=True))
        if t_end is not None and path is not None and t_end > path.duration * (1.0 + 1e-12):
            problems.append(f"t_end: {t_end!r} exceeds the path duration {path.duration!r}")
    elif path is not None and not np.isfinite(path.duration):
        problems.append("t_end: required for a path of unbounded length")

    frame = data.get("frame", "working")
    if frame not in ("working", "path"):
        problems.append(f"frame: must be 'working' or 'path', got {frame!r}")

    flags = {}
    for key in ("run_oracle_integrator", "emit_states"):
        value = data.get(key, False)
        if not isinstance(value, bool):
            problems.append(f"{key}: must be true or false, got {value!r}")
        flags[key] = bool(value)

    tolerances = dict(DEFAULT_TOLERANCES)
    overrides = data.get("tolerances") or {}
    if not isinstance(overrides, dict):
        problems.append("tolerances: must be a mapping")
        overrides = {}
    for key, value in overrides.items():
        if key not in DEFAULT_TOLERANCES:
            problems.append(f"tolerances.{key}: unknown tolerance; expected one of {sorted(DEFAULT_TOLERANCES)}")
            continue
        value = attempt(lambda: _number(value, f"tolerances.{key}", positive=True, allow_zero=True))
        if value is not None:
            tolerances[key] = value

    expect = data.get("expect") or {}
    if not isinstance(expect, dict):
        problems.append("expect: must be a mapping")
        expect = {}
    for key in sorted(set(expect) - _EXPECT_KEYS):
        problems.append(f"expect.{key}: unknown expectation; expected one of {sorted(_EXPECT_KEYS)}")
    expect = {k: attempt(lambda k=k: _number(v, f"expect.{k}")) for k, v in expect.items() if k in _EXPECT_KEYS}

    description = data.get("description", "")
    if problems:
        raise ScenarioError([f"{source}: {p}" for p in problems])
    scenario = Scenario(
        name=name.strip(), path=data["path"], j=j, m=m, k_mag=k_mag, t_end=t_end, steps=steps,
        frame=frame, tolerances=tolerances, expect=expect, description=str(description), **flags,
    )
    return scenario, warnings


def read_scenario_file(path):
    """Load a YAML/JSON scenario file and validate it."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError([f"{path}: cannot read ({exc.strerror})"]) from None
    try:
        data = json.loads(text) if path.suffix.lower() == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ScenarioError([f"{path}: malformed file: {exc}"]) from None
    return parse_scenario(data, source=str(path))


def load_scenario(ref):
    """Scenario from a file path, or from the built-in catalogue by name."""
    path = Path(ref)
    if not path.exists() and str(ref) in BUILTINS:
        return parse_scenario(BUILTINS[str(ref)], source=f"builtin:{ref}")
    return read_scenario_file(path)


CONE_ANGLE = math.pi / 3

BUILTINS = {
    "straight": {
        "name": "straight",
        "description": "Straight guide: no rotation, no phase.",
        "path": {"kind": "straight", "direction": [0.0, 0.0, 1.0], "speed": 1.0},
        "t_end": 1.0, "k_mag": 1.0, "j": "1/2", "m": "1/2", "steps": 1000, "frame": "working",
    },
    "circle": {
        "name": "circle",
        "description": "One turn of a planar circle: k_hat sweeps a great circle (solid angle 2 pi).",
        "path": {"kind": "circular_arc", "radius": 1.0, "speed": 1.0, "turns": 1},
        "k_mag": 1.0, "j": "1/2", "m": "1/2", "steps": 10000, "frame": "path",
        "expect": {"phase": math.pi},
    },
    "cone": {
        "name": "cone",
        "description": "One helix turn; k_hat circles z on a cone of half-angle pi/3.",
        "path": {"kind": "helix", "radius": 1.0, "cone_angle": CONE_ANGLE, "speed": 1.0, "turns": 1},
        "k_mag": 1.0, "j": 1, "m": 1, "steps": 10000, "frame": "path",
        "run_oracle_integrator": True,
        "expect": {"phase": 2.0 * math.pi * (1.0 - math.cos(CONE_ANGLE))},
    },
    "helix": {
        "name": "helix",
        "description": "Same helix turn in the working frame: a closed loop through the pole.",
        "path": {"kind": "helix", "radius": 1.0, "cone_angle": CONE_ANGLE, "speed": 1.0, "turns": 1},
        "k_mag": 1.0, "j": "3/2", "m": "1/2", "steps": 10000, "frame": "working",
        "expect": {"phase": 0.5 * 2.0 * math.pi * (1.0 - math.cos(CONE_ANGLE))},
    },
    "luo_spiral": {
        "name": "luo_spiral",
        "description": "Planar Archimedean spiral, 25 mm long with 2.25 turns.",
        "path": {"kind": "archimedean_spiral", "arc_length": 25.0, "turns": 2.25,
                 "inner_radius": 1.0, "speed": 1.0},
        "k_mag": 1.0, "j": "1/2", "m": "1/2", "steps": 100000, "frame": "path",
        "expect": {"arc_length": 25.0, "min_windings": 2},
    },
}
