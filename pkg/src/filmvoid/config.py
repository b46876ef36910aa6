"""Bracketed-section key=value experiment configs with strict validation.

Unknown keys, duplicates, malformed values and out-of-range parameters
are all reported with their line numbers; defaults are filled for
everything except the geometry and the epsilon list.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np


class ConfigError(ValueError):
    pass


def _float(s, line):
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"line {line}: not a number: {s!r}")


def _int(s, line):
    try:
        return int(s)
    except ValueError:
        raise ConfigError(f"line {line}: not an integer: {s!r}")


def _float_list(s, line):
    return tuple(_float(p.strip(), line) for p in s.split(",") if p.strip())


def _str(s, line):
    return s


# section -> key -> (parser, default); REQUIRED means no default
REQUIRED = object()

_SCHEMA = {
    "geometry": {
        "L": (_float, REQUIRED),
        "M": (_float, REQUIRED),
        "nx": (_int, REQUIRED),
        "ny": (_int, REQUIRED),
    },
    "physics": {
        "p": (_float, 2.0),
        "mu": (_float, 1.0),
        "lambda": (_float, 0.0),
        "delta_mismatch": (_float, 0.0),
        "norm": (_str, "euclidean"),
        "norm_q": (_float, 2.0),
        "norm_w1": (_float, 1.0),
        "norm_w2": (_float, 1.0),
    },
    "phase": {
        "eps": (_float_list, REQUIRED),
        "eta": (_str, "default"),
        "W": (_str, "doublewell"),
        "tol_energy": (_float, 1e-6),
        "tol_cg": (_float, 1e-10),
        "max_outer": (_int, 40),
        "max_inner": (_int, 120),
        "init": (_str, "flat"),
        "seed": (_int, 0),
        "tilt": (_float, 0.0),
    },
    "constraint": {
        "volume_m": (_str, "none"),
    },
    "film": {
        "profile": (_str, "flat:0.5"),
        "cuts": (_str, ""),
    },
    "slice": {
        "slice_eps": (_float, 0.1),
        "line_spacing": (_str, "default"),
        "rect": (_float_list, (0.25, 0.75, 0.25, 0.75)),
        "directions": (_int, 18),
    },
    "recovery": {
        "delta": (_float, 1.0 / 256.0),
        "sigma": (_float, 1.0 / 2048.0),
        "target": (_float, 0.05),
        "rec_eps": (_float, 1.0 / 32.0),
    },
    "collapse": {
        "n_max": (_int, 10),
        "crack_len": (_float, 0.5),
    },
    "output": {
        "emit": (_str, "trace,fields,sweep"),
    },
}


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)  # (section, key) -> value

    def __getitem__(self, pair):
        return self.values[pair]

    def get(self, section, key):
        return self.values[(section, key)]

    def hash(self) -> str:
        items = sorted(f"{s}.{k}={v!r}" for (s, k), v in self.values.items())
        return hashlib.sha256("\n".join(items).encode()).hexdigest()[:16]


def parse_config(text: str) -> ExperimentConfig:
    section = None
    seen: dict[tuple[str, str], int] = {}
    values: dict[tuple[str, str], object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in _SCHEMA[section]:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]")
        if (section, key) in seen:
            raise ConfigError(
                f"line {lineno}: duplicate key {key!r} (first set on line {seen[(section, key)]})"
            )
        seen[(section, key)] = lineno
        parser, _ = _SCHEMA[section][key]
        values[(section, key)] = parser(val, lineno)

    # fill defaults, demand required keys
    for sec, keys in _SCHEMA.items():
        for key, (_, default) in keys.items():
            if (sec, key) not in values:
                if default is REQUIRED:
                    raise ConfigError(f"missing required key {key!r} in [{sec}]")
                values[(sec, key)] = default

    cfg = ExperimentConfig(values)
    _validate(cfg, seen)
    return cfg


def _validate(cfg: ExperimentConfig, seen):
    def where(sec, key):
        n = seen.get((sec, key))
        return f"line {n}: " if n else ""

    L, M = cfg.get("geometry", "L"), cfg.get("geometry", "M")
    if L <= 0 or M <= 0:
        raise ConfigError(where("geometry", "L") + "need L > 0 and M > 0")
    if cfg.get("geometry", "nx") < 2 or cfg.get("geometry", "ny") < 2:
        raise ConfigError(where("geometry", "nx") + "need nx, ny >= 2")
    p = cfg.get("physics", "p")
    if p <= 1.0:
        raise ConfigError(where("physics", "p") + "exponent must satisfy p > 1")
    if cfg.get("physics", "mu") <= 0 or cfg.get("physics", "lambda") < 0:
        raise ConfigError(where("physics", "mu") + "need mu > 0 and lambda >= 0")
    eps = cfg.get("phase", "eps")
    if not eps or any(e <= 0 for e in eps):
        raise ConfigError(where("phase", "eps") + "need eps > 0")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError(where("phase", "eps") + "eps list must be decreasing")
    eta = cfg.get("phase", "eta")
    if eta != "default":
        try:
            v = float(eta)
        except ValueError:
            raise ConfigError(where("phase", "eta") + "eta must be a number or 'default'")
        if v <= 0:
            raise ConfigError(where("phase", "eta") + "need eta > 0")
        cfg.values[("phase", "eta")] = v
    from .wells import WELLS

    if cfg.get("phase", "W") not in WELLS:
        raise ConfigError(where("phase", "W") + f"unknown well {cfg.get('phase', 'W')!r}")
    if cfg.get("phase", "init") not in ("flat", "perturbed"):
        raise ConfigError(where("phase", "init") + "init must be flat or perturbed")
    vm = cfg.get("constraint", "volume_m")
    if vm != "none":
        try:
            v = float(vm)
        except ValueError:
            raise ConfigError(where("constraint", "volume_m") + "volume_m must be a number or 'none'")
        if not (0.0 < v < M * L):
            raise ConfigError(
                where("constraint", "volume_m") + "volume target must satisfy 0 < m < M * L"
            )
        cfg.values[("constraint", "volume_m")] = v
    if cfg.get("physics", "norm") not in ("euclidean", "l1", "linf", "lq", "diag"):
        raise ConfigError(where("physics", "norm") + "unknown surface norm selector")
    ls = cfg.get("slice", "line_spacing")
    if ls != "default":
        cfg.values[("slice", "line_spacing")] = _float(ls, seen.get(("slice", "line_spacing"), 0))
    return cfg


def surface_norm_from(cfg: ExperimentConfig):
    from .surfnorm import SurfaceNorm

    sel = cfg.get("physics", "norm")
    w = (cfg.get("physics", "norm_w1"), cfg.get("physics", "norm_w2"))
    if sel == "euclidean":
        return SurfaceNorm.euclidean()
    if sel == "l1":
        return SurfaceNorm.lq(1.0, w)
    if sel == "linf":
        return SurfaceNorm.lq(np.inf, w)
    if sel == "lq":
        return SurfaceNorm.lq(cfg.get("physics", "norm_q"), w)
    return SurfaceNorm.matrix([[w[0], 0.0], [0.0, w[1]]])


def parse_profile(spec: str, L: float, M: float):
    """Profile selectors: flat:H | step:x,left,right | ramp:h0,h1."""
    from .geometry import Profile

    kind, _, args = spec.partition(":")
    vals = [float(a) for a in args.split(",") if a.strip()] if args else []
    if kind == "flat":
        return Profile.flat(L, vals[0] if vals else 0.5 * M, cap=M)
    if kind == "step":
        x, left, right = vals
        return Profile.step(L, x, left, right, cap=M)
    if kind == "ramp":
        h0, h1 = vals
        return Profile.smooth(np.array([0.0, L]), np.array([h0, h1]), cap=M)
    raise ConfigError(f"unknown profile selector {spec!r}")


def parse_cuts(spec: str):
    """Cut list 'x:y0;x:y0;...' of vertical segments reaching the graph."""
    from .geometry import Segment

    out = []
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        x, y0 = (float(v) for v in part.split(":"))
        out.append(Segment.vertical(x, y0, y0 + 1e-9))
    return tuple(out)
