"""Flat key = value experiment configs with a small spec mini-grammar.

Backend specs look like ``torus{n=2, res=405}``, ``finite{file=space.txt}``,
``sg{m=6}``, ``sg2{m=4}``; kernel specs like ``ball{r=0.1}``, ``heat{t=0.01}``,
``levy{alpha=0.9}``.  A sweep line ``sweep r = 0.1, 0.05, 0.025`` replaces the
kernel parameter along a strictly monotone schedule.  Parse errors carry the
offending line number.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


@dataclass
class StructSpec:
    """A name{key=value, ...} backend or kernel spec."""

    name: str
    params: dict

    @classmethod
    def parse(cls, text: str, line: int | None = None) -> "StructSpec":
        m = re.fullmatch(r"\s*([a-zA-Z0-9_-]+)\s*(?:\{(.*)\})?\s*", text)
        if not m:
            raise ConfigError(f"cannot parse spec {text!r}", line)
        name, body = m.group(1), m.group(2) or ""
        params = {}
        for chunk in body.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            if "=" not in chunk:
                raise ConfigError(f"expected key=value inside {{...}}, got {chunk!r}", line)
            k, v = (s.strip() for s in chunk.split("=", 1))
            params[k] = _coerce(v)
        return cls(name, params)

    def __str__(self) -> str:
        body = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.name}{{{body}}}"


def _coerce(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


@dataclass
class ExperimentConfig:
    backend: StructSpec
    kernel: StructSpec | None = None
    sweep_param: str | None = None
    sweep_values: tuple = ()
    p: int = 1
    eps: float = 0.3
    fixtures: tuple = ()
    seed: int = 0
    threads: int = 1
    out: str | None = None
    stagger: bool = False
    require_monotone: bool = False
    max_final_rel_err: float | None = None
    identity_fixtures: int = 200
    tuple_cap: int = 2_000_000
    extras: dict = field(default_factory=dict)

    def validate(self):
        if self.p < 0:
            raise ConfigError(f"p must be nonnegative, got {self.p}")
        if self.eps <= 0:
            raise ConfigError(f"eps must be positive, got {self.eps}")
        if self.sweep_param is not None:
            vals = self.sweep_values
            if len(vals) == 0:
                raise ConfigError("sweep schedule is empty")
            diffs = np.diff(np.asarray(vals, dtype=float))
            if not ((diffs > 0).all() or (diffs < 0).all()):
                raise ConfigError(f"sweep schedule must be strictly monotone: {vals}")
        return self

    def resolved(self) -> dict:
        out = {
            "backend": str(self.backend),
            "kernel": str(self.kernel) if self.kernel else None,
            "sweep": {"param": self.sweep_param, "values": list(self.sweep_values)}
            if self.sweep_param
            else None,
            "p": self.p,
            "eps": self.eps,
            "fixtures": list(self.fixtures),
            "seed": self.seed,
            "threads": self.threads,
            "stagger": self.stagger,
            "require_monotone": self.require_monotone,
            "max_final_rel_err": self.max_final_rel_err,
            "identity_fixtures": self.identity_fixtures,
            "tuple_cap": self.tuple_cap,
        }
        out.update(self.extras)
        return out


_KNOWN_KEYS = {
    "backend",
    "kernel",
    "p",
    "eps",
    "fixtures",
    "seed",
    "threads",
    "out",
    "stagger",
    "require_monotone",
    "max_final_rel_err",
    "identity_fixtures",
    "tuple_cap",
}


def parse_config(text: str) -> ExperimentConfig:
    backend = None
    kwargs: dict = {}
    sweep_param, sweep_values = None, ()
    extras: dict = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", ln)
        key, value = (s.strip() for s in line.split("=", 1))
        if key.startswith("sweep"):
            parts = key.split()
            if len(parts) != 2:
                raise ConfigError("sweep lines read `sweep <param> = v1, v2, ...`", ln)
            sweep_param = parts[1]
            try:
                sweep_values = tuple(float(v) for v in value.split(",") if v.strip())
            except ValueError as exc:
                raise ConfigError(f"bad sweep value: {exc}", ln) from None
            continue
        if key == "backend":
            backend = StructSpec.parse(value, ln)
        elif key == "kernel":
            kwargs["kernel"] = StructSpec.parse(value, ln)
        elif key == "fixtures":
            kwargs["fixtures"] = tuple(v.strip() for v in value.split(",") if v.strip())
        elif key in ("p", "seed", "threads", "identity_fixtures", "tuple_cap"):
            try:
                kwargs[key] = int(value)
            except ValueError:
                raise ConfigError(f"{key} must be an integer, got {value!r}", ln) from None
        elif key in ("eps", "max_final_rel_err"):
            try:
                kwargs[key] = float(value)
            except ValueError:
                raise ConfigError(f"{key} must be a number, got {value!r}", ln) from None
        elif key in ("stagger", "require_monotone"):
            kwargs[key] = value.lower() == "true"
        elif key == "out":
            kwargs["out"] = value
        elif key in _KNOWN_KEYS:
            kwargs[key] = _coerce(value)
        else:
            extras[key] = _coerce(value)
    if backend is None:
        raise ConfigError("config must declare a backend")
    cfg = ExperimentConfig(
        backend=backend,
        sweep_param=sweep_param,
        sweep_values=sweep_values,
        extras=extras,
        **kwargs,
    )
    return cfg.validate()


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


# ---------------------------------------------------------------------------
# space ingestion files


def parse_space_file(text: str):
    """Finite-space file: fields points / dist / mu / stiffness, rows split by ';'."""
    fields = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {line!r}", ln)
        key, value = (s.strip() for s in line.split("=", 1))
        rows = []
        for chunk in value.split(";"):
            chunk = chunk.strip()
            if chunk:
                try:
                    rows.append([float(v) for v in chunk.split()])
                except ValueError:
                    raise ConfigError(f"bad number in field {key!r}", ln) from None
        fields[key] = rows
    from .kas import FiniteMetricMeasureSpace

    points = fields.get("points")
    dist = fields.get("dist")
    mu_rows = fields.get("mu")
    stiff = fields.get("stiffness")
    mu = np.asarray(mu_rows[0], dtype=float) if mu_rows else None
    stiffness = np.asarray(stiff, dtype=float) if stiff else None
    if dist is not None:
        d = np.asarray(dist, dtype=float)
        n = d.shape[0]
        if mu is None:
            mu = np.ones(n)
        return FiniteMetricMeasureSpace(d, mu, stiffness)
    if points is not None:
        pts = np.asarray(points, dtype=float)
        return FiniteMetricMeasureSpace.from_points(pts, mu, stiffness)
    raise ConfigError("space file needs `points` or `dist`")


def load_space_file(path):
    return parse_space_file(Path(path).read_text())
