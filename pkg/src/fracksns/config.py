"""Flat ``section.key = value`` run configuration.

Every key has a documented default (see :func:`default_config_text`); unknown
keys, duplicates and out-of-range values are reported with line numbers.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields

import numpy as np

from . import grid as g
from .grid import FracParams, TorusGrid
from .solver import NormExponents, PicardConfig, SolverConfig, SystemState

LINE_RE = re.compile(r"^\s*([a-z_]+\.[a-z_]+)\s*=\s*(.+?)\s*(#.*)?$")
PRESETS = ("zero", "constant", "gaussian-blob", "single-mode", "random-bandlimited")


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("\n".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class FieldSpec:
    """Initial-condition preset; ``offset`` is a constant added to scalar fields."""

    preset: str = "zero"
    amplitude: float = 1.0
    width: float = 0.5
    center: tuple[float, ...] = ()
    k: tuple[int, ...] = (1,)
    seed: int = 0
    kmax: int = 4
    offset: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    grid: TorusGrid
    params: FracParams
    dt: float
    n_steps: int
    dealias: float
    blowup_threshold: float
    picard: PicardConfig
    init_n: FieldSpec
    init_v: FieldSpec
    init_u: FieldSpec
    potential: FieldSpec
    exponents: NormExponents
    exponent_mu: float
    diagnostics_cadence: int
    output_dir: str
    snapshot_every: int
    write_history: bool

    def solver_config(self) -> SolverConfig:
        return SolverConfig(self.grid, self.params, self.dt, self.n_steps,
                            phi=scalar_field(self.grid, self.potential),
                            dealias=self.dealias, blowup_threshold=self.blowup_threshold,
                            picard=self.picard, exponents=self.exponents,
                            snapshot_every=self.snapshot_every)

    def initial_state(self) -> SystemState:
        return SystemState.from_physical(self.grid, scalar_field(self.grid, self.init_n),
                                         scalar_field(self.grid, self.init_v),
                                         vector_field(self.grid, self.init_u))


# key -> (default text, kind)
SCHEMA: dict[str, tuple[str, str]] = {
    "grid.d": ("2", "int"),
    "grid.n": ("32", "int"),
    "grid.length": (repr(2 * math.pi), "float"),
    "params.alpha": ("1.8", "float"),
    "params.beta": ("0.8", "float"),
    "params.gamma": ("0.5", "float"),
    "solver.dt": ("0.01", "float"),
    "solver.n_steps": ("10", "int"),
    "solver.dealias": (repr(2 / 3), "float"),
    "solver.blowup_threshold": ("1e8", "float"),
    "picard.enabled": ("false", "bool"),
    "picard.max_iters": ("50", "int"),
    "picard.tol": ("1e-10", "float"),
    "exponents.p": ("2.0", "float"),
    "exponents.q": ("2.0", "float"),
    "exponents.r": ("2.0", "float"),
    "exponents.mu": ("0.0", "float"),
    "diagnostics.cadence": ("1", "int"),
    "diagnostics.sobolev_mu": ("none", "floats"),
    "output.dir": ("out", "str"),
    "output.snapshot_every": ("0", "int"),
    "output.write_history": ("false", "bool"),
}
_FIELD_DEFAULTS = {
    "init_n": "gaussian-blob",
    "init_v": "zero",
    "init_u": "zero",
    "potential": "zero",
}
for _sec, _preset in _FIELD_DEFAULTS.items():
    SCHEMA[f"{_sec}.preset"] = (_preset, "str")
    SCHEMA[f"{_sec}.amplitude"] = ("1.0", "float")
    SCHEMA[f"{_sec}.width"] = ("0.5", "float")
    SCHEMA[f"{_sec}.center"] = ("none", "floats")
    SCHEMA[f"{_sec}.k"] = ("1", "ints")
    SCHEMA[f"{_sec}.seed"] = ("0", "int")
    SCHEMA[f"{_sec}.kmax"] = ("4", "int")
    SCHEMA[f"{_sec}.offset"] = ("1.0" if _sec == "init_n" else "0.0", "float")


def default_config_text() -> str:
    lines = ["# every key with its default value"]
    section = None
    for key, (val, _) in SCHEMA.items():
        sec = key.split(".")[0]
        if sec != section:
            lines.append("")
            section = sec
        lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"


def _convert(kind: str, text: str):
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    if kind == "bool":
        if text not in ("true", "false"):
            raise ValueError(f"expected true or false, got {text!r}")
        return text == "true"
    if kind == "str":
        return text
    if text == "none":
        return ()
    parts = [p.strip() for p in text.split(",")]
    return tuple(int(p) for p in parts) if kind == "ints" else tuple(float(p) for p in parts)


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises :class:`ConfigError` listing every problem."""
    errors: list[str] = []
    seen: dict[str, int] = {}
    raw: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = LINE_RE.match(line)
        if not m:
            errors.append(f"line {lineno}: syntax error: {stripped!r}")
            continue
        key, val = m.group(1), m.group(2)
        if key not in SCHEMA:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in seen:
            errors.append(f"line {lineno}: duplicate key {key!r} (first set on line {seen[key]})")
            continue
        seen[key] = lineno
        try:
            raw[key] = _convert(SCHEMA[key][1], val)
        except ValueError as exc:
            errors.append(f"line {lineno}: bad value for {key!r}: {exc}")
    if errors:
        raise ConfigError(errors)
    vals = {k: raw.get(k, _convert(kind, dflt)) for k, (dflt, kind) in SCHEMA.items()}

    def where(*keys):
        lines = [str(seen[k]) for k in keys if k in seen]
        return f"line {', '.join(lines)}: " if lines else "default: "

    def build(keys, factory):
        try:
            return factory()
        except (ValueError, TypeError) as exc:
            errors.append(where(*keys) + str(exc))
            return None

    grid = build(["grid.d", "grid.n", "grid.length"],
                 lambda: TorusGrid(vals["grid.d"], vals["grid.n"], vals["grid.length"]))
    params = build(["params.alpha", "params.beta", "params.gamma"],
                   lambda: FracParams(vals["params.alpha"], vals["params.beta"], vals["params.gamma"]))
    specs = {}
    for sec in _FIELD_DEFAULTS:
        specs[sec] = build([k for k in SCHEMA if k.startswith(sec + ".")],
                           lambda sec=sec: _field_spec(sec, vals, grid))
    checks = [
        ("solver.dt", vals["solver.dt"] > 0, "solver.dt must be positive"),
        ("solver.n_steps", vals["solver.n_steps"] >= 1, "solver.n_steps must be >= 1"),
        ("solver.dealias", 0 < vals["solver.dealias"] <= 1, "solver.dealias must lie in (0, 1]"),
        ("solver.blowup_threshold", vals["solver.blowup_threshold"] >= 0,
         "solver.blowup_threshold must be >= 0"),
        ("picard.max_iters", vals["picard.max_iters"] >= 1, "picard.max_iters must be >= 1"),
        ("picard.tol", vals["picard.tol"] > 0, "picard.tol must be positive"),
        ("diagnostics.cadence", vals["diagnostics.cadence"] >= 1, "diagnostics.cadence must be >= 1"),
        ("output.snapshot_every", vals["output.snapshot_every"] >= 0,
         "output.snapshot_every must be >= 0"),
        ("exponents.mu", vals["exponents.mu"] >= 0, "exponents.mu must be >= 0"),
    ]
    for name in ("exponents.p", "exponents.q", "exponents.r"):
        checks.append((name, vals[name] >= 1, f"{name} must be >= 1 or inf"))
    checks.append(("diagnostics.sobolev_mu", all(m >= 0 for m in vals["diagnostics.sobolev_mu"]),
                   "diagnostics.sobolev_mu entries must be >= 0"))
    for key, ok, msg in checks:
        if not ok:
            errors.append(where(key) + msg)
    if errors:
        raise ConfigError(errors)
    return RunConfig(
        grid=grid, params=params, dt=vals["solver.dt"], n_steps=vals["solver.n_steps"],
        dealias=vals["solver.dealias"], blowup_threshold=vals["solver.blowup_threshold"],
        picard=PicardConfig(vals["picard.enabled"], vals["picard.max_iters"], vals["picard.tol"]),
        init_n=specs["init_n"], init_v=specs["init_v"], init_u=specs["init_u"],
        potential=specs["potential"],
        exponents=NormExponents(vals["exponents.q"], vals["exponents.r"], vals["exponents.p"],
                                tuple(vals["diagnostics.sobolev_mu"])),
        exponent_mu=vals["exponents.mu"], diagnostics_cadence=vals["diagnostics.cadence"],
        output_dir=vals["output.dir"], snapshot_every=vals["output.snapshot_every"],
        write_history=vals["output.write_history"])


def _field_spec(sec: str, vals: dict, grid: TorusGrid | None) -> FieldSpec:
    kw = {f.name: vals[f"{sec}.{f.name}"] for f in fields(FieldSpec)}
    spec = FieldSpec(**kw)
    if spec.preset not in PRESETS:
        raise ValueError(f"{sec}.preset must be one of {PRESETS}, got {spec.preset!r}")
    if spec.width <= 0:
        raise ValueError(f"{sec}.width must be positive")
    if spec.kmax < 1:
        raise ValueError(f"{sec}.kmax must be >= 1")
    if grid is not None:
        if spec.center and len(spec.center) != grid.d:
            raise ValueError(f"{sec}.center needs {grid.d} entries")
        if spec.preset == "single-mode" and len(spec.k) not in (1, grid.d):
            raise ValueError(f"{sec}.k needs 1 or {grid.d} entries")
    return spec


# ---------------------------------------------------------------------------
# initial-condition presets


def _mode_vector(grid: TorusGrid, spec: FieldSpec) -> tuple[int, ...]:
    return spec.k if len(spec.k) == grid.d else spec.k + (0,) * (grid.d - 1)


def scalar_field(grid: TorusGrid, spec: FieldSpec) -> np.ndarray:
    xs = grid.coords()
    L = grid.length
    if spec.preset in ("zero", "constant"):
        base = np.zeros(grid.shape)
    elif spec.preset == "gaussian-blob":
        center = spec.center or (L / 2,) * grid.d
        r2 = np.zeros(grid.shape)
        for x, c in zip(xs, center):
            dx = (x - c + L / 2) % L - L / 2
            r2 = r2 + dx ** 2
        base = spec.amplitude * np.exp(-r2 / (2 * spec.width ** 2))
    elif spec.preset == "single-mode":
        kv = _mode_vector(grid, spec)
        base = spec.amplitude * np.cos(2 * np.pi / L * sum(k * x for k, x in zip(kv, xs)))
    else:
        rng = np.random.default_rng(spec.seed)
        coeff = np.zeros(grid.shape, dtype=complex)
        mask = np.ones(grid.shape, dtype=bool)
        for k in grid.k_int:
            mask = mask & (np.abs(k) <= spec.kmax)
        coeff[mask] = rng.standard_normal(int(mask.sum())) + 1j * rng.standard_normal(int(mask.sum()))
        coeff.flat[0] = 0
        base = g.inverse_transform(grid, coeff)
        peak = np.max(np.abs(base))
        base = spec.amplitude * base / peak if peak > 0 else base
    if spec.preset == "constant":
        return base + spec.amplitude + spec.offset
    return base + spec.offset


def vector_field(grid: TorusGrid, spec: FieldSpec) -> np.ndarray:
    """Divergence-free vector presets (projected after construction)."""
    xs = grid.coords()
    L = grid.length
    if spec.preset == "zero":
        return np.zeros((grid.d,) + grid.shape)
    if spec.preset == "single-mode":
        kv = np.array(_mode_vector(grid, spec), dtype=float)
        if grid.d == 2:
            e = np.array([-kv[1], kv[0]])
        elif grid.d == 3:
            e = np.cross(kv, [1.0, 0.0, 0.0])
            if not np.any(e):
                e = np.cross(kv, [0.0, 1.0, 0.0])
        else:
            e = np.ones(1)
        e = e / np.linalg.norm(e)
        wave = spec.amplitude * np.sin(2 * np.pi / L * sum(k * x for k, x in zip(kv, xs)))
        u = np.stack([c * wave for c in e])
    else:
        comps = []
        for i in range(grid.d):
            sub = FieldSpec(spec.preset, spec.amplitude, spec.width, spec.center, spec.k,
                            spec.seed + i, spec.kmax, 0.0)
            if spec.preset == "gaussian-blob" and not spec.center:
                shift = (L / 2 + (-1) ** i * L / 8,) * grid.d
                sub = FieldSpec(spec.preset, spec.amplitude, spec.width, shift, spec.k, spec.seed, spec.kmax, 0.0)
            comps.append(scalar_field(grid, sub))
        u = np.stack(comps)
    return g.leray_project(grid, u)
