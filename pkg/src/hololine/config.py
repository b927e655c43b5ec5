"""Experiment configuration files (TOML).

Every section is optional and falls back to the reference setup: two
128-wavelength segments 10 m apart at 1 cm wavelength, half-wavelength
spacing.  Angles are given in degrees.  Validation errors name the key and
the line it was declared on.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import tomli_w

from .channel import MODELS, EnsembleSpec
from .geometry import ConfigError, SystemGeometry, wavenumber_grid
from .numerics import DomainError, QuadratureSpec
from .scattering import Cluster, ScatteringProfile
from .wdm import WdmConfig

__all__ = [
    "ExperimentConfig",
    "Scenario",
    "MetricsConfig",
    "AcfConfig",
    "PsdConfig",
    "GreensConfig",
    "load_config",
    "loads_config",
    "dumps_config",
]

_HEADER_ARRAY = re.compile(r"^\[\[\s*([A-Za-z0-9_.\-]+)\s*\]\]$")
_HEADER = re.compile(r"^\[\s*([A-Za-z0-9_.\-]+)\s*\]$")
_KEY = re.compile(r"^([A-Za-z0-9_\-]+)\s*=")


def _line_index(text: str) -> dict[str, int]:
    """Map dotted key paths (``scenario[1].receive.kind``) to line numbers."""
    locs: dict[str, int] = {}
    counts: dict[str, int] = {}
    current = ""
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _HEADER_ARRAY.match(line)
        if m:
            name = m.group(1)
            head = name.split(".")[0]
            if head != name and head in counts:
                current = f"{head}[{counts[head]}]{name[len(head):]}"
            else:
                counts[name] = counts.get(name, -1) + 1
                current = f"{name}[{counts[name]}]"
            locs.setdefault(current, no)
            continue
        m = _HEADER.match(line)
        if m:
            name = m.group(1)
            head = name.split(".")[0]
            if head in counts:
                name = f"{head}[{counts[head]}]{name[len(head):]}"
            current = name
            locs[current] = no
            continue
        m = _KEY.match(line)
        if m:
            locs[f"{current}.{m.group(1)}" if current else m.group(1)] = no
    return locs


class _Ctx:
    def __init__(self, text: str, source: str):
        self.locs = _line_index(text)
        self.source = source

    def fail(self, path: str, msg: str):
        p = path
        while p and p not in self.locs:
            if p.endswith("]"):
                p = p[: p.rindex("[")]
            else:
                p = p.rsplit(".", 1)[0] if "." in p else ""
        where = f"{self.source}:{self.locs[p]}" if p else self.source
        raise ConfigError(f"{where}: {path}: {msg}")


def _take(ctx: _Ctx, table: dict, path: str, allowed: set[str]) -> dict:
    if not isinstance(table, dict):
        ctx.fail(path, "expected a table")
    for key in table:
        if key not in allowed:
            ctx.fail(f"{path}.{key}" if path else key, f"unknown key (allowed: {sorted(allowed)})")
    return table


def _num(ctx, table, path, key, default=None, *, integer=False, positive=False, nonneg=False):
    full = f"{path}.{key}" if path else key
    if key not in table:
        if default is None:
            ctx.fail(full, "missing required value")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        ctx.fail(full, f"expected a number, got {v!r}")
    if integer and not (isinstance(v, int) or float(v).is_integer()):
        ctx.fail(full, f"expected an integer, got {v!r}")
    if not math.isfinite(v):
        ctx.fail(full, "must be finite")
    if positive and not v > 0:
        ctx.fail(full, f"must be positive, got {v!r}")
    if nonneg and v < 0:
        ctx.fail(full, f"must be nonnegative, got {v!r}")
    return int(v) if integer else float(v)


def _num_list(ctx, table, path, key, default, *, positive=False):
    full = f"{path}.{key}"
    v = table.get(key, default)
    if not isinstance(v, list) or not v:
        ctx.fail(full, "expected a non-empty list of numbers")
    out = []
    for x in v:
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            ctx.fail(full, f"expected finite numbers, got {x!r}")
        if positive and not x > 0:
            ctx.fail(full, f"entries must be positive, got {x!r}")
        out.append(float(x))
    return tuple(out)


@dataclass(frozen=True)
class MetricsConfig:
    epsilon: float = 0.003
    power_dbw: tuple[float, ...] = (20.0,)
    noise_dbw: float = 0.0
    trials: int = 500
    master_seed: int = 2024
    spacings: tuple[float, ...] = (0.5,)  # element spacing in wavelengths


@dataclass(frozen=True)
class AcfConfig:
    kr_max: float = 50.0
    points: int = 501


@dataclass(frozen=True)
class PsdConfig:
    kx_max: float = 0.99  # fraction of k
    points: int = 397


@dataclass(frozen=True)
class GreensConfig:
    distances: tuple[float, ...] = (10.0,)
    s_max_wavelengths: float = 1024.0
    points: int = 2049


@dataclass(frozen=True)
class Scenario:
    """A named channel setting.

    ``receive`` and ``source`` hold the declared profile tables (angles in
    degrees) so the configuration can be written back unchanged.
    """

    name: str
    model: str = "nlos"
    receive: dict | None = None
    source: dict | None = None

    def profiles(self) -> tuple[ScatteringProfile | None, ScatteringProfile | None]:
        """``(source, receive)`` profiles; a missing source mirrors the receiver."""
        rx = _build_profile(self.receive) if self.receive is not None else None
        tx = _build_profile(self.source) if self.source is not None else rx
        return tx, rx

    def ensemble(self, geom: SystemGeometry, los: str, nlos_gain: float) -> EnsembleSpec:
        tx, rx = self.profiles()
        return EnsembleSpec(geom, self.model, tx, rx, los, nlos_gain)


def _build_profile(decl: dict) -> ScatteringProfile:
    if decl["kind"] == "isotropic":
        return ScatteringProfile("isotropic")
    clusters = []
    for c in decl["clusters"]:
        mean = math.radians(c["mean_deg"])
        if "alpha" in c:
            clusters.append(Cluster(c["weight"], mean, c["alpha"]))
        else:
            clusters.append(Cluster.from_variance(c["weight"], mean, c["nu2"]))
    return ScatteringProfile("clusters", tuple(clusters))


def _parse_profile(ctx: _Ctx, table, path: str) -> dict:
    _take(ctx, table, path, {"kind", "clusters"})
    kind = table.get("kind")
    if kind not in ("isotropic", "clusters"):
        ctx.fail(f"{path}.kind", f"expected 'isotropic' or 'clusters', got {kind!r}")
    if kind == "isotropic":
        if "clusters" in table:
            ctx.fail(f"{path}.clusters", "isotropic profile takes no clusters")
        return {"kind": "isotropic"}
    raw = table.get("clusters")
    if not isinstance(raw, list) or not raw:
        ctx.fail(f"{path}.clusters", "expected a non-empty list of cluster tables")
    clusters = []
    for i, c in enumerate(raw):
        cpath = f"{path}.clusters[{i}]"
        _take(ctx, c, cpath, {"weight", "mean_deg", "nu2", "alpha"})
        if ("nu2" in c) == ("alpha" in c):
            ctx.fail(cpath, "each cluster needs exactly one of nu2 or alpha")
        out = {
            "weight": _num(ctx, c, cpath, "weight", positive=True),
            "mean_deg": _num(ctx, c, cpath, "mean_deg"),
        }
        if "nu2" in c:
            out["nu2"] = _num(ctx, c, cpath, "nu2", positive=True)
        else:
            out["alpha"] = _num(ctx, c, cpath, "alpha", nonneg=True)
        clusters.append(out)
    decl = {"kind": "clusters", "clusters": clusters}
    try:
        _build_profile(decl)
    except DomainError as exc:
        ctx.fail(path, str(exc))
    return decl


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: SystemGeometry = field(default_factory=SystemGeometry.reference)
    los: str = "em"
    nlos_gain: float = 1.0
    wdm: WdmConfig = field(default_factory=WdmConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    acf: AcfConfig = field(default_factory=AcfConfig)
    psd: PsdConfig = field(default_factory=PsdConfig)
    greens: GreensConfig = field(default_factory=GreensConfig)
    scenarios: tuple[Scenario, ...] = ()
    output_dir: str = "out"

    def with_overrides(self, *, seed=None, trials=None, output_dir=None) -> "ExperimentConfig":
        m = self.metrics
        if seed is not None:
            if not 0 <= seed < 2**64:
                raise ConfigError("seed must fit in an unsigned 64-bit integer")
            m = replace(m, master_seed=int(seed))
        if trials is not None:
            if trials < 2:
                raise ConfigError("trials must be >= 2")
            m = replace(m, trials=int(trials))
        return replace(self, metrics=m,
                       output_dir=self.output_dir if output_dir is None else str(output_dir))

    def to_dict(self) -> dict[str, Any]:
        g = self.geometry
        wdm = {"N": self.wdm.N}
        if self.wdm.quad is not None:
            wdm["panels"] = self.wdm.quad.panel_count
        out: dict[str, Any] = {
            "geometry": {
                "L_s": g.L_s, "L_r": g.L_r, "d": g.d, "lambda": g.wavelength,
                "delta_s": g.delta_s, "delta_r": g.delta_r, "s_z": g.s_z,
            },
            "channel": {"los": self.los, "nlos_gain": self.nlos_gain},
            "wdm": wdm,
            "metrics": {
                "epsilon": self.metrics.epsilon,
                "power_dbw": list(self.metrics.power_dbw),
                "noise_dbw": self.metrics.noise_dbw,
                "trials": self.metrics.trials,
                "master_seed": self.metrics.master_seed,
                "spacings": list(self.metrics.spacings),
            },
            "acf": {"kr_max": self.acf.kr_max, "points": self.acf.points},
            "psd": {"kx_max": self.psd.kx_max, "points": self.psd.points},
            "greens": {
                "distances": list(self.greens.distances),
                "s_max_wavelengths": self.greens.s_max_wavelengths,
                "points": self.greens.points,
            },
            "output": {"dir": self.output_dir},
        }
        scen = []
        for s in self.scenarios:
            d: dict[str, Any] = {"name": s.name, "model": s.model}
            if s.receive is not None:
                d["receive"] = s.receive
            if s.source is not None:
                d["source"] = s.source
            scen.append(d)
        if scen:
            out["scenario"] = scen
        return out


_SECTIONS = {"geometry", "channel", "wdm", "metrics", "acf", "psd", "greens", "output", "scenario"}


def loads_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Parse and validate configuration text."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    ctx = _Ctx(text, source)
    _take(ctx, raw, "", _SECTIONS)

    geo = _take(ctx, raw.get("geometry", {}), "geometry",
                {"L_s", "L_r", "d", "lambda", "delta_s", "delta_r", "s_z"})
    ref = SystemGeometry.reference()
    vals = {}
    for key, attr in (("L_s", "L_s"), ("L_r", "L_r"), ("d", "d"), ("lambda", "wavelength"),
                      ("delta_s", "delta_s"), ("delta_r", "delta_r")):
        vals[attr] = _num(ctx, geo, "geometry", key, getattr(ref, attr), positive=True)
    vals["s_z"] = _num(ctx, geo, "geometry", "s_z", 0.0)
    try:
        geom = SystemGeometry(**vals)
        grid = wavenumber_grid(geom)
    except ConfigError as exc:
        ctx.fail("geometry", str(exc))

    chan = _take(ctx, raw.get("channel", {}), "channel", {"los", "nlos_gain"})
    los = chan.get("los", "em")
    if los not in ("em", "raytrace"):
        ctx.fail("channel.los", f"expected 'em' or 'raytrace', got {los!r}")
    nlos_gain = _num(ctx, chan, "channel", "nlos_gain", 1.0, nonneg=True)

    w = _take(ctx, raw.get("wdm", {}), "wdm", {"N", "panels"})
    N = _num(ctx, w, "wdm", "N", 25, integer=True, positive=True)
    if N > min(grid.n_s, grid.n_r):
        ctx.fail("wdm.N", f"must not exceed min(n_s, n_r) = {min(grid.n_s, grid.n_r)}")
    quad = None
    if "panels" in w:
        quad = QuadratureSpec(_num(ctx, w, "wdm", "panels", integer=True, positive=True), 16, 1e-4)
    wdm = WdmConfig(N, quad)

    m = _take(ctx, raw.get("metrics", {}), "metrics",
              {"epsilon", "power_dbw", "noise_dbw", "trials", "master_seed", "spacings"})
    d = MetricsConfig()
    eps = _num(ctx, m, "metrics", "epsilon", d.epsilon, positive=True)
    if not eps < 1:
        ctx.fail("metrics.epsilon", "must lie in (0, 1)")
    trials = _num(ctx, m, "metrics", "trials", d.trials, integer=True, positive=True)
    if trials < 2:
        ctx.fail("metrics.trials", "must be >= 2")
    seed = _num(ctx, m, "metrics", "master_seed", d.master_seed, integer=True, nonneg=True)
    if seed >= 2**64:
        ctx.fail("metrics.master_seed", "must fit in an unsigned 64-bit integer")
    spacings = _num_list(ctx, m, "metrics", "spacings", list(d.spacings), positive=True)
    for sp in spacings:
        if sp * geom.wavelength > min(geom.L_s, geom.L_r):
            ctx.fail("metrics.spacings", f"spacing {sp} wavelengths exceeds the segment length")
    metrics = MetricsConfig(
        eps, _num_list(ctx, m, "metrics", "power_dbw", list(d.power_dbw)),
        _num(ctx, m, "metrics", "noise_dbw", d.noise_dbw), trials, seed, spacings,
    )

    a = _take(ctx, raw.get("acf", {}), "acf", {"kr_max", "points"})
    acf = AcfConfig(_num(ctx, a, "acf", "kr_max", AcfConfig.kr_max, positive=True),
                    _num(ctx, a, "acf", "points", AcfConfig.points, integer=True, positive=True))
    p = _take(ctx, raw.get("psd", {}), "psd", {"kx_max", "points"})
    psd = PsdConfig(_num(ctx, p, "psd", "kx_max", PsdConfig.kx_max, positive=True),
                    _num(ctx, p, "psd", "points", PsdConfig.points, integer=True, positive=True))
    if not psd.kx_max < 1:
        ctx.fail("psd.kx_max", "must be below 1 (fraction of k)")
    gr = _take(ctx, raw.get("greens", {}), "greens", {"distances", "s_max_wavelengths", "points"})
    greens = GreensConfig(
        _num_list(ctx, gr, "greens", "distances", list(GreensConfig.distances), positive=True),
        _num(ctx, gr, "greens", "s_max_wavelengths", GreensConfig.s_max_wavelengths, positive=True),
        _num(ctx, gr, "greens", "points", GreensConfig.points, integer=True, positive=True),
    )

    o = _take(ctx, raw.get("output", {}), "output", {"dir"})
    out_dir = o.get("dir", "out")
    if not isinstance(out_dir, str) or not out_dir:
        ctx.fail("output.dir", "expected a non-empty string")

    scenarios = []
    raw_scen = raw.get("scenario", [])
    if not isinstance(raw_scen, list):
        ctx.fail("scenario", "use [[scenario]] tables")
    names = set()
    for i, s in enumerate(raw_scen):
        path = f"scenario[{i}]"
        _take(ctx, s, path, {"name", "model", "receive", "source"})
        name = s.get("name")
        if not isinstance(name, str) or not re.fullmatch(r"[A-Za-z0-9_\-]+", name or ""):
            ctx.fail(f"{path}.name", "expected a name of letters, digits, '_' or '-'")
        if name in names:
            ctx.fail(f"{path}.name", f"duplicate scenario name {name!r}")
        names.add(name)
        model = s.get("model", "nlos")
        if model not in MODELS:
            ctx.fail(f"{path}.model", f"expected one of {MODELS}, got {model!r}")
        rx = _parse_profile(ctx, s["receive"], f"{path}.receive") if "receive" in s else None
        tx = _parse_profile(ctx, s["source"], f"{path}.source") if "source" in s else None
        if tx is not None and rx is None:
            ctx.fail(f"{path}.receive", "a source profile needs a receive profile")
        if model in ("nlos", "composite") and rx is None:
            ctx.fail(path, f"model {model!r} needs a [receive] profile")
        scenarios.append(Scenario(name, model, rx, tx))

    return ExperimentConfig(geom, los, nlos_gain, wdm, metrics, acf, psd, greens,
                            tuple(scenarios), out_dir)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return loads_config(text, str(path))


def dumps_config(cfg: ExperimentConfig) -> str:
    return tomli_w.dumps(cfg.to_dict())
