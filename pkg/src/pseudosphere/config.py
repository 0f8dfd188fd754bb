"""Configuration blocks shared by the quadrature, search and index pipelines."""

import dataclasses
from dataclasses import dataclass, field

from .errors import ConfigError


@dataclass(frozen=True)
class Ladder:
    # all lengths relative to the touching radius r
    t0: float = 0.1
    k_max: int = 10
    R0: float = 0.5
    j_max: int = 6

    def t_values(self, r):
        return [self.t0 * r * 2.0**-k for k in range(self.k_max + 1)]

    def R_values(self, r):
        return [self.R0 * r * 2.0**-j for j in range(self.j_max + 1)]


@dataclass(frozen=True)
class QuadConfig:
    elements: int = 4096
    grading: float = 0.5
    rule: str = "auto"
    panels: int = 24
    azimuth: int = 64
    clip_tol: float = 1e-4
    min_per_t: int = 32
    max_depth: int = 48
    ladder: Ladder = field(default_factory=Ladder)

    def __post_init__(self):
        if self.elements < 8:
            raise ConfigError("must be >= 8", field="elements")
        if not 0 < self.grading < 1:
            raise ConfigError("must lie in (0, 1)", field="grading")
        if self.rule not in ("auto", "gauss4", "centroid3"):
            raise ConfigError("must be 'gauss4' or 'centroid3'", field="rule")
        if self.azimuth < 4 or self.azimuth % 2:
            raise ConfigError("must be an even integer >= 4", field="azimuth")
        if self.panels < 2:
            raise ConfigError("must be >= 2", field="panels")


@dataclass(frozen=True)
class SearchConfig:
    delta_rel: float = 1e-3
    seeds_per_shell: int = 32
    shells: tuple = (1.0, 2.0, 8.0, 32.0)
    pattern_iters: int = 60
    starts: int = 4
    delta_halvings: int = 3
    grid_oracle: bool = False
    grid_size: int = 200
    step_tol: float = 1e-7

    def __post_init__(self):
        if self.delta_rel <= 0:
            raise ConfigError("must be > 0", field="delta_rel")
        if self.seeds_per_shell < 1:
            raise ConfigError("must be >= 1", field="seeds_per_shell")
        if any(s <= 0 for s in self.shells):
            raise ConfigError("shell multipliers must be > 0", field="shells")


@dataclass(frozen=True)
class FlatnessConfig:
    cone_angles_deg: tuple = (15.0, 30.0)
    dirs_per_ring: int = 8
    max_points: int = 8
    tail: int = 4
    quad: QuadConfig = field(default_factory=QuadConfig)

    def __post_init__(self):
        if any(not 0 < a < 90 for a in self.cone_angles_deg):
            raise ConfigError("cone angles must lie in (0, 90)", field="cone_angles_deg")
        if self.dirs_per_ring < 1:
            raise ConfigError("must be >= 1", field="dirs_per_ring")
        if self.tail < 3:
            raise ConfigError("must be >= 3", field="tail")


def _build(cls, data, prefix):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError("expected a JSON object", field=prefix or None)
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in names:
            raise ConfigError("unknown key", field=path)
        kwargs[key] = tuple(value) if isinstance(value, list) else value
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        raise ConfigError(str(exc).split(": ", 1)[-1], field=f"{prefix}.{exc.field}" if prefix else exc.field) from None
    except TypeError as exc:
        raise ConfigError(str(exc), field=prefix or None) from None


def quad_config(data=None, prefix="quadrature"):
    data = dict(data or {})
    ladder = _build(Ladder, data.pop("ladder", None), f"{prefix}.ladder")
    cfg = _build(QuadConfig, data, prefix)
    return dataclasses.replace(cfg, ladder=ladder)


def search_config(data=None, prefix="search"):
    return _build(SearchConfig, data, prefix)


def flatness_config(data=None, quad=None, prefix="flatness"):
    """Flatness block; quadrature keys inside it override the base ``quad``."""
    data = dict(data or {})
    own = {f.name for f in dataclasses.fields(FlatnessConfig)} - {"quad"}
    flat_keys = {k: v for k, v in data.items() if k in own}
    quad_keys = {k: v for k, v in data.items() if k not in own}
    base = quad or QuadConfig()
    if quad_keys:
        merged = {f.name: getattr(base, f.name) for f in dataclasses.fields(QuadConfig)}
        ladder = dict(dataclasses.asdict(base.ladder))
        ladder.update(quad_keys.pop("ladder", {}) or {})
        merged.pop("ladder")
        merged.update(quad_keys)
        merged["ladder"] = ladder
        base = quad_config(merged, prefix)
    cfg = _build(FlatnessConfig, flat_keys, prefix)
    return dataclasses.replace(cfg, quad=base)
