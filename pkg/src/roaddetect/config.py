"""Plain-text pipeline configuration: one ``section.key = value`` per line.

Blank lines and lines starting with ``#`` are ignored. Keys that are not
listed below are rejected. The canonical rendering lists every key once,
in a fixed order, and its SHA-256 is the config digest written into reports.
"""
from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .rain import GuidedFilterParams
from .shadow import DEFAULT_BUFFER_WIDTH
from .specular import SpecularParams
from .svm import DEFAULT_C, DEFAULT_TOL, SeedLayout

FILTERS = ("shadow", "rainsnow", "specular")
_DEFAULT_LAYOUT = SeedLayout()


def _bool(text):
    t = text.strip().lower()
    if t in ("on", "true", "yes", "1"):
        return True
    if t in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"expected on/off, got {text!r}")


def _order(text):
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _points(text):
    return tuple(tuple(float(v) for v in chunk.split()) for chunk in text.split(";") if chunk.strip())


def _render(value):
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple) and value and isinstance(value[0], str):
        return ",".join(value)
    if isinstance(value, tuple):
        return "; ".join(" ".join(repr(float(v)) for v in item) for item in value)
    return str(value)


def _key(name, parse):
    return {"key": name, "parse": parse}


@dataclass(frozen=True)
class PipelineConfig:
    shadow: bool = field(default=True, metadata=_key("filters.shadow", _bool))
    rainsnow: bool = field(default=True, metadata=_key("filters.rainsnow", _bool))
    specular: bool = field(default=True, metadata=_key("filters.specular", _bool))
    order: tuple = field(default=FILTERS, metadata=_key("filters.order", _order))
    buffer_width: int = field(default=DEFAULT_BUFFER_WIDTH, metadata=_key("shadow.buffer_width", int))
    guided_radius: int = field(default=8, metadata=_key("rainsnow.radius", int))
    guided_epsilon: float = field(default=0.04, metadata=_key("rainsnow.epsilon", float))
    patch_radius: int = field(default=3, metadata=_key("specular.patch_radius", int))
    achromatic_band: float = field(default=0.02, metadata=_key("specular.achromatic_band", float))
    lambda_percentile: float = field(default=95.0, metadata=_key("specular.percentile", float))
    svm_C: float = field(default=DEFAULT_C, metadata=_key("svm.C", float))
    svm_tol: float = field(default=DEFAULT_TOL, metadata=_key("svm.tol", float))
    road_polygon: tuple = field(default=_DEFAULT_LAYOUT.road, metadata=_key("seeds.road", _points))
    non_road_rects: tuple = field(default=_DEFAULT_LAYOUT.non_road, metadata=_key("seeds.non_road", _points))
    samples_per_class: int = field(default=_DEFAULT_LAYOUT.samples_per_class,
                                   metadata=_key("seeds.samples_per_class", int))
    group_size: int = field(default=3, metadata=_key("eval.group_size", int))
    dump_masks: bool = field(default=False, metadata=_key("dump.masks", _bool))
    rng_seed: int = field(default=0, metadata=_key("run.seed", int))

    def __post_init__(self):
        if sorted(self.order) != sorted(FILTERS):
            raise ConfigError(f"filters.order must name each of {', '.join(FILTERS)} once")
        if self.buffer_width < 1:
            raise ConfigError("shadow.buffer_width must be >= 1")
        if not self.svm_C > 0 or not self.svm_tol > 0:
            raise ConfigError("svm.C and svm.tol must be > 0")
        if self.group_size < 1:
            raise ConfigError("eval.group_size must be >= 1")
        if any(len(p) != 2 for p in self.road_polygon) or any(len(r) != 4 for r in self.non_road_rects):
            raise ConfigError("seeds.road needs 'x y' points and seeds.non_road 'x0 y0 x1 y1' rectangles")
        try:
            self.guided, self.specular_params, self.layout
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    # module parameter objects -------------------------------------------
    @property
    def guided(self) -> GuidedFilterParams:
        return GuidedFilterParams(self.guided_radius, self.guided_epsilon)

    @property
    def specular_params(self) -> SpecularParams:
        return SpecularParams(self.patch_radius, self.achromatic_band, self.lambda_percentile)

    @property
    def layout(self) -> SeedLayout:
        return SeedLayout(self.road_polygon, self.non_road_rects, self.samples_per_class, self.rng_seed)

    def enabled_filters(self) -> list:
        on = {"shadow": self.shadow, "rainsnow": self.rainsnow, "specular": self.specular}
        return [name for name in self.order if on[name]]

    def without_filters(self) -> "PipelineConfig":
        return dataclasses.replace(self, shadow=False, rainsnow=False, specular=False)

    def digest(self) -> str:
        return hashlib.sha256(render_config(self).encode()).hexdigest()


_FIELDS = {f.metadata["key"]: f for f in dataclasses.fields(PipelineConfig)}


def render_config(cfg: PipelineConfig) -> str:
    return "".join(f"{key} = {_render(getattr(cfg, f.name))}\n" for key, f in _FIELDS.items())


def parse_config(text: str) -> PipelineConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        f = _FIELDS[key]
        if f.name in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[f.name] = f.metadata["parse"](val.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    return PipelineConfig(**values)


def load_config(path) -> PipelineConfig:
    return parse_config(Path(path).read_text())
