"""Scene configuration: an INI file with one section per module, mirrored 1:1
by command-line flags (flags win), validated before anything is computed.

    [crystal]      dim, group
    [automorphic]  variant
    [schroeder]    map, d, scale, deform, beta, theta_max, alpha
    [dynamics]     r_small, r_large, max_iter, resolution, slice, slice_offset,
                   extent, sample_radius, tol, mobius, mobius_angle, samples
    [cli]          seed, out, threads
"""
from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, fields

from . import crystal
from .errors import ConfigError

MAP_KINDS = ("power", "chebyshev", "joukowsky", "h_d", "lifted")
ZORICH_KINDS = ("power", "joukowsky", "h_d")

SECTIONS = {
    "crystal": ("dim", "group"),
    "automorphic": ("variant",),
    "schroeder": ("map", "d", "scale", "deform", "beta", "theta_max", "alpha"),
    "dynamics": ("r_small", "r_large", "max_iter", "resolution", "slice", "slice_offset",
                 "extent", "sample_radius", "tol", "mobius", "mobius_angle", "samples"),
    "cli": ("seed", "out", "threads"),
}


@dataclass
class SceneConfig:
    dim: int | None = None
    group: str | None = None
    variant: str = "cell"
    map: str = "power"
    d: int = 2
    scale: float | None = None
    deform: str = "identity"
    beta: float = 0.5
    theta_max: float = 0.5
    alpha: float = 1.5
    r_small: float = 1e-6
    r_large: float = 1e6
    max_iter: int = 200
    resolution: int = 256
    slice: str = "xy"
    slice_offset: float = 0.0
    extent: float = 2.0
    sample_radius: float = 0.5
    tol: float = 1e-8
    mobius: str = "none"
    mobius_angle: float = 2.0 * math.pi / 5.0
    samples: int = 10_000
    seed: int | None = None
    out: str = "out"
    threads: int = 1

    def validate(self) -> "SceneConfig":
        """Fill in defaults that depend on other fields and check everything
        against the built-in registry.  Returns self."""
        if self.map not in MAP_KINDS:
            raise ConfigError(f"unknown map {self.map!r}; choose from {', '.join(MAP_KINDS)}")
        zorich_side = self.map in ZORICH_KINDS
        if self.group is not None:
            if self.group not in crystal.GROUPS:
                raise ConfigError(f"unknown group {self.group!r}; choose from {', '.join(crystal.GROUPS)}")
            gdim = 2 if self.group in ("zorich2", "sine2") else 3
            if self.dim is not None and self.dim != gdim:
                raise ConfigError(f"group {self.group} lives in dimension {gdim}, not {self.dim}")
            self.dim = gdim
            is_sine = self.group in crystal.ZORICH_PARTNER
            if zorich_side == is_sine:
                want = "a Zorich group (zorich2, p2)" if zorich_side else "a sine group (sine2, p2-sine)"
                raise ConfigError(f"map {self.map} needs {want}, got {self.group}")
        else:
            if self.dim is None:
                self.dim = 3
            if self.dim not in (2, 3):
                raise ConfigError("dim must be 2 or 3")
            base = "zorich2" if self.dim == 2 else "p2"
            self.group = base if zorich_side else crystal.SINE_PARTNER[base]
        if int(self.d) != self.d:
            raise ConfigError("degree d must be an integer")
        self.d = int(self.d)
        mind = 1 if self.map in ("joukowsky", "h_d") else 2
        if self.d < mind:
            raise ConfigError(f"degree d must be >= {mind} for map {self.map}")
        if self.map == "joukowsky":
            self.d = 1
        if self.scale is not None and self.scale <= 0:
            raise ConfigError("scale must be positive")
        if self.variant not in ("cell", "averaged"):
            raise ConfigError("variant must be 'cell' or 'averaged'")
        if self.deform not in ("identity", "shear", "twist", "radial"):
            raise ConfigError(f"unknown deformation {self.deform!r}")
        if self.deform == "radial" and self.alpha <= 0:
            raise ConfigError("alpha must be positive")
        if not (0 < self.r_small < 1 < self.r_large) or self.max_iter < 1:
            raise ConfigError("need 0 < r_small < 1 < r_large and max_iter >= 1")
        if not 16 <= self.resolution <= 4096:
            raise ConfigError("resolution must be between 16 and 4096")
        if self.slice not in ("xy", "xz", "yz") or (self.dim == 2 and self.slice != "xy"):
            raise ConfigError(f"slice {self.slice!r} is not available in dimension {self.dim}")
        if self.extent <= 0:
            raise ConfigError("extent must be positive")
        if not 0 < self.sample_radius < 1:
            raise ConfigError("sample_radius must lie in (0, 1)")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.mobius not in ("none", "elliptic"):
            raise ConfigError("mobius must be 'none' or 'elliptic'")
        if self.samples < 1:
            raise ConfigError("samples must be positive")
        if self.threads < 1:
            raise ConfigError("threads must be positive")
        if self.seed is not None and self.seed < 0:
            raise ConfigError("seed must be non-negative")
        return self

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError("this command samples points; pass --seed or set seed in [cli]")
        return self.seed

    def effective_scale(self) -> float:
        return float(self.d if self.scale is None else self.scale)

    def as_dict(self) -> dict:
        return asdict(self)


_TYPES = {f.name: f.type for f in fields(SceneConfig)}


def _convert(key: str, raw: str):
    t = _TYPES[key]
    try:
        if "int" in t and "float" not in t:
            return int(raw)
        if "float" in t:
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return raw


def load_config(path: str | None, overrides: dict | None = None) -> SceneConfig:
    """Read an INI scene file (optional) and apply non-None overrides."""
    values = {}
    if path is not None:
        parser = configparser.ConfigParser()
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        for section in parser.sections():
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}] in {path}")
            for key, raw in parser.items(section):
                if key not in SECTIONS[section]:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                values[key] = _convert(key, raw)
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = val
    return SceneConfig(**values).validate()


@dataclass
class Scene:
    config: SceneConfig
    map: object
    base_map: object
    deformation: object
    schroeder: object | None

    @property
    def dim(self) -> int:
        return self.config.dim


def build_scene(cfg: SceneConfig) -> Scene:
    """Construct the maps a validated configuration describes.  Inadmissible
    scales are allowed (the certificate records the failure)."""
    from .automorphic import sine_map, zorich_map
    from .schroeder import (ConformalAutomorphism, HdMap, LiftedMap, QcDeformation,
                            SchroederMap, conjugate)

    group = crystal.get_group(cfg.group)
    A = ConformalAutomorphism.dilation(cfg.dim, cfg.effective_scale())
    schroeder = None
    if cfg.map == "power":
        schroeder = SchroederMap(zorich_map(group), A, strict=False)
        base = schroeder
    elif cfg.map == "chebyshev":
        schroeder = SchroederMap(sine_map(group, cfg.variant), A, strict=False)
        base = schroeder
    elif cfg.map == "lifted":
        schroeder = SchroederMap(sine_map(group, cfg.variant), A, strict=False)
        base = LiftedMap(schroeder)
    else:
        base = HdMap(cfg.dim, cfg.d, cfg.variant)
    g = QcDeformation(cfg.deform, cfg.dim, beta=cfg.beta, theta_max=cfg.theta_max, alpha=cfg.alpha)
    return Scene(cfg, conjugate(base, g), base, g, schroeder)
