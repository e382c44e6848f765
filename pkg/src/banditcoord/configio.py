"""Scenario config files: a sectioned key=value text format with units in the
key names, plus canonicalization and digesting for reproducible manifests.
"""
from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import asdict

from .errors import ConfigError
from .scenario import AlgoVariant, ScenarioConfig

_SECTIONS = {
    "world": ("kind", "width_units", "height_units"),
    "cameras": ("count", "placement", "positions", "fov_radius_units", "aov_rad",
                "direction_count", "comm_range_units", "bandwidth"),
    "delays": ("tau_f_seconds", "tau_c_seconds"),
    "run": ("algorithms", "rounds", "budget_seconds", "trials", "seed",
            "dfs_sg_charge_compute", "dfs_bsg_compute_evals"),
    "sweep": ("camera_counts", "map_side_units"),
}
_KEY_SECTION = {key: section for section, keys in _SECTIONS.items() for key in keys}


def _parser(text: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    return parser


def apply_overrides(parser: configparser.ConfigParser, overrides) -> None:
    """Apply ``key=value`` (or ``section.key=value``) overrides in place."""
    for item in overrides or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key = key.strip()
        if "." in key:
            section, _, bare = key.partition(".")
            if _KEY_SECTION.get(bare) != section:
                raise ConfigError(f"unknown override key {key!r}")
            key = bare
        elif key not in _KEY_SECTION:
            raise ConfigError(f"unknown override key {key!r}")
        section = _KEY_SECTION[key]
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, value.strip())


def _get(parser, section, key, conv, default):
    if not parser.has_section(section) or key not in parser[section]:
        return default
    raw = parser[section][key].strip()
    try:
        return conv(raw)
    except (ValueError, ConfigError) as exc:
        raise ConfigError(f"bad value for {section}.{key}: {raw!r} ({exc})") from exc


def _bool(raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError("expected a boolean")


def _positions(raw: str):
    points = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        x, _, y = chunk.partition(",")
        points.append((float(x), float(y)))
    return tuple(points)


def _floats(raw: str):
    return tuple(float(v) for v in raw.split(",") if v.strip())


def _ints(raw: str):
    return tuple(int(v) for v in raw.split(",") if v.strip())


def _algorithms(raw: str):
    return tuple(AlgoVariant.parse(tok) for tok in raw.split(",") if tok.strip())


def _compute_evals(raw: str):
    if raw.lower() == "auto":
        return None
    return float(raw)


def config_from_parser(parser: configparser.ConfigParser) -> ScenarioConfig:
    config = ScenarioConfig(
        world_kind=_get(parser, "world", "kind", str, "blank"),
        width=_get(parser, "world", "width_units", float, 50.0),
        height=_get(parser, "world", "height_units", float, 50.0),
        camera_count=_get(parser, "cameras", "count", int, 8),
        placement=_get(parser, "cameras", "placement", str, "uniform"),
        positions=_get(parser, "cameras", "positions", _positions, None),
        fov_radius=_get(parser, "cameras", "fov_radius_units", float, 8.0),
        aov=_get(parser, "cameras", "aov_rad", float, math.pi / 3),
        direction_count=_get(parser, "cameras", "direction_count", int, 16),
        comm_range=_get(parser, "cameras", "comm_range_units", float, 16.0),
        bandwidth=_get(parser, "cameras", "bandwidth", int, 1),
        tau_f=_get(parser, "delays", "tau_f_seconds", float, 0.0),
        tau_c=_get(parser, "delays", "tau_c_seconds", float, 0.0),
        algorithms=_get(parser, "run", "algorithms", _algorithms, (AlgoVariant("anaconda"),)),
        rounds=_get(parser, "run", "rounds", int, None),
        budget_seconds=_get(parser, "run", "budget_seconds", float, None),
        trials=_get(parser, "run", "trials", int, 1),
        seed=_get(parser, "run", "seed", int, 0),
        camera_counts=_get(parser, "sweep", "camera_counts", _ints, None),
        map_sides=_get(parser, "sweep", "map_side_units", _floats, None),
        dfs_sg_charge_compute=_get(parser, "run", "dfs_sg_charge_compute", _bool, True),
        dfs_bsg_compute_evals=_get(parser, "run", "dfs_bsg_compute_evals", _compute_evals, None),
    )
    return config


def parse_config(text: str, overrides=None) -> ScenarioConfig:
    parser = _parser(text)
    apply_overrides(parser, overrides)
    config = config_from_parser(parser)
    errors = config.validate()
    if errors:
        raise ConfigError("; ".join(errors))
    return config


def canonical_text(config: ScenarioConfig) -> str:
    """A normalized, field-sorted rendering of the effective config; two runs
    with equal canonical text and seed produce identical outputs."""
    fields = asdict(config)
    lines = []
    for key in sorted(fields):
        value = fields[key]
        if isinstance(value, tuple):
            value = list(value)
        lines.append(f"{key} = {value!r}")
    return "\n".join(lines) + "\n"


def config_digest(config: ScenarioConfig) -> str:
    return hashlib.sha256(canonical_text(config).encode()).hexdigest()
