"""Run configuration: a single JSON document validated into the library's
config dataclasses. Unknown keys are rejected; CLI flags override fields by
dotted path (e.g. ``planner.beams=4``)."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field, fields

from .errors import ConfigError
from .executor import ExecutionConfig, Extractor
from .planner import PlannerConfig
from .submodels import FaultConfig, ModelConfig
from .world import Corner, GoalKind, TaskGoal, WorldConfig


@dataclass(frozen=True)
class TaskSelection:
    kind: GoalKind = GoalKind.GROUP_BY_COLOR
    corner: Corner | None = None

    def goal(self) -> TaskGoal:
        return TaskGoal(self.kind, self.corner)


@dataclass(frozen=True)
class RunConfig:
    world: WorldConfig = field(default_factory=WorldConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    faults: FaultConfig = field(default_factory=FaultConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    execution: ExecutionConfig = field(default_factory=ExecutionConfig)
    task: TaskSelection = field(default_factory=TaskSelection)
    n_blocks: int = 4
    seeds: tuple[int, ...] = (0,)
    output_dir: str = "out"

    def __post_init__(self):
        if self.n_blocks < 1:
            raise ConfigError("n_blocks must be >= 1")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")


_SECTION_TYPES = {
    "world": WorldConfig,
    "model": ModelConfig,
    "faults": FaultConfig,
    "planner": PlannerConfig,
    "execution": ExecutionConfig,
    "task": TaskSelection,
}

_ENUM_FIELDS = {
    ("execution", "extractor"): Extractor,
    ("task", "kind"): GoalKind,
    ("task", "corner"): Corner,
}


def _coerce(section: str, name: str, value):
    enum_type = _ENUM_FIELDS.get((section, name))
    if enum_type is not None and value is not None and not isinstance(value, enum_type):
        try:
            return enum_type(value)
        except ValueError as e:
            raise ConfigError(f"{section}.{name}: {e}") from None
    return value


def _build_section(section: str, data: dict):
    cls = _SECTION_TYPES[section]
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in '{section}': {sorted(unknown)}")
    kwargs = {k: _coerce(section, k, v) for k, v in data.items()}
    try:
        return cls(**kwargs)
    except (ValueError, ConfigError) as e:
        raise ConfigError(f"in section '{section}': {e}") from None


def config_from_dict(data: dict) -> RunConfig:
    top_known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - top_known
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if key in _SECTION_TYPES:
            if not isinstance(value, dict):
                raise ConfigError(f"section '{key}' must be an object")
            kwargs[key] = _build_section(key, value)
        elif key == "seeds":
            kwargs[key] = tuple(int(s) for s in value)
        else:
            kwargs[key] = value
    try:
        return RunConfig(**kwargs)
    except (ValueError, ConfigError) as e:
        raise ConfigError(str(e)) from None


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return config_from_dict(data)


def config_to_dict(cfg: RunConfig) -> dict:
    def encode(obj):
        if dataclasses.is_dataclass(obj):
            return {f.name: encode(getattr(obj, f.name)) for f in fields(obj)}
        if hasattr(obj, "value"):  # enums
            return obj.value
        if isinstance(obj, tuple):
            return list(obj)
        return obj

    return encode(cfg)


def apply_overrides(cfg: RunConfig, overrides: list[str]) -> RunConfig:
    """Apply ``section.field=value`` (or ``field=value``) assignments."""
    data = config_to_dict(cfg)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like path=value: {item!r}")
        path, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw  # bare strings allowed
        node = data
        parts = path.split(".")
        for p in parts[:-1]:
            if p not in node or not isinstance(node[p], dict):
                raise ConfigError(f"unknown override path: {path!r}")
            node = node[p]
        if parts[-1] not in node:
            raise ConfigError(f"unknown override path: {path!r}")
        node[parts[-1]] = value
    return config_from_dict(data)
