"""Flat ``key=value`` parameter files.

Blank lines and ``#`` comments are ignored. Every key must be known; a typo is
an error rather than a silently ignored setting. Grid files use the same
syntax with comma-separated value lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import ParamFileError
from .jit import JitParams
from .physics import EngineConfig, NoiseParams
from .planner import PlannerParams
from .vgc import VgcParams

_INT_KEYS = {"expansion_cap", "n_rollouts", "replan_cap", "value_rollouts", "max_objects"}
_GROUPS = {
    "planner": ("alpha_d", "alpha_h", "expansion_cap"),
    "jit": ("gamma", "spotlight_radius", "n_rollouts", "replan_cap"),
    "noise": ("sigma_sq", "kappa", "s_sq"),
    "config": ("dt", "gravity", "base_restitution", "max_sim_time", "penetration_tolerance", "velocity_cap"),
    "vgc": ("luce_alpha", "value_rollouts", "failure_value", "max_objects"),
    "probe": ("kappa_sd", "choice_alpha", "inclusion_p", "tv_scale"),
}
KNOWN_KEYS = frozenset(k for keys in _GROUPS.values() for k in keys) | {"utility"}


def _convert(key, raw, where):
    if key == "utility":
        if raw not in ("w1", "tv"):
            raise ParamFileError(f"{where}: utility must be w1 or tv")
        return raw
    try:
        return int(raw) if key in _INT_KEYS else float(raw)
    except ValueError:
        raise ParamFileError(f"{where}: {key} value {raw!r} is not a number") from None


def _lines(text, path):
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{path}:{lineno}"
        if "=" not in line:
            raise ParamFileError(f"{where}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ParamFileError(f"{where}: unknown key {key!r}")
        yield key, raw, where


def parse_params(text: str, path: str = "<params>") -> dict:
    out = {}
    for key, raw, where in _lines(text, path):
        if key in out:
            raise ParamFileError(f"{where}: duplicate key {key!r}")
        out[key] = _convert(key, raw, where)
    return out


def parse_grid(text: str, path: str = "<grid>") -> dict[str, list]:
    out = {}
    for key, raw, where in _lines(text, path):
        if key in out:
            raise ParamFileError(f"{where}: duplicate key {key!r}")
        vals = [v.strip() for v in raw.split(",") if v.strip()]
        if not vals:
            raise ParamFileError(f"{where}: {key} has no values")
        out[key] = [_convert(key, v, where) for v in vals]
    return out


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_params(path) -> dict:
    return parse_params(_read(path), str(path))


def load_grid(path) -> dict[str, list]:
    return parse_grid(_read(path), str(path))


def format_params(values: dict) -> str:
    return "".join(f"{k}={v if isinstance(v, str) else repr(v)}\n" for k, v in values.items())


@dataclass(frozen=True)
class ModelSettings:
    """Every model parameter bundle, with table defaults filled in."""

    planner: PlannerParams = PlannerParams()
    jit: JitParams = JitParams()
    noise: NoiseParams = NoiseParams()
    config: EngineConfig = EngineConfig()
    vgc: VgcParams = VgcParams()
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, values: dict, base: "ModelSettings | None" = None) -> "ModelSettings":
        base = base or cls()
        unknown = set(values) - KNOWN_KEYS
        if unknown:
            raise ParamFileError(f"unknown keys: {', '.join(sorted(unknown))}")

        def pick(group):
            return {k: values[k] for k in _GROUPS[group] if k in values}

        try:
            return cls(
                planner=replace(base.planner, **pick("planner")),
                jit=replace(base.jit, **pick("jit")),
                noise=replace(base.noise, **pick("noise")),
                config=replace(base.config, **pick("config")),
                vgc=replace(base.vgc, **pick("vgc")),
                extra={**base.extra, **pick("probe"), **({"utility": values["utility"]} if "utility" in values else {})},
            )
        except ValueError as exc:
            raise ParamFileError(str(exc)) from None
