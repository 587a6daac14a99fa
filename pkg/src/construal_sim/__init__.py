"""Just-in-time and value-guided construal models for planning and physical prediction."""

from .errors import ConstrualSimError
from .jit import JitParams, MemoryTrace, estimate_construal, predict_landing, run_jit_physics, run_jit_plan
from .physics import TABLE_NOISE, EngineConfig, NoiseParams, run_rollout
from .planner import PlannerParams, sample_plan, softmax_astar
from .vgc import VgcParams, construal_weights, luce_marginals
from .worlds import GridObject, GridWorld, Obstacle, PlinkoWorld, load_world, parse_world, serialize_world

__version__ = "0.1.0"

__all__ = [
    "ConstrualSimError", "EngineConfig", "GridObject", "GridWorld", "JitParams", "MemoryTrace",
    "NoiseParams", "Obstacle", "PlannerParams", "PlinkoWorld", "TABLE_NOISE", "VgcParams",
    "construal_weights", "estimate_construal", "load_world", "luce_marginals", "parse_world",
    "predict_landing", "run_jit_physics", "run_jit_plan", "run_rollout", "sample_plan",
    "serialize_world", "softmax_astar",
]
