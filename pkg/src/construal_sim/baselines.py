"""Comparison models: fixed-construal planners and memory-probe decision rules."""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass

from .errors import CapExceeded, DataFileError, Unreachable
from .jit import landing_distribution
from .metrics import wasserstein1
from .physics import EngineConfig, NoiseParams
from .planner import PlannerParams, sample_plan
from .vgc import _landings, execute_plan
from .worlds import GridWorld, PlinkoWorld, replace_obstacle, validate_plinko

MIN_SHIFT = 10.0
MAX_SHIFT = 50.0
_P_MAX = math.nextafter(1.0, 0.0)
_P_MIN = math.nextafter(0.0, 1.0)


@dataclass(frozen=True)
class ProbePair:
    """Two placements of one obstacle: where it was, and a shifted lure.

    Placements are translations of the obstacle polygon; the true one is (0, 0).
    """

    world_id: str
    object_id: str
    lure_dx: float
    lure_dy: float

    def __post_init__(self):
        shift = math.hypot(self.lure_dx, self.lure_dy)
        if not (MIN_SHIFT <= shift <= MAX_SHIFT):
            raise ValueError(f"lure shift {shift:.3f} px outside [{MIN_SHIFT:g}, {MAX_SHIFT:g}]")

    @property
    def true_position(self) -> tuple[float, float]:
        return (0.0, 0.0)

    @property
    def lure_position(self) -> tuple[float, float]:
        return (self.lure_dx, self.lure_dy)

    @property
    def shift(self) -> float:
        return math.hypot(self.lure_dx, self.lure_dy)

    def placed(self, world: PlinkoWorld, placement) -> PlinkoWorld:
        """``world`` with the probed obstacle translated by ``placement``."""
        dx, dy = placement
        poly = tuple((x + dx, y + dy) for x, y in world.by_id[self.object_id].polygon)
        return validate_plinko(replace_obstacle(world, self.object_id, poly))

    @classmethod
    def random(cls, world_id, object_id, rng: random.Random) -> "ProbePair":
        r = rng.uniform(MIN_SHIFT, MAX_SHIFT)
        th = rng.uniform(0.0, 2.0 * math.pi)
        return cls(world_id, object_id, r * math.cos(th), r * math.sin(th))


def load_probes(path) -> list[ProbePair]:
    """Read a probe CSV with columns world_id, object_id, lure_dx, lure_dy."""
    need = ("world_id", "object_id", "lure_dx", "lure_dy")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or any(c not in reader.fieldnames for c in need):
            raise DataFileError(f"{path}: header must contain {', '.join(need)}")
        out = []
        for lineno, row in enumerate(reader, start=2):
            try:
                out.append(ProbePair(row["world_id"], row["object_id"],
                                     float(row["lure_dx"]), float(row["lure_dy"])))
            except (TypeError, ValueError) as exc:
                raise DataFileError(f"{path}: row {lineno}: {exc}") from None
    return out


# -- planners ------------------------------------------------------------------------

def maximal_planner(world: GridWorld, params: PlannerParams, rng: random.Random):
    """Plan with every object represented: ``(plan, expansions, construal)``."""
    construal = frozenset(world.object_ids)
    plan, expansions = sample_plan(world, construal, world.start, world.goal, params, rng)
    return plan, expansions, construal


def random_construal_planner(world: GridWorld, params: PlannerParams, inclusion_p: float = 0.5,
                             rng: random.Random | None = None):
    """Plan under a random construal and execute in the true world.

    Returns ``(steps, expansions, construal)`` where ``steps`` is None when the
    plan never reaches the goal (search failure or a blocked move).
    """
    if not 0.0 <= inclusion_p <= 1.0:
        raise ValueError("inclusion_p must lie in [0, 1]")
    rng = rng or random.Random(0)
    construal = frozenset(o for o in world.object_ids if rng.random() < inclusion_p)
    try:
        plan, expansions = sample_plan(world, construal, world.start, world.goal, params, rng)
    except (Unreachable, CapExceeded) as exc:
        return None, exc.expansions, construal
    return execute_plan(world, plan, 4 * world.n_cells), expansions, construal


# -- probe decision rules ---------------------------------------------------------------

def _two_way(logit: float) -> float:
    """Probability of the first option given its log-odds, kept inside (0, 1)."""
    if logit >= 0:
        p = 1.0 / (1.0 + math.exp(-logit))
    else:
        z = math.exp(logit)
        p = z / (1.0 + z)
    return min(max(p, _P_MIN), _P_MAX)


def signal_detection_response(encode_count: int, probe: ProbePair, kappa_sd: float,
                              choice_alpha: float) -> float:
    """P(choose the true placement) after ``encode_count`` noiseless encodings.

    The posterior over position is an isotropic Gaussian at the true placement
    with sd ``kappa_sd / sqrt(n)``; the two placements are compared through
    their log densities.
    """
    if kappa_sd <= 0:
        raise ValueError("kappa_sd must be > 0")
    if encode_count < 0:
        raise ValueError("encode_count must be >= 0")
    if encode_count == 0:
        return 0.5
    var = kappa_sd * kappa_sd / encode_count
    # log p(true) - log p(lure); normalizers cancel
    diff = (probe.lure_dx ** 2 + probe.lure_dy ** 2) / (2.0 * var)
    return _two_way(choice_alpha * diff)


def reconstructive_response(world: PlinkoWorld, probe: ProbePair, noise: NoiseParams,
                            config: EngineConfig, rollouts: int, choice_alpha: float,
                            seed: int) -> float:
    """P(choose the true placement) by re-simulating both candidates.

    Each placement is scored by the W1 distance between its landing samples and
    those of the remembered world, normalized by the distance of a uniform
    spread over the floor.
    """
    if choice_alpha <= 0:
        raise ValueError("choice_alpha must be > 0")
    ref = _landed(world, noise, config, rollouts, seed)
    qa = _landed(probe.placed(world, probe.true_position), noise, config, rollouts, seed)
    qb = _landed(probe.placed(world, probe.lure_position), noise, config, rollouts, seed)
    uniform = [(i + 0.5) * world.width / rollouts for i in range(rollouts)]
    norm = wasserstein1(uniform, ref)
    if norm == 0:
        return 0.5
    da = wasserstein1(qa, ref) / norm
    db = wasserstein1(qb, ref) / norm
    return _two_way((db - da) / choice_alpha)


def _landed(world, noise, config, rollouts, seed):
    return landing_distribution(world, _landings(world, None, noise, config, rollouts, seed)).samples


def recall_link(m: float) -> float:
    """Two-alternative accuracy implied by construal weight ``m``."""
    if not 0.0 <= m <= 1.0:
        raise ValueError("construal weight must lie in [0, 1]")
    return 0.5 + 0.5 * m

