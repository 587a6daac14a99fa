"""Static value-guided construal: score every subset of objects, then Luce-choose.

Evaluations share random streams across construals (rollout ``k`` always uses
the same stream), and both domains cache per-rollout results keyed by the
construal restricted to the objects that rollout actually touched. Reported
costs still count every evaluation as if it had been run.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .errors import AllRolloutsTimedOut, CapExceeded, NonFiniteScore, TooManyObjects, Unreachable
from .jit import landing_distribution
from .metrics import total_variation, wasserstein1
from .physics import EngineConfig, NoiseParams, run_rollout
from .planner import Plan, PlannerParams, sample_plan
from .rng import stream
from .worlds import GridWorld, PlinkoWorld


@dataclass(frozen=True)
class VgcParams:
    luce_alpha: float = 0.1
    value_rollouts: int = 500
    failure_value: float | None = None  # None -> -10 * number of grid cells
    max_objects: int = 20

    def __post_init__(self):
        if not self.luce_alpha > 0:
            raise ValueError("luce_alpha must be > 0")
        if self.value_rollouts < 1:
            raise ValueError("value_rollouts must be >= 1")

    def failure_for(self, world: GridWorld) -> float:
        if self.failure_value is not None:
            return self.failure_value
        return -10.0 * world.n_cells


@dataclass(frozen=True)
class ConstrualScore:
    construal: frozenset
    utility: float

    @property
    def cost(self) -> int:
        return len(self.construal)

    @property
    def vor(self) -> float:
        return self.utility - self.cost


def enumerate_construals(objects, max_objects: int = 20):
    """Every subset of ``objects``, by binary counting over the sorted ids."""
    ids = sorted(objects)
    if len(ids) > max_objects:
        raise TooManyObjects(f"{len(ids)} objects exceeds the limit of {max_objects}")
    n = len(ids)
    for mask in range(1 << n):
        yield frozenset(ids[i] for i in range(n) if mask >> i & 1)


def luce_probabilities(scores, luce_alpha: float) -> list[float]:
    vals = [s.vor / luce_alpha for s in scores]
    if not all(math.isfinite(v) for v in vals):
        raise NonFiniteScore("every construal score must be finite")
    top = max(vals)
    w = [math.exp(v - top) for v in vals]
    z = math.fsum(w)
    return [x / z for x in w]


def luce_marginals(scores, luce_alpha: float, objects=None) -> dict[str, float]:
    """P(object in construal) under p(c) proportional to exp(VOR(c) / alpha)."""
    scores = list(scores)
    probs = luce_probabilities(scores, luce_alpha)
    ids = set(objects or ()).union(*(s.construal for s in scores))
    acc = {oid: [] for oid in ids}
    for s, p in zip(scores, probs):
        for oid in s.construal:
            acc[oid].append(p)
    return {oid: min(1.0, math.fsum(v)) for oid, v in sorted(acc.items())}


# -- grid -------------------------------------------------------------------------

def execute_plan(world: GridWorld, plan: Plan, max_steps: int) -> int | None:
    """Run a plan in the true world; blocked moves leave the agent in place.

    Returns the number of moves taken to reach the goal, or None when the goal
    is not reached within ``max_steps``.
    """
    owner = world.owner
    states = plan.states
    pos, i, steps = states[0], 0, 0
    while pos != world.goal:
        if steps >= max_steps or i + 1 >= len(states):
            return None
        nxt = states[i + 1]
        steps += 1
        if nxt in owner:
            # the plan never changes, so the agent retries this move until the cap
            return None
        pos, i = nxt, i + 1
    return steps


def _grid_sample(world, construal, planner, rng, touched, failure, max_steps):
    try:
        plan, expansions = sample_plan(world, construal, world.start, world.goal, planner, rng, touched)
    except (Unreachable, CapExceeded) as exc:
        return failure, exc.expansions, None
    steps = execute_plan(world, plan, max_steps)
    return (failure if steps is None else -float(steps)), expansions, plan


def grid_construal_value(
    world: GridWorld,
    construal,
    planner: PlannerParams,
    value_rollouts: int,
    failure_value: float,
    rng: random.Random,
) -> float:
    """Mean executed value of plans made under ``construal``."""
    max_steps = 4 * world.n_cells
    vals = [
        _grid_sample(world, frozenset(construal), planner, rng, None, failure_value, max_steps)[0]
        for _ in range(value_rollouts)
    ]
    return math.fsum(vals) / value_rollouts


@dataclass
class VgcResult:
    scores: list[ConstrualScore]
    probabilities: list[float]
    marginals: dict[str, float]
    expansions: int  # summed over every construal evaluation

    @property
    def best(self) -> ConstrualScore:
        return max(self.scores, key=lambda s: s.vor)

    def expected_utility(self) -> float:
        return math.fsum(p * s.utility for p, s in zip(self.probabilities, self.scores))

    def expected_size(self) -> float:
        return math.fsum(p * s.cost for p, s in zip(self.probabilities, self.scores))


class _RolloutCache:
    """Per-rollout results keyed by the construal restricted to touched objects."""

    def __init__(self, n):
        self.entries = [[] for _ in range(n)]

    def get(self, k, construal):
        for touched, key, value in self.entries[k]:
            if construal & touched == key:
                return value
        return None

    def put(self, k, construal, touched, value):
        touched = frozenset(touched)
        self.entries[k].append((touched, construal & touched, value))


def vgc_grid(world: GridWorld, planner: PlannerParams, vgc: VgcParams, seed: int) -> VgcResult:
    """Score every construal of a grid world and marginalize the Luce choice."""
    failure = vgc.failure_for(world)
    max_steps = 4 * world.n_cells
    n = vgc.value_rollouts
    cache = _RolloutCache(n)
    scores = []
    expansions = 0
    for c in enumerate_construals(world.object_ids, vgc.max_objects):
        vals = []
        for k in range(n):
            hit = cache.get(k, c)
            if hit is None:
                touched = set()
                rng = stream(seed, "vgc-grid", k)
                value, exp, _ = _grid_sample(world, c, planner, rng, touched, failure, max_steps)
                hit = (value, exp)
                cache.put(k, c, touched, hit)
            vals.append(hit[0])
            expansions += hit[1]
        scores.append(ConstrualScore(c, math.fsum(vals) / n))
    probs = luce_probabilities(scores, vgc.luce_alpha)
    return VgcResult(scores, probs, luce_marginals(scores, vgc.luce_alpha, world.object_ids), expansions)


# -- physics ------------------------------------------------------------------------

def _landings(world, construal, noise, config, n, seed, cache=None):
    out = []
    for k in range(n):
        hit = None if cache is None or construal is None else cache.get(k, construal)
        if hit is None:
            touched = set() if cache is not None and construal is not None else None
            rng = stream(seed, "rollout", k, "physics")
            t = run_rollout(world, noise, config, rng, active=construal, touched=touched)
            hit = (t.landed, t.landing_x)
            if touched is not None:
                cache.put(k, construal, touched, hit)
        out.append(hit)
    return out


def physics_construal_utility_w1(world, construal, noise, config, value_rollouts, seed, _cache=None, _truth=None) -> float:
    """Negative W1 between landings under ``construal`` and under the full world."""
    truth = _truth or landing_distribution(world, _landings(world, None, noise, config, value_rollouts, seed))
    mine = landing_distribution(world, _landings(world, frozenset(construal), noise, config, value_rollouts, seed, _cache))
    return 0.0 - wasserstein1(mine.samples, truth.samples)


def physics_construal_utility_tv(
    world, construal, noise, config, value_rollouts, seed, scale: float = 1.0, _cache=None, _truth=None
) -> float:
    """Negative scaled total variation between bucket distributions."""
    if not world.bucket_count:
        raise ValueError("total-variation utility needs a world with buckets")
    truth = _truth or landing_distribution(world, _landings(world, None, noise, config, value_rollouts, seed))
    mine = landing_distribution(world, _landings(world, frozenset(construal), noise, config, value_rollouts, seed, _cache))
    return 0.0 - scale * total_variation(mine.bucket_probs(), truth.bucket_probs())


def physics_objects(world: PlinkoWorld) -> list[str]:
    """Obstacles that can affect a rollout and so take part in enumeration."""
    return [o.id for o in world.obstacles if world.encodable(o.id)]


def physics_utilities(world, noise, config, vgc: VgcParams, seed, utility="w1", tv_scale=1.0):
    """Utility of every construal over the simulation-relevant obstacles."""
    n = vgc.value_rollouts
    truth = landing_distribution(world, _landings(world, None, noise, config, n, seed))
    cache = _RolloutCache(n)
    out = []
    for c in enumerate_construals(physics_objects(world), vgc.max_objects):
        if utility == "w1":
            u = physics_construal_utility_w1(world, c, noise, config, n, seed, cache, truth)
        elif utility == "tv":
            u = physics_construal_utility_tv(world, c, noise, config, n, seed, tv_scale, cache, truth)
        else:
            raise ValueError(f"unknown utility {utility!r}")
        out.append(ConstrualScore(c, u))
    return out


def vgc_physics(world, noise, config, vgc: VgcParams, seed, utility="w1", tv_scale=1.0) -> VgcResult:
    scores = physics_utilities(world, noise, config, vgc, seed, utility, tv_scale)
    probs = luce_probabilities(scores, vgc.luce_alpha)
    marg = luce_marginals(scores, vgc.luce_alpha, world.object_ids)
    return VgcResult(scores, probs, marg, 0)


def tv_scale_for_corpus(worlds, noise, config, vgc: VgcParams, seed) -> float:
    """Constant that equates the mean |TV utility| with the mean |W1 utility|."""
    w1, tv = [], []
    for w in worlds:
        w1 += [abs(s.utility) for s in physics_utilities(w, noise, config, vgc, seed, "w1")]
        tv += [abs(s.utility) for s in physics_utilities(w, noise, config, vgc, seed, "tv")]
    mean_tv = math.fsum(tv) / len(tv)
    if mean_tv == 0:
        return 1.0
    return (math.fsum(w1) / len(w1)) / mean_tv


def construal_weights(world, vgc: VgcParams, seed: int, *, planner=None, noise=None, config=None,
                      utility="w1", tv_scale=1.0) -> VgcResult:
    if isinstance(world, GridWorld):
        return vgc_grid(world, planner or PlannerParams(), vgc, seed)
    return vgc_physics(world, noise or NoiseParams(), config or EngineConfig(), vgc, seed, utility, tv_scale)
