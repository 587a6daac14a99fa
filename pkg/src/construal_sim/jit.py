"""Just-in-time construal formation for grid planning and ball prediction.

A rollout alternates simulation with a cheap local lookahead. Objects the
lookahead flags are encoded into a working-memory trace, and unrefreshed
objects decay with power-law retention.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field

from . import geometry
from .errors import AllRolloutsTimedOut, ConstrualSimError, ReplanCapExceeded
from .parallel import pmap
from .physics import EngineConfig, NoiseParams, Trajectory, run_rollout
from .planner import Plan, PlannerParams, sample_plan
from .rng import stream
from .worlds import GridWorld, PlinkoWorld


@dataclass(frozen=True)
class JitParams:
    gamma: float = 0.0
    spotlight_radius: float = 25.0
    n_rollouts: int = 500
    replan_cap: int = 20

    def __post_init__(self):
        if not math.isfinite(self.gamma) or self.gamma < 0:
            raise ValueError("gamma must be finite and >= 0")
        if self.spotlight_radius <= 0:
            raise ValueError("spotlight_radius must be > 0")
        if self.n_rollouts < 1 or self.replan_cap < 1:
            raise ValueError("n_rollouts and replan_cap must be >= 1")


@dataclass
class MemoryTrace:
    """Working-memory contents of one rollout.

    Retention is realised with one uniform threshold per encoding episode: an
    object encoded at step ``s`` is still present at step ``s + t`` iff
    ``t ** -gamma`` has not dropped below its threshold. That gives a per-step
    survival of ``(t / (t - 1)) ** -gamma`` and cumulative survival
    ``t ** -gamma``, and couples runs with different gamma monotonically.
    """

    present: set[str] = field(default_factory=set)
    last_encoded: dict[str, int] = field(default_factory=dict)
    steps_present: Counter = field(default_factory=Counter)
    _thresholds: dict[str, float] = field(default_factory=dict, repr=False)

    def encode(self, flagged, step: int) -> "MemoryTrace":
        for oid in flagged:
            self.present.add(oid)
            self.last_encoded[oid] = step
            self._thresholds.pop(oid, None)
        return self

    def cull(self, step: int, gamma: float, rng: random.Random) -> "MemoryTrace":
        if gamma == 0 or not self.present:
            return self
        for oid in sorted(self.present):
            t = step - self.last_encoded[oid]
            if t < 2:
                continue
            u = self._thresholds.get(oid)
            if u is None:
                u = self._thresholds[oid] = rng.random()
            if t ** -gamma < u:
                self.present.discard(oid)
                self._thresholds.pop(oid, None)
        return self

    def tally(self) -> None:
        self.steps_present.update(self.present)

    def copy(self) -> "MemoryTrace":
        return MemoryTrace(
            set(self.present), dict(self.last_encoded), Counter(self.steps_present), dict(self._thresholds)
        )


def encode(trace: MemoryTrace, flagged, step: int) -> MemoryTrace:
    return trace.copy().encode(flagged, step)


def cull(trace: MemoryTrace, step: int, gamma: float, rng: random.Random) -> MemoryTrace:
    return trace.copy().cull(step, gamma, rng)


# -- lookahead ---------------------------------------------------------------------

def lookahead_grid(world: GridWorld, plan: Plan, position_index: int, construal=()) -> set[str]:
    """Objects occupying the next cell of the plan (empty at the last state)."""
    if position_index + 1 >= len(plan.states):
        return set()
    oid = world.owner.get(plan.states[position_index + 1])
    return {oid} if oid is not None else set()


def lookahead_spotlight(world: PlinkoWorld, ball_position, radius: float) -> set[str]:
    """Encodable obstacles within ``radius`` of the ball centre."""
    x, y = ball_position
    out = set()
    for o in world.obstacles:
        if not world.encodable(o.id):
            continue
        cx, cy, reach = o.bounds
        lim = reach + radius
        if (x - cx) ** 2 + (y - cy) ** 2 > lim * lim:
            continue
        if geometry.distance(o.polygon, x, y) <= radius:
            out.add(o.id)
    return out


# -- grid -----------------------------------------------------------------------------

@dataclass
class JitPlanOutcome:
    plan: Plan
    trace: MemoryTrace
    expansions: int
    replans: int

    @property
    def steps(self) -> int:
        return self.plan.steps


def run_jit_plan(
    world: GridWorld, planner: PlannerParams, jit: JitParams, rng: random.Random, memory_rng=None
) -> JitPlanOutcome:
    """Follow a sampled plan, replanning whenever the next step hits a new object."""
    memory_rng = memory_rng or rng
    trace = MemoryTrace()
    cross = world.center_cross_id()
    if cross is not None:
        trace.encode({cross}, 0)
    pos, goal = world.start, world.goal
    plan, expansions = sample_plan(world, trace.present, pos, goal, planner, rng)
    idx = 0
    executed = [pos]
    step = 0
    replans = 0
    while pos != goal:
        flagged = lookahead_grid(world, plan, idx)
        if flagged - trace.present:
            trace.encode(flagged, step)
            replans += 1
            if replans > jit.replan_cap:
                raise ReplanCapExceeded(f"more than {jit.replan_cap} replans")
            plan, n = sample_plan(world, trace.present, pos, goal, planner, rng)
            expansions += n
            idx = 0
            continue
        idx += 1
        pos = plan.states[idx]
        executed.append(pos)
        step += 1
        trace.cull(step, jit.gamma, memory_rng)
        trace.tally()
    return JitPlanOutcome(Plan(tuple(executed)), trace, expansions, replans)


def _grid_rollout(world, planner, jit, seed, i):
    rng = stream(seed, "jit-grid", i, "plan")
    mem = stream(seed, "jit-grid", i, "memory")
    try:
        return run_jit_plan(world, planner, jit, rng, mem)
    except ConstrualSimError as exc:
        return exc


# -- physics -----------------------------------------------------------------------

def run_jit_physics(
    world: PlinkoWorld,
    noise: NoiseParams,
    config: EngineConfig,
    jit: JitParams,
    rng: random.Random,
    memory_rng=None,
) -> tuple[Trajectory, MemoryTrace]:
    """Simulate one drop while building a construal with the spotlight.

    Only construed obstacles take part in the dynamics. Each step culls, looks
    around the ball, and encodes what it sees.
    """
    memory_rng = memory_rng or rng
    trace = MemoryTrace()
    radius = jit.spotlight_radius

    def on_step(step, x, y):
        trace.cull(step, jit.gamma, memory_rng)
        trace.encode(lookahead_spotlight(world, (x, y), radius), step)
        trace.tally()

    traj = run_rollout(world, noise, config, rng, active=trace.present, on_step=on_step)
    return traj, trace


def _physics_rollout(world, noise, config, jit, seed, i):
    rng = stream(seed, "rollout", i, "physics")
    mem = stream(seed, "rollout", i, "memory")
    return run_jit_physics(world, noise, config, jit, rng, mem)


def jit_physics_rollouts(world, noise, config, jit, n_rollouts, seed):
    """List of ``(trajectory, trace)`` for rollout indices ``0..n-1``."""
    return pmap(_physics_rollout, [(world, noise, config, jit, seed, i) for i in range(n_rollouts)])


def jit_grid_rollouts(world, planner, jit, n_rollouts, seed):
    """List of JitPlanOutcome (or the exception that ended the rollout)."""
    return pmap(_grid_rollout, [(world, planner, jit, seed, i) for i in range(n_rollouts)])


# -- Monte-Carlo aggregates -----------------------------------------------------------

@dataclass
class ConstrualEstimate:
    weights: dict[str, float]
    n_rollouts: int
    seed: int
    failures: int = 0
    # mean number of steps each object spent in working memory
    mean_steps_present: dict[str, float] = field(default_factory=dict)

    def size(self) -> float:
        return sum(self.weights.values())


def estimate_construal(
    world,
    jit: JitParams,
    *,
    planner: PlannerParams | None = None,
    noise: NoiseParams | None = None,
    config: EngineConfig | None = None,
    n_rollouts: int | None = None,
    seed: int = 0,
) -> ConstrualEstimate:
    """Fraction of rollouts whose final working memory holds each object."""
    n = jit.n_rollouts if n_rollouts is None else n_rollouts
    if n < 1:
        raise ValueError("n_rollouts must be >= 1")
    counts = Counter()
    steps = Counter()
    failures = 0
    if isinstance(world, GridWorld):
        ids = world.object_ids
        for out in jit_grid_rollouts(world, planner or PlannerParams(), jit, n, seed):
            if isinstance(out, Exception):
                failures += 1
                continue
            counts.update(out.trace.present)
            steps.update(out.trace.steps_present)
    else:
        ids = world.object_ids
        for _, trace in jit_physics_rollouts(
            world, noise or NoiseParams(), config or EngineConfig(), jit, n, seed
        ):
            counts.update(trace.present)
            steps.update(trace.steps_present)
    return ConstrualEstimate(
        weights={oid: counts[oid] / n for oid in ids},
        n_rollouts=n,
        seed=seed,
        failures=failures,
        mean_steps_present={oid: steps[oid] / n for oid in ids},
    )


@dataclass
class PredictionDistribution:
    samples: list[float]
    bucket_counts: list[int] | None
    timed_out: int

    def bucket_probs(self) -> list[float] | None:
        if self.bucket_counts is None:
            return None
        total = sum(self.bucket_counts)
        return [c / total for c in self.bucket_counts]


def landing_distribution(world: PlinkoWorld, landings) -> PredictionDistribution:
    """Summarize ``(landed, landing_x)`` pairs."""
    landings = list(landings)
    xs = [x for landed, x in landings if landed]
    timed_out = len(landings) - len(xs)
    if not xs:
        raise AllRolloutsTimedOut(f"all {timed_out} rollouts timed out")
    counts = None
    if world.bucket_count:
        counts = [0] * world.bucket_count
        for x in xs:
            counts[world.bucket_of(x)] += 1
    return PredictionDistribution(xs, counts, timed_out)


def predict_landing(world, noise, config, jit, n_rollouts, seed) -> PredictionDistribution:
    """Aggregate landing positions of ``n_rollouts`` JIT simulations."""
    if n_rollouts < 1:
        raise ValueError("n_rollouts must be >= 1")
    runs = jit_physics_rollouts(world, noise, config, jit, n_rollouts, seed)
    return landing_distribution(world, [(t.landed, t.landing_x) for t, _ in runs])
