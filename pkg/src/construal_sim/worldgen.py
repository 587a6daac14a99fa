"""Seeded procedural worlds and screening of dissociation stimuli."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass

from . import geometry
from .errors import AllRolloutsTimedOut, GenerationExhausted
from .physics import EngineConfig, NoiseParams, run_rollout
from .planner import bfs_distance
from .rng import stream
from .worlds import GridObject, GridWorld, Obstacle, PlinkoWorld, validate_grid, validate_plinko, without_obstacle

MAX_REJECTIONS = 10_000


# -- grid worlds ---------------------------------------------------------------------

def _grow_polyomino(rng, size, free, width, height):
    seed_cell = rng.choice(sorted(free))
    cells = [seed_cell]
    chosen = {seed_cell}
    while len(cells) < size:
        frontier = sorted(
            {
                (x + dx, y + dy)
                for x, y in cells
                for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))
            }
            & free
            - chosen
        )
        if not frontier:
            return None
        c = rng.choice(frontier)
        cells.append(c)
        chosen.add(c)
    return chosen


def gen_gridworld(seed: int, width: int = 10, height: int = 10,
                  n_objects=(5, 10), tiles=(3, 8)) -> GridWorld:
    """Random grid world with start and goal on opposite borders.

    Rejection-samples until the start reaches the goal with every object in place.
    """
    if width < 5 or height < 5:
        raise ValueError("grid worlds need width and height >= 5")
    rng = stream(seed, "gridworld", width, height)
    for _ in range(MAX_REJECTIONS):
        if rng.random() < 0.5:
            start = (0, rng.randrange(height))
            goal = (width - 1, rng.randrange(height))
        else:
            start = (rng.randrange(width), 0)
            goal = (rng.randrange(width), height - 1)
        if rng.random() < 0.5:
            start, goal = goal, start
        free = {(x, y) for x in range(width) for y in range(height)} - {start, goal}
        objects = []
        ok = True
        for i in range(rng.randint(*n_objects)):
            cells = _grow_polyomino(rng, rng.randint(*tiles), free, width, height)
            if cells is None:
                ok = False
                break
            free -= cells
            objects.append(GridObject(f"o{i + 1}", tuple(cells)))
        if not ok:
            continue
        world = GridWorld(width, height, start, goal, tuple(objects))
        if bfs_distance(world, world.object_ids, start, goal) is None:
            continue
        return validate_grid(world)
    raise GenerationExhausted(f"no solvable grid world after {MAX_REJECTIONS} attempts")


# -- plinko worlds -------------------------------------------------------------------

def _shape(rng, x, y, w, h):
    kind = rng.randrange(5)
    rect = ((x, y), (x + w, y), (x + w, y + h), (x, y + h))
    if kind == 0:
        return rect
    # right triangles: drop one corner of the rectangle
    drop = kind - 1
    return tuple(p for i, p in enumerate(rect) if i != drop)


def polygon_gap(a, b) -> float:
    """Distance between two convex polygons (0 when they overlap)."""
    if geometry.polygons_overlap(a, b):
        return 0.0
    return min(
        min(geometry.distance(a, x, y) for x, y in b),
        min(geometry.distance(b, x, y) for x, y in a),
    )


def gen_plinko(seed: int, n_obstacles=(8, 12), *, width: float = 600.0, height: float = 600.0,
               ball_radius: float = 10.0, buckets: int | None = None,
               config: EngineConfig | None = None) -> PlinkoWorld:
    """Random Plinko board of axis-aligned rectangles and right triangles.

    Obstacles keep at least one ball diameter (plus margin) from each other and
    from the side walls so the ball cannot wedge, and boards whose noiseless drop
    fails to land are rejected.
    """
    config = config or EngineConfig()
    rng = stream(seed, "plinko")
    floor_y = height - 20.0
    gap = 2 * ball_radius + 5.0
    for _ in range(MAX_REJECTIONS):
        bx = rng.uniform(0.1 * width, 0.9 * width)
        by = 40.0
        target = rng.randint(*n_obstacles)
        polys = []
        for _ in range(200):
            if len(polys) == target:
                break
            w = float(rng.randint(20, 80))
            h = float(rng.randint(20, 80))
            x = float(rng.randint(int(gap), int(width - gap - w)))
            y = float(rng.randint(int(by + 4 * ball_radius), int(floor_y - gap - h)))
            poly = _shape(rng, x, y, w, h)
            if geometry.distance(poly, bx, by) <= 3 * ball_radius:
                continue
            if any(polygon_gap(poly, p) < gap for p in polys):
                continue
            polys.append(poly)
        if len(polys) != target:
            continue
        world = PlinkoWorld(
            width, height, (round(bx, 3), by), ball_radius, floor_y, buckets,
            tuple(Obstacle(f"b{i + 1}", p) for i, p in enumerate(polys)),
        )
        validate_plinko(world)
        if not run_rollout(world, NoiseParams(), config, stream(seed, "plinko-check")).landed:
            continue
        return world
    raise GenerationExhausted(f"no valid plinko world after {MAX_REJECTIONS} attempts")


# -- dissociation screening ---------------------------------------------------------

class Dissociation(str, enum.Enum):
    RELEVANT = "counterfactually_relevant"
    IRRELEVANT = "counterfactually_irrelevant"
    NEITHER = "neither"


@dataclass
class Screening:
    classification: Dissociation
    hit_probability: float
    modal_with: int
    modal_mass_with: float
    modal_without: int
    modal_mass_without: float
    modal_given_hit: int | None


def _modal(buckets):
    counts = Counter(buckets)
    if not counts:
        return None, 0.0
    best = min(counts, key=lambda b: (-counts[b], b))
    return best, counts[best] / len(buckets)


def screen_dissociation(world: PlinkoWorld, target: str, noise: NoiseParams,
                        config: EngineConfig, rollouts: int, seed: int) -> Screening:
    """Classify ``target`` by hit rate and its effect on the landing bucket.

    Paired rollouts with and without the target share their random streams.
    """
    if not world.bucket_count:
        raise ValueError("screening needs a world with buckets")
    stripped = without_obstacle(world, target)
    with_b, without_b, hit_b = [], [], []
    hits = 0
    for k in range(rollouts):
        t = run_rollout(world, noise, config, stream(seed, "rollout", k, "physics"))
        u = run_rollout(stripped, noise, config, stream(seed, "rollout", k, "physics"))
        hit = target in t.hit_ids() or any(oid == target for _, oid in t.teleport_events)
        hits += hit
        if t.landed:
            with_b.append(world.bucket_of(t.landing_x))
            if hit:
                hit_b.append(world.bucket_of(t.landing_x))
        if u.landed:
            without_b.append(world.bucket_of(u.landing_x))
    if not with_b or not without_b:
        raise AllRolloutsTimedOut("no landed rollouts to screen")
    h = hits / rollouts
    mw, mass_w = _modal(with_b)
    mo, mass_o = _modal(without_b)
    mh, _ = _modal(hit_b)
    if h > 0.95 and mw == mo and mass_w > 0.95 and mass_o > 0.95:
        cls = Dissociation.IRRELEVANT
    elif 0.40 <= h <= 0.60 and mh is not None and mh != mo:
        cls = Dissociation.RELEVANT
    else:
        cls = Dissociation.NEITHER
    return Screening(cls, h, mw, mass_w, mo, mass_o, mh)
