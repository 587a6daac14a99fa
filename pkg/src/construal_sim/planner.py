"""Stochastic A* over a grid world restricted to a construal.

Nodes are expanded by sampling from a softmax over the whole open set instead
of taking the argmin of ``d + h``; large weights recover ordinary A*.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .errors import BrokenSearchResult, CapExceeded, Unreachable
from .worlds import Cell, GridWorld

MOVES = ((1, 0), (-1, 0), (0, 1), (0, -1))


@dataclass(frozen=True)
class PlannerParams:
    alpha_d: float = 0.0
    alpha_h: float = 1.0
    expansion_cap: int | None = None  # None -> 10 * width * height

    def __post_init__(self):
        if not (math.isfinite(self.alpha_d) and math.isfinite(self.alpha_h)):
            raise ValueError("planner weights must be finite")
        if self.expansion_cap is not None and self.expansion_cap < 1:
            raise ValueError("expansion_cap must be >= 1")

    def cap_for(self, world: GridWorld) -> int:
        return self.expansion_cap or 10 * world.width * world.height


@dataclass
class SearchResult:
    best_g: dict[Cell, int]
    predecessors: dict[Cell, set[Cell]]
    expansions: int
    reached_goal: bool


@dataclass(frozen=True)
class Plan:
    states: tuple[Cell, ...]

    def __len__(self):
        return len(self.states)

    @property
    def steps(self) -> int:
        return len(self.states) - 1


def manhattan_heuristic(cell: Cell, goal: Cell) -> int:
    return abs(cell[0] - goal[0]) + abs(cell[1] - goal[1])


def softmax_choice(scores: list[float], rng: random.Random) -> int:
    """Sample an index with probability proportional to ``exp(-score)``."""
    lo = min(scores)
    weights = [math.exp(lo - s) for s in scores]
    u = rng.random() * sum(weights)
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            return i
    return len(weights) - 1


def softmax_astar(
    world: GridWorld,
    construal,
    start: Cell,
    goal: Cell,
    params: PlannerParams,
    rng: random.Random,
    touched: set | None = None,
) -> SearchResult:
    """Run one stochastic search.

    Cells of objects in ``construal`` are blocked. When ``touched`` is given,
    the id of every object whose cells the search inspected is added to it;
    the result is a function of ``construal & touched`` alone, which callers
    use for caching.

    Raises Unreachable when the open set empties and CapExceeded when the
    expansion budget runs out.
    """
    construal = frozenset(construal)
    owner = world.owner
    width, height = world.width, world.height
    ad, ah = params.alpha_d, params.alpha_h
    cap = params.cap_for(world)
    gx, gy = goal

    best_g = {start: 0}
    preds: dict[Cell, set[Cell]] = {start: set()}
    open_nodes: dict[Cell, None] = {start: None}
    closed: set[Cell] = set()
    expansions = 0
    while open_nodes:
        if expansions >= cap:
            exc = CapExceeded(f"expansion cap {cap} reached")
            exc.expansions = expansions
            raise exc
        nodes = list(open_nodes)
        if len(nodes) == 1:
            node = nodes[0]
        else:
            scores = [ad * best_g[n] + ah * (abs(n[0] - gx) + abs(n[1] - gy)) for n in nodes]
            node = nodes[softmax_choice(scores, rng)]
        del open_nodes[node]
        expansions += 1
        closed.add(node)
        if node == goal:
            best_g, preds = _relax(start, closed, best_g)
            return SearchResult(best_g, preds, expansions, True)
        g = best_g[node] + 1
        x, y = node
        for dx, dy in MOVES:
            nb = (x + dx, y + dy)
            if not (0 <= nb[0] < width and 0 <= nb[1] < height):
                continue
            oid = owner.get(nb)
            if oid is not None:
                if touched is not None:
                    touched.add(oid)
                if oid in construal:
                    continue
            old = best_g.get(nb)
            if old is None or g < old:
                best_g[nb] = g
                preds[nb] = {node}
                open_nodes[nb] = None
            elif g == old:
                preds[nb].add(node)
    exc = Unreachable(f"goal {goal} unreachable from {start}")
    exc.expansions = expansions
    raise exc


def _relax(start, closed, seen):
    """Cheapest known costs over the explored region, with consistent predecessors.

    Re-opened nodes can leave stale labels behind when the search stops at the
    goal, so the final costs are recomputed by breadth-first search along edges
    out of expanded nodes.
    """
    best_g = {start: 0}
    preds: dict[Cell, set[Cell]] = {start: set()}
    frontier = [start]
    while frontier:
        nxt = []
        for node in frontier:
            if node not in closed:
                continue
            g = best_g[node] + 1
            x, y = node
            for dx, dy in MOVES:
                nb = (x + dx, y + dy)
                if nb not in seen:
                    continue
                old = best_g.get(nb)
                if old is None:
                    best_g[nb] = g
                    preds[nb] = {node}
                    nxt.append(nb)
                elif old == g:
                    preds[nb].add(node)
        frontier = nxt
    return best_g, preds


def reconstruct_plan(result: SearchResult, start: Cell, goal: Cell, rng: random.Random) -> Plan:
    """Walk predecessor sets back from the goal, preferring straight runs.

    Among tied predecessors the one continuing the previously chosen move
    direction wins; remaining ties are broken uniformly.
    """
    if not result.reached_goal:
        raise BrokenSearchResult("search did not reach the goal")
    path = [goal]
    cur = goal
    prev_dir = None
    limit = result.best_g.get(goal, -1)
    while cur != start:
        options = sorted(result.predecessors.get(cur, ()))
        if not options or len(path) > limit + 1:
            raise BrokenSearchResult(f"predecessor chain broken at {cur}")
        if prev_dir is not None:
            straight = [p for p in options if (cur[0] - p[0], cur[1] - p[1]) == prev_dir]
            if straight:
                options = straight
        p = options[0] if len(options) == 1 else rng.choice(options)
        prev_dir = (cur[0] - p[0], cur[1] - p[1])
        path.append(p)
        cur = p
    path.reverse()
    return Plan(tuple(path))


def sample_plan(world, construal, start, goal, params, rng, touched=None) -> tuple[Plan, int]:
    result = softmax_astar(world, construal, start, goal, params, rng, touched)
    return reconstruct_plan(result, start, goal, rng), result.expansions


def bfs_distance(world: GridWorld, blocked_ids, start: Cell, goal: Cell) -> int | None:
    """Shortest 4-connected path length avoiding the given objects, or None."""
    blocked = {c for o in world.objects if o.id in blocked_ids for c in o.cells}
    if start == goal:
        return 0
    dist = {start: 0}
    frontier = [start]
    while frontier:
        nxt = []
        for x, y in frontier:
            for dx, dy in MOVES:
                nb = (x + dx, y + dy)
                if nb in dist or nb in blocked or not world.in_bounds(nb):
                    continue
                dist[nb] = dist[(x, y)] + 1
                if nb == goal:
                    return dist[nb]
                nxt.append(nb)
        frontier = nxt
    return None
