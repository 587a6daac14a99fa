"""Grid and Plinko world descriptions, validation, and the JSON file format.

Worlds are frozen dataclasses. Plinko uses screen coordinates: y grows
downward and gravity pulls toward +y.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Union

from . import geometry
from .errors import InvalidWorld, MalformedWorld

Cell = tuple[int, int]

DEFAULT_PLINKO_SIZE = 600.0


@dataclass(frozen=True)
class GridObject:
    id: str
    cells: tuple[Cell, ...]
    center_cross: bool = False

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(sorted((int(x), int(y)) for x, y in self.cells)))


@dataclass(frozen=True)
class GridWorld:
    width: int
    height: int
    start: Cell
    goal: Cell
    objects: tuple[GridObject, ...] = ()

    kind = "grid"

    def __post_init__(self):
        object.__setattr__(self, "start", tuple(self.start))
        object.__setattr__(self, "goal", tuple(self.goal))
        object.__setattr__(self, "objects", tuple(self.objects))

    @cached_property
    def owner(self) -> dict[Cell, str]:
        """Cell -> id of the object occupying it."""
        return {c: o.id for o in self.objects for c in o.cells}

    @cached_property
    def object_ids(self) -> tuple[str, ...]:
        return tuple(o.id for o in self.objects)

    def get(self, oid: str) -> GridObject:
        for o in self.objects:
            if o.id == oid:
                return o
        raise KeyError(oid)

    def in_bounds(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def center_cross_id(self) -> str | None:
        for o in self.objects:
            if o.center_cross:
                return o.id
        return None


@dataclass(frozen=True)
class Obstacle:
    id: str
    polygon: tuple[tuple[float, float], ...]
    solid: bool = True
    probe_eligible: bool = True

    def __post_init__(self):
        object.__setattr__(
            self, "polygon", tuple((float(x), float(y)) for x, y in self.polygon)
        )

    @cached_property
    def centroid(self) -> tuple[float, float]:
        return geometry.centroid(self.polygon)

    @cached_property
    def bounds(self) -> tuple[float, float, float]:
        return geometry.bounding_circle(self.polygon)


@dataclass(frozen=True)
class PlinkoWorld:
    width: float
    height: float
    ball_start: tuple[float, float]
    ball_radius: float
    floor_y: float
    bucket_count: int | None = None
    obstacles: tuple[Obstacle, ...] = ()
    teleporters: tuple[tuple[str, str], ...] = ()

    kind = "plinko"

    def __post_init__(self):
        object.__setattr__(self, "ball_start", (float(self.ball_start[0]), float(self.ball_start[1])))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "teleporters", tuple((str(a), str(b)) for a, b in self.teleporters))

    @cached_property
    def by_id(self) -> dict[str, Obstacle]:
        return {o.id: o for o in self.obstacles}

    @cached_property
    def object_ids(self) -> tuple[str, ...]:
        return tuple(o.id for o in self.obstacles)

    @cached_property
    def entry_to_exit(self) -> dict[str, str]:
        return dict(self.teleporters)

    @cached_property
    def exit_ids(self) -> frozenset[str]:
        return frozenset(b for _, b in self.teleporters)

    def encodable(self, oid: str) -> bool:
        """Solid obstacles and teleporter entries can enter working memory."""
        o = self.by_id[oid]
        if oid in self.exit_ids:
            return False
        return o.solid or oid in self.entry_to_exit

    def bucket_of(self, x: float) -> int:
        """0-based index of the equal-width floor bucket containing ``x``."""
        if not self.bucket_count:
            raise ValueError("world has no buckets")
        k = int(x / self.width * self.bucket_count)
        return min(max(k, 0), self.bucket_count - 1)


World = Union[GridWorld, PlinkoWorld]


# -- validation ---------------------------------------------------------------

def _connected(cells) -> bool:
    cells = set(cells)
    first = next(iter(cells))
    seen = {first}
    todo = [first]
    while todo:
        x, y = todo.pop()
        for n in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if n in cells and n not in seen:
                seen.add(n)
                todo.append(n)
    return len(seen) == len(cells)


def validate_grid(w: GridWorld) -> GridWorld:
    if w.width < 1 or w.height < 1:
        raise InvalidWorld("dimensions must be positive")
    if w.start == w.goal:
        raise InvalidWorld("start must differ from goal")
    if not w.in_bounds(w.start):
        raise InvalidWorld("start out of bounds", str(w.start))
    if not w.in_bounds(w.goal):
        raise InvalidWorld("goal out of bounds", str(w.goal))
    ids = set()
    taken: dict[Cell, str] = {}
    crosses = 0
    for o in w.objects:
        if o.id in ids:
            raise InvalidWorld("object ids must be unique", o.id)
        ids.add(o.id)
        if not o.cells:
            raise InvalidWorld("object cells must be nonempty", o.id)
        if len(set(o.cells)) != len(o.cells):
            raise InvalidWorld("object cells must be distinct", o.id)
        for c in o.cells:
            if not w.in_bounds(c):
                raise InvalidWorld("object cells must be within bounds", f"{o.id} {c}")
            if c in taken:
                raise InvalidWorld("objects must not overlap", f"{taken[c]} and {o.id} at {c}")
            taken[c] = o.id
        if not _connected(o.cells):
            raise InvalidWorld("object cells must be 4-connected", o.id)
        crosses += o.center_cross
    if crosses > 1:
        raise InvalidWorld("at most one center cross object")
    if w.start in taken:
        raise InvalidWorld("start must not lie on an object", taken[w.start])
    if w.goal in taken:
        raise InvalidWorld("goal must not lie on an object", taken[w.goal])
    return w


def validate_plinko(w: PlinkoWorld) -> PlinkoWorld:
    vals = [w.width, w.height, w.ball_radius, w.floor_y, *w.ball_start]
    if not all(math.isfinite(v) for v in vals):
        raise InvalidWorld("numbers must be finite")
    if w.width <= 0 or w.height <= 0:
        raise InvalidWorld("dimensions must be positive")
    if w.ball_radius <= 0:
        raise InvalidWorld("ball radius must be positive")
    bx, by = w.ball_start
    if not (w.ball_radius <= bx <= w.width - w.ball_radius):
        raise InvalidWorld("ball must start inside the side walls")
    if w.floor_y - by < w.ball_radius:
        raise InvalidWorld("ball must start above the floor with clearance of one radius")
    if w.floor_y > w.height:
        raise InvalidWorld("floor must lie inside the world")
    if w.bucket_count is not None and w.bucket_count < 1:
        raise InvalidWorld("bucket count must be a positive integer")
    ids = set()
    for o in w.obstacles:
        if o.id in ids:
            raise InvalidWorld("obstacle ids must be unique", o.id)
        ids.add(o.id)
        if len(o.polygon) < 3:
            raise InvalidWorld("obstacle needs at least 3 vertices", o.id)
        if not all(math.isfinite(c) for p in o.polygon for c in p):
            raise InvalidWorld("numbers must be finite", o.id)
        if not geometry.is_strictly_convex(o.polygon):
            raise InvalidWorld("obstacle polygon must be strictly convex", o.id)
        if geometry.signed_area(o.polygon) <= 0:
            raise InvalidWorld("obstacle polygon must be counter-clockwise", o.id)
        if any(not (0 <= x <= w.width and 0 <= y <= w.height) for x, y in o.polygon):
            raise InvalidWorld("obstacle must lie inside world bounds", o.id)
        if geometry.distance(o.polygon, bx, by) <= w.ball_radius:
            raise InvalidWorld("obstacle overlaps the ball start", o.id)
    used = set()
    for entry, exit_ in w.teleporters:
        for t in (entry, exit_):
            if t not in ids:
                raise InvalidWorld("teleporter references unknown obstacle", t)
        if entry == exit_:
            raise InvalidWorld("teleporter entry must differ from exit", entry)
        for t in (entry, exit_):
            if t in used:
                raise InvalidWorld("obstacle appears in two teleporter pairs", t)
            used.add(t)
    return w


def validate(world: World) -> World:
    if isinstance(world, GridWorld):
        return validate_grid(world)
    return validate_plinko(world)


# -- file format ----------------------------------------------------------------

def _need(doc: dict, key: str):
    if key not in doc:
        raise MalformedWorld(f"missing key {key!r}")
    return doc[key]


def _point(v, what: str) -> tuple:
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise MalformedWorld(f"{what} must be a 2-element list")
    return tuple(v)


def _int(v, what: str) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or v != int(v):
        raise MalformedWorld(f"{what} must be an integer")
    return int(v)


def _num(v, what: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise MalformedWorld(f"{what} must be a number")
    return float(v)


def world_from_dict(doc: dict) -> World:
    if not isinstance(doc, dict):
        raise MalformedWorld("world document must be a JSON object")
    kind = _need(doc, "kind")
    if kind == "grid":
        objs = []
        for i, o in enumerate(_need(doc, "objects")):
            cells = tuple(
                (_int(c[0], "cell x"), _int(c[1], "cell y"))
                for c in (_point(c, "cell") for c in _need(o, "cells"))
            )
            objs.append(GridObject(str(_need(o, "id")), cells, bool(o.get("center_cross", False))))
        sx, sy = _point(_need(doc, "start"), "start")
        gx, gy = _point(_need(doc, "goal"), "goal")
        world = GridWorld(
            width=_int(_need(doc, "width"), "width"),
            height=_int(_need(doc, "height"), "height"),
            start=(_int(sx, "start"), _int(sy, "start")),
            goal=(_int(gx, "goal"), _int(gy, "goal")),
            objects=tuple(objs),
        )
        return validate_grid(world)
    if kind == "plinko":
        ball = _need(doc, "ball")
        obstacles = []
        for o in _need(doc, "obstacles"):
            poly = tuple(
                (_num(p[0], "vertex"), _num(p[1], "vertex"))
                for p in (_point(p, "vertex") for p in _need(o, "polygon"))
            )
            obstacles.append(
                Obstacle(str(_need(o, "id")), poly, bool(o.get("solid", True)), bool(o.get("probe", True)))
            )
        buckets = doc.get("buckets")
        tele = tuple((str(_need(t, "entry")), str(_need(t, "exit"))) for t in doc.get("teleporters", []))
        world = PlinkoWorld(
            width=_num(_need(doc, "width"), "width"),
            height=_num(_need(doc, "height"), "height"),
            ball_start=(_num(_need(ball, "x"), "ball x"), _num(_need(ball, "y"), "ball y")),
            ball_radius=_num(_need(ball, "radius"), "ball radius"),
            floor_y=_num(_need(doc, "floor_y"), "floor_y"),
            bucket_count=None if buckets is None else _int(buckets, "buckets"),
            obstacles=tuple(obstacles),
            teleporters=tele,
        )
        return validate_plinko(world)
    raise MalformedWorld(f"unknown world kind {kind!r}")


def parse_world(document: bytes | str) -> World:
    """Parse and validate a JSON world document."""
    try:
        doc = json.loads(document)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedWorld(f"not valid JSON: {exc}") from exc
    try:
        return world_from_dict(doc)
    except (TypeError, AttributeError, IndexError) as exc:
        raise MalformedWorld(f"unexpected structure: {exc}") from exc


def _plain(v: float):
    return int(v) if float(v).is_integer() else v


def world_to_dict(world: World) -> dict:
    if isinstance(world, GridWorld):
        return {
            "kind": "grid",
            "width": world.width,
            "height": world.height,
            "start": list(world.start),
            "goal": list(world.goal),
            "objects": [
                {"id": o.id, "cells": [list(c) for c in o.cells], "center_cross": o.center_cross}
                for o in world.objects
            ],
        }
    return {
        "kind": "plinko",
        "width": _plain(world.width),
        "height": _plain(world.height),
        "ball": {
            "x": _plain(world.ball_start[0]),
            "y": _plain(world.ball_start[1]),
            "radius": _plain(world.ball_radius),
        },
        "floor_y": _plain(world.floor_y),
        "buckets": world.bucket_count,
        "obstacles": [
            {
                "id": o.id,
                "polygon": [[_plain(x), _plain(y)] for x, y in o.polygon],
                "solid": o.solid,
                "probe": o.probe_eligible,
            }
            for o in world.obstacles
        ],
        "teleporters": [{"entry": a, "exit": b} for a, b in world.teleporters],
    }


def serialize_world(world: World) -> bytes:
    return (json.dumps(world_to_dict(world), indent=1) + "\n").encode("utf-8")


def load_world(path) -> World:
    with open(path, "rb") as fh:
        return parse_world(fh.read())


def replace_obstacle(world: PlinkoWorld, oid: str, polygon) -> PlinkoWorld:
    """Copy of ``world`` with one obstacle's polygon swapped (no validation)."""
    obs = tuple(
        Obstacle(o.id, polygon, o.solid, o.probe_eligible) if o.id == oid else o
        for o in world.obstacles
    )
    return PlinkoWorld(
        world.width, world.height, world.ball_start, world.ball_radius, world.floor_y,
        world.bucket_count, obs, world.teleporters,
    )


def without_obstacle(world: PlinkoWorld, oid: str) -> PlinkoWorld:
    obs = tuple(o for o in world.obstacles if o.id != oid)
    tele = tuple(t for t in world.teleporters if oid not in t)
    return PlinkoWorld(
        world.width, world.height, world.ball_start, world.ball_radius, world.floor_y,
        world.bucket_count, obs, tele,
    )
