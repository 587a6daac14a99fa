"""Falling-ball engine with noisy collisions.

The engine is deliberately small: a point-mass ball of fixed radius under
gravity, convex polygon obstacles, two side walls, and a floor that ends the
rollout. Three noise sources can be switched on independently: a Gaussian shift
of the starting x, a Von Mises rotation of each collision normal, and a
truncated-normal restitution.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from functools import lru_cache
from statistics import NormalDist

from . import geometry
from .errors import DegenerateNormal
from .worlds import PlinkoWorld

_STD_NORMAL = NormalDist()
LEFT_WALL = "__left_wall__"
RIGHT_WALL = "__right_wall__"


@dataclass(frozen=True)
class NoiseParams:
    sigma_sq: float = 0.0
    kappa: float = 0.0
    s_sq: float = 0.0

    def __post_init__(self):
        if min(self.sigma_sq, self.kappa, self.s_sq) < 0:
            raise ValueError("noise parameters must be >= 0")


TABLE_NOISE = NoiseParams(sigma_sq=5.0, kappa=0.8, s_sq=0.6)


@dataclass(frozen=True)
class EngineConfig:
    dt: float = 1.0 / 60.0
    gravity: float = 300.0
    base_restitution: float = 0.5
    max_sim_time: float = 10.0
    penetration_tolerance: float = 0.1
    velocity_cap: float = 2000.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.gravity <= 0:
            raise ValueError("gravity must be > 0")
        if not (0 < self.base_restitution <= 1):
            raise ValueError("base_restitution must lie in (0, 1]")
        if self.max_sim_time <= 0:
            raise ValueError("max_sim_time must be > 0")

    @property
    def max_steps(self) -> int:
        return int(math.ceil(self.max_sim_time / self.dt - 1e-9))


@dataclass(frozen=True)
class BallState:
    q: tuple[float, float]
    v: tuple[float, float] = (0.0, 0.0)


@dataclass
class Trajectory:
    states: list[BallState]
    collision_events: list[tuple[int, str]] = field(default_factory=list)
    teleport_events: list[tuple[int, str]] = field(default_factory=list)
    landing_x: float | None = None
    landed: bool = False
    max_penetration: float = 0.0

    def hit_ids(self) -> set[str]:
        return {oid for _, oid in self.collision_events}


# -- noise ----------------------------------------------------------------------

def sample_initial_state(world: PlinkoWorld, noise: NoiseParams, rng: random.Random) -> BallState:
    x, y = world.ball_start
    if noise.sigma_sq > 0:
        x += rng.gauss(0.0, math.sqrt(noise.sigma_sq))
    return BallState((x, y), (0.0, 0.0))


def sample_rotation(kappa: float, rng: random.Random) -> float:
    """Von Mises angle around 0 in (-pi, pi]; kappa of 0 or inf disables it."""
    if kappa == 0 or math.isinf(kappa):
        return 0.0
    theta = rng.vonmisesvariate(0.0, kappa)
    return theta - 2 * math.pi if theta > math.pi else theta


def sample_restitution(base: float, s_sq: float, rng: random.Random) -> float:
    """Normal(base, s_sq) truncated to [0, 1], drawn by inverse CDF."""
    if s_sq == 0:
        return base
    sd = math.sqrt(s_sq)
    lo = _STD_NORMAL.cdf((0.0 - base) / sd)
    hi = _STD_NORMAL.cdf((1.0 - base) / sd)
    u = lo + (hi - lo) * rng.random()
    u = min(max(u, 1e-300), 1 - 1e-16)
    e = base + sd * _STD_NORMAL.inv_cdf(u)
    return min(max(e, 0.0), 1.0)


# -- dynamics -------------------------------------------------------------------

def advance(state: BallState, config: EngineConfig) -> BallState:
    """Semi-implicit Euler step under gravity."""
    vx, vy = state.v
    vy += config.gravity * config.dt
    cap = config.velocity_cap
    vx = min(max(vx, -cap), cap)
    vy = min(max(vy, -cap), cap)
    x, y = state.q
    return BallState((x + vx * config.dt, y + vy * config.dt), (vx, vy))


@dataclass(frozen=True)
class _Body:
    id: str
    poly: tuple
    cx: float
    cy: float
    reach: float
    solid: bool  # collides when active
    entry: bool  # teleports when active


@lru_cache(maxsize=256)
def _bodies(world: PlinkoWorld) -> tuple[_Body, ...]:
    out = []
    for o in world.obstacles:
        cx, cy, r = o.bounds
        is_entry = o.id in world.entry_to_exit
        is_exit = o.id in world.exit_ids
        solid = o.solid and not is_exit and not is_entry
        if solid or is_entry:
            out.append(_Body(o.id, o.polygon, cx, cy, r, solid, is_entry))
    return tuple(out)


def _overlap(body: _Body, x: float, y: float, radius: float):
    """(normal, depth) when the ball disk overlaps ``body``, else None."""
    dx, dy = x - body.cx, y - body.cy
    reach = body.reach + radius
    if dx * dx + dy * dy >= reach * reach:
        return None
    px, py, inside = geometry.closest_point(body.poly, x, y)
    ox, oy = x - px, y - py
    d = math.hypot(ox, oy)
    if inside:
        if d == 0:
            return _edge_normal(body.poly, px, py), radius
        return (-ox / d, -oy / d), radius + d
    if d >= radius:
        return None
    if d == 0:
        return _edge_normal(body.poly, px, py), radius
    return (ox / d, oy / d), radius - d


def _edge_normal(poly, px, py):
    # outward normal of the edge nearest (px, py), for a point on the boundary
    best, normal = math.inf, (0.0, -1.0)
    orient = 1.0 if geometry.signed_area(poly) > 0 else -1.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        ex, ey = x1 - x0, y1 - y0
        L = math.hypot(ex, ey)
        dist = abs(ex * (py - y0) - ey * (px - x0)) / L
        if dist < best:
            best = dist
            normal = (orient * ey / L, -orient * ex / L)
    return normal


def _contacts(world: PlinkoWorld, x: float, y: float, active, touched, bodies=None):
    """Deepest solid contact as (id, normal, depth) or None.

    ``active`` restricts which obstacles collide (None means all). Every
    collidable obstacle overlapping the ball is added to ``touched`` when given.
    """
    r = world.ball_radius
    best = None
    if x - r < 0:
        best = (LEFT_WALL, (1.0, 0.0), r - x)
    if x + r > world.width:
        depth = x + r - world.width
        if best is None or depth > best[2]:
            best = (RIGHT_WALL, (-1.0, 0.0), depth)
    for b in _bodies(world) if bodies is None else bodies:
        if not b.solid:
            continue
        is_active = active is None or b.id in active
        if not is_active and touched is None:
            continue
        dx, dy, reach = x - b.cx, y - b.cy, b.reach + r
        if dx * dx + dy * dy >= reach * reach:
            continue
        hit = _overlap(b, x, y, r)
        if hit is None:
            continue
        if touched is not None:
            touched.add(b.id)
        if is_active and (best is None or hit[1] > best[2]):
            best = (b.id, hit[0], hit[1])
    return best


def detect_collision(state: BallState, radius: float, world: PlinkoWorld, active=None):
    """Deepest overlap among solid obstacles and side walls, or None.

    Returns ``(obstacle_id, unit_normal, depth)`` with the normal pointing from
    the obstacle toward the ball centre.
    """
    if radius != world.ball_radius:
        world = replace(world, ball_radius=radius)
    return _contacts(world, state.q[0], state.q[1], active, None)


def resolve_collision(
    state: BallState,
    normal,
    depth: float,
    noise: NoiseParams,
    config: EngineConfig,
    rng: random.Random,
) -> BallState:
    """Noisy bounce off a contact.

    The velocity reflects about a randomly rotated copy of the normal. The
    position is corrected with the geometric normal (rewinding to the time of
    impact when the approach speed allows it) so noise can never drive the ball
    into the obstacle.
    """
    nx, ny = normal
    L = math.hypot(nx, ny)
    if L == 0 or not math.isfinite(L):
        raise DegenerateNormal("collision normal has zero length")
    nx, ny = nx / L, ny / L
    theta = sample_rotation(noise.kappa, rng)
    c, s = math.cos(theta), math.sin(theta)
    rx, ry = c * nx - s * ny, s * nx + c * ny
    e = sample_restitution(config.base_restitution, noise.s_sq, rng)
    x, y = state.q
    vx, vy = state.v
    g = config.gravity
    # Semi-implicit Euler positions sample the exact parabola whose velocity
    # at the sample is v + g*dt/2; rewinding in those terms keeps bounce
    # heights consistent with free flight.
    half = 0.5 * g * config.dt
    approach = -(vx * nx + (vy + half) * ny)
    tau = 0.0
    if depth > 0 and approach > 0 and depth <= approach * config.dt:
        tau = depth / approach
        vy += half
        x -= tau * vx
        y -= tau * vy - 0.5 * g * tau * tau
        vy -= g * tau
    vx, vy = _reflect(vx, vy, rx, ry, nx, ny, e)
    if tau > 0:
        x += tau * vx
        y += tau * vy + 0.5 * g * tau * tau
        vy += g * tau - half
        return BallState((x, y), (vx, vy))
    push = depth + config.penetration_tolerance
    return BallState((x + push * nx, y + push * ny), (vx, vy))


def _reflect(vx, vy, rx, ry, nx, ny, e):
    vn = vx * rx + vy * ry
    if vn < 0:
        vx -= (1 + e) * vn * rx
        vy -= (1 + e) * vn * ry
    vn = vx * nx + vy * ny
    if vn < 0:
        # still heading into the surface: bounce off the true normal as well
        vx -= (1 + e) * vn * nx
        vy -= (1 + e) * vn * ny
    return vx, vy


def apply_teleport(state: BallState, world: PlinkoWorld, active=None, touched=None, bodies=None) -> BallState:
    """Move the ball to the exit centroid when its disk overlaps an entry."""
    if not world.teleporters:
        return state
    x, y = state.q
    r = world.ball_radius
    for b in _bodies(world) if bodies is None else bodies:
        if not b.entry:
            continue
        is_active = active is None or b.id in active
        if not is_active and touched is None:
            continue
        if _overlap(b, x, y, r) is None:
            continue
        if touched is not None:
            touched.add(b.id)
        if is_active:
            exit_ = world.by_id[world.entry_to_exit[b.id]]
            return BallState(exit_.centroid, state.v)
    return state


_MAX_PROJECTIONS = 4


def run_rollout(
    world: PlinkoWorld,
    noise: NoiseParams,
    config: EngineConfig,
    rng: random.Random,
    *,
    active=None,
    touched: set | None = None,
    on_step=None,
) -> Trajectory:
    """Simulate one noisy drop until the ball reaches the floor or time runs out.

    ``active`` is a (possibly live) set of obstacle ids that participate in the
    dynamics; None means every obstacle. ``on_step(step, x, y)`` is called for
    the initial state and after every step, and may mutate ``active``.
    """
    state = sample_initial_state(world, noise, rng)
    traj = Trajectory(states=[state])
    r = world.ball_radius
    bodies = _bodies(world)
    solids = tuple(b for b in bodies if b.solid)
    entries = tuple(b for b in bodies if b.entry)
    if on_step is not None:
        on_step(0, state.q[0], state.q[1])
    if state.q[1] + r >= world.floor_y:
        traj.landed, traj.landing_x = True, state.q[0]
        return traj
    for step in range(1, config.max_steps + 1):
        state = advance(state, config)
        teleported = apply_teleport(state, world, active, touched, entries)
        if teleported is not state:
            x, y = state.q
            for b in entries:
                if b.entry and (active is None or b.id in active) and _overlap(b, x, y, r):
                    traj.teleport_events.append((step, b.id))
                    break
            state = teleported
        contact = _contacts(world, state.q[0], state.q[1], active, touched, solids)
        residual = 0.0
        rounds = 0
        while contact is not None:
            oid, normal, depth = contact
            if rounds == 0:
                state = resolve_collision(state, normal, depth, noise, config, rng)
                if oid not in (LEFT_WALL, RIGHT_WALL):
                    traj.collision_events.append((step, oid))
            else:
                x, y = state.q
                push = depth + config.penetration_tolerance
                state = BallState((x + push * normal[0], y + push * normal[1]), state.v)
            rounds += 1
            contact = _contacts(world, state.q[0], state.q[1], active, touched, solids)
            if rounds >= _MAX_PROJECTIONS:
                residual = 0.0 if contact is None else contact[2]
                break
        if residual > traj.max_penetration:
            traj.max_penetration = residual
        traj.states.append(state)
        if on_step is not None:
            on_step(step, state.q[0], state.q[1])
        if state.q[1] + r >= world.floor_y:
            traj.landed, traj.landing_x = True, state.q[0]
            return traj
    return traj
