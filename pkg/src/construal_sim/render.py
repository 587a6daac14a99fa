"""Deterministic SVG drawings of worlds, optionally shaded by construal weight."""

from __future__ import annotations

from xml.sax.saxutils import quoteattr

from .worlds import GridWorld, PlinkoWorld

LIGHT = (237, 248, 233)
DARK = (0, 109, 44)
CELL = 40
_HATCH = (
    '<defs><pattern id="hatch" patternUnits="userSpaceOnUse" width="8" height="8" '
    'patternTransform="rotate(45)"><rect width="8" height="8" fill="#e0e0e0"/>'
    '<line x1="0" y1="0" x2="0" y2="8" stroke="#808080" stroke-width="3"/></pattern></defs>'
)


def green(weight: float) -> str:
    """Fill colour on a light-to-dark green ramp; weight is clamped to [0, 1]."""
    w = min(max(float(weight), 0.0), 1.0)
    rgb = (round(a + (b - a) * w) for a, b in zip(LIGHT, DARK))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _n(v: float) -> str:
    s = f"{float(v):.3f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def _fill(oid, weights, hatched):
    if hatched:
        return "url(#hatch)"
    if weights is None:
        return "#ffffff"
    return green(weights.get(oid, 0.0))


def _grid(world: GridWorld, weights) -> list[str]:
    w, h = world.width * CELL, world.height * CELL
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">', _HATCH,
           f'<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff" stroke="#000000"/>']
    for o in world.objects:
        fill = _fill(o.id, weights, o.center_cross)
        out.append(f"<g id={quoteattr(o.id)}>")
        for x, y in o.cells:
            out.append(f'<rect x="{x * CELL}" y="{y * CELL}" width="{CELL}" height="{CELL}" '
                       f'fill="{fill}" stroke="#404040"/>')
        out.append("</g>")
    for (x, y), colour in ((world.start, "#1f77b4"), (world.goal, "#d62728")):
        out.append(f'<circle cx="{x * CELL + CELL // 2}" cy="{y * CELL + CELL // 2}" r="{CELL // 3}" '
                   f'fill="{colour}"/>')
    out.append("</svg>")
    return out


def _plinko(world: PlinkoWorld, weights) -> list[str]:
    w, h = _n(world.width), _n(world.height)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">', _HATCH,
           f'<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff" stroke="#000000"/>']
    fy = _n(world.floor_y)
    out.append(f'<line x1="0" y1="{fy}" x2="{w}" y2="{fy}" stroke="#000000" stroke-width="2"/>')
    if world.bucket_count:
        for i in range(1, world.bucket_count):
            x = _n(world.width * i / world.bucket_count)
            out.append(f'<line x1="{x}" y1="{fy}" x2="{x}" y2="{h}" stroke="#000000"/>')
    for o in world.obstacles:
        pts = " ".join(f"{_n(x)},{_n(y)}" for x, y in o.polygon)
        fill = _fill(o.id, weights, not o.probe_eligible)
        dash = "" if o.solid else ' stroke-dasharray="4 3"'
        out.append(f'<polygon id={quoteattr(o.id)} points="{pts}" fill="{fill}" stroke="#404040"{dash}/>')
    bx, by = world.ball_start
    out.append(f'<circle cx="{_n(bx)}" cy="{_n(by)}" r="{_n(world.ball_radius)}" fill="#d62728"/>')
    out.append("</svg>")
    return out


def render_svg(world, weights: dict[str, float] | None = None) -> bytes:
    """SVG bytes for ``world``; object fills follow ``weights`` when given."""
    lines = _grid(world, weights) if isinstance(world, GridWorld) else _plinko(world, weights)
    return ('<?xml version="1.0" encoding="UTF-8"?>\n' + "\n".join(lines) + "\n").encode("utf-8")
