"""Deterministic SVG pictures of tile patches.

Rendering works from edge labels alone, so any tileset drawn by this module
shows exactly the information the matching rules see: line segments connect
the decorated edge points (through the shared corner when the two decorated
edges are perpendicular), arrows become small ticks on the edges, and parity
bits shade the tile background.  Output strings are byte-stable for fixed
input: no timestamps, no randomness, fixed decimal formatting.
"""

from __future__ import annotations

from .tiles import InputError, Patch, Tileset

_LINE_COLOURS = {"r": "#c0392b", "b": "#2c3e50"}
_ARROW_TICK = 0.12


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _edge_point(edge: str, pos: int):
    u = 0.25 + 0.5 * pos
    if edge == "n":
        return (u, 1.0)
    if edge == "s":
        return (u, 0.0)
    if edge == "e":
        return (1.0, u)
    return (0.0, u)


def _tile_segments(tile):
    """Line segments in tile-local coordinates, grouped from decorated edges."""
    by_colour = {}
    for edge, lab in zip("nesw", tile.edges()):
        if lab.line is not None:
            if lab.pos is None:
                raise InputError(f"tile {tile.id}: line without position on edge {edge}")
            by_colour.setdefault(lab.line, []).append((edge, _edge_point(edge, lab.pos)))
    segments = []
    for colour, pts in sorted(by_colour.items()):
        if len(pts) != 2:
            raise InputError(f"tile {tile.id}: {len(pts)} decorated edges of colour {colour}")
        (e1, p1), (e2, p2) = pts
        perpendicular = (e1 in "ns") != (e2 in "ns")
        if perpendicular:
            va = p1 if e1 in "ns" else p2  # point on a horizontal edge: fixes x
            hb = p2 if e1 in "ns" else p1  # point on a vertical edge: fixes y
            corner = (va[0], hb[1])
            segments.append((colour, p1, corner))
            segments.append((colour, corner, p2))
        else:
            segments.append((colour, p1, p2))
    return segments


def _arrow_tick(edge: str, arrow: str):
    """A short tick at the edge midpoint pointing in the arrow direction."""
    mids = {"n": (0.5, 1.0), "e": (1.0, 0.5), "s": (0.5, 0.0), "w": (0.0, 0.5)}
    step = {"n": (0, 1), "e": (1, 0), "s": (0, -1), "w": (-1, 0)}[arrow]
    mx, my = mids[edge]
    t = _ARROW_TICK
    return (mx - step[0] * t, my - step[1] * t), (mx + step[0] * t, my + step[1] * t)


def render_patch_svg(tileset: Tileset, patch: Patch, cell: int = 24,
                     show_arrows: bool = True) -> str:
    W = patch.width * cell
    H = patch.height * cell
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="#ffffff"/>',
    ]

    def to_svg(x, y, lx, ly):
        return (x * cell + lx * cell, (patch.height - y) * cell - ly * cell)

    for x, y, tid in patch.cells():
        tile = tileset.tile(tid)
        x0, y0 = to_svg(x, y, 0.0, 1.0)
        fill = "#f4f4f4"
        if tile.template == "bumpy-cross":
            fill = "#e2e2e2"
        out.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{cell}" height="{cell}" '
            f'fill="{fill}" stroke="#cccccc" stroke-width="0.5"/>'
        )
        if show_arrows:
            for edge, lab in zip("nesw", tile.edges()):
                if lab.arrow is None:
                    continue
                (ax, ay), (bx, by) = _arrow_tick(edge, lab.arrow)
                sx, sy = to_svg(x, y, ax, ay)
                ex, ey = to_svg(x, y, bx, by)
                out.append(
                    f'<line x1="{_fmt(sx)}" y1="{_fmt(sy)}" x2="{_fmt(ex)}" y2="{_fmt(ey)}" '
                    f'stroke="#b8b8b8" stroke-width="0.7" marker-end="url(#tip)"/>'
                )
        for colour, (ax, ay), (bx, by) in _tile_segments(tile):
            sx, sy = to_svg(x, y, ax, ay)
            ex, ey = to_svg(x, y, bx, by)
            out.append(
                f'<line x1="{_fmt(sx)}" y1="{_fmt(sy)}" x2="{_fmt(ex)}" y2="{_fmt(ey)}" '
                f'stroke="{_LINE_COLOURS[colour]}" stroke-width="1.6" '
                f'stroke-linecap="square"/>'
            )
        if tile.template == "bumpy-cross":
            cxl, cyl = 0.5, 0.5
            cxs, cys = to_svg(x, y, cxl, cyl)
            out.append(
                f'<circle cx="{_fmt(cxs)}" cy="{_fmt(cys)}" r="{_fmt(cell * 0.08)}" '
                f'fill="#2c3e50"/>'
            )

    defs = (
        '<defs><marker id="tip" viewBox="0 0 4 4" refX="3" refY="2" markerWidth="3" '
        'markerHeight="3" orient="auto"><path d="M0,0 L4,2 L0,4 z" fill="#b8b8b8"/>'
        "</marker></defs>"
    )
    out.insert(1, defs)
    out.append("</svg>")
    return "\n".join(out) + "\n"
