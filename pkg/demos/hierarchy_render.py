"""Render the self-similar macro-tile hierarchy to SVG files.

Each scale-n square (side 2^n - 1) contains four copies of the previous
scale in its corners; the renderer draws the arm/cross structure directly,
so the nesting is visible by eye.  Writes m1.svg .. m5.svg to ./out/.
"""

from pathlib import Path

from groundlab.render import render_patch_svg
from groundlab.robinson import build_macro_tile, build_tileset
from groundlab.tiles import check_patch

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)
ts = build_tileset()
for n in range(1, 6):
    patch = build_macro_tile(n)
    bad = check_patch(ts, patch)
    path = out / f"m{n}.svg"
    path.write_text(render_patch_svg(ts, patch, cell=18))
    print(f"scale {n}: side {patch.width:3d}, violations {len(bad)}, "
          f"wrote {path}")
