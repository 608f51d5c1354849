"""Walk one glyph through the raster pipeline stage by stage.

Renders a synthetic character, then shows what crop/thicken/thin/prune and
the final 100x100 normalization each do to it. Run from the repo root:

    python3 demos/01_preprocessing.py
"""

import numpy as np

from devoc import raster, synth


def show(title, img, scale=4):
    """Coarse ASCII view: collapse scale x scale blocks to one char."""
    h, w = img.shape
    rows = []
    for r in range(0, h - h % scale, scale):
        row = ""
        for c in range(0, w - w % scale, scale):
            row += "#" if img[r : r + scale, c : c + scale].any() else "."
        rows.append(row)
    print("--- %s  (%dx%d, %d fg px)" % (title, h, w, int(img.sum())))
    print("\n".join(rows))
    print()


def main():
    tpl = synth.default_templates()[1]  # "kha": headline + end spine + body
    glyph = synth.render(tpl, synth.JitterSpec(amplitude=2, seed=7))
    show("rendered glyph (already thin)", glyph)

    # pretend it came from a scanner: pad it into a larger page and fatten it
    page = np.zeros((160, 160), dtype=bool)
    page[30:130, 20:120] = glyph
    page = raster.thicken(raster.thicken(page))
    show("simulated scan (thick, off-center)", page)

    cropped = raster.crop(page, raster.bounding_box(page))
    thin = raster.thin_to_convergence(cropped)
    show("thinned back to one pixel wide", thin)
    print("one pixel wide?", raster.is_one_pixel_wide(thin))

    pruned = raster.prune(thin, max_spur=3)
    print("prune removed %d spur pixel(s)" % int(thin.sum() - pruned.sum()))

    norm = raster.normalize(pruned)
    show("normalized to 100x100", norm)
    box = raster.bounding_box(norm)
    print("bounding box after normalize:", box)


if __name__ == "__main__":
    main()
