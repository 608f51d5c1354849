"""Zoning features: where the intersections and open ends fall.

Draws the 4x4 tile grid over a skeleton, marks each feature point, and
prints the 32-value count vector plus its scaled network input form.

    python3 demos/03_features.py
"""

import numpy as np

from devoc import features, pipeline, synth


def main():
    tpl = synth.default_templates()[4]  # "ka" has a busy body
    img = synth.render(tpl, synth.JitterSpec(amplitude=1, seed=3))
    skel = pipeline.preprocess_glyph(img)

    points = features.find_feature_points(skel)
    print("feature points on %r:" % tpl.id)
    for p in sorted(points, key=lambda p: p.position):
        print("  %-13s at %-9s tile %2d" % (p.kind.value, p.position, features.tile_of(*p.position)))

    vec = features.extract_features(skel)
    print()
    print("raw 32-vector, tiles row-major, (intersections, ends) per tile:")
    for tr in range(4):
        row = []
        for tc in range(4):
            t = tr * 4 + tc
            row.append("(%d,%d)" % (vec[2 * t], vec[2 * t + 1]))
        print("  " + "  ".join("%-7s" % v for v in row))

    scaled = features.scale_features(vec)
    print()
    print("scaled input (counts / 5, clamped to [0,1]):")
    print(np.array2string(scaled, precision=2, max_line_width=100))


if __name__ == "__main__":
    main()
