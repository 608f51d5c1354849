"""Stage-one structural analysis on every built-in template.

For each synthetic character this prints the traced headline kind, its span,
the spine verdict and the resulting routing group -- and checks the detector
got the template's known truth right.

    python3 demos/02_structure.py
"""

from devoc import pipeline, structural, synth


def main():
    print(
        "%-6s %-9s %-6s %-6s %-6s %-12s %s"
        % ("glyph", "headline", "span", "spine", "matra", "group", "ok")
    )
    for tpl in synth.default_templates():
        img = synth.render(tpl, synth.JitterSpec(amplitude=2, seed=42))
        a = pipeline.analyze_glyph(img)
        print(
            "%-6s %-9s %-6.2f %-6s %-6s %-12s %s"
            % (
                tpl.id,
                a.shirorekha.kind.value,
                a.shirorekha.span_ratio,
                a.spine.kind.value,
                a.spine.matra_col if a.spine.matra_col is not None else "-",
                structural.group_name(a.group),
                "yes" if a.group == tpl.truth else "NO",
            )
        )

    # the trace itself, for one glyph
    tpl = synth.default_templates()[0]
    img = synth.render(tpl, synth.JitterSpec(0, 0))
    skel = pipeline.preprocess_glyph(img)
    trace = structural.trace_from_rightmost(skel, 100)
    print()
    print(
        "trace for %r: %d points, starts %s, ends %s, termination=%s"
        % (tpl.id, len(trace.points), trace.points[0], trace.points[-1], trace.termination.value)
    )


if __name__ == "__main__":
    main()
