"""Train the per-group networks in memory and watch the optimizer work.

Generates a small jittered corpus, trains one 32-40-K network per detected
structural group with scaled conjugate gradient, and prints the loss curve
endpoints and the evaluation table.

    python3 demos/04_training.py
"""

from devoc import pipeline, synth
from devoc.config import Config


def main():
    cfg = Config()
    samples = pipeline.corpus_from_samples(
        synth.generate_corpus(synth.default_templates(), per_class=30, amplitude=2, seed=0)
    )
    print("corpus: %d samples, %d train / %d test" % (
        len(samples),
        sum(s.split == "train" for s in samples),
        sum(s.split == "test" for s in samples),
    ))

    modelset, reports, routing_log = pipeline.train_all(samples, cfg)
    if routing_log:
        print("%d glyph(s) were routed to a different group than the manifest says" % len(routing_log))
    print()
    for key in sorted(reports):
        rep = reports[key]
        print(
            "%-12s %3d epochs  loss %.3g -> %.3g  |grad| %.2g  stop=%s"
            % (
                key,
                rep.epochs_run,
                rep.loss_history[0],
                rep.final_loss,
                rep.final_gradient_norm,
                rep.stop_reason.value,
            )
        )

    print()
    report = pipeline.evaluate(samples, modelset, cfg)
    print(pipeline.render_report(report))


if __name__ == "__main__":
    main()
