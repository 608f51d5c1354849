"""The whole system through the same entry points the CLI uses.

Writes a corpus to a temp directory, trains, evaluates, then classifies a
few individual image files -- exactly what

    devoc synth ... && devoc train ... && devoc eval ... && devoc predict ...

does, minus the shell.

    python3 demos/05_end_to_end.py
"""

import os
import tempfile

from devoc import cli, synth


def main():
    with tempfile.TemporaryDirectory() as tmp:
        corpus = os.path.join(tmp, "corpus")
        models = os.path.join(tmp, "models")

        print("$ devoc synth %s --per-class 20 --amplitude 2" % corpus)
        cli.main(["synth", corpus, "--per-class", "20", "--amplitude", "2"])
        print()

        print("$ devoc train %s %s" % (corpus, models))
        cli.main(["train", corpus, models])
        print()

        print("$ devoc eval %s %s" % (corpus, models))
        cli.main(["eval", corpus, models])
        print()

        entries = synth.read_manifest(corpus)
        for entry in entries[:3]:
            img = os.path.join(corpus, entry.path)
            print("$ devoc predict %s %s" % (entry.path, models))
            print("  true label: %s" % entry.class_label)
            print("  output:     ", end="")
            cli.main(["--quiet", "predict", img, models])


if __name__ == "__main__":
    main()
