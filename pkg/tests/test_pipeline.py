import math
import os

import numpy as np
import pytest

from devoc import nn, pipeline, raster, structural, synth
from devoc.config import Config
from devoc.pipeline import (
    REJECTED,
    GroupModelSet,
    InsufficientDataError,
    MalformedModelSetError,
)


def tiny_corpus(templates, per_class=10, amplitude=0, seed=0):
    samples = synth.generate_corpus(templates, per_class, amplitude, seed)
    return pipeline.corpus_from_samples(samples)


@pytest.fixture(scope="module")
def trained(templates):
    """A small trained model set shared by the read-only tests below."""
    samples = tiny_corpus(templates)
    modelset, reports, routing_log = pipeline.train_all(samples)
    return samples, modelset, reports, routing_log


class TestPreprocess:
    def test_shape_and_width(self, templates):
        img = synth.render(templates[0], synth.JitterSpec(2, 3))
        out = pipeline.preprocess_glyph(img)
        assert out.shape == (100, 100)
        assert raster.is_one_pixel_wide(out)
        assert out.any()

    def test_empty_raises(self):
        with pytest.raises(raster.EmptyImageError):
            pipeline.preprocess_glyph(np.zeros((50, 50), dtype=bool))

    def test_small_glyph_is_scaled_up(self):
        img = np.zeros((200, 200), dtype=bool)
        img[100, 50:80] = True
        img[100:120, 79] = True
        out = pipeline.preprocess_glyph(img)
        box = raster.bounding_box(out)
        assert box.row_max - box.row_min > 90 or box.col_max - box.col_min > 90


class TestAnalyze:
    def test_matches_template_truth(self, templates):
        for t in templates[:4]:
            analysis = pipeline.analyze_glyph(synth.render(t, synth.JitterSpec(0, 0)))
            assert analysis.group == t.truth
            assert analysis.raw_features.shape == (32,)

    def test_matra_column_masked_from_features(self):
        # glyph with spine + matra: features must not see the matra bar
        img = np.zeros((100, 100), dtype=bool)
        img[2, :] = True
        img[2:, 55] = True
        img[2:, 99] = True
        analysis = pipeline.analyze_glyph(img)
        assert analysis.spine.matra_col is not None
        mc = analysis.spine.matra_col
        # the matra's lower open end would land in a right-edge tile; the
        # raw features there must not count it
        from devoc import features as F

        body = analysis.skeleton.copy()
        body[:, max(mc - 1, 0) : mc + 2] = False
        assert np.array_equal(analysis.raw_features, F.extract_features(body))


class TestRecognize:
    def test_unmodeled_group_is_rejected(self, templates):
        img = synth.render(templates[0], synth.JitterSpec(0, 0))
        pred = pipeline.recognize(img, GroupModelSet())
        assert pred.label == REJECTED
        assert pred.confidence == 0.0
        assert pred.group == templates[0].truth

    def test_trained_prediction(self, trained, templates):
        _, modelset, _, _ = trained
        img = synth.render(templates[0], synth.JitterSpec(0, 0))
        pred = pipeline.recognize(img, modelset)
        assert pred.label == templates[0].class_label
        assert 0.0 < pred.confidence <= 1.0


class TestCorpusChecks:
    def test_single_class_group_rejected(self, templates):
        only_one = [s for s in tiny_corpus(templates) if s.class_label == "cha"]
        with pytest.raises(InsufficientDataError) as exc:
            pipeline.train_all(only_one)
        assert exc.value.group == "full_end"

    def test_single_sample_class_rejected(self, templates):
        samples = tiny_corpus(templates, per_class=2)
        pruned = [s for s in samples if not (s.class_label == "kha" and s.path.endswith("0001.pbm"))]
        with pytest.raises(InsufficientDataError):
            pipeline.train_all(pruned)


class TestTrainAll:
    def test_one_model_per_group(self, trained):
        samples, modelset, reports, _ = trained
        groups = {s.group for s in samples}
        assert set(modelset.models) == groups == set(reports)
        for key, (net, labels) in modelset.models.items():
            assert net.n_out == len(labels) == 3
            assert labels == sorted(labels)

    def test_training_is_deterministic(self, templates):
        samples = tiny_corpus(templates, per_class=4)
        a, _, _ = pipeline.train_all(samples)
        b, _, _ = pipeline.train_all(samples)
        for key in a.models:
            assert np.array_equal(
                nn.flatten_params(a.models[key][0]), nn.flatten_params(b.models[key][0])
            )

    def test_routing_log_shape(self, trained):
        _, _, _, routing_log = trained
        for path, manifest_group, detected_group in routing_log:
            assert isinstance(path, str)
            structural.parse_group_name(detected_group)


class TestEvaluate:
    def test_report_recounts_from_records(self, trained):
        samples, modelset, _, _ = trained
        report = pipeline.evaluate(samples, modelset)
        # independent recount straight from the per-sample records
        for row in report.rows:
            recs = [r for r in report.records if r.manifest_group == row.group]
            test = [r for r in recs if r.split == "test"]
            train = [r for r in recs if r.split == "train"]
            assert row.n_test == len(test) and row.n_train == len(train)
            if test:
                expect = 100.0 * sum(r.predicted_label == r.true_label for r in test) / len(test)
                assert row.test_accuracy == pytest.approx(expect)
        test = [r for r in report.records if r.split == "test"]
        expect = 100.0 * sum(r.predicted_label == r.true_label for r in test) / len(test)
        assert report.overall_accuracy == pytest.approx(expect)

    def test_zero_jitter_corpus_is_fully_learned(self, trained):
        samples, modelset, _, _ = trained
        report = pipeline.evaluate(samples, modelset)
        assert report.overall_accuracy == pytest.approx(100.0)

    def test_empty_test_split_renders_na(self, templates):
        samples = [s for s in tiny_corpus(templates, per_class=5)]  # indices 0..4: all train
        assert all(s.split == "train" for s in samples)
        modelset, _, _ = pipeline.train_all(samples)
        report = pipeline.evaluate(samples, modelset)
        assert math.isnan(report.overall_accuracy)
        text = pipeline.render_report(report)
        assert "n/a" in text

    def test_render_report_layout(self, trained):
        samples, modelset, _, _ = trained
        report = pipeline.evaluate(samples, modelset)
        lines = pipeline.render_report(report).splitlines()
        assert lines[0].split() == ["group", "test_acc", "train_acc", "n_test", "n_train"]
        assert lines[-1].startswith("overall test accuracy:")
        assert len(lines) == 2 + len(report.rows)

    def test_csv_outputs(self, trained):
        samples, modelset, _, _ = trained
        report = pipeline.evaluate(samples, modelset)
        rcsv = pipeline.report_csv(report)
        assert rcsv.startswith("group,test_acc,train_acc,n_test,n_train\n")
        assert len(rcsv.strip().splitlines()) == 1 + len(report.rows)
        pcsv = pipeline.predictions_csv(report)
        assert len(pcsv.strip().splitlines()) == 1 + len(report.records)


class TestModelSetPersistence:
    def test_round_trip(self, trained, tmp_path):
        _, modelset, _, _ = trained
        d = str(tmp_path / "models")
        pipeline.save_modelset(d, modelset)
        assert os.path.exists(os.path.join(d, "modelset.txt"))
        back = pipeline.load_modelset(d)
        assert set(back.models) == set(modelset.models)
        for key in modelset.models:
            neta, labelsa = modelset.models[key]
            netb, labelsb = back.models[key]
            assert labelsa == labelsb
            assert np.array_equal(nn.flatten_params(neta), nn.flatten_params(netb))
            assert os.path.exists(os.path.join(d, "%s.mlp" % key))

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            pipeline.load_modelset(str(tmp_path))

    def test_bad_magic(self, tmp_path):
        (tmp_path / "modelset.txt").write_text("WRONG v9\n")
        with pytest.raises(MalformedModelSetError):
            pipeline.load_modelset(str(tmp_path))

    def test_bad_line(self, tmp_path):
        (tmp_path / "modelset.txt").write_text("DEVOC-MODELSET v1\nfull_end\n")
        with pytest.raises(MalformedModelSetError):
            pipeline.load_modelset(str(tmp_path))


class TestLoadCorpus:
    def test_from_disk(self, templates, tmp_path):
        root = str(tmp_path / "corpus")
        synth.write_corpus(synth.generate_corpus(templates[:2], 3, 0, 0), root)
        samples = pipeline.load_corpus(root)
        assert len(samples) == 6
        for s in samples:
            assert s.image.shape == (100, 100)
            assert s.split in ("train", "test")
