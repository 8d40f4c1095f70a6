"""End-to-end smoke tests for the python bindings."""

import math

import pytest

import contrack as ct


def test_geometry():
    a = ct.Box(0.5, 0.5, 0.2, 0.2)
    assert ct.iou(a, a) == 1.0
    b = ct.Box.from_corners(0.0, 0.0, 2.0, 2.0)
    c = ct.Box.from_corners(1.0, 1.0, 3.0, 3.0)
    assert ct.iou(b, c) == pytest.approx(1.0 / 7.0, abs=1e-12)
    assert ct.giou(b, c) == pytest.approx(1.0 / 7.0 - 2.0 / 9.0, abs=1e-12)
    assert ct.cosine_similarity([1.0, 1.0], [1.0, 0.0]) == pytest.approx(
        math.sqrt(0.5), abs=1e-12
    )
    with pytest.raises(ValueError):
        ct.cosine_similarity([1.0], [1.0, 2.0])


def test_assignment():
    out = ct.solve_assignment([[1.0, 2.0], [2.0, 1.0]], mode="min")
    assert out["pairs"] == [(0, 0), (1, 1)]
    assert out["total"] == 2.0

    out = ct.solve_assignment([[0.9], [0.8]], mode="max")
    assert out["pairs"] == [(0, 0)]
    assert out["unassigned_rows"] == [1]

    out = ct.solve_assignment([[5.0, 1.0]], mode="min", forbidden=[(0, 1)])
    assert out["pairs"] == [(0, 0)]


def test_contrastive_losses():
    assert ct.pair_loss([1.0, 0.0], [0.8, 0.6], [], temperature=0.1) == 0.0
    batch = ct.MatchedEmbeddingBatch(
        [
            ct.BatchEntry([1.0, 0.0], video_id=0, instance_id=0, frame_id=0),
            ct.BatchEntry([0.8, 0.6], video_id=0, instance_id=0, frame_id=1),
            ct.BatchEntry([0.0, 1.0], video_id=1, instance_id=0, frame_id=0),
        ],
        temperature=0.1,
    )
    loss = ct.batch_contrastive_loss(batch)
    assert loss > 0.0

    analytic = ct.contrastive_gradient(batch)
    numeric = ct.finite_difference_gradient(batch)
    for ga, gn in zip(analytic, numeric):
        for a, n in zip(ga, gn):
            assert a == pytest.approx(n, abs=1e-7)

    assert ct.focal_loss([1.0], 0) == 0.0


def test_sampler():
    index = ct.DatasetIndex(
        [ct.VideoInfo(v, list(range(1, 11))) for v in range(1, 6)]
    )
    batch = ct.sample_tracking_batch(index, 2, 8, seed=7)
    assert len(batch) == 16
    assert batch == ct.sample_tracking_batch(index, 2, 8, seed=7)
    views = ct.build_pretraining_batch(index, 3, seed=1)
    assert len(views) == 6
    assert sorted({tag for (_, _, tag) in views}) == [0, 1]


def test_tracker_and_metrics_pipeline():
    cfg = ct.SimulatorConfig()
    cfg.frames_per_video = 30
    cfg.identities_per_video = 4
    cfg.seed = 3
    dataset = ct.generate(cfg)
    seq = dataset.sequences[0]

    tracker = ct.Tracker(ct.TrackerConfig(memory_length=10))
    preds = []
    for f, dets in enumerate(seq.det_frames, start=1):
        out = tracker.step(f, dets)
        preds.append(
            [ct.PredObject(i, c, box, score) for (i, c, score, box) in out]
        )

    report = ct.evaluate(seq.gt_frames, preds, 0.5)
    assert report["overall"]["MOTA"] == 1.0
    assert report["overall"]["IDF1"] == 1.0
    assert report["overall"]["IDSW"] == 0
    assert report["mMOTA"] == 1.0


def test_export_and_evaluate_files(tmp_path):
    cfg = ct.SimulatorConfig()
    cfg.frames_per_video = 10
    cfg.identities_per_video = 2
    cfg.seed = 9
    ct.export_dataset(ct.generate(cfg), str(tmp_path))
    assert (tmp_path / "gt.txt").exists()
    assert (tmp_path / "dets.jsonl").exists()
    assert (tmp_path / "meta.json").exists()


def test_validation_errors_map_to_python():
    with pytest.raises(ValueError):
        ct.TrackerConfig(memory_length=0)
    cfg = ct.SimulatorConfig()
    cfg.noise_sigma = -1.0
    with pytest.raises(ValueError):
        ct.generate(cfg)
