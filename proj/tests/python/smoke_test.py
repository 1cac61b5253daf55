"""Smoke tests for the python module: touch every operation family."""
import math
import sys

import trimdie as td


def approx(a, b, tol=1e-9):
    return abs(a - b) <= tol


def test_detmath():
    a = td.Box(1.0, 1.0, 2.0, 2.0)
    assert td.iou(a, a) == 1.0
    c1 = td.Box.from_xywh(0, 0, 2, 2)
    c2 = td.Box.from_xywh(1, 1, 2, 2)
    assert approx(td.iou(c1, c2), 1.0 / 7.0)

    kept = td.nms([a, a], [0.9, 0.8], 0.5)
    assert list(kept) == [0]

    assert td.smooth_l1(2.0) == 1.5
    assert td.smooth_l1(0.5) == 0.125
    assert approx(td.cls_loss(td.ClassProbs([0.5, 0.5]), 0), math.log(2.0))
    assert td.box_reg_loss(td.BoxDelta(2, 2, 2, 2), td.BoxDelta(0, 0, 0, 0)) == 6.0

    anchor = td.Box(10, 10, 8, 4)
    target = td.Box(14, 11, 6, 5)
    back = td.decode_box(anchor, td.encode_box(anchor, target))
    assert approx(back.cx, target.cx) and approx(back.w, target.w)

    grid = td.anchor_grid(32, 32, 16, [8, 16, 32], [0.5, 1, 2])
    assert len(grid) == 36

    batch = td.RpnBatch()
    batch.anchors = [anchor]
    batch.p = [0.9]
    batch.p_star = [td.AnchorLabel.positive]
    batch.t = [td.BoxDelta(0, 0, 0, 0)]
    batch.t_star = [td.BoxDelta(0, 0, 0, 0)]
    batch.n_cls = 1.0
    batch.n_reg = 1.0
    assert approx(td.rpn_loss(batch), -math.log(0.9))


def test_zigzag_pipeline():
    design = td.generate_design(7, 3)
    assert len(design.trimming_lines) == 3
    line = design.target_line()

    spots = td.place_spots(design, line.line_id, 5)
    assert len(spots) == 5

    profile = td.section_at(design, spots[2])
    assert profile.truth_lengths.pd == line.profile.pd

    vp = td.Viewport(profile.target_center, 1.25, 1880, 933)
    image, truth_boxes = td.render_section(profile, vp, True)
    assert image.width == 1880 and image.height == 933
    assert truth_boxes[0].label == "region"

    dets = td.detect_trimming_region(image, td.DetectorConfig())
    assert len(dets) == 1
    assert td.iou(dets[0].box, truth_boxes[0].box) >= 0.5

    crop = td.render_zoom(profile, profile.target_center, 10.0 / 107.0, 640)
    points = td.detect_target_points(crop, td.DetectorConfig())
    assert sorted(d.label for d in points) == [f"point_{i}" for i in range(1, 6)]

    circle = td.render_calibration_circle(10.0 / 107.0, 640)
    sf = td.scale_factor(circle)
    assert approx(sf.gamma, 10.0 / 107.0)

    centers = [None] * 5
    for d in points:
        centers[int(d.label[-1]) - 1] = td.Vec2(d.box.cx, d.box.cy)
    m = td.measure_lengths(centers, sf)
    assert abs(m.pd - line.profile.pd) <= 2 * sf.gamma
    assert abs(m.ul - line.profile.ul) <= 2 * sf.gamma
    assert abs(m.gl - line.profile.gl) <= 2 * sf.gamma


def test_inspect_and_report():
    cfg = td.PipelineConfig()
    cfg.n_spots = 4
    design = td.generate_design(cfg.generation.seed, cfg.generation.n_lines,
                                cfg.generation.ranges)
    report = td.inspect_die(design, cfg)
    assert report.aggregates.region_accuracy == 1.0
    assert report.aggregates.mean_rel_error <= 2.4
    assert all(s.status == td.SpotStatus.ok for s in report.spots)
    assert td.verify_report_consistency(report)
    assert "aggregates" in report.to_json()

    t = td.StageTiming()
    t.data_processing = 5.3
    t.selective_cropping = 3.2
    t.region_detection = 1.2
    t.point_detection_measurement = 2.8
    t.zigzag_overhead = 10.0
    assert td.total_time(t, 50) == 635.0

    assert approx(td.spot_success_prob(td.FailureModel()), 0.983 ** 5)
    assert approx(td.line_failure_rate(0.082, 2), 0.082 ** 2)


def test_images_and_checks():
    img = td.RgbImage.filled(3, 2, td.Rgb(255, 255, 255))
    data = td.encode_ppm(img)
    assert data.startswith(b"P6\n3 2\n255\n")
    back = td.decode_ppm(data)
    assert back.width == 3 and back.height == 2

    opts = td.CheckOptions()
    opts.grad_trials = 20
    opts.nms_trials = 40
    opts.roundtrip_trials = 40
    results = td.run_detmath_checks(opts)
    assert all(r.passed for r in results)

    try:
        td.relative_error(1.0, 0.0)
    except RuntimeError:
        pass
    else:
        raise AssertionError("expected an error for truth <= 0")


if __name__ == "__main__":
    test_detmath()
    test_zigzag_pipeline()
    test_inspect_and_report()
    test_images_and_checks()
    print("python smoke tests passed")
    sys.exit(0)
