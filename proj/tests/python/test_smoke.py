import json
import math

import numpy as np
import pytest

import skelfuse as sf


def test_rigid_transform_round_trip():
    r = sf.rotation_z(math.pi / 3)
    t = sf.RigidTransform(r, np.array([0.5, -1.0, 2.0]))
    p = np.array([0.1, 0.2, 0.3])
    q = sf.invert(t).apply(t.apply(p))
    assert np.allclose(q, p, atol=1e-12)

    composed = sf.compose(t, sf.invert(t))
    assert sf.rotation_angle(composed.rotation) < 1e-12
    assert np.linalg.norm(composed.translation) < 1e-12


def test_rotation_averaging_and_alignment():
    avg = sf.average_rotations([sf.rotation_z(0.1), sf.rotation_z(0.3)])
    assert abs(sf.rotation_distance(avg, sf.rotation_z(0.2))) < 1e-6

    truth = sf.RigidTransform(sf.rotation_z(0.4), np.array([1.0, 2.0, 3.0]))
    src = [np.array(p, dtype=float) for p in [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)]]
    pairs = [(p, truth.apply(p)) for p in src]
    est = sf.align_least_squares(pairs)
    assert sf.rotation_distance(est.rotation, truth.rotation) < 1e-9
    assert np.linalg.norm(est.translation - truth.translation) < 1e-9


def test_backprojection_examples():
    k = sf.Intrinsics(320, 288, 100.0, 100.0, 160.0, 144.0)
    p = sf.backproject_pixel(k, k.cx, k.cy, 1000.0)
    assert np.allclose(p, [0.0, 0.0, 1.0])
    px = sf.project(np.array([2.0, 0.0, 2.0]), k)
    assert px is not None
    assert px.u == pytest.approx(k.cx + k.fx)
    assert sf.project(np.array([0.0, 0.0, -1.0]), k) is None


def test_confidence_weights_and_merge():
    assert sf.weight_of(sf.Confidence.NONE) == 0.0
    assert sf.weight_of(sf.Confidence.LOW) == 0.25
    assert sf.weight_of(sf.Confidence.MEDIUM) == 0.5
    assert sf.weight_of(sf.Confidence.HIGH) == 1.0

    i = sf.Joint()
    i.id = sf.JointId.NECK
    i.position = np.zeros(3)
    i.confidence = sf.Confidence.MEDIUM
    j = sf.Joint()
    j.id = sf.JointId.NECK
    j.position = np.array([0.3, 0.0, 0.0])
    j.confidence = sf.Confidence.LOW
    merged = sf.merge_joint(i, j)
    assert merged.position[0] == pytest.approx(0.1, abs=1e-12)
    assert merged.confidence == sf.Confidence.MEDIUM


def _pelvis_skeleton(body_id, pos):
    joint = sf.Joint()
    joint.id = sf.JointId.PELVIS
    joint.position = np.asarray(pos, dtype=float)
    joint.confidence = sf.Confidence.HIGH
    skel = sf.Skeleton()
    skel.body_id = body_id
    skel.joints = [joint]
    return skel


def test_matching():
    a = [_pelvis_skeleton(1, (0, 0, 1)), _pelvis_skeleton(2, (2, 0, 1))]
    b = [_pelvis_skeleton(7, (0.05, 0, 1))]
    out = sf.match_skeletons(a, b)
    assert len(out.pairs) == 1
    assert out.pairs[0].a.body_id == 1
    assert out.pairs[0].b.body_id == 7
    assert len(out.isolated_a) == 1
    assert not out.isolated_b

    hist = sf.fuse_match_history(out)
    assert hist.contains(1, 7)


SCENE = {
    "floor": True,
    "boxes": [
        {"min": [-1.1, 0.1, 0.0], "max": [-0.5, 0.7, 0.9]},
        {"min": [0.6, 0.2, 0.0], "max": [1.1, 0.7, 0.5]},
    ],
    "bodies": [
        {"waypoints": [{"t_us": 0, "pos": [0.0, 0.35, 0.95], "heading_rad": -1.5707963267948966}]}
    ],
    "sensors": [
        {
            "sensor_id": "cam0",
            "intrinsics": {"width": 160, "height": 144, "fx": 104.0, "fy": 104.0, "cx": 80.0, "cy": 72.0},
            "extrinsic_4x4_row_major": [1, 0, 0, -0.9, 0, 0, 1, -2.7, 0, -1, 0, 1.5, 0, 0, 0, 1],
            "phase_offset_us": 0,
        },
        {
            "sensor_id": "cam1",
            "intrinsics": {"width": 160, "height": 144, "fx": 104.0, "fy": 104.0, "cx": 80.0, "cy": 72.0},
            "extrinsic_4x4_row_major": [
                0.9394130628134758, 0, -0.3428978074554514, 1.1,
                0.3428978074554514, 0, 0.9394130628134758, -2.6,
                0, -1, 0, 1.45,
                0, 0, 0, 1,
            ],
            "phase_offset_us": 11111,
        },
    ],
    "noise": {"joint_pos_sigma_m": 0.01, "axis_sigma_rad": 0.01, "depth_sigma_mm": 1.0},
    "seed": 5,
    "duration_s": 1.0,
    "fps": 30,
    "calibration_times_us": [0],
}


def test_pipeline_end_to_end(tmp_path):
    scene_file = tmp_path / "scene.json"
    scene_file.write_text(json.dumps(SCENE))
    session = tmp_path / "session"

    summary = sf.simulate(scene_file, session)
    assert summary["sensor_count"] == 2
    assert summary["frames_per_sensor"] == 30

    n = sf.cloud(session / "depth_cam0_0.pgm", session / "depth_cam0_0.json", tmp_path / "cloud.ply")
    assert n > 1000

    calib = sf.calibrate(session, session / "calibration.json")
    assert calib["reference_sensor_id"] == "cam0"
    assert set(calib["sensors"]) == {"cam0", "cam1"}

    fuse = sf.fuse(session, session / "calibration.json", session / "fused.jsonl")
    assert fuse["ticks"] > 20

    report = sf.evaluate(session / "fused.jsonl", session / "ground_truth.json", session)
    assert report["matching_accuracy"] == 1.0
    assert report["fused"]["rms_m"] < 0.05
    assert "cam1" in report["sensors"]
