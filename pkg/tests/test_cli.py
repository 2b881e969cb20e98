import argparse
import math

import numpy as np
import pytest

from nose_tip_locator.args import parse_args, parse_poses, parse_sweep
from nose_tip_locator.core import Axis
from nose_tip_locator.ingest import (
    DepthFileFormat,
    load_depth_map,
    load_landmark,
    load_point_cloud,
    save_depth_map,
)
from nose_tip_locator.main import main, pipeline_config
from nose_tip_locator.synth import FaceParams, generate_face


@pytest.fixture
def clean_face(tmp_path):
    path = str(tmp_path / "face.grid")
    assert main(["synth", "--out", path]) == 0
    return path


@pytest.fixture
def spiked_face(tmp_path):
    """Clean face with two adjacent tall spikes well away from the nose."""
    clean, truth = generate_face(FaceParams())
    depth = np.array(clean.depth)
    depth[20, 40] += 200.0
    depth[20, 41] += 200.0
    path = str(tmp_path / "spiked.grid")
    save_depth_map(clean.with_depth(depth), path, DepthFileFormat.ASCII_GRID)
    return path, truth


def test_parse_sweep():
    assert parse_sweep("-30:30:2.5") == (-30.0, 30.0, 2.5)
    with pytest.raises(argparse.ArgumentTypeError):
        parse_sweep("1:2")


def test_parse_poses():
    assert parse_poses("frontal") == [None]
    poses = parse_poses("frontal,y:30,z:-18")
    assert poses[0] is None
    assert [(p.axis, round(p.degrees)) for p in poses[1:]] == [(Axis.Y, 30), (Axis.Z, -18)]
    assert len(parse_poses("all")) == 21


def test_detect_flags_map_onto_config():
    args = parse_args(["detect", "--input", "a.xyz", "--format", "xyz", "--no-smooth", "--align-axis", "z"])
    config = pipeline_config(args)
    assert config.input_format is DepthFileFormat.XYZ
    assert not config.smooth
    assert config.align_axis is Axis.Z
    assert config.landmark_path == "a.xyz.landmark"


def test_synth_writes_reloadable_files(clean_face):
    depth_map = load_depth_map(clean_face, DepthFileFormat.ASCII_GRID)
    truth = load_landmark(clean_face + ".truth.landmark")
    assert depth_map.shape == (64, 64)
    assert (truth.row, truth.col) == (32, 32)


def test_synth_is_byte_identical_per_seed(tmp_path):
    paths = [tmp_path / "a.grid", tmp_path / "b.grid"]
    for path in paths:
        assert main(["synth", "--out", str(path), "--spike-frac", "0.05", "--gauss-sigma", "0.3", "--seed", "9"]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert (tmp_path / "a.grid.truth.landmark").read_bytes() == (tmp_path / "b.grid.truth.landmark").read_bytes()


def test_synth_pose_changes_ground_truth(tmp_path):
    frontal, posed = tmp_path / "f.grid", tmp_path / "p.grid"
    assert main(["synth", "--out", str(frontal)]) == 0
    assert main(["synth", "--out", str(posed), "--pose-axis", "y", "--pose-deg", "40"]) == 0
    assert load_landmark(str(frontal) + ".truth.landmark") != load_landmark(str(posed) + ".truth.landmark")


def test_synth_rejects_bad_spike_fraction(tmp_path, capsys):
    assert main(["synth", "--out", str(tmp_path / "x.grid"), "--spike-frac", "0.5"]) == 1
    assert "parameters" in capsys.readouterr().err


def test_detect_clean_face(clean_face, tmp_path):
    out = str(tmp_path / "nose.landmark")
    assert main(["detect", "--input", clean_face, "--out-landmark", out, "--truth", clean_face + ".truth.landmark"]) == 0
    found = load_landmark(out)
    truth = load_landmark(clean_face + ".truth.landmark")
    assert abs(found.row - truth.row) <= 1
    assert abs(found.col - truth.col) <= 1


def test_detect_missing_input_names_path(tmp_path, capsys):
    missing = str(tmp_path / "nowhere.grid")
    assert main(["detect", "--input", missing]) == 1
    err = capsys.readouterr().err
    assert "load" in err
    assert missing in err


def test_detect_reports_bad_config(clean_face, capsys):
    assert main(["detect", "--input", clean_face, "--kernel-side", "4", "--iterations", "0"]) == 1
    err = capsys.readouterr().err
    assert "kernel side" in err
    assert "iterations" in err


def test_no_smooth_contrast_on_spikes(spiked_face, tmp_path):
    path, truth = spiked_face
    raw_out, smooth_out = str(tmp_path / "raw.landmark"), str(tmp_path / "smooth.landmark")
    assert main(["detect", "--input", path, "--no-smooth", "--out-landmark", raw_out]) == 0
    assert main(["detect", "--input", path, "--iterations", "10", "--out-landmark", smooth_out]) == 0
    raw, smoothed = load_landmark(raw_out), load_landmark(smooth_out)
    assert (raw.row, raw.col) != (smoothed.row, smoothed.col)
    assert math.hypot(smoothed.row - truth.row, smoothed.col - truth.col) <= 1.5


def test_detect_writes_every_requested_output(clean_face, tmp_path):
    smoothed = str(tmp_path / "smoothed.grid")
    cloud = str(tmp_path / "aligned.xyz")
    mesh = tmp_path / "face.obj"
    dump = tmp_path / "dump"
    code = main(
        [
            "detect",
            "--input", clean_face,
            "--iterations", "5",
            "--align-axis", "y",
            "--sweep", "-10:10:2",
            "--out-smoothed", smoothed,
            "--out-cloud", cloud,
            "--out-mesh", str(mesh),
            "--mesh-iterations", "1",
            "--dump-dir", str(dump),
        ]
    )
    assert code == 0
    assert load_depth_map(smoothed, DepthFileFormat.ASCII_GRID).shape == (64, 64)
    assert load_point_cloud(cloud).shape[1] == 3
    assert mesh.read_text(encoding="utf-8").startswith("v ")
    assert sorted(p.name for p in dump.iterdir()) == [
        "01_input.grid",
        "02_histogram.txt",
        "03_mask.grid",
        "04_masked.grid",
        "05_smoothed.grid",
        "06_nose_tip.landmark",
        "07_aligned.xyz",
    ]


def test_out_cloud_needs_align_axis(clean_face, tmp_path, capsys):
    assert main(["detect", "--input", clean_face, "--out-cloud", str(tmp_path / "c.xyz")]) == 1
    assert "--align-axis" in capsys.readouterr().err


def test_truth_check_is_printed(clean_face, capsys):
    truth = clean_face + ".truth.landmark"
    assert main(["detect", "--input", clean_face, "--no-smooth", "--truth", truth]) == 0
    assert "distance to truth" in capsys.readouterr().out


def test_bench_one_face_csv(tmp_path):
    csv = tmp_path / "bench.csv"
    summary = tmp_path / "bench.txt"
    assert main(["bench", "--faces", "1", "--out-csv", str(csv), "--out-summary", str(summary)]) == 0
    lines = csv.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 3
    assert summary.read_text(encoding="utf-8").startswith("# faces_per_viewpoint=1")


def test_bench_zero_noise(tmp_path):
    summary = tmp_path / "clean.txt"
    args = ["bench", "--faces", "4", "--spike-frac", "0", "--gauss-sigma", "0", "--out-summary", str(summary)]
    assert main(args) == 0
    overall = [line for line in summary.read_text(encoding="utf-8").splitlines() if line.startswith("overall")]
    assert len(overall) == 2
    assert all(float(line.split()[3]) >= 99.0 for line in overall)


def test_bench_spikes_favour_smoothing(tmp_path):
    csv = tmp_path / "spiked.csv"
    assert main(["bench", "--faces", "10", "--spike-amp", "200", "--seed", "5", "--out-csv", str(csv)]) == 0
    rows = [line.split(",") for line in csv.read_text(encoding="utf-8").splitlines()[1:]]
    success = {row[0]: float(row[6]) for row in rows}
    assert success["smoothed"] > success["unsmoothed"]


def test_bench_rejects_bad_poses():
    with pytest.raises(SystemExit):
        main(["bench", "--poses", "w:10"])


def test_sweep_with_negative_start_as_documented(clean_face):
    args = parse_args(["detect", "--input", clean_face, "--align-axis", "y", "--sweep", "-45:45:1"])
    assert args.sweep == (-45.0, 45.0, 1.0)
    assert main(["detect", "--input", clean_face, "--align-axis", "y", "--sweep", "-45:45:1", "--no-smooth"]) == 0


def test_unsmoothed_output_is_reported_as_masked(clean_face, tmp_path, capsys):
    out = str(tmp_path / "masked.grid")
    assert main(["detect", "--input", clean_face, "--no-smooth", "--out-smoothed", out]) == 0
    printed = capsys.readouterr().out
    assert "masked map" in printed
    assert "smoothed map" not in printed


def test_undecodable_input_is_a_load_error(tmp_path, capsys):
    path = tmp_path / "bad.grid"
    path.write_bytes(b"2 2\n1 2\n3 \xff\n")
    assert main(["detect", "--input", str(path)]) == 1
    err = capsys.readouterr().err
    assert "load" in err
    assert "UTF-8" in err
