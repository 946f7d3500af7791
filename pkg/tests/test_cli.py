import json

import numpy as np
import pytest

from tumorsal.cli import main
from tumorsal.image import load_image, save_image, save_mask
from tumorsal.metrics import EvalReport
from tumorsal.phantom import (
    PhantomSpec,
    TumorSpec,
    generate_phantom,
    phantom_spec_to_json,
    suite_specs,
)


@pytest.fixture(scope="module")
def phantom_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    tumor_spec = PhantomSpec(
        width=48,
        height=48,
        tumors=(TumorSpec(0.5, 0.45, 0.16, 0.16, 0.8),),
        speckle_strength=0.1,
        rng_seed=21,
    )
    plain_spec = PhantomSpec(width=48, height=48, speckle_strength=0.1, rng_seed=22)
    tumor_img, tumor_mask = generate_phantom(tumor_spec)
    plain_img, _ = generate_phantom(plain_spec)
    save_image(tumor_img, root / "tumor.pgm")
    save_mask(tumor_mask, root / "tumor_gt.pgm")
    save_image(plain_img, root / "plain.pgm")
    (root / "tumor_spec.json").write_text(phantom_spec_to_json(tumor_spec))
    return root


def test_usage_error_exit_code(capsys):
    assert main([]) == 2
    assert main(["estimate"]) == 2
    assert main(["no-such-command"]) == 2
    capsys.readouterr()


def test_processing_error_exit_code(tmp_path, capsys):
    assert main(["estimate", str(tmp_path / "missing.pgm")]) == 3
    err = capsys.readouterr().err
    assert err.startswith("error:")


def test_phantom_command(tmp_path, phantom_files, capsys):
    code = main(
        [
            "phantom",
            str(phantom_files / "tumor_spec.json"),
            "--out-img",
            str(tmp_path / "img.pgm"),
            "--out-mask",
            str(tmp_path / "mask.pgm"),
        ]
    )
    assert code == 0
    img = load_image(tmp_path / "img.pgm")
    assert img.width == 48 and img.height == 48
    capsys.readouterr()


def test_estimate_writes_full_contrast_map(tmp_path, phantom_files, capsys):
    out = tmp_path / "map.png"
    code = main(["estimate", str(phantom_files / "tumor.pgm"), "--out", str(out)])
    assert code == 0
    sal = load_image(out)
    assert sal.pixels.max() == 1.0
    assert "verdict=tumor" in capsys.readouterr().out


def test_estimate_dump_maps(tmp_path, phantom_files, capsys):
    out = tmp_path / "map.png"
    dump = tmp_path / "maps"
    code = main(
        [
            "estimate",
            str(phantom_files / "tumor.pgm"),
            "--out",
            str(out),
            "--dump-maps",
            str(dump),
        ]
    )
    assert code == 0
    for suffix in ("weighted", "truth", "confidence", "geodesic", "foreground", "regions"):
        assert (dump / f"tumor_{suffix}.pgm").exists()
    capsys.readouterr()


def test_exists_exit_codes(phantom_files, capsys):
    assert main(["exists", str(phantom_files / "tumor.pgm")]) == 0
    line = capsys.readouterr().out.strip()
    fields = line.split(",")
    assert len(fields) == 5 and fields[-1] == "tumor"
    float(fields[1]), float(fields[2]), float(fields[3])

    assert main(["exists", str(phantom_files / "plain.pgm")]) == 1
    assert capsys.readouterr().out.strip().endswith("none")


def test_eval_writes_parseable_outputs(tmp_path, phantom_files, capsys):
    data = tmp_path / "data"
    data.mkdir()
    for name in ("tumor.pgm", "tumor_gt.pgm"):
        (data / name).write_bytes((phantom_files / name).read_bytes())
    report_path = tmp_path / "report.json"
    csv_path = tmp_path / "pr.csv"
    code = main(
        ["eval", str(data), "--report", str(report_path), "--pr", str(csv_path)]
    )
    assert code == 0
    report = EvalReport.from_json(report_path.read_text())
    assert 0.0 <= report.f_measure <= 1.0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "threshold,precision,recall"
    assert len(lines) == 257
    capsys.readouterr()


def test_eval_byte_identical_across_runs(tmp_path, phantom_files, capsys):
    data = tmp_path / "data"
    data.mkdir()
    for name in ("tumor.pgm", "tumor_gt.pgm"):
        (data / name).write_bytes((phantom_files / name).read_bytes())
    outputs = []
    for run in range(2):
        report_path = tmp_path / f"report{run}.json"
        csv_path = tmp_path / f"pr{run}.csv"
        assert main(["eval", str(data), "--report", str(report_path), "--pr", str(csv_path)]) == 0
        outputs.append((report_path.read_bytes(), csv_path.read_bytes()))
    assert outputs[0] == outputs[1]
    capsys.readouterr()


def test_maps_command(tmp_path, phantom_files, capsys):
    out_dir = tmp_path / "maps"
    code = main(["maps", str(phantom_files / "tumor.pgm"), "--out-dir", str(out_dir)])
    assert code == 0
    for suffix in ("truth", "confidence", "geodesic", "weighted", "foreground", "regions"):
        assert (out_dir / f"tumor_{suffix}.pgm").exists()
    # region ids export as 16-bit
    assert (out_dir / "tumor_regions.pgm").read_bytes().startswith(b"P5\n48 48\n65535\n")
    capsys.readouterr()


def test_tune_command_prints_triple(tmp_path, phantom_files, capsys):
    data = tmp_path / "data"
    data.mkdir()
    for name in ("tumor.pgm", "tumor_gt.pgm"):
        (data / name).write_bytes((phantom_files / name).read_bytes())
    code = main(["tune", str(data), "--steps", "100"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("alpha=") and "beta=" in out and "gamma=" in out


def test_config_file_respected(tmp_path, phantom_files, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"existence_threshold": 0.99}))
    # an absurdly high threshold forces the no-lesion verdict
    assert main(["exists", str(phantom_files / "tumor.pgm"), "--config", str(cfg_path)]) == 1
    capsys.readouterr()
