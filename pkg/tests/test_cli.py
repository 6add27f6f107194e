import numpy as np
import pytest

from swirl import grid as grid_mod
from swirl.cli import main
from swirl.containers import pack_signal, read_container, unpack_coefficients, unpack_signal, write_container
from swirl.equivariance import random_coefficients
from swirl.signal import SpinSignal
from swirl.transforms import inverse
from swirl.wigner import compute_delta


@pytest.fixture(autouse=True)
def reset_fault_injection():
    yield
    grid_mod._PARITY_OVERRIDE = None


def test_verify_filtered_passes(tmp_path, capsys):
    out = tmp_path / "report.csv"
    code = main(["verify", "--filter", "wigner", "--output", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "# swirl-csv v1"
    names = [row.split(",")[0] for row in lines[2:]]
    assert names and all("wigner" in n for n in names)
    assert all(row.rsplit(",", 1)[1] == "True" for row in lines[2:])


def test_verify_fault_injection_fails(tmp_path):
    out = tmp_path / "report.csv"
    code = main(["verify", "--filter", "grid", "--inject-fault", "parity", "--output", str(out)])
    assert code != 0
    assert any(row.rsplit(",", 1)[1] == "False" for row in out.read_text().splitlines()[2:])


def test_verify_respects_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment line\nfilter=grid.integral\noutput=%s\n" % (tmp_path / "r.csv"))
    code = main(["verify", "--config", str(cfg)])
    assert code == 0
    rows = (tmp_path / "r.csv").read_text().splitlines()[2:]
    assert rows and all(r.startswith("grid.integral") for r in rows)


def test_verify_unknown_config_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("nonsense=1\n")
    assert main(["verify", "--config", str(cfg)]) == 1


def test_transform_roundtrip_via_files(tmp_path, rng):
    co = random_coefficients(rng, 2, np.array([0, 1]), 8)
    sig = inverse(co, compute_delta(8))
    src = tmp_path / "signal.swirl"
    write_container(src, *pack_signal(sig))

    spec = tmp_path / "spec.swirl"
    assert main(["transform", str(src), "forward", "--output", str(spec)]) == 0
    header, arrays = read_container(spec)
    assert header["domain"] == "spectral"
    (co2,) = unpack_coefficients(header, arrays)
    assert np.abs(co2.coeffs - co.coeffs).max() / np.abs(co.coeffs).max() < 1e-10

    back = tmp_path / "back.swirl"
    assert main(["transform", str(spec), "inverse", "--output", str(back)]) == 0
    header, arrays = read_container(back)
    (sig2,) = unpack_signal(header, arrays)
    assert np.abs(sig2.samples - sig.samples).max() / np.abs(sig.samples).max() < 1e-10


def test_transform_direction_mismatch(tmp_path, rng):
    from swirl.containers import pack_coefficients

    co = random_coefficients(rng, 1, np.array([0]), 4)
    src = tmp_path / "spec.swirl"
    write_container(src, *pack_coefficients(co))
    # spectral-tagged file cannot be forward-transformed again
    assert main(["transform", str(src), "forward", "--output", str(tmp_path / "x.swirl")]) == 1


def test_transform_empty_batch(tmp_path):
    from swirl.grid import make_grid

    sig = SpinSignal(np.zeros((0, 1, 8, 8), dtype=complex), np.array([0]), make_grid(8))
    src = tmp_path / "empty.swirl"
    write_container(src, *pack_signal(sig))
    out = tmp_path / "empty-out.swirl"
    assert main(["transform", str(src), "forward", "--output", str(out)]) == 0
    header, arrays = read_container(out)
    assert arrays[0].shape == (0, 1, 16)


def test_transform_missing_file(tmp_path):
    assert main(["transform", str(tmp_path / "nope.swirl"), "forward", "--output", str(tmp_path / "x")]) == 1


def test_featurize_water(tmp_path, water_xyz):
    xyz = tmp_path / "water.xyz"
    xyz.write_text(water_xyz)
    out = tmp_path / "water.features"
    assert main(["featurize", str(xyz), "--resolution", "32", "--output", str(out)]) == 0
    header, arrays = read_container(out)
    assert header["vocabulary"] == [1, 8]
    assert header["powers"] == [2, 6]
    assert len(arrays) == 1
    assert arrays[0].shape == (3, 4, 32, 32)


def test_featurize_single_power(tmp_path, water_xyz):
    xyz = tmp_path / "water.xyz"
    xyz.write_text(water_xyz)
    out = tmp_path / "water.features"
    assert main(["featurize", str(xyz), "--resolution", "16", "--powers", "2", "--output", str(out)]) == 0
    header, arrays = read_container(out)
    assert arrays[0].shape == (3, 2, 16, 16)


def test_featurize_multi_molecule(tmp_path, water_xyz):
    xyz = tmp_path / "both.xyz"
    xyz.write_text(water_xyz + "2\nhydrogen\nH 0 0 0\nH 0 0 0.74\n")
    out = tmp_path / "both.features"
    assert main(["featurize", str(xyz), "--resolution", "16", "--output", str(out)]) == 0
    header, arrays = read_container(out)
    assert len(arrays) == 2
    assert arrays[0].shape == (3, 4, 16, 16)
    assert arrays[1].shape == (2, 4, 16, 16)
    assert header["blocks"][1]["comment"] == "hydrogen"


def test_featurize_explicit_vocabulary(tmp_path, water_xyz):
    xyz = tmp_path / "water.xyz"
    xyz.write_text(water_xyz)
    out = tmp_path / "w.features"
    code = main(
        ["featurize", str(xyz), "--resolution", "16", "--vocabulary", "H,C,O", "--output", str(out)]
    )
    assert code == 0
    header, arrays = read_container(out)
    assert header["vocabulary"] == [1, 6, 8]
    assert arrays[0].shape == (3, 6, 16, 16)


def test_featurize_missing_file(tmp_path):
    assert main(["featurize", str(tmp_path / "nope.xyz"), "--output", str(tmp_path / "x")]) == 1


def test_featurize_deterministic(tmp_path, water_xyz):
    xyz = tmp_path / "water.xyz"
    xyz.write_text(water_xyz)
    a, b = tmp_path / "a.features", tmp_path / "b.features"
    main(["featurize", str(xyz), "--resolution", "16", "--output", str(a)])
    main(["featurize", str(xyz), "--resolution", "16", "--output", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_bench_small(tmp_path):
    out = tmp_path / "bench.csv"
    code = main(
        ["bench", "--resolution", "8,16", "--repetitions", "3", "--warmup", "0", "--output", str(out)]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "# swirl-csv v1"
    rows = [line.split(",") for line in lines[2:]]
    assert len(rows) == 8  # 2 resolutions x 2 backends x 2 paths
    cross = [float(r[6]) for r in rows]
    assert max(cross) <= 1e-12


def test_bench_single_backend(tmp_path):
    out = tmp_path / "bench.csv"
    code = main(
        ["bench", "--resolution", "8", "--backend", "fft", "--path", "full",
         "--repetitions", "3", "--warmup", "0", "--output", str(out)]
    )
    assert code == 0
    rows = [line.split(",") for line in out.read_text().splitlines()[2:]]
    assert len(rows) == 1
    assert rows[0][1] == "fft" and rows[0][2] == "full"


def test_bench_rejects_too_few_repetitions(tmp_path):
    assert main(["bench", "--resolution", "8", "--repetitions", "1"]) == 1


def test_bench_inputs_seeded(tmp_path):
    # identical seeds give identical cross-check columns (same inputs)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["bench", "--resolution", "8", "--repetitions", "3", "--warmup", "0", "--seed", "5", "--output", str(a)])
    main(["bench", "--resolution", "8", "--repetitions", "3", "--warmup", "0", "--seed", "5", "--output", str(b)])
    crosses = lambda p: [line.split(",")[6] for line in p.read_text().splitlines()[2:]]
    assert crosses(a) == crosses(b)


def test_bench_rejects_odd_resolution():
    assert main(["bench", "--resolution", "7", "--repetitions", "3"]) == 1


def test_verify_deterministic_output(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["verify", "--filter", "grid.integral", "--seed", "3", "--output", str(a)]) == 0
    assert main(["verify", "--filter", "grid.integral", "--seed", "3", "--output", str(b)]) == 0
    assert a.read_text() == b.read_text()


def test_module_entry_point():
    import subprocess, sys

    proc = subprocess.run(
        [sys.executable, "-m", "swirl", "verify", "--filter", "grid.integral"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "PASS" in proc.stdout


def test_verify_default_runs_everything(tmp_path):
    out = tmp_path / "full.csv"
    assert main(["verify", "--output", str(out)]) == 0
    lines = out.read_text().splitlines()
    names = [row.split(",")[0] for row in lines[2:]]
    for group in ("grid.", "wigner.", "swsft.", "layers.", "mol."):
        assert any(n.startswith(group) for n in names)
    assert all(row.rsplit(",", 1)[1] == "True" for row in lines[2:])


def test_transform_preserves_feature_metadata(tmp_path, water_xyz):
    xyz = tmp_path / "water.xyz"
    xyz.write_text(water_xyz)
    feats = tmp_path / "water.features"
    main(["featurize", str(xyz), "--resolution", "16", "--output", str(feats)])
    spec = tmp_path / "water.spectral"
    assert main(["transform", str(feats), "forward", "--output", str(spec)]) == 0
    header, arrays = read_container(spec)
    assert header["domain"] == "spectral"
    assert header["vocabulary"] == [1, 8]
    assert header["blocks"][0]["comment"] == "water molecule"
    assert arrays[0].shape == (3, 4, 64)


def test_transform_header_missing_fields(tmp_path):
    # structurally valid container whose header lacks required keys
    bad = tmp_path / "bad.swirl"
    bad.write_bytes(b'{"format": "swirl-container", "version": 1, "blocks": []}\n')
    assert main(["transform", str(bad), "forward", "--output", str(tmp_path / "out")]) == 1
