import hashlib
import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from osmkit import scene
from osmkit.cli import main
from osmkit.imageio import read_osmi


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def disk_scene_file(tmp_path):
    sc = scene.ContrastScene(
        shapes=[(scene.disk((0.0, 0.0), 1.0), 1.0 + 0j)], domain=(-1.0, 1.0))
    path = tmp_path / "scene.json"
    path.write_text(scene.scene_to_json(sc))
    return path


def tree_digest(root: Path) -> dict:
    return {str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*")) if p.is_file()}


def test_simulate_writes_cauchy_and_config(runner, tmp_path, disk_scene_file):
    out = tmp_path / "sim"
    result = runner.invoke(main, [
        "simulate", "--scene", str(disk_scene_file), "--solver-n", "64",
        "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert (out / "cauchy.json").exists()
    assert (out / "cauchy.bin").exists()
    cfg = json.loads((out / "config.resolved.json").read_text())
    assert cfg["command"] == "simulate"
    assert cfg["k"] == 6.0


def test_simulate_empty_scene_warns(runner, tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text(scene.scene_to_json(scene.ContrastScene()))
    out = tmp_path / "sim"
    result = runner.invoke(main, [
        "simulate", "--scene", str(empty), "--solver-n", "64",
        "--out", str(out)])
    assert result.exit_code == 0
    assert "no shapes" in result.output
    from osmkit.forward import load_cauchy
    data = load_cauchy(out / "cauchy.json")
    assert not np.any(data.us)


def test_simulate_deterministic(runner, tmp_path, disk_scene_file):
    import shutil

    out = tmp_path / "sim"
    args = ["simulate", "--scene", str(disk_scene_file), "--solver-n", "64",
            "--out", str(out)]
    assert runner.invoke(main, args).exit_code == 0
    first = tree_digest(out)
    shutil.rmtree(out)
    assert runner.invoke(main, args).exit_code == 0
    assert tree_digest(out) == first


def test_config_file_and_flag_precedence(runner, tmp_path, disk_scene_file):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"k": 5.0, "curve_points": 16}))
    out = tmp_path / "sim"
    result = runner.invoke(main, [
        "simulate", "--scene", str(disk_scene_file), "--config", str(cfg_file),
        "--k", "7.0", "--solver-n", "64", "--out", str(out)])
    assert result.exit_code == 0
    cfg = json.loads((out / "config.resolved.json").read_text())
    assert cfg["k"] == 7.0              # flag wins
    assert cfg["curve_points"] == 16    # file beats default
    assert cfg["solver_n"] == 64


def test_image_command(runner, tmp_path, disk_scene_file):
    sim = tmp_path / "sim"
    assert runner.invoke(main, [
        "simulate", "--scene", str(disk_scene_file), "--solver-n", "64",
        "--out", str(sim)]).exit_code == 0
    out = tmp_path / "img"
    result = runner.invoke(main, [
        "image", "--data", str(sim / "cauchy.json"), "--rho", "2",
        "--grid-n", "32", "--out", str(out)])
    assert result.exit_code == 0, result.output
    img = read_osmi(out / "prelim.osmi")
    assert img.width == img.height == 160
    assert img.values.max() == pytest.approx(1.0, abs=0.0)
    assert (out / "prelim.png").exists()
    sidecar = json.loads((out / "prelim.json").read_text())
    assert sidecar["rho"] == 2
    assert sidecar["indicator"] == "nearfield"


def test_image_rejects_bad_rho(runner, tmp_path):
    result = runner.invoke(main, [
        "image", "--data", "nowhere.json", "--rho", "3", "--out", str(tmp_path)])
    assert result.exit_code == 2


def test_image_zero_data_warns(runner, tmp_path):
    from osmkit import forward
    curve = forward.circle_curve(100.0, 16)
    data = forward.CauchyData(curve, np.zeros(16, complex),
                              np.zeros(16, complex), 6.0)
    forward.save_cauchy(data, tmp_path / "zero.json")
    out = tmp_path / "img"
    result = runner.invoke(main, [
        "image", "--data", str(tmp_path / "zero.json"), "--out", str(out)])
    assert result.exit_code == 0
    assert "degenerate" in result.output


def test_verify_single_suite(runner, tmp_path):
    out = tmp_path / "verify"
    result = runner.invoke(main, [
        "verify", "--suite", "funk-hecke", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "PASS funk-hecke" in result.output
    doc = json.loads((out / "reports.json").read_text())
    assert doc["all_passed"] is True


def test_verify_helmholtz_suite(runner, tmp_path):
    result = runner.invoke(main, [
        "verify", "--suite", "helmholtz", "--out", str(tmp_path / "v")])
    assert result.exit_code == 0
    assert "PASS helmholtz-representation" in result.output


def test_verify_failure_exit_code(runner, tmp_path, monkeypatch):
    from osmkit import oracles

    def failing(*args, **kwargs):
        return oracles.CheckReport("funk-hecke", 1.0, 1e-8)

    monkeypatch.setattr(oracles, "check_funk_hecke", failing)
    result = runner.invoke(main, [
        "verify", "--suite", "funk-hecke", "--out", str(tmp_path / "v")])
    assert result.exit_code == 1
    assert "FAIL" in result.output


def test_dataset_command(runner, tmp_path):
    spec = {"count": 2, "out_dir": str(tmp_path / "ds"), "master_seed": 3,
            "solver_n": 64, "sampling_n": 32}
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    result = runner.invoke(main, ["dataset", "--spec", str(spec_path)])
    assert result.exit_code == 0, result.output
    manifest = json.loads((tmp_path / "ds" / "manifest.json").read_text())
    assert len(manifest["samples"]) == 2
    from osmkit.dataset import validate_manifest
    assert validate_manifest(tmp_path / "ds" / "manifest.json") == []


def test_fresnel_command(runner, tmp_path):
    angles = np.arange(60.0, 301.0, 5.0)
    rng = np.random.default_rng(0)
    lines = [f"90 {a} 8 {rng.normal():.6f} {rng.normal():.6f} 0 0"
             for a in angles]
    exp = tmp_path / "test.exp"
    exp.write_text("\n".join(lines) + "\n")
    out = tmp_path / "fr"
    result = runner.invoke(main, [
        "fresnel", "--exp", str(exp), "--frequency-ghz", "8",
        "--transmitter-deg", "90", "--out", str(out)])
    assert result.exit_code == 0, result.output
    img = read_osmi(out / "fresnel.osmi")
    assert img.width == 160
    assert (out / "fresnel.png").exists()


def test_fresnel_strict_rejects_malformed(runner, tmp_path):
    exp = tmp_path / "bad.exp"
    exp.write_text("90 60 8 1.0 0.0 0.5 0.0\n"
                   "90 65 8 0.0 1.0 0.5 0.0\n"
                   "90 70 8 1.0\n")
    result = runner.invoke(main, [
        "fresnel", "--exp", str(exp), "--out", str(tmp_path / "o")])
    assert result.exit_code == 1
    assert "parse error" in result.output
    lenient = runner.invoke(main, [
        "fresnel", "--exp", str(exp), "--lenient", "--out", str(tmp_path / "o2")])
    assert lenient.exit_code == 0, lenient.output


def test_help_lists_units(runner):
    for cmd in ("simulate", "image", "verify", "dataset", "fresnel"):
        result = runner.invoke(main, [cmd, "--help"])
        assert result.exit_code == 0
    sim_help = runner.invoke(main, ["simulate", "--help"]).output
    assert "[1/length unit]" in sim_help
    assert "[degrees]" in sim_help


def test_usage_error_exit_code(runner):
    result = runner.invoke(main, ["simulate"])   # missing required flags
    assert result.exit_code == 2


def test_numerical_failure_exit_code(runner, tmp_path, disk_scene_file,
                                     monkeypatch):
    from osmkit import forward
    from osmkit.cli import forward as cli_forward

    def exploding(grid, k, theta, **kwargs):
        raise forward.SolverError("did not converge", [1.0])

    monkeypatch.setattr(cli_forward, "ls_solve", exploding)
    result = runner.invoke(main, [
        "simulate", "--scene", str(disk_scene_file), "--solver-n", "64",
        "--out", str(tmp_path / "o")])
    assert result.exit_code == 3
    assert "solver failed" in result.output
