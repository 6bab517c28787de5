"""Command-line surface: simulate, image, verify, dataset, fresnel.

Every command resolves its configuration as defaults < JSON config file <
explicit flags, echoes the result to <out>/config.resolved.json, and uses
exit codes 0 (success), 1 (check or validation failure), 2 (usage error),
3 (numerical failure).
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from osmkit import dataset as dataset_mod
from osmkit import forward, fresnel as fresnel_mod, imaging, oracles, scene as scene_mod
from osmkit.forward import SolverError
from osmkit.imageio import write_osmi, write_png_preview
from osmkit.imaging import IndicatorParams, SamplingGrid

EXIT_CHECK_FAILURE = 1
EXIT_NUMERICAL_FAILURE = 3

VERIFY_SUITES = ("theorem1", "theorem2", "funk-hecke", "helmholtz",
                 "decay", "noise")


def _resolve_config(command: str, config_path: str | None,
                    defaults: dict, flags: dict) -> dict:
    effective = dict(defaults)
    if config_path:
        effective.update(json.loads(Path(config_path).read_text()))
    effective.update({k: v for k, v in flags.items() if v is not None})
    effective["command"] = command
    return effective


def _echo_config(out_dir: Path, config: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.resolved.json").write_text(
        json.dumps(config, indent=2, sort_keys=True, default=str))


@click.group()
def main():
    """Shape reconstruction from one incident wave: forward solver,
    sampling indicators, verification suites, dataset factory, and
    experimental-data imaging."""


@main.command()
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True),
              help="Scene JSON file (length units).")
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="JSON config file; flags override its entries.")
@click.option("--k", type=float, default=None, help="Wave number [1/length unit].")
@click.option("--theta-deg", type=float, default=None,
              help="Incident direction [degrees].")
@click.option("--curve-radius", type=float, default=None,
              help="Measurement circle radius [length units].")
@click.option("--curve-points", type=int, default=None,
              help="Measurement point count [1].")
@click.option("--solver-n", type=int, default=None,
              help="Solver grid points per side (power of two) [1].")
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="Output directory.")
def simulate(scene_path, config_path, k, theta_deg, curve_radius,
             curve_points, solver_n, out_dir):
    """Solve the direct problem and write Cauchy data for one incident wave."""
    defaults = {"k": 6.0, "theta_deg": 90.0, "curve_radius": 100.0,
                "curve_points": 32, "solver_n": 256}
    cfg = _resolve_config("simulate", config_path, defaults, {
        "k": k, "theta_deg": theta_deg, "curve_radius": curve_radius,
        "curve_points": curve_points, "solver_n": solver_n,
        "scene": scene_path, "out": out_dir})
    out = Path(out_dir)
    _echo_config(out, cfg)
    sc = scene_mod.scene_from_json(Path(scene_path).read_text())
    if not sc.shapes:
        click.echo("warning: scene has no shapes; writing zero data", err=True)
    grid = forward.default_grid(int(cfg["solver_n"]), sc)
    try:
        total = forward.ls_solve(grid, float(cfg["k"]),
                                 math.radians(float(cfg["theta_deg"])))
    except SolverError as err:
        click.echo(f"solver failed: {err}", err=True)
        sys.exit(EXIT_NUMERICAL_FAILURE)
    curve = forward.circle_curve(float(cfg["curve_radius"]),
                                 int(cfg["curve_points"]))
    data = forward.synthesize_cauchy(total, grid, curve)
    forward.save_cauchy(data, out / "cauchy.json")
    click.echo(f"wrote {out / 'cauchy.json'} (+.bin), "
               f"{len(curve.points)} points, {total.iterations} iterations")


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True),
              help="Cauchy data header JSON from `simulate`.")
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="JSON config file; flags override its entries.")
@click.option("--indicator", type=click.Choice(["nearfield", "farfield"]),
              default=None, help="Indicator variant.")
@click.option("--rho", type=click.IntRange(1, 2), default=None,
              help="Indicator exponent, 1 or 2 [1].")
@click.option("--grid-n", type=int, default=None,
              help="Sampling points per side [1].")
@click.option("--grid-extent", type=float, default=None,
              help="Sampling half-width [length units].")
@click.option("--image-size", type=int, default=None,
              help="Output image side [pixels].")
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="Output directory.")
def image(data_path, config_path, indicator, rho, grid_n, grid_extent,
          image_size, out_dir):
    """Evaluate the sampling indicator on Cauchy data and write image files."""
    defaults = {"indicator": "nearfield", "rho": 2, "grid_n": 64,
                "grid_extent": 2.0, "image_size": 160}
    cfg = _resolve_config("image", config_path, defaults, {
        "indicator": indicator, "rho": rho, "grid_n": grid_n,
        "grid_extent": grid_extent, "image_size": image_size,
        "data": data_path, "out": out_dir})
    out = Path(out_dir)
    _echo_config(out, cfg)
    data = forward.load_cauchy(data_path)
    half = float(cfg["grid_extent"])
    sgrid = SamplingGrid(extent=(-half, half), n=int(cfg["grid_n"]))
    params = IndicatorParams(rho=int(cfg["rho"]), normalize=True)
    if cfg["indicator"] == "nearfield":
        result = imaging.indicator_nearfield(data, sgrid, params)
    else:
        result = imaging.indicator_farfield(data.curve, data.us, data.k,
                                            sgrid, params)
    if result.degenerate:
        click.echo("warning: degenerate (all-zero) indicator", err=True)
    img = imaging.upsample_bilinear(result, int(cfg["image_size"]))
    img.values = np.clip(img.values, 0.0, 1.0)
    peak = img.values.max()
    if peak > 0:
        img.values /= peak
    write_osmi(img, out / "prelim.osmi")
    write_png_preview(img, out / "prelim.png")
    sidecar = {"indicator": cfg["indicator"], "rho": int(cfg["rho"]),
               "k": data.k, "curve": data.curve.descriptor,
               "degenerate": result.degenerate,
               "grid_n": int(cfg["grid_n"]),
               "grid_extent": [-half, half]}
    (out / "prelim.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))
    click.echo(f"wrote {out / 'prelim.osmi'}, {out / 'prelim.png'}")


def _verify_suite(suite: str, solver_n: int) -> list[oracles.CheckReport]:
    k = 6.0
    reports = []
    if suite in ("theorem1", "theorem2", "noise", "all"):
        sc = scene_mod.ContrastScene(
            shapes=[(scene_mod.disk((0.0, 0.0), 1.0), 1.0 + 0j)],
            domain=(-1.0, 1.0))
        grid = forward.default_grid(solver_n, sc)
        total = forward.ls_solve(grid, k, theta=0.0)
        curve = forward.circle_curve(100.0, 32)
        data = forward.synthesize_cauchy(total, grid, curve)
        sampling = SamplingGrid((-2.0, 2.0), 64)
        if suite in ("theorem1", "all"):
            reports.append(oracles.check_theorem1(data, total, grid, sampling))
        if suite in ("theorem2", "all"):
            reports.append(oracles.check_theorem2(sc, k, solver_n=solver_n))
        if suite in ("noise", "all"):
            reports.append(oracles.noise_stability(data, sampling))
    if suite in ("funk-hecke", "all"):
        rng = np.random.default_rng(0)
        angles = rng.uniform(0, 2 * np.pi, size=50)
        radii = np.linspace(0.0, 20.0 / k, 50)
        pts = radii[:, None] * np.column_stack([np.cos(angles), np.sin(angles)])
        reports.append(oracles.check_funk_hecke(k, pts))
    if suite in ("helmholtz", "all"):
        reports.append(oracles.check_helmholtz_representation(k))
    if suite in ("decay", "all"):
        sc = scene_mod.ContrastScene(
            shapes=[(scene_mod.disk((0.5, 0.0), 0.3), 1.0 + 0j)],
            domain=(-1.0, 1.0))
        grid = forward.default_grid(solver_n, sc)
        total = forward.ls_solve(grid, k, theta=0.0)
        curve = forward.circle_curve(100.0, 1024)   # resolve far sampling points
        data = forward.synthesize_cauchy(total, grid, curve)
        for rho in (1, 2):
            reports.append(oracles.check_decay(data, rho))
    return reports


@main.command()
@click.option("--suite", type=click.Choice(VERIFY_SUITES + ("all",)),
              default="all", help="Which verification suite to run.")
@click.option("--solver-n", type=int, default=256,
              help="Solver grid points per side for pipeline checks [1].")
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="Output directory for JSON reports.")
def verify(suite, solver_n, out_dir):
    """Run the numerical verification suites; nonzero exit on any failure."""
    out = Path(out_dir)
    _echo_config(out, {"command": "verify", "suite": suite,
                       "solver_n": solver_n, "out": out_dir})
    try:
        reports = _verify_suite(suite, solver_n)
    except SolverError as err:
        click.echo(f"solver failed: {err}", err=True)
        sys.exit(EXIT_NUMERICAL_FAILURE)
    oracles.write_reports(reports, out / "reports.json")
    for rep in reports:
        status = "PASS" if rep.passed else "FAIL"
        click.echo(f"{status} {rep.name}: max_rel_error={rep.max_rel_error:.3e} "
                   f"tolerance={rep.tolerance:g}")
    if not all(r.passed for r in reports):
        sys.exit(EXIT_CHECK_FAILURE)


@main.command(name="dataset")
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True),
              help="DatasetSpec JSON file.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output directory (overrides the spec's out_dir).")
def dataset_cmd(spec_path, out_dir):
    """Generate a (true image, preliminary image) dataset tree."""
    doc = json.loads(Path(spec_path).read_text())
    if out_dir is not None:
        doc["out_dir"] = out_dir
    spec = dataset_mod.DatasetSpec.from_json_dict(doc)
    out = Path(spec.out_dir)
    _echo_config(out, {"command": "dataset", **spec.to_json_dict()})
    try:
        manifest = dataset_mod.generate(spec)
    except SolverError as err:
        click.echo(f"solver failed: {err}", err=True)
        sys.exit(EXIT_NUMERICAL_FAILURE)
    ok = sum(1 for r in manifest["samples"] if r["status"] == "ok")
    failed = spec.count - ok
    click.echo(f"wrote {ok} pairs to {out} ({failed} failed)")
    if failed:
        sys.exit(EXIT_CHECK_FAILURE)


@main.command(name="fresnel")
@click.option("--exp", "exp_path", required=True, type=click.Path(exists=True),
              help="Experimental .exp text file.")
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="JSON config file; flags override its entries.")
@click.option("--frequency-ghz", type=float, default=None,
              help="Frequency to image [GHz].")
@click.option("--transmitter-deg", type=float, default=None,
              help="Transmitter angle [degrees].")
@click.option("--rho", type=click.IntRange(1, 2), default=None,
              help="Indicator exponent, 1 or 2 [1].")
@click.option("--grid-n", type=int, default=None,
              help="Sampling points per side [1].")
@click.option("--image-size", type=int, default=None,
              help="Output image side [pixels].")
@click.option("--lenient", is_flag=True, default=False,
              help="Collect malformed lines instead of failing.")
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="Output directory.")
def fresnel_cmd(exp_path, config_path, frequency_ghz, transmitter_deg, rho,
                grid_n, image_size, lenient, out_dir):
    """Image experimental Fresnel data with the derivative-free indicator."""
    defaults = {"frequency_ghz": 8.0, "transmitter_deg": 90.0, "rho": 2,
                "grid_n": 64, "image_size": 160}
    cfg = _resolve_config("fresnel", config_path, defaults, {
        "frequency_ghz": frequency_ghz, "transmitter_deg": transmitter_deg,
        "rho": rho, "grid_n": grid_n, "image_size": image_size,
        "exp": exp_path, "lenient": lenient, "out": out_dir})
    out = Path(out_dir)
    _echo_config(out, cfg)
    try:
        data = fresnel_mod.parse(Path(exp_path).read_text(),
                                 strict=not lenient, name=exp_path)
    except fresnel_mod.FresnelParseError as err:
        click.echo(f"parse error: {err}", err=True)
        sys.exit(EXIT_CHECK_FAILURE)
    try:
        result, img = fresnel_mod.image_fresnel(
            data, float(cfg["frequency_ghz"]), float(cfg["transmitter_deg"]),
            grid=SamplingGrid((-2.0, 2.0), int(cfg["grid_n"])),
            params=IndicatorParams(rho=int(cfg["rho"])),
            image_size=int(cfg["image_size"]))
    except (LookupError, ValueError) as err:
        click.echo(f"invalid data: {err}", err=True)
        sys.exit(EXIT_CHECK_FAILURE)
    if result.degenerate:
        click.echo("warning: degenerate (all-zero) image", err=True)
    write_osmi(img, out / "fresnel.osmi")
    write_png_preview(img, out / "fresnel.png")
    (out / "fresnel.json").write_text(json.dumps(
        result.provenance, indent=2, sort_keys=True))
    click.echo(f"wrote {out / 'fresnel.osmi'}, {out / 'fresnel.png'}")


if __name__ == "__main__":
    main()
