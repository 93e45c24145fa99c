import filecmp
import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bhm import cli
from bhm.errors import ContractError, DataFormatError, DomainError, GeometryError
from bhm.forward import EXCITATIONS, KINDS, DataMatrix, Scene, simulate
from bhm.geometry import ArrayGeometry, Circle, Kite
from bhm.harness import (
    NoiseSpec, add_noise, emit_grid, gaussian_pairs, load_config, load_matrix, localization, multiplicity,
    palette, parse_number, parse_text, save_matrix, write_csv, write_ppm,
)
from bhm.harness.config import ExperimentConfig, config_from_entries
from bhm.harness.experiment import data_filename, image_basename, run_experiment, stream_index
from bhm.imaging import GridSpec, SamplingGrid, image
from bhm.specfun import WaveParams

P = WaveParams(2 * np.pi)
ARRAY = ArrayGeometry(10.0, 10.0, 8, 6, 8)
# equal counts keep the staggered sources off the receivers
SQUARE = ArrayGeometry(10.0, 10.0, 8, 8, 8)


def complex_data(seed=0, kind="u", exc="point"):
    rng = np.random.default_rng(seed)
    shape = (ARRAY.N_dir if kind == "far" else ARRAY.N_r, ARRAY.N_s if exc == "point" else ARRAY.N_dir)
    return DataMatrix(kind, exc, rng.normal(size=shape) + 1j * rng.normal(size=shape), ARRAY, P)


# noise ---------------------------------------------------------------------


def test_zero_noise_is_identity():
    d = complex_data()
    assert np.array_equal(add_noise(d, NoiseSpec(0.0, 3)).values, d.values)


@settings(max_examples=20, deadline=None)
@given(delta=st.floats(0.001, 0.5), seed=st.integers(0, 2**32))
def test_noise_magnitude_is_exact(delta, seed):
    d = complex_data(seed % 97)
    out = add_noise(d, NoiseSpec(delta, seed))
    assert np.abs(out.values - d.values) == pytest.approx(delta * np.abs(d.values), rel=1e-14, abs=1e-15)


def test_noise_is_deterministic():
    d = complex_data()
    a, b = add_noise(d, NoiseSpec(0.1, 42)), add_noise(d, NoiseSpec(0.1, 42))
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, add_noise(d, NoiseSpec(0.1, 43)).values)
    assert not np.array_equal(a.values, add_noise(d, NoiseSpec(0.1, 42, stream=1)).values)


def test_gaussian_pairs_statistics():
    x, y = gaussian_pairs(20000, 1)
    assert abs(x.mean()) < 0.05 and abs(y.std() - 1) < 0.05
    x2, _ = gaussian_pairs(10, 1)
    assert np.array_equal(x[:10], x2)


def test_phaseless_noise_goes_through_total_field():
    d = simulate(Scene(P, (Circle(),)), SQUARE, "abs_total")
    out = add_noise(d, NoiseSpec(0.05, 1))
    assert np.abs(out.total - d.total) == pytest.approx(0.05 * np.abs(d.total), rel=1e-13)
    assert np.array_equal(out.values, np.abs(out.total))


def test_phaseless_without_total_cannot_be_perturbed():
    d = DataMatrix("abs_total", "point", np.ones((8, 6)), ARRAY, P)
    with pytest.raises(ContractError):
        add_noise(d, NoiseSpec(0.1, 1))


def test_negative_noise_level():
    with pytest.raises(DomainError):
        NoiseSpec(-0.1)


def test_stream_index_is_unique():
    idx = {stream_index(k, e) for k in KINDS for e in EXCITATIONS}
    assert len(idx) == len(KINDS) * len(EXCITATIONS)


# persistence ---------------------------------------------------------------


@pytest.mark.parametrize("kind,exc", [("u", "point"), ("far", "plane"), ("Nu", "plane")])
def test_round_trip_is_bit_exact(tmp_path, kind, exc):
    d = complex_data(1, kind, exc)
    save_matrix(d, tmp_path / "d.txt")
    back = load_matrix(tmp_path / "d.txt")
    assert (back.kind, back.excitation) == (kind, exc)
    assert np.array_equal(back.values, d.values)
    assert back.params == P
    assert back.array.R_r == ARRAY.R_r and back.array.source_offset == ARRAY.source_offset


def test_round_trip_of_magnitudes(tmp_path):
    d = simulate(Scene(P, (Circle(),)), SQUARE, "abs_total")
    save_matrix(d, tmp_path / "m.txt")
    assert np.array_equal(load_matrix(tmp_path / "m.txt").values, d.values)


def test_truncated_file_names_line(tmp_path):
    save_matrix(complex_data(), tmp_path / "d.txt")
    lines = (tmp_path / "d.txt").read_text().splitlines()
    (tmp_path / "t.txt").write_text("\n".join(lines[:20]) + "\n")
    with pytest.raises(DataFormatError) as exc:
        load_matrix(tmp_path / "t.txt")
    assert "truncated" in str(exc.value) and exc.value.line == 21


@pytest.mark.parametrize("bad,line", [
    ("bhm-data v2; u; point; 8; 6; 6.28; 0.25; 10; 10", 1),
    ("bhm-data v1; v; point; 8; 6; 6.28; 0.25; 10; 10", 1),
])
def test_malformed_header(tmp_path, bad, line):
    (tmp_path / "h.txt").write_text(bad + "\n")
    with pytest.raises(DataFormatError) as exc:
        load_matrix(tmp_path / "h.txt")
    assert exc.value.line == line


def test_non_finite_entry(tmp_path):
    save_matrix(complex_data(), tmp_path / "d.txt")
    lines = (tmp_path / "d.txt").read_text().splitlines()
    lines[3] = "2 0 nan 0"
    (tmp_path / "n.txt").write_text("\n".join(lines) + "\n")
    with pytest.raises(DataFormatError) as exc:
        load_matrix(tmp_path / "n.txt")
    assert exc.value.line == 4


def test_kind_tag_is_checked_at_use(tmp_path):
    save_matrix(complex_data(), tmp_path / "d.txt")
    with pytest.raises(ContractError):
        image(3, load_matrix(tmp_path / "d.txt"), GridSpec(nx=3, ny=3))


# rendering -----------------------------------------------------------------


def small_grid(values):
    v = np.asarray(values, dtype=float)
    return SamplingGrid(GridSpec((-1, 1, -1, 1), *v.shape), v)


def test_palette_layout():
    pal = palette()
    assert pal.shape == (256, 3) and pal.dtype == np.uint8
    assert tuple(pal[255]) == (0, 0, 0)
    assert tuple(pal[0]) == (0, 0, 128)


def test_constant_grid_is_single_color(tmp_path):
    write_ppm(small_grid(np.full((4, 3), 2.0)), tmp_path / "c.ppm")
    raw = (tmp_path / "c.ppm").read_bytes()
    assert raw.startswith(b"P6\n4 3\n255\n")
    pixels = np.frombuffer(raw[len(b"P6\n4 3\n255\n"):], dtype=np.uint8).reshape(-1, 3)
    assert len(pixels) == 12 and len(np.unique(pixels, axis=0)) == 1


def test_csv_rows_and_order(tmp_path):
    g = small_grid(np.arange(12.0).reshape(4, 3))
    write_csv(g, tmp_path / "g.csv")
    rows = (tmp_path / "g.csv").read_text().splitlines()
    assert len(rows) == 12
    assert rows[0] == "-1.0,-1.0,0.0" and rows[1] == "-1.0,0.0,1.0"


def test_outline_and_reemission(tmp_path):
    g = SamplingGrid(GridSpec((-2, 2, -2, 2), 41, 41), np.random.default_rng(0).random((41, 41)))
    emit_grid(g, tmp_path / "a.csv", tmp_path / "a.ppm", [Circle()])
    emit_grid(g, tmp_path / "b.csv", tmp_path / "b.ppm", [Circle()])
    assert filecmp.cmp(tmp_path / "a.csv", tmp_path / "b.csv", shallow=False)
    assert filecmp.cmp(tmp_path / "a.ppm", tmp_path / "b.ppm", shallow=False)
    body = np.frombuffer((tmp_path / "a.ppm").read_bytes()[len(b"P6\n41 41\n255\n"):], dtype=np.uint8)
    assert (body.reshape(-1, 3) == 0).all(axis=1).any()


# config --------------------------------------------------------------------


def test_parse_number_accepts_pi_expressions():
    assert parse_number("2*pi") == pytest.approx(2 * np.pi)
    assert parse_number("-pi/2") == pytest.approx(-np.pi / 2)
    with pytest.raises(ContractError):
        parse_number("__import__('os')")


def test_parse_text_rejects_unknown_and_duplicate_keys():
    with pytest.raises(ContractError, match="line 2"):
        parse_text("scene.name = a\nscene.colour = red\n")
    with pytest.raises(ContractError, match="duplicate"):
        parse_text("scene.name = a\nscene.name = b\n")


def test_config_curves_and_defaults():
    cfg = config_from_entries(parse_text(
        "scene.curves = k, c\ncurve.k.kind = kite\ncurve.k.center = 1.35, 2\n"
        "curve.c.kind = circle\ncurve.c.center = -2, -2\nimaging.indicators = 1, 11\nnoise.delta = 0, 0.05\n"
    ))
    assert cfg.curves == (Kite((1.35, 2.0)), Circle((-2.0, -2.0), 1.0))
    assert cfg.indicators == (1, 11)
    assert cfg.deltas == (0.0, 0.05)
    assert cfg.data_requests() == [("u", "point"), ("abs_total", "point")]


def test_config_rejects_stray_curve():
    with pytest.raises(ContractError, match="not listed"):
        config_from_entries(parse_text("scene.curves = a\ncurve.a.kind = circle\ncurve.b.kind = kite\n"))


def test_config_grid_must_fit_inside_arrays():
    with pytest.raises(GeometryError):
        config_from_entries(parse_text("array.R_r = 5\nimaging.indicators = 1\n"))


@pytest.mark.parametrize("name", ["example1", "example2", "example3"])
def test_shipped_configs_load(name):
    cfg = load_config(f"configs/{name}.cfg")
    assert cfg.name == name
    assert cfg.grid.nx == 121 and cfg.indicators == tuple(range(1, 12))


# experiment ----------------------------------------------------------------


def test_file_names():
    assert data_filename("abs_total", "point", 0.05) == "data_abs_total_point_0.05.txt"
    assert image_basename(11, "kite", 0.1) == "I11_kite_0.1"


def tiny_config(tmp_path, **kw):
    base = ExperimentConfig(
        name="tiny", params=P, curves=(Circle((0.5, 0.0), 1.0),),
        array=ArrayGeometry(10.0, 10.0, 32, 32, 32), indicators=(1, 10, 11),
        grid=GridSpec((-3, 3, -3, 3), 21, 21), deltas=(0.0, 0.05), seed=7, out_dir=str(tmp_path / "out"),
    )
    return replace(base, **kw)


def test_run_experiment_writes_artifacts(tmp_path):
    cfg = tiny_config(tmp_path)
    report = run_experiment(cfg)
    out = tmp_path / "out"
    names = {p.name for p in out.iterdir()}
    for j in (1, 10, 11):
        for tag in ("0", "0.05"):
            assert f"I{j}_tiny_{tag}.csv" in names and f"I{j}_tiny_{tag}.ppm" in names
    body = json.loads((out / "report.json").read_text())
    assert len(body["checks"]) == 6
    assert body["passed"] == report.passed


def test_localization_and_multiplicity_helpers():
    spec = GridSpec((-4, 4, -4, 4), 81, 81)
    pts = spec.points()
    curves = [Circle((-2.0, -2.0), 1.0), Circle((2.0, 2.0), 1.0)]
    ring = lambda c: np.exp(-((np.hypot(*(pts - c).transpose(2, 0, 1)) - 1) ** 2) / 0.02)  # noqa: E731
    g = SamplingGrid(spec, ring(np.array([-2.0, -2.0])) + ring(np.array([2.0, 2.0])), "I1")
    assert localization(g, curves, 2 * np.pi).passed
    m = multiplicity(g, curves)
    assert m.passed and m.value >= 2.0
    single = SamplingGrid(spec, ring(np.array([-2.0, -2.0])), "I1")
    assert not multiplicity(single, curves).passed


# command line --------------------------------------------------------------


def write_cfg(tmp_path):
    text = (
        "scene.name = smoke\nscene.curves = c\ncurve.c.kind = circle\ncurve.c.radius = 1\n"
        "array.N_r = 16\narray.N_s = 16\narray.N_dir = 16\n"
        "imaging.indicators = 1, 9\nimaging.grid.bounds = -3, 3, -3, 3\nimaging.grid.n = 11\n"
        "noise.delta = 0, 0.1\nnoise.seed = 5\n"
    )
    path = tmp_path / "smoke.cfg"
    path.write_text(text)
    return path


def test_cli_simulate_then_image(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    assert cli.main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "run")]) == 0
    assert (tmp_path / "run" / "data_u_point_0.1.txt").exists()
    assert cli.main(["image", "--config", str(cfg), "--out", str(tmp_path / "run")]) == 0
    assert (tmp_path / "run" / "I9_smoke_0.1.ppm").exists()
    assert "localization checks pass" in capsys.readouterr().out


def test_cli_reconstruct_is_reproducible(tmp_path):
    cfg = write_cfg(tmp_path)
    for name in ("a", "b"):
        assert cli.main(["reconstruct", "--config", str(cfg), "--out", str(tmp_path / name), "--seed", "9"]) == 0
    for f in (tmp_path / "a").iterdir():
        assert filecmp.cmp(f, tmp_path / "b" / f.name, shallow=False)


def test_cli_reports_errors(tmp_path, capsys):
    assert cli.main(["image", "--config", str(write_cfg(tmp_path)), "--out", str(tmp_path / "none")]) == 1
    assert "load" in capsys.readouterr().err
