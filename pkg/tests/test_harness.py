import dataclasses
import json

import numpy as np
import pytest

from smaphase.bfgs import BfgsConfig
from smaphase.chebyshev import grid_transfer_2d
from smaphase.experiment import (
    PRESET_NAMES,
    ConfigError,
    ExperimentSpec,
    UnknownPreset,
    apply_overrides,
    flatten,
    load_config,
    parse_assignments,
    preset,
    run,
)
from smaphase.material import martensite_wells
from smaphase.objective import DisplacementField
from smaphase.output import (
    FIELD_HEADER_1D,
    FIELD_HEADER_2D,
    cell_colors,
    read_field_csv,
    render_heatmap_svg,
    unknowns_from_csv,
    write_artifacts,
    write_field_csv,
)

from conftest import reduced


# ---------------------------------------------------------------- presets

def test_preset_experiment1():
    s = preset("experiment1")
    assert s.dimensionality == 1 and (s.x_left, s.x_right) == (0.0, 1.0)
    assert s.fx == 500 and s.ga_order == s.refine_order == 14 and s.sparse_order == 6
    assert (s.ga.population, s.ga.generations) == (60, 800)
    assert s.temperature == 210 and s.ga.gene_range == (-0.1, 0.1)


def test_preset_experiment2_and_3():
    s2, s3 = preset("experiment2"), preset("experiment3")
    assert s2.dimensionality == 2 and (s2.fx, s2.fy) == (3000, 3000)
    assert (s2.ga_order, s2.refine_order) == (8, 14)
    assert (s2.ga.population, s2.ga.generations) == (120, 1500)
    assert (s3.fx, s3.fy) == (2000, 0)
    assert dataclasses.replace(s3, name=s2.name, fx=s2.fx, fy=s2.fy) == s2


def test_unknown_preset():
    with pytest.raises(UnknownPreset):
        preset("experiment4")
    assert PRESET_NAMES == ("experiment1", "experiment2", "experiment3")


def test_spec_order_invariant():
    with pytest.raises(ConfigError):
        ExperimentSpec(ga_order=8, refine_order=6)
    with pytest.raises(ConfigError):
        apply_overrides(preset("experiment2"), {"ga.sparse_order": "8"})


# ---------------------------------------------------------------- config

def test_overrides_and_coercion():
    s = apply_overrides(preset("experiment1"), {
        "ga.population": "30", "bfgs.relaxation": "0.2", "fx": "250",
        "ga.gene_range": "-0.05,0.05", "bfgs.scale_initial": "true", "material.a2": "500",
    })
    assert s.ga.population == 30 and s.bfgs.relaxation == 0.2 and s.fx == 250.0
    assert s.ga.gene_range == (-0.05, 0.05) and s.bfgs.scale_initial is True
    assert s.material.a2 == 500.0


@pytest.mark.parametrize("bad", [{"ga.nope": "1"}, {"nope": "1"}, {"ga.population": "x"},
                                 {"bfgs.relaxation": "2"}, {"zz.population": "3"}])
def test_bad_overrides(bad):
    with pytest.raises(ConfigError):
        apply_overrides(preset("experiment1"), bad)


def test_parse_assignments_and_load_config(tmp_path):
    assert parse_assignments(["a = 1  # c", "", "# x", "b=2"]) == {"a": "1", "b": "2"}
    with pytest.raises(ConfigError):
        parse_assignments(["nonsense"])
    cfg = tmp_path / "c.cfg"
    cfg.write_text("preset = experiment3\nga.generations = 5\nfx = 1000\n")
    s = load_config(cfg)
    assert s.name == "experiment3" and s.ga.generations == 5 and s.fx == 1000.0


def test_flatten_covers_every_parameter():
    flat = flatten(preset("experiment2"))
    for key in ("ga.population", "ga.alpha_range", "bfgs.tolerance", "bfgs.max_halvings",
                "material.a6", "material.theta0", "temperature", "fy", "refine_order"):
        assert key in flat
    assert flat["bfgs.tolerance"] == 1e-6


# ---------------------------------------------------------------- pipeline

def test_experiment1_strains_sit_in_the_wells(exp1_run):
    e_star, _ = martensite_wells(2.0, exp1_run.spec.material)
    eps = exp1_run.strain_fields[1:-1]
    assert np.all(np.abs(np.abs(eps) - e_star) <= 0.02)


def test_experiment1_two_sign_domains(exp1_run):
    eps = exp1_run.strain_fields[1:-1]
    signs = np.sign(eps)
    assert np.sum(signs > 0) >= 2 and np.sum(signs < 0) >= 2
    assert np.count_nonzero(signs[1:] != signs[:-1]) == 1
    e_star, _ = martensite_wells(2.0, exp1_run.spec.material)
    assert np.mean(np.abs(np.abs(eps) - e_star) <= 0.02) >= 0.8


def test_run_artifact_invariants(exp1_run):
    a = exp1_run
    assert a.status == "converged"
    assert len(a.ga_trace) == a.spec.ga.generations + 1
    assert all(t1 <= t0 for t0, t1 in zip(a.ga_trace, a.ga_trace[1:]))
    assert a.bfgs_trace and a.bfgs_trace[-1] <= a.spec.bfgs.tolerance
    assert a.final_energy <= a.ga_best_energy
    assert a.final_energy == pytest.approx(float(a.problem.energy(a.final_x)), rel=1e-14)
    assert a.metadata["config"] == flatten(a.spec)
    assert a.metadata["seed"] == 42


def test_experiment3_antisymmetric_sign_pattern(exp3_reduced_run):
    e2 = exp3_reduced_run.strain_fields.e2[1:-1, 1:-1]
    signs = np.sign(e2)
    anti = signs == -signs[::-1, :]
    off_axis = np.ones_like(anti)
    off_axis[anti.shape[0] // 2, :] = False
    assert anti[off_axis].mean() >= 0.9


def test_zero_generations_zero_iterations_is_identity():
    spec = reduced("experiment3")
    spec = dataclasses.replace(spec, ga=dataclasses.replace(spec.ga, generations=0),
                               bfgs=BfgsConfig(max_iterations=0))
    a = run(spec)
    assert a.status == "refinement_skipped"
    assert a.bfgs_trace == []
    assert a.ga_trace == [a.ga_best_energy]
    # 2D grids differ, so the echo is the best chromosome interpolated to the refine grid
    assert a.final_energy == a.refine_start_energy
    assert np.array_equal(a.final_field.u1, grid_transfer_2d(a.ga_field.u1, 8, 14))
    assert np.array_equal(a.final_field.u2, grid_transfer_2d(a.ga_field.u2, 8, 14))
    spec1 = dataclasses.replace(preset("experiment1"),
                                ga=dataclasses.replace(preset("experiment1").ga, generations=0),
                                bfgs=BfgsConfig(max_iterations=0))
    a1 = run(spec1)
    assert a1.final_energy == a1.ga_best_energy


def test_run_is_deterministic():
    spec = dataclasses.replace(preset("experiment1"),
                               ga=dataclasses.replace(preset("experiment1").ga, generations=50))
    a, b = run(spec, seed=7), run(spec, seed=7)
    assert a.ga_trace == b.ga_trace and np.array_equal(a.final_x, b.final_x)
    c = run(spec, seed=8)
    assert c.ga_trace != a.ga_trace


# ---------------------------------------------------------------- CSV

def test_field_csv_round_trip(exp3_reduced_run, tmp_path):
    a = exp3_reduced_run
    path = write_field_csv(a, tmp_path / "field.csv")
    cols = read_field_csv(path)
    assert list(cols) == FIELD_HEADER_2D
    assert len(cols["x"]) == 225
    x = unknowns_from_csv(path, a.spec.refine_order)
    assert float(a.problem.energy(x)) == pytest.approx(a.final_energy, rel=1e-10)
    assert np.allclose(cols["e2"], a.strain_fields.e2.ravel(), rtol=1e-15, atol=0)


def test_field_csv_1d(exp1_run, tmp_path):
    path = write_field_csv(exp1_run, tmp_path / "field.csv")
    cols = read_field_csv(path)
    assert list(cols) == FIELD_HEADER_1D and len(cols["x"]) == 15
    x = unknowns_from_csv(path, 14)
    assert float(exp1_run.problem.energy(x)) == pytest.approx(exp1_run.final_energy, rel=1e-10)


def test_zero_field_csv_has_zero_strains(exp3_reduced_run, tmp_path):
    a = dataclasses.replace(exp3_reduced_run)
    z = np.zeros((15, 15))
    a.final_field = DisplacementField(z, z.copy())
    a.strain_fields = a.problem.strains(np.zeros(a.problem.n_unknowns))
    cols = read_field_csv(write_field_csv(a, tmp_path / "zero.csv"))
    for k in ("e1", "e2", "e3", "density"):
        assert not np.any(cols[k])


def test_write_artifacts(exp3_reduced_run, tmp_path):
    files = {p.name for p in write_artifacts(exp3_reduced_run, tmp_path)}
    assert {"field.csv", "ga_trace.csv", "bfgs_trace.csv", "metadata.json", "e2.svg", "e2_ga.svg"} <= files
    ga = (tmp_path / "ga_trace.csv").read_text().splitlines()
    assert ga[0] == "generation,best_energy" and len(ga) == 302
    best = [float(line.split(",")[1]) for line in ga[1:]]
    assert all(b <= a for a, b in zip(best, best[1:]))
    bf = (tmp_path / "bfgs_trace.csv").read_text().splitlines()
    assert bf[0] == "iteration,step_norm" and float(bf[-1].split(",")[1]) <= 1e-6
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert meta["status"] == "converged" and meta["config"]["ga.generations"] == 300
    assert not (tmp_path / "NOT_CONVERGED").exists()


def test_not_converged_marker(tmp_path):
    spec = dataclasses.replace(preset("experiment1"),
                               ga=dataclasses.replace(preset("experiment1").ga, generations=5),
                               bfgs=BfgsConfig(max_iterations=3))
    with pytest.warns(RuntimeWarning):
        a = run(spec)
    assert a.status == "not_converged"
    write_artifacts(a, tmp_path)
    assert (tmp_path / "NOT_CONVERGED").exists()


# ---------------------------------------------------------------- heatmap

def test_constant_field_heatmap(tmp_path):
    path = render_heatmap_svg(np.full((5, 5), 0.3), tmp_path / "c.svg")
    text = path.read_text()
    fills = {f for f in text.split('fill="')[1:26]}
    assert len({f.split('"')[0] for f in fills}) == 1
    assert "min 0.3" in text and "max 0.3" in text


def test_heatmap_bytes_deterministic(tmp_path):
    f = np.random.default_rng(0).standard_normal((9, 9))
    a = render_heatmap_svg(f, tmp_path / "a.svg").read_bytes()
    b = render_heatmap_svg(f, tmp_path / "b.svg").read_bytes()
    assert a == b and a.startswith(b"<?xml")


def test_antisymmetric_field_colours_flip():
    f = np.random.default_rng(1).standard_normal((7, 7))
    f = f - f[::-1, :]
    c = cell_colors(f)
    flipped = cell_colors(f)[::-1, :]
    swap = np.vectorize(lambda h: "#" + h[5:7] + h[3:5] + h[1:3])
    assert np.array_equal(swap(c), flipped)


def test_experiment3_heatmap_left_right(exp3_reduced_run):
    c = cell_colors(exp3_reduced_run.strain_fields.e2)
    red = np.vectorize(lambda h: h[1:3] == "ff" and h != "#ffffff")(c)
    n = c.shape[0]
    top, bottom = red[: n // 2], red[n // 2 + 1:]
    # one half of the patch is predominantly red, the other predominantly blue
    assert abs(top.mean() - bottom.mean()) >= 0.8
