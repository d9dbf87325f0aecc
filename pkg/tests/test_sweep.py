"""Config parsing, grid construction, and sweep execution."""

import math

import pytest

from rlfeat import output
from rlfeat.errors import ConfigParseError, ConfigValidationError
from rlfeat.sweep import (
    SweepSpec,
    _parse_entries,
    _point_runs,
    load_config,
    run_sweep,
    spec_from_entries,
)


def _write_config(tmp_path, text, name="sweep.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def test_parse_skips_blanks_and_comments():
    entries = _parse_entries("\n# note\n  \nalpha_f=2\n mode = theory \n")
    assert entries == {"alpha_f": 2.0, "mode": "theory"}


def test_parse_reports_line_number_for_unknown_key():
    with pytest.raises(ConfigParseError) as err:
        _parse_entries("alpha_f=1\n\nwibble=3\n")
    assert err.value.line_number == 3
    assert "wibble" in str(err.value)
    assert "line 3" in str(err.value)


def test_parse_rejects_duplicate_key():
    with pytest.raises(ConfigParseError) as err:
        _parse_entries("m=10\nm=20\n")
    assert err.value.line_number == 2
    assert "duplicate" in str(err.value)


def test_parse_rejects_missing_equals():
    with pytest.raises(ConfigParseError) as err:
        _parse_entries("alpha_f=1\njust a line\n")
    assert err.value.line_number == 2
    assert "key=value" in str(err.value)


@pytest.mark.parametrize(
    "text, fragment",
    [("m=many", "integer"), ("snr=loud", "number")],
)
def test_parse_rejects_bad_literals(text, fragment):
    with pytest.raises(ConfigParseError) as err:
        _parse_entries(text)
    assert fragment in str(err.value)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _entries(**overrides):
    base = {"alpha_f": 0.5, "alpha_p": 2.0, "mode": "theory"}
    base.update(overrides)
    return base


def test_valid_minimal_spec_defaults():
    spec = spec_from_entries(_entries())
    assert spec == SweepSpec(
        mode="theory", alpha_f_values=(0.5,), alpha_p_values=(2.0,)
    )
    assert spec.m == 512 and spec.snr == 10.0 and spec.lam == 1e-6
    assert spec.teacher == "linear" and spec.trials is None and spec.seed == 0


def test_validation_collects_every_violation():
    entries = {
        "alpha_p": -1.0,
        "m": 0,
        "snr": 0.0,
        "lambda": -1e-6,
        "teacher": "sigmoid",
        "trials": 0,
        "seed": -5,
        "mode": "draw",
    }
    with pytest.raises(ConfigValidationError) as err:
        spec_from_entries(entries)
    text = str(err.value)
    assert len(err.value.violations) == 9
    for key in ("alpha_f", "alpha_p", "mode", "m", "snr", "lambda",
                "teacher", "trials", "seed"):
        assert key in text


def test_missing_axis_names_the_keys():
    with pytest.raises(ConfigValidationError) as err:
        spec_from_entries({"alpha_p": 1.0, "mode": "theory"})
    (violation,) = err.value.violations
    assert "alpha_f" in violation and "alpha_f_min" in violation


def test_incomplete_axis_lists_missing_parts():
    with pytest.raises(ConfigValidationError) as err:
        spec_from_entries(
            {"alpha_f_min": 0.1, "alpha_p": 1.0, "mode": "theory"}
        )
    (violation,) = err.value.violations
    assert "alpha_f_max" in violation and "alpha_f_steps" in violation


def test_single_value_and_axis_conflict():
    with pytest.raises(ConfigValidationError) as err:
        spec_from_entries(
            _entries(alpha_f=1.0, alpha_f_min=0.1, alpha_f_max=1.0,
                     alpha_f_steps=3)
        )
    assert any("not both" in v for v in err.value.violations)


def test_log_axis_values():
    entries = {
        "alpha_f": 0.5,
        "alpha_p_min": 0.1,
        "alpha_p_max": 10.0,
        "alpha_p_steps": 3,
        "mode": "theory",
    }
    spec = spec_from_entries(entries)
    assert spec.alpha_p_values == pytest.approx((0.1, 1.0, 10.0))


def test_linear_axis_values():
    entries = {
        "alpha_f": 0.5,
        "alpha_p_min": 1.0,
        "alpha_p_max": 3.0,
        "alpha_p_steps": 5,
        "alpha_p_scale": "linear",
        "mode": "theory",
    }
    spec = spec_from_entries(entries)
    assert spec.alpha_p_values == pytest.approx((1.0, 1.5, 2.0, 2.5, 3.0))


def test_one_step_axis_collapses_to_min():
    entries = {
        "alpha_f": 0.5,
        "alpha_p_min": 2.0,
        "alpha_p_max": 8.0,
        "alpha_p_steps": 1,
        "mode": "theory",
    }
    assert spec_from_entries(entries).alpha_p_values == (2.0,)


def test_bad_scale_is_a_violation():
    entries = {
        "alpha_f": 0.5,
        "alpha_p_min": 1.0,
        "alpha_p_max": 2.0,
        "alpha_p_steps": 2,
        "alpha_p_scale": "cubic",
        "mode": "theory",
    }
    with pytest.raises(ConfigValidationError) as err:
        spec_from_entries(entries)
    assert any("alpha_p_scale" in v for v in err.value.violations)


def test_mode_argument_overrides_file():
    spec = spec_from_entries(_entries(mode="theory"), mode="simulate")
    assert spec.mode == "simulate"


def test_load_config_round_trip(tmp_path):
    path = _write_config(
        tmp_path,
        "# stock defaults\nmode=simulate\nalpha_f=4\n"
        "alpha_p_min=0.25\nalpha_p_max=8\nalpha_p_steps=7\n"
        "trials=12\nseed=9\nout_dir=run\n",
    )
    spec = load_config(path)
    assert spec.mode == "simulate"
    assert spec.m == 512 and spec.snr == 10.0 and spec.lam == 1e-6
    assert spec.trials == 12 and spec.seed == 9 and spec.out_dir == "run"
    assert len(spec.alpha_p_values) == 7


# ---------------------------------------------------------------------------
# Seed layout
# ---------------------------------------------------------------------------


def test_point_runs_use_disjoint_seed_blocks():
    spec = SweepSpec(
        mode="simulate",
        alpha_f_values=(0.5,),
        alpha_p_values=(0.5, 1.0, 2.0),
        trials=7,
        seed=100,
    )
    runs = _point_runs(spec)
    assert [(r[2], r[3]) for r in runs] == [(7, 100), (7, 107), (7, 114)]


def test_point_runs_default_trials_expand_on_boundary():
    spec = SweepSpec(
        mode="simulate",
        alpha_f_values=(4.0,),
        alpha_p_values=(0.25, 1.0),
        m=8,
    )
    runs = _point_runs(spec)
    assert runs[0][2] == 1000
    assert runs[1][2] == 150_000
    assert runs[1][3] == spec.seed + 1000


def test_theory_mode_carries_no_trials():
    spec = SweepSpec(
        mode="theory", alpha_f_values=(1.0,), alpha_p_values=(1.0, 2.0)
    )
    assert [r[2] for r in _point_runs(spec)] == [None, None]


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


def test_theory_sweep_writes_quantity_csvs(tmp_path):
    spec = SweepSpec(
        mode="theory",
        alpha_f_values=(0.5,),
        alpha_p_values=tuple(0.1 * 10 ** (i / 33) for i in range(100)),
        out_dir=str(tmp_path),
    )
    result = run_sweep(spec)
    csvs = [f for f in result.files if f.endswith(".csv")]
    assert len(csvs) == 4
    for path in csvs:
        schema, _, rows = output.read_rows(path)
        assert schema == output.SCHEMA_VERSION
        assert len(rows) == 100
        assert all(row["sim_mean"] is None for row in rows)
    svgs = [f for f in result.files if f.endswith(".svg")]
    assert len(svgs) == 4


def test_theory_sweep_marks_divergences_inf(tmp_path):
    spec = SweepSpec(
        mode="theory",
        alpha_f_values=(4.0,),
        alpha_p_values=(0.5, 1.0, 2.0),
        out_dir=str(tmp_path),
    )
    run_sweep(spec)
    _, _, rows = output.read_rows(tmp_path / "theory_test.csv")
    by_alpha = {row["alpha_p"]: row["theory"] for row in rows}
    assert by_alpha[1.0] == math.inf
    assert math.isfinite(by_alpha[0.5]) and math.isfinite(by_alpha[2.0])
    raw = (tmp_path / "theory_test.csv").read_text(encoding="utf-8")
    assert raw.count(",inf,") == 1


def test_simulate_sweep_is_idempotent(tmp_path):
    spec = SweepSpec(
        mode="simulate",
        alpha_f_values=(0.5,),
        alpha_p_values=(0.5, 2.0),
        m=48,
        trials=6,
        out_dir=str(tmp_path),
    )
    first = run_sweep(spec)
    before = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    second = run_sweep(spec)
    assert second.files == first.files
    after = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    assert after == before


def test_simulate_sweep_threads_match_serial(tmp_path):
    kwargs = dict(
        mode="simulate",
        alpha_f_values=(0.5, 1.5),
        alpha_p_values=(0.5, 2.0),
        m=32,
        trials=5,
    )
    serial = SweepSpec(out_dir=str(tmp_path / "serial"), **kwargs)
    pooled = SweepSpec(out_dir=str(tmp_path / "pooled"), **kwargs)
    run_sweep(serial)
    run_sweep(pooled, max_workers=4)
    for name in ("simulate_train.csv", "simulate_test.csv",
                 "simulate_bias2.csv", "simulate_variance.csv"):
        assert (tmp_path / "serial" / name).read_bytes() == \
            (tmp_path / "pooled" / name).read_bytes()


def test_two_dimensional_sweep_writes_heatmaps(tmp_path):
    spec = SweepSpec(
        mode="theory",
        alpha_f_values=(0.5, 1.0, 2.0),
        alpha_p_values=(0.5, 1.0, 2.0),
        out_dir=str(tmp_path),
    )
    result = run_sweep(spec)
    heatmaps = [f for f in result.files if f.endswith("_heatmap.svg")]
    assert len(heatmaps) == 4
    _, _, rows = output.read_rows(tmp_path / "theory_variance.csv")
    assert len(rows) == 9


def test_spectrum_sweep_outputs(tmp_path):
    spec = SweepSpec(
        mode="spectrum",
        alpha_f_values=(4.0,),
        alpha_p_values=(2.0,),
        out_dir=str(tmp_path),
    )
    result = run_sweep(spec)
    csv_path = tmp_path / "spectrum_af4_ap2.csv"
    svg_path = tmp_path / "spectrum_af4_ap2.svg"
    assert str(csv_path) in result.files and str(svg_path) in result.files
    schema, columns, rows = output.read_rows(csv_path)
    assert schema == output.SPECTRUM_SCHEMA_VERSION
    assert columns == output.SPECTRUM_COLUMNS
    assert rows[0]["f_zero"] == 0.5
    assert all(rows[0]["edge_min"] == row["edge_min"] for row in rows)
    xs = [row["x"] for row in rows]
    assert xs == sorted(xs)
    assert "edges" in result.report


def test_validate_sweep_reports_z_table(tmp_path):
    spec = SweepSpec(
        mode="validate",
        alpha_f_values=(0.5,),
        alpha_p_values=(2.0,),
        m=64,
        trials=40,
        out_dir=str(tmp_path),
    )
    result = run_sweep(spec)
    assert result.ok
    assert "z_test" in result.report
    assert "validation passed" in result.report
    _, _, rows = output.read_rows(tmp_path / "validate_test.csv")
    assert rows[0]["trials"] == 40
    assert rows[0]["sim_stderr"] > 0
