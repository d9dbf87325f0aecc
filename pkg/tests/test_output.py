"""CSV writing and reading: tokens, precision, and round-trips."""

import math

import pytest

from rlfeat import output


def test_format_value_tokens():
    assert output.format_value(None) == ""
    assert output.format_value(math.inf) == "inf"
    assert output.format_value(-math.inf) == "-inf"
    assert output.format_value(1.5) == "1.5"
    assert output.format_value(3) == "3"


def test_parse_value_tokens():
    assert output.parse_value("") is None
    assert output.parse_value("inf") == math.inf
    assert output.parse_value("-inf") == -math.inf
    assert output.parse_value("2.5") == 2.5


@pytest.mark.parametrize(
    "value",
    [0.1, 1 / 3, 9.714285714285714, 7.999996444459852, 1e-308, 2**53 + 1.0],
)
def test_float_round_trip_is_exact(value):
    assert output.parse_value(output.format_value(value)) == value


def test_write_and_read_rows(tmp_path):
    path = tmp_path / "rows.csv"
    rows = [
        {"alpha_f": 0.5, "alpha_p": 1.0, "quantity": "test", "theory": math.inf},
        {"alpha_f": 0.5, "alpha_p": 2.0, "quantity": "test", "theory": 1 / 7,
         "sim_mean": 0.142, "sim_stderr": 0.003, "trials": 100},
    ]
    output.write_rows(path, output.SWEEP_COLUMNS, rows)
    schema, columns, parsed = output.read_rows(path)
    assert schema == output.SCHEMA_VERSION
    assert columns == output.SWEEP_COLUMNS
    assert parsed[0]["theory"] == math.inf
    assert parsed[0]["sim_mean"] is None
    assert parsed[1]["theory"] == 1 / 7
    assert parsed[1]["quantity"] == "test"
    assert parsed[1]["trials"] == 100


def test_written_file_is_stable(tmp_path):
    rows = [{"x": 0.25, "rho": 1 / 3, "edge_min": 0.1, "edge_max": 2.0,
             "f_zero": 0.5}]
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    for path in (first, second):
        output.write_rows(
            path,
            output.SPECTRUM_COLUMNS,
            rows,
            schema=output.SPECTRUM_SCHEMA_VERSION,
        )
    assert first.read_bytes() == second.read_bytes()
    assert first.read_bytes().startswith(b"# schema: rlfeat-spectrum-v1\n")
    assert b"\r" not in first.read_bytes()
