"""Command line interface: output contracts, validators, exit codes."""

import json

import pytest

from sstkalman.cli import (
    csv_text,
    format_cell,
    main,
    parse_cell,
    parse_csv,
    parse_db_values,
    validate_bound_chain,
)

from reference_tables import POLY_ALPHA1_C1, SEARCH_ROWS_NU5

CURVE_HEADER = ("ebn0_db,rho,half_tr_sigma_c,gauss_bound,half_tr_sigma_x,"
                "inv_1p_rho,log1p_rho_over_rho,two_I_over_rho,"
                "lambda_t1,lambda_t2,rho_lambda_max")


def run(argv, capsys):
    rc = main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def test_tables_one_shape_and_anchor_row(capsys):
    rc, out, _ = run(["tables", "--table", "1", "--quiet"], capsys)
    assert rc == 0
    lines = out.strip().split("\n")
    assert len(lines) == 22
    header = lines[0].split(",")
    assert header == ["ebn0_db", "alpha1", "sigma1_sq", "alpha2",
                      "sigma2_sq", "theta12", "half_tr_sigma_x"]
    row0 = dict(zip(header, lines[11].split(",")))
    assert row0["ebn0_db"] == "0"
    assert round(float(row0["alpha1"]), 4) == 0.4259
    assert round(float(row0["sigma1_sq"]), 4) == 0.9780
    assert round(float(row0["alpha2"]), 4) == 0.4494
    assert round(float(row0["sigma2_sq"]), 4) == 0.9898
    assert round(float(row0["theta12"]), 4) == 0.0758
    assert round(float(row0["half_tr_sigma_x"]), 4) == 0.9839


def test_tables_five_channel_bound_cell(capsys):
    rc, out, _ = run(["tables", "--table", "5", "--quiet"], capsys)
    assert rc == 0
    lines = out.strip().split("\n")
    header = lines[0].split(",")
    row0 = dict(zip(header, lines[11].split(",")))
    assert row0["inv_1p_rho"] == "0.5"
    assert round(float(row0["half_tr_sigma_c"]), 4) == 0.4839


def test_tables_nine_exact_integers(capsys):
    rc, out, _ = run(["tables", "--table", "9", "--quiet"], capsys)
    assert rc == 0
    lines = out.strip().split("\n")
    assert len(lines) == 9
    got = [tuple(line.split(",")) for line in lines[1:]]
    for (c1, c2, c3, m1a, m2a, m1b, m2b), ref in zip(got, SEARCH_ROWS_NU5):
        assert c1 + c2 + c3 == ref[0]
        assert (int(m1a), int(m2a), int(m1b), int(m2b)) == ref[1:5]


def test_tables_rejects_unknown_number(capsys):
    rc, _, err = run(["tables", "--table", "11", "--quiet"], capsys)
    assert rc == 2
    assert "error" in err.lower()


def test_curves_header_and_roundtrip(capsys, tmp_path):
    target = tmp_path / "curves.csv"
    rc, out, _ = run(["curves", "--code", "c2", "--ebn0", "0,5,10",
                      "--out", str(target)], capsys)
    assert rc == 0
    text = target.read_text()
    lines = text.strip().split("\n")
    assert lines[0] == CURVE_HEADER
    assert len(lines) == 4
    assert "wrote" in out
    columns, rows = parse_csv(text)
    assert columns == CURVE_HEADER.split(",")
    assert csv_text(columns, rows) == text


def test_curves_empty_grid_is_header_only(capsys):
    rc, out, _ = run(["curves", "--code", "c1", "--ebn0", "", "--quiet"], capsys)
    assert rc == 0
    assert out == CURVE_HEADER + "\n"


def test_quiet_suppresses_write_note(capsys, tmp_path):
    target = tmp_path / "t.csv"
    rc, out, _ = run(["curves", "--code", "c1", "--ebn0", "1",
                      "--out", str(target), "--quiet"], capsys)
    assert rc == 0
    assert out == ""
    assert target.exists()


def test_out_to_missing_directory_fails_cleanly(capsys, tmp_path):
    rc, _, err = run(["curves", "--code", "c1", "--ebn0", "1",
                      "--out", str(tmp_path / "no" / "dir" / "x.csv")], capsys)
    assert rc == 2
    assert "error" in err.lower()


def test_alpha_values_anchor_row(capsys):
    rc, out, _ = run(["alpha", "--code", "c1", "--ebn0-db", "0", "--quiet"],
                     capsys)
    assert rc == 0
    header, row = out.strip().split("\n")
    cells = dict(zip(header.split(","), row.split(",")))
    assert round(float(cells["alpha1"]), 4) == 0.4259
    assert round(float(cells["alpha2"]), 4) == 0.4494
    assert round(float(cells["theta12"]), 4) == 0.0758


def test_alpha_polynomial_emit(capsys):
    rc, out, _ = run(["alpha", "--code", "c1", "--emit", "polynomial",
                      "--quiet"], capsys)
    assert rc == 0
    payload = json.loads(out)
    assert payload["variable"] == "eps"
    assert payload["coefficient_order"] == "ascending"
    assert payload["alpha1"] == list(POLY_ALPHA1_C1)
    assert all(isinstance(c, int) for c in payload["theta12"])


def test_simulate_small_run(capsys):
    rc, out, _ = run(["simulate", "--code", "c1", "--ebn0", "2",
                      "--branches", "2000", "--seed", "1",
                      "--format", "json", "--quiet"], capsys)
    assert rc == 0
    payload = json.loads(out)
    assert payload["columns"][:4] == ["ebn0_db", "branches", "pre_ber", "post_ber"]
    row = payload["rows"][0]
    values = dict(zip(payload["columns"], row)) if isinstance(row, list) else row
    assert 0 <= values["post_ber"] <= values["pre_ber"] + 0.05


def test_simulate_rejects_small_budget(capsys):
    rc, _, err = run(["simulate", "--code", "c1", "--ebn0", "2",
                      "--branches", "500", "--seed", "1", "--quiet"], capsys)
    assert rc == 2
    assert "error" in err.lower()


def test_kalman_check_passes(capsys):
    rc, out, _ = run(["kalman-check", "--quiet"], capsys)
    assert rc == 0
    lines = out.strip().split("\n")
    assert lines[0] == "check,max_dev,tol,passed"
    assert len(lines) > 5
    assert all(line.endswith(",1") for line in lines[1:])


def test_search_rows_and_flag_column(capsys):
    rc, out, _ = run(["search", "--nu", "5", "--quiet"], capsys)
    assert rc == 0
    lines = out.strip().split("\n")
    assert len(lines) == 9
    header = lines[0].split(",")
    rows = [dict(zip(header, line.split(","))) for line in lines[1:]]
    assert rows[0]["c_bits"] == "000"
    flagged = [r for r in rows if r["heuristic_counterexample"] == "1"]
    assert [r["c_bits"] for r in flagged] == ["111"]
    assert flagged[0]["exact_counterexample_snrs"] != ""
    for row, ref in zip(rows, SEARCH_ROWS_NU5):
        assert row["c_bits"] == ref[0]
        assert int(row["m1a"]) == ref[1]


def test_search_rejects_out_of_range_nu(capsys):
    rc, _, err = run(["search", "--nu", "13", "--quiet"], capsys)
    assert rc == 2
    assert "error" in err.lower()


def test_format_cell():
    assert format_cell(None) == ""
    assert format_cell(True) == "1"
    assert format_cell(False) == "0"
    assert format_cell(7) == "7"
    assert format_cell(0.5) == "0.5"
    assert format_cell(0.12345678) == "0.123457"
    assert format_cell(1234567.0) == "1.23457e+06"


def test_parse_cell_round_trip():
    for value in (None, True, 7, 0.5, 0.123457, "000", "abc", -3):
        text = format_cell(value)
        back = parse_cell(text)
        if value is True:
            assert back == 1
        elif isinstance(value, float):
            assert back == pytest.approx(value, rel=1e-5)
        else:
            assert back == value
    assert parse_cell("000") == "000"
    assert parse_cell("") is None


def test_parse_db_values():
    assert parse_db_values("0,1,2") == [0.0, 1.0, 2.0]
    assert parse_db_values("-2..2") == [-2.0, -1.0, 0.0, 1.0, 2.0]
    assert parse_db_values("") == []
    assert parse_db_values("3") == [3.0]
    with pytest.raises(ValueError):
        parse_db_values("5..1")
    with pytest.raises(ValueError):
        parse_db_values("a,b")


def test_validate_bound_chain_flags_violations():
    columns = ["half_tr_sigma_c", "gauss_bound", "half_tr_sigma_x",
               "inv_1p_rho", "log1p_rho_over_rho"]
    good = [dict(zip(columns, (0.1, 0.2, 0.3, 0.4, 0.5)))]
    assert validate_bound_chain(good) == []
    bad = [dict(zip(columns, (0.3, 0.2, 0.1, 0.4, 0.5)))]
    assert validate_bound_chain(bad) != []
