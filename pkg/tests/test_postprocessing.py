import json

import numpy as np
import pandas as pd
import pytest
from pandas.testing import assert_frame_equal

import config
from diagnosis.ce import run_ce_aad
from processing.postprocessing import (
    ResultTable,
    emit,
    from_csv,
    from_json,
    gnuplot_blocks,
    plot_nmse,
    plot_trace,
    report_to_dict,
    trace_block,
)

HEADER = "method,sweep_name,sweep_value,mean_nmse,median_nmse,std_nmse,trials,failures,wall_ms"


def make_table(methods=("ce-aad", "oracle"), values=(30, 50)):
    rows = []
    for i, method in enumerate(methods):
        for value in values:
            rows.append({
                "method": method,
                "sweep_name": "measurements",
                "sweep_value": value,
                "mean_nmse": 0.1 / (i + 1) / value,
                "median_nmse": 0.05 / (i + 1) / value,
                "std_nmse": 1e-3 / 3,
                "trials": 100,
                "failures": 0,
                "wall_ms": 0.0,
            })
    return ResultTable(pd.DataFrame(rows, columns=config.RESULT_COLUMNS))


class TestResultTable:
    def test_negative_nmse_rejected(self):
        rows = make_table().rows.copy()
        rows.loc[0, "mean_nmse"] = -1.0
        with pytest.raises(ValueError):
            ResultTable(rows)

    def test_columns_checked(self):
        with pytest.raises(ValueError):
            ResultTable(pd.DataFrame({"method": ["omp"]}))

    def test_methods(self):
        assert make_table().methods == ["ce-aad", "oracle"]


class TestEmit:
    def test_csv_header(self, tmp_path):
        path = tmp_path / "r.csv"
        emit(make_table(), "csv", str(path))
        assert path.read_text().splitlines()[0] == HEADER

    def test_empty_table_is_header_only(self, tmp_path):
        path = tmp_path / "r.csv"
        emit(ResultTable(), "csv", str(path))
        assert path.read_text().splitlines() == [HEADER]

    def test_csv_roundtrip(self, tmp_path):
        table = make_table(methods=("omp",), values=(70,))
        path = str(tmp_path / "r.csv")
        emit(table, "csv", path)
        assert_frame_equal(from_csv(path).rows, table.rows, check_dtype=False)

    def test_json_roundtrip(self, tmp_path):
        table = make_table()
        path = str(tmp_path / "r.json")
        emit(table, "json", path)
        assert json.loads(open(path).read())["columns"] == config.RESULT_COLUMNS
        assert_frame_equal(from_json(path).rows, table.rows, check_dtype=False)

    def test_gnuplot_one_block_per_method(self, tmp_path):
        path = tmp_path / "r.dat"
        emit(make_table(methods=("ce-aad", "omp", "oracle")), "gnuplot-dat", str(path))
        blocks = path.read_text().split("\n\n\n")
        assert len(blocks) == 3
        assert blocks[1].startswith("# method: omp")
        assert len([l for l in blocks[1].splitlines() if not l.startswith("#")]) == 2

    def test_numbers_round_trip(self):
        text = gnuplot_blocks(make_table(methods=("omp",), values=(30,)))
        fields = text.splitlines()[-1].split()
        assert fields[0] == "30"
        assert float(fields[1]) == 0.1 / 30

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            emit(make_table(), "xlsx", str(tmp_path / "r.xlsx"))

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(OSError, match="missing"):
            emit(make_table(), "csv", str(tmp_path / "missing" / "r.csv"))


class TestReports:
    @pytest.fixture
    def report(self, small_solver):
        rng = np.random.default_rng(0)
        F = rng.standard_normal((12, 16)) + 0j
        h = np.ones(16, dtype=complex)
        y = F[:, :2] @ np.array([-0.5, -0.5]) + 0j
        return run_ce_aad(y, F, h, small_solver, rng, (4, 4))

    def test_report_to_dict(self, report):
        d = report_to_dict(report, truth=np.ones(16))
        assert d["method"] == "ce-aad"
        assert len(d["b_hat"]) == 16
        assert len(d["trace"]) == 5
        assert d["nmse"] >= 0
        json.dumps(d)

    def test_trace_outputs(self, report, tmp_path):
        text = trace_block(report.trace)
        assert len(text.splitlines()) == 6
        plot_trace(report.trace, str(tmp_path / "trace.png"))
        assert (tmp_path / "trace.png").exists()

    def test_plot_nmse(self, tmp_path):
        plot_nmse(make_table(), str(tmp_path / "nmse.png"))
        assert (tmp_path / "nmse.png").exists()
