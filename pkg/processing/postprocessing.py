import os
import json
import math
import logging

import numpy as np
import pandas as pd
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

import config
from diagnosis.metrics import nmse
from processing.utils import to_pairs

logger = logging.getLogger(__name__)

GNUPLOT_COLUMNS = [
    "sweep_value",
    "mean_nmse",
    "median_nmse",
    "std_nmse",
    "trials",
    "failures",
]


class ResultTable:
    """
    Aggregated sweep results, one row per (method, sweep value), with the
    optional per-trial log they were computed from.
    """

    def __init__(self, rows=None, trials=None):
        if rows is None:
            rows = pd.DataFrame(columns=config.RESULT_COLUMNS)
        if list(rows.columns) != config.RESULT_COLUMNS:
            raise ValueError(
                "result columns must be {}, got {}".format(
                    config.RESULT_COLUMNS, list(rows.columns)
                )
            )
        values = rows[["mean_nmse", "median_nmse"]].to_numpy(dtype=float)
        if np.any(values[~np.isnan(values)] < 0):
            raise ValueError("NMSE values must be non-negative")
        self.rows = rows.reset_index(drop=True)
        self.trials = trials

    def __len__(self):
        return len(self.rows)

    @property
    def methods(self):
        return list(dict.fromkeys(self.rows["method"]))

    @property
    def sweep_name(self):
        return self.rows["sweep_name"].iloc[0] if len(self.rows) else None

    def method_rows(self, method):
        return self.rows[self.rows["method"] == method]


def _plain(value):
    """numpy scalar -> JSON-friendly python value, NaN -> None."""
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return None if math.isnan(value) else value
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _number(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    return "NaN" if math.isnan(value) else repr(value)


def table_to_dict(table):
    return {
        "columns": config.RESULT_COLUMNS,
        "rows": [
            {column: _plain(row[column]) for column in config.RESULT_COLUMNS}
            for _, row in table.rows.iterrows()
        ],
    }


def gnuplot_blocks(table):
    """One data block per method, blocks separated by two blank lines."""
    blocks = []
    for method in table.methods:
        lines = [
            "# method: {}".format(method),
            "# sweep: {}".format(table.sweep_name),
            "# " + " ".join(GNUPLOT_COLUMNS),
        ]
        for _, row in table.method_rows(method).iterrows():
            lines.append(" ".join(_number(row[c]) for c in GNUPLOT_COLUMNS))
        blocks.append("\n".join(lines) + "\n")
    return "\n\n".join(blocks)


def emit(table, fmt, path):
    if fmt not in config.RESULT_FORMATS:
        raise ValueError(
            "format must be one of {}, got {}".format(config.RESULT_FORMATS, fmt)
        )
    try:
        if fmt == "csv":
            table.rows.to_csv(path, index=False)
        elif fmt == "json":
            with open(path, "w") as json_file:
                json.dump(table_to_dict(table), json_file, indent=4, sort_keys=False)
                json_file.write("\n")
        else:
            with open(path, "w") as dat_file:
                dat_file.write(gnuplot_blocks(table))
    except OSError as e:
        raise OSError("cannot write results to {}: {}".format(path, e)) from e
    logger.info("{} results written to {}".format(fmt, path))
    return path


def write_trial_log(table, path):
    if table.trials is None:
        raise ValueError("table carries no per-trial log")
    try:
        table.trials.to_csv(path, index=False)
    except OSError as e:
        raise OSError("cannot write trial log to {}: {}".format(path, e)) from e
    logger.info("trial log written to {}".format(path))


def from_csv(path):
    try:
        rows = pd.read_csv(path, float_precision="round_trip")
    except OSError as e:
        raise OSError("cannot read results {}: {}".format(path, e)) from e
    return ResultTable(rows)


def from_json(path):
    try:
        with open(path, "r") as read_file:
            d = json.load(read_file)
    except OSError as e:
        raise OSError("cannot read results {}: {}".format(path, e)) from e
    rows = pd.DataFrame(d["rows"], columns=config.RESULT_COLUMNS)
    for column in ["mean_nmse", "median_nmse", "std_nmse", "wall_ms"]:
        rows[column] = rows[column].astype(float)
    return ResultTable(rows)


def read_table(path):
    _, ext = os.path.splitext(path)
    if ext == ".json":
        return from_json(path)
    return from_csv(path)


def trace_to_dict(trace):
    return [
        {
            "iteration": record.iteration,
            "best_zeta": record.best_zeta,
            "best_so_far": record.best_so_far,
            "mean_probability": record.mean_probability,
            "probabilities": np.asarray(record.probabilities).tolist(),
        }
        for record in trace
    ]


def report_to_dict(report, truth=None):
    """DiagnosisReport -> JSON document; `truth` adds an 'nmse' entry."""
    d = {
        "method": report.method,
        "support": [int(n) for n in report.support],
        "params": [
            {"antenna": n, "tau": tau, "psi": psi} for n, tau, psi in report.params
        ],
        "best_zeta": report.best_zeta,
        "b_hat": to_pairs(report.b_hat),
    }
    if report.B_hat is not None:
        d["B_hat"] = to_pairs(report.B_hat)
    if report.tx_support is not None:
        d["tx_support"] = [int(n) for n in report.tx_support]
        d["rx_support"] = [int(n) for n in report.rx_support]
    if truth is not None:
        d["nmse"] = nmse(report.b_hat, truth)
    d["trace"] = trace_to_dict(report.trace)
    return d


def trace_frame(trace):
    """Trace records (dicts or IterationRecords) as a DataFrame."""
    if trace and not isinstance(trace[0], dict):
        trace = trace_to_dict(trace)
    columns = ["iteration", "best_zeta", "best_so_far", "mean_probability"]
    return pd.DataFrame([{c: r[c] for c in columns} for r in trace], columns=columns)


def trace_block(trace):
    df = trace_frame(trace)
    lines = ["# " + " ".join(df.columns)]
    for _, row in df.iterrows():
        lines.append(
            " ".join([str(int(row["iteration"]))] + [_number(row[c]) for c in df.columns[1:]])
        )
    return "\n".join(lines) + "\n"


### plotting


def plot_nmse(table, save_path=None):
    with plt.style.context(config.PLOT_STYLE):
        fig, ax = plt.subplots()
        for method in table.methods:
            rows = table.method_rows(method)
            ax.plot(rows["sweep_value"], rows["mean_nmse"], marker="o", label=method)
        ax.set_yscale("log")
        ax.set_xlabel(
            "number of measurements K" if table.sweep_name == "measurements" else "SNR (dB)"
        )
        ax.set_ylabel("NMSE")
        ax.legend()
        plt.title("NMSE vs {}".format(table.sweep_name))
        if save_path is not None:
            fig.savefig(save_path)
            logger.info("NMSE plot saved at {}".format(save_path))
        plt.close(fig=fig)
    return save_path


def plot_trace(trace, save_path=None):
    df = trace_frame(trace)
    with plt.style.context(config.PLOT_STYLE):
        fig, ax = plt.subplots()
        ax.plot(df["iteration"], df["best_zeta"], marker=".", label="iteration best")
        ax.plot(df["iteration"], df["best_so_far"], linestyle="dashed", label="best so far")
        ax.set_xlabel("iteration")
        ax.set_ylabel("objective")
        ax2 = ax.twinx()
        ax2.plot(df["iteration"], df["mean_probability"], color="gray", linewidth=0.8)
        ax2.set_ylabel("mean probability")
        ax.legend()
        plt.title("Convergence")
        if save_path is not None:
            fig.savefig(save_path)
            logger.info("convergence plot saved at {}".format(save_path))
        plt.close(fig=fig)
    return save_path
