"""CSV and manifest writers with versioned, pinned schemas.

Column orders are fixed; the first line of every CSV is a schema comment so
downstream consumers can detect layout changes. Floats are written with 17
significant digits (round-trip exact), which also makes reruns of identical
configs byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .fields import CorrelationSeries
from .series import STDERR_KEYS, ObservableSeries

__all__ = [
    "OBSERVABLES_SCHEMA",
    "CORRELATIONS_SCHEMA",
    "MANIFEST_SCHEMA",
    "observables_header",
    "write_observables_csv",
    "write_correlations_csv",
    "write_manifest",
]

OBSERVABLES_SCHEMA = "vnoise-observables-v1"
CORRELATIONS_SCHEMA = "vnoise-correlations-v1"
MANIFEST_SCHEMA = "vnoise-manifest-v1"

_BASE_COLUMNS = (
    "t_fs",
    "rho_gg",
    "rho_11",
    "rho_22",
    "re_rho12",
    "im_rho12",
    "abs_rho12",
    "coherence_fraction",
    "purity",
)

_CORR_COLUMNS = (
    "lag_fs",
    "re_g1_1",
    "im_g1_1",
    "abs_g1_1",
    "stderr_g1_1",
    "re_g1_2",
    "im_g1_2",
    "abs_g1_2",
    "stderr_g1_2",
    "re_cross",
    "im_cross",
    "abs_cross",
    "stderr_cross",
    "model_abs_g1",
)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def observables_header(with_stderr: bool) -> tuple[str, ...]:
    cols = _BASE_COLUMNS
    if with_stderr:
        cols = cols + tuple(f"stderr_{k}" for k in STDERR_KEYS)
    return cols


def check_overwrite(path: Path, overwrite: bool) -> None:
    if path.exists() and not overwrite:
        raise FileExistsError(f"refusing to overwrite existing output {path} (use --overwrite)")


def write_observables_csv(path, series: ObservableSeries, overwrite: bool = False) -> Path:
    path = Path(path)
    check_overwrite(path, overwrite)
    with_err = series.stderr is not None
    cols = observables_header(with_err)
    rows = [
        series.t_fs,
        series.rho_gg,
        series.rho_11,
        series.rho_22,
        np.real(series.rho_12),
        np.imag(series.rho_12),
        series.abs_rho12,
        series.coherence_fraction,
        series.purity,
    ]
    if with_err:
        rows.extend(series.stderr[k] for k in STDERR_KEYS)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# {OBSERVABLES_SCHEMA}\n")
        fh.write(",".join(cols) + "\n")
        for i in range(len(series)):
            fh.write(",".join(_fmt(col[i]) for col in rows) + "\n")
    return path


def write_correlations_csv(
    path,
    auto_1: CorrelationSeries,
    auto_2: CorrelationSeries,
    cross: CorrelationSeries,
    coherence_time: float,
    overwrite: bool = False,
) -> Path:
    path = Path(path)
    check_overwrite(path, overwrite)
    lags = auto_1.lags
    if not (np.array_equal(lags, auto_2.lags) and np.array_equal(lags, cross.lags)):
        raise ValueError("correlation series must share the same lags")
    model = np.exp(-lags / coherence_time)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# {CORRELATIONS_SCHEMA}\n")
        fh.write(",".join(_CORR_COLUMNS) + "\n")
        for i in range(lags.size):
            row = (
                lags[i],
                auto_1.values[i].real,
                auto_1.values[i].imag,
                abs(auto_1.values[i]),
                auto_1.stderr[i],
                auto_2.values[i].real,
                auto_2.values[i].imag,
                abs(auto_2.values[i]),
                auto_2.stderr[i],
                cross.values[i].real,
                cross.values[i].imag,
                abs(cross.values[i]),
                cross.stderr[i],
                model[i],
            )
            fh.write(",".join(_fmt(x) for x in row) + "\n")
    return path


def write_manifest(
    path,
    config: dict,
    code_version: str,
    wall_time_s: float,
    outputs: dict[str, str],
    overwrite: bool = False,
) -> Path:
    path = Path(path)
    check_overwrite(path, overwrite)
    doc = {
        "schema": MANIFEST_SCHEMA,
        "code_version": code_version,
        "wall_time_s": wall_time_s,
        "outputs": outputs,
        "config": config,
    }
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
