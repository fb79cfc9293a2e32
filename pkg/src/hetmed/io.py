"""Delimited-text input, JSON/table output and plot-data files."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, fields, is_dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import EffectDataset, IndividualDataset, SubgroupEffect, validate_dataset
from .errors import InputError
from .estimators import SimexFit, SlopeFit
from .inference import MediationResult

AGGREGATE_REQUIRED = ("group_id", "gamma_hat", "se_gamma", "tau_hat", "se_tau", "n")
INDIVIDUAL_REQUIRED = ("treatment", "mediator", "outcome")
X_PREFIX = "x_mean_"


def _read_rows(path):
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            sample = fh.read(4096)
            fh.seek(0)
            try:
                dialect = csv.Sniffer().sniff(sample, delimiters=",\t;")
            except csv.Error:
                dialect = csv.excel
            reader = csv.reader(fh, dialect)
            header = next(reader, None)
            rows = [row for row in reader if any(cell.strip() for cell in row)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise InputError(f"cannot read {path}: not UTF-8 text") from None
    if header is None:
        raise InputError("no data rows")
    header = [h.strip() for h in header]
    if not rows:
        raise InputError("no data rows")
    return header, rows


def _cell(rows, r, header, col, kind=float):
    j = header.index(col)
    try:
        text = rows[r][j].strip()
        value = kind(text)
    except (ValueError, IndexError):
        # 1-based data row numbers, header excluded
        raise InputError(f"parse error at row {r + 1}, column {col}") from None
    if kind is float and not math.isfinite(value):
        raise InputError(f"parse error at row {r + 1}, column {col}")
    return value


def _int_cell(text):
    value = float(text)
    if value != int(value):
        raise ValueError(text)
    return int(value)


def parse_aggregate_csv(path, weights_path=None) -> EffectDataset:
    """Read subgroup effects; optional ``cov_uv`` and ``x_mean_*`` columns."""
    header, rows = _read_rows(path)
    for col in AGGREGATE_REQUIRED:
        if col not in header:
            raise InputError(f"missing column {col}")
    x_cols = [h for h in header if h.startswith(X_PREFIX)]
    has_cov = "cov_uv" in header
    effects = []
    for r in range(len(rows)):
        gid = rows[r][header.index("group_id")].strip()
        if not gid:
            raise InputError(f"parse error at row {r + 1}, column group_id")
        xs = tuple(_cell(rows, r, header, c) for c in x_cols) if x_cols else None
        try:
            effects.append(SubgroupEffect(
                gid,
                _cell(rows, r, header, "gamma_hat"),
                _cell(rows, r, header, "se_gamma"),
                _cell(rows, r, header, "tau_hat"),
                _cell(rows, r, header, "se_tau"),
                _cell(rows, r, header, "n", _int_cell),
                _cell(rows, r, header, "cov_uv") if has_cov else 0.0,
                xs,
            ))
        except InputError as exc:
            if str(exc).startswith("parse error"):
                raise
            raise InputError(f"{exc} (row {r + 1})") from None
    names = tuple(c[len(X_PREFIX):] for c in x_cols) or None
    weights = None if weights_path is None else parse_weights(weights_path, [e.group_id for e in effects])
    return validate_dataset(effects, weights=weights, covariate_names=names)


def parse_weights(path, group_ids: Sequence) -> np.ndarray:
    """Read a ``group_id,weight`` file and align it with ``group_ids``."""
    header, rows = _read_rows(path)
    for col in ("group_id", "weight"):
        if col not in header:
            raise InputError(f"missing column {col}")
    gi = header.index("group_id")
    table = {}
    for r in range(len(rows)):
        table[rows[r][gi].strip()] = _cell(rows, r, header, "weight")
    missing = [g for g in group_ids if str(g) not in table]
    if missing:
        raise InputError(f"missing weight for group {missing[0]}")
    w = np.array([table[str(g)] for g in group_ids])
    if np.any(w < 0) or w.sum() <= 0:
        raise InputError("invalid record: weights")
    return w / w.sum()


def write_aggregate_csv(dataset: EffectDataset, path) -> None:
    """Write a dataset so that :func:`parse_aggregate_csv` reproduces it exactly."""
    x_names = dataset.covariate_names or ()
    header = list(AGGREGATE_REQUIRED) + ["cov_uv"] + [X_PREFIX + n for n in x_names]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for e in dataset.effects:
            row = [e.group_id, repr(float(e.gamma_hat)), repr(float(e.se_gamma)), repr(float(e.tau_hat)),
                   repr(float(e.se_tau)), int(e.n), repr(float(e.cov_uv))]
            row += [repr(float(v)) for v in (e.covariate_means or ())]
            w.writerow(row)


def parse_individual_csv(path, group_column: str = "group") -> IndividualDataset:
    """Read unit-level data; every other numeric column becomes a covariate."""
    header, rows = _read_rows(path)
    for col in INDIVIDUAL_REQUIRED:
        if col not in header:
            raise InputError(f"missing column {col}")
    cov_names = [h for h in header if h not in INDIVIDUAL_REQUIRED and h != group_column]
    cols = {}
    for col in list(INDIVIDUAL_REQUIRED) + cov_names:
        cols[col] = np.array([_cell(rows, r, header, col) for r in range(len(rows))])
    labels = None
    if group_column in header:
        j = header.index(group_column)
        labels = np.array([row[j].strip() for row in rows], dtype=object)
    covs = np.column_stack([cols[c] for c in cov_names]) if cov_names else None
    return IndividualDataset(cols["treatment"], cols["mediator"], cols["outcome"], covs,
                             tuple(cov_names), labels)


def fmt(x) -> str | None:
    """Six significant digits; non-finite values become JSON-safe strings."""
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".6g")


def _num(x):
    s = fmt(x)
    if s in (None, "nan", "inf", "-inf"):
        return s
    v = float(s)
    return int(v) if v.is_integer() and abs(v) < 1e15 and "e" not in s else v


def fit_to_dict(fit: SlopeFit) -> dict:
    out = {
        "method": fit.method,
        "beta_hat": _num(fit.beta_hat),
        "se_beta": _num(fit.se_beta),
        "intercept_hat": _num(fit.intercept_hat),
        "df": fit.df,
        "p_value_bootstrap": _num(fit.p_value),
        "extra_coefs": {k: _num(v) for k, v in sorted((fit.extra_coefs or {}).items())},
        "diagnostics": {k: _num(v) for k, v in sorted(fit.diagnostics.items())},
    }
    if isinstance(fit, SimexFit):
        out["simex_curve"] = [[_num(z), _num(g)] for z, g in fit.curve]
        out["extrapolant_coefs"] = [_num(c) for c in fit.extrapolant_coefs]
    return out


def result_to_dict(result: MediationResult) -> dict:
    het = result.heterogeneity
    return {
        "estimator": result.beta_fit.method,
        "acme_hat": _num(result.acme_hat),
        "ci_lower": _num(result.ci_lower),
        "ci_upper": _num(result.ci_upper),
        "ci_mode": result.ci_mode,
        "alpha": _num(result.alpha),
        "p_beta": _num(result.p_beta),
        "p_gamma": _num(result.p_gamma),
        "p_overall": _num(result.p_overall),
        "reject": result.reject,
        "beta_fit": fit_to_dict(result.beta_fit),
        "gamma_aggregate": {
            "gamma0_hat": _num(result.gamma_agg.gamma0_hat),
            "var_gamma0": _num(result.gamma_agg.var_gamma0),
            "K": result.gamma_agg.K,
        },
        "heterogeneity": None if het is None else {
            "Q": _num(het.Q), "df": het.df, "p_Q": _num(het.p_Q), "I2": _num(het.I2),
        },
    }


TABLE_COLUMNS = ("estimator", "beta_hat", "se_beta", "acme_hat", "ci_lower", "ci_upper",
                 "p_beta", "p_gamma", "p_overall", "reject")


def emit_result(results: MediationResult | Mapping[str, MediationResult | str], format: str = "json",
                meta: Mapping | None = None) -> str:
    """Serialize one or more results.

    ``results`` maps estimator names to results; a string value records a
    failed estimator and its error message. ``meta`` (seed, config echoes,
    provenance) is embedded in JSON output and written as ``#`` comment lines
    in table output.
    """
    if isinstance(results, MediationResult):
        results = {results.beta_fit.method: results}
    meta = dict(meta or {})
    if format == "json":
        body = {
            "meta": meta,
            "results": {
                name: ({"error": r} if isinstance(r, str) else result_to_dict(r))
                for name, r in results.items()
            },
        }
        return json.dumps(body, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if format != "table":
        raise InputError(f"unknown output format {format!r}")
    lines = [f"# {k}={meta[k]}" for k in sorted(meta)]
    lines.append("\t".join(TABLE_COLUMNS + ("error",)))
    for name, r in results.items():
        if isinstance(r, str):
            lines.append("\t".join([name] + [""] * (len(TABLE_COLUMNS) - 1) + [r]))
            continue
        row = [name, fmt(r.beta_fit.beta_hat), fmt(r.beta_fit.se_beta)] + \
              [fmt(getattr(r, c)) for c in TABLE_COLUMNS[3:9]] + [str(r.reject).lower(), ""]
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def _write_tsv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def emit_plot_data(dataset: EffectDataset, fit: SlopeFit, path, prefix: str = "plot") -> list[Path]:
    """Write scatter, fitted-line and (for SIMEX) extrapolation-curve files.

    Files are tab-separated and named ``<prefix>_scatter.tsv``,
    ``<prefix>_line.tsv`` and ``<prefix>_simex_curve.tsv`` under ``path``.
    """
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise PermissionError
    except OSError:
        raise InputError(f"unwritable path: {out}") from None
    written = []
    scatter = out / f"{prefix}_scatter.tsv"
    _write_tsv(scatter, ["group_id", "gamma_hat", "tau_hat", "se_gamma", "se_tau"],
               [[e.group_id, e.gamma_hat, e.tau_hat, e.se_gamma, e.se_tau] for e in dataset.effects])
    written.append(scatter)
    line = out / f"{prefix}_line.tsv"
    lo, hi = float(dataset.gamma_hat.min()), float(dataset.gamma_hat.max())
    _write_tsv(line, ["gamma", "tau_fitted"],
               [[g, fit.intercept_hat + fit.beta_hat * g] for g in (lo, hi)])
    written.append(line)
    if isinstance(fit, SimexFit):
        curve = out / f"{prefix}_simex_curve.tsv"
        rows = [["simulated", z, g] for z, g in fit.curve]
        rows.append(["extrapolated", -1.0, fit.beta_hat])
        _write_tsv(curve, ["kind", "zeta", "slope"], rows)
        written.append(curve)
    return written


def write_tree(tree, path) -> None:
    Path(path).write_text(tree.to_text(), encoding="utf-8")


def write_records(path, records: Iterable) -> None:
    """Write dataclass records (simulation tables) as tab-separated text."""
    records = list(records)
    if not records:
        raise InputError("nothing to write")
    header = [f.name for f in fields(records[0])]
    _write_tsv(path, header, [[getattr(r, h) for h in header] for r in records])


def records_to_text(records: Iterable) -> str:
    records = list(records)
    header = [f.name for f in fields(records[0])]
    lines = ["\t".join(header)]
    for r in records:
        vals = []
        for h in header:
            v = getattr(r, h)
            if isinstance(v, (tuple, list)):
                v = ",".join(fmt(x) if isinstance(x, float) else str(x) for x in v)
            elif isinstance(v, (float, np.floating)):
                v = fmt(v)
            vals.append(str(v))
        lines.append("\t".join(vals))
    return "\n".join(lines) + "\n"


def records_to_json(records: Iterable, meta: Mapping | None = None) -> str:
    def conv(v):
        if isinstance(v, (float, np.floating)):
            return _num(v)
        if isinstance(v, (tuple, list)):
            return [conv(x) for x in v]
        return v

    body = {"meta": dict(meta or {}),
            "rows": [{k: conv(v) for k, v in asdict(r).items()} for r in records if is_dataclass(r)]}
    return json.dumps(body, indent=2, sort_keys=True, allow_nan=False) + "\n"
