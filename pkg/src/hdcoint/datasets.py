"""CSV ingestion and the end-to-end test report used by the command line."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .asymptotics import test_constants, test_wachter_params, wachter_pdf
from .ensembles import DEFAULT_ALPHAS, AiryQuantileTable, reference_airy_samples, reference_quantile_table
from .errors import DataError, DimensionError
from .inference import decide, rescale_modified_lr, spectral_statistic
from .model import PanelSeries
from .spectra import modified_spectrum

__all__ = ["DatasetConfig", "ingest", "run_test", "histogram_rows"]

_MISSING = {"", "na", "nan", "n/a", "null", "none", "-"}


@dataclass(frozen=True)
class DatasetConfig:
    """How to read a panel from CSV: one column per series, one row per period.

    The first data row becomes ``X_0``.  ``date_column`` (0-based) is skipped
    for computation.  ``transform='log'`` takes natural logs of every cell.
    """

    path: str | Path
    has_header: bool = True
    date_column: int | None = None
    transform: str = "none"
    frequency: str = ""

    def __post_init__(self):
        if self.transform not in ("none", "log"):
            raise DataError(f"transform must be 'none' or 'log', got {self.transform!r}")


def ingest(cfg: DatasetConfig) -> PanelSeries:
    """Read ``cfg.path`` into a :class:`PanelSeries` with ``N`` series and ``T = rows - 1``.

    Raises
    ------
    DataError
        On missing cells (all offending cells are listed), non-numeric cells,
        non-positive values under the log transform, or too small a table.
    """
    path = Path(cfg.path)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if cfg.has_header:
        if not rows:
            raise DataError(f"{path} is empty")
        header, rows = rows[0], rows[1:]
    else:
        header = [f"series_{j + 1}" for j in range(len(rows[0]))] if rows else []
    width = len(header)
    cols = [j for j in range(width) if j != cfg.date_column]
    if width < 2 or not cols:
        raise DataError("need at least two columns")
    if len(rows) < 3:
        raise DataError(f"need at least 3 data rows, got {len(rows)}")
    values = np.empty((len(rows), len(cols)))
    missing, bad = [], []
    line0 = 2 if cfg.has_header else 1
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"line {i + line0}: expected {width} fields, got {len(row)}")
        for jj, j in enumerate(cols):
            cell = row[j].strip()
            where = f"line {i + line0}, column {header[j]!r}"
            if cell.lower() in _MISSING:
                missing.append(where)
                continue
            try:
                values[i, jj] = float(cell)
            except ValueError:
                bad.append(f"{where} ({cell!r})")
    if missing:
        raise DataError(f"{len(missing)} missing value(s): " + "; ".join(missing[:20])
                        + (" ..." if len(missing) > 20 else ""))
    if bad:
        raise DataError("non-numeric value(s): " + "; ".join(bad[:20]) + (" ..." if len(bad) > 20 else ""))
    if not np.isfinite(values).all():
        i, j = np.argwhere(~np.isfinite(values))[0]
        raise DataError(f"non-finite value at line {i + line0}, column {header[cols[j]]!r}")
    if cfg.transform == "log":
        if (values <= 0).any():
            i, j = np.argwhere(values <= 0)[0]
            raise DataError(f"log transform needs positive values; line {i + line0}, column {header[cols[j]]!r}")
        values = np.log(values)
    labels = tuple(header[j] for j in cols)
    return PanelSeries(values[1:].T, values[0][:, None], labels=labels)


def histogram_rows(values, N: int, T: int, k: int, bins: int = 100) -> list[dict]:
    """Histogram of a spectrum on [0, 1] (density scale) with the Wachter pdf at bin centers."""
    w = test_wachter_params(N, T, k)
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts, _ = np.histogram(values, bins=edges)
    width = np.diff(edges)
    centers = 0.5 * (edges[1:] + edges[:-1])
    dens = counts / (len(values) * width)
    pdf = wachter_pdf(centers, w)
    return [{"left": float(a), "right": float(b), "count": int(c), "density": float(d), "wachter_pdf": float(p)}
            for a, b, c, d, p in zip(edges[:-1], edges[1:], counts, dens, pdf)]


def _num(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def run_test(panel: PanelSeries, k_list: Sequence[int] = (1, 2, 3, 4), r_list: Sequence[int] = (1, 2, 3),
             alphas: Sequence[float] = (0.95,), table: AiryQuantileTable | None = None,
             samples: np.ndarray | None = None) -> dict[int, dict]:
    """Modified-procedure test for each VAR order ``k``.

    Returns ``{k: report}``; each report has keys ``spectrum``, ``statistic``,
    ``rescaled``, ``decision``, ``p_value``, ``constants``, ``provenance``,
    ``tests`` and ``histogram``.  ``statistic``/``rescaled``/``p_value`` are
    keyed by ``r``; ``decision`` by ``r`` then ``alpha``.
    """
    N, T = panel.N, panel.T
    for k in k_list:
        if T <= (k + 1) * N:
            raise DimensionError(f"the test needs T > (k+1)N; got T={T}, N={N}, k={k} "
                                 f"(need T > {(k + 1) * N} or a smaller k)")
    alphas = tuple(float(a) for a in alphas)
    if table is None:
        table = reference_quantile_table(sorted(set(DEFAULT_ALPHAS) | set(alphas)))
    if samples is None:
        try:
            samples, sample_prov = reference_airy_samples()
        except FileNotFoundError:
            samples, sample_prov = None, None
    else:
        sample_prov = {"source": "user", "reps": int(np.asarray(samples).shape[0])}
    out = {}
    for k in k_list:
        s = modified_spectrum(panel, k)
        c = test_constants(N, T, k)
        stat, resc, dec, pv, pse, tests = {}, {}, {}, {}, {}, []
        for r in r_list:
            lr = spectral_statistic(s, "LR", 0, r)
            x = rescale_modified_lr(lr, r, N, T, k)
            stat[str(r)], resc[str(r)] = _num(lr), _num(x)
            dec[str(r)] = {}
            for a in alphas:
                rep = decide(x, r, a, table, samples=samples, raw=lr, provenance={"N": N, "T": T, "k": k})
                dec[str(r)][str(a)] = rep.decision
                pv[str(r)], pse[str(r)] = rep.p_value_mc, rep.p_value_stderr
                d = rep.to_dict()
                d["raw"], d["centered_rescaled"] = _num(d["raw"]), _num(d["centered_rescaled"])
                tests.append(d)
        out[int(k)] = {
            "spectrum": [float(v) for v in s.values],
            "statistic": stat,
            "rescaled": resc,
            "decision": dec,
            "p_value": pv,
            "p_value_stderr": pse,
            "constants": c.as_dict(),
            "provenance": {"N": N, "T": T, "k": int(k), "procedure": "modified", "r": list(map(int, r_list)),
                           "alphas": list(alphas), "labels": list(panel.labels) if panel.labels else None,
                           "quantile_table": {"n": table.n, "reps": table.reps, "seed": table.seed},
                           "p_value_samples": sample_prov},
            "tests": tests,
            "histogram": histogram_rows(s.values, N, T, k),
        }
    return out
