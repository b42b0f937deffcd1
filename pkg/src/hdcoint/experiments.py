"""Monte Carlo drivers: size, null density, order sweeps, power and LLN checks.

Every driver takes a ``seed``; replication ``i`` simulates from
``sub_seed(seed, STREAM_REPLICATION, i)`` so aggregates are identical for any
``threads`` and any subset of replications can be re-run on its own.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import signal, stats

from ._rng import STREAM_REPLICATION, replicate, rng_for, sub_seed
from .asymptotics import test_constants, test_wachter_params, wachter_cdf, wachter_pdf
from .ensembles import (AiryQuantileTable, JacobiParams, ProjectorModelSpec, projector_jacobi_params,
                        projector_model_spectrum, reference_airy_samples, reference_quantile_table,
                        sample_jacobi_spectrum)
from .errors import DomainError, ParameterError
from .inference import rescale_modified_lr
from .model import E, E_col, PanelSeries, VarKSpec, simulate
from .spectra import CanonicalSpectrum, johansen_spectrum, modified_spectrum

__all__ = [
    "ExperimentResult",
    "PowerScenario",
    "size_experiment",
    "null_density_experiment",
    "order_sweep",
    "power_experiment",
    "stationary_coordinate_check",
    "stationary_corr_limit",
    "prop5_check",
    "prop5_limit",
    "wachter_lln_check",
    "projector_check",
    "coupling_check",
    "edge_rescaled",
    "rank_one_example_spec",
]

EDGE_OUTLIER_THRESHOLD = 3.0
ABS_OUTLIER_MARGIN = 0.05
LLN_OUTLIER_MARGIN = 0.03


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


@dataclass
class ExperimentResult:
    """Summary plus optional per-replication columns and histograms.

    ``per_rep`` maps column names to equal-length lists; ``histograms`` maps
    a name to ``{"edges": [...], "counts": [...], ...}``.
    """

    experiment: str
    params: dict
    summary: dict
    seed: int | None
    runtime: float
    per_rep: dict = field(default_factory=dict)
    histograms: dict = field(default_factory=dict)

    def to_dict(self, include_reps: bool = False) -> dict:
        d = {"experiment": self.experiment, "params": self.params, "summary": self.summary,
             "seed": self.seed, "runtime_sec": self.runtime, "histograms": self.histograms}
        if include_reps:
            d["per_rep"] = self.per_rep
        return _jsonable(d)

    def to_json(self, include_reps: bool = False) -> str:
        return json.dumps(self.to_dict(include_reps), indent=2, sort_keys=True)

    def stem(self) -> str:
        return f"{self.experiment}_seed{self.seed}"

    def write(self, out_dir, fmt: str = "json") -> list[Path]:
        """Write the JSON summary and, if present, per-replication and histogram CSVs."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        if fmt == "csv":
            p = out / f"{self.stem()}_summary.csv"
            with open(p, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["key", "value"])
                for key, val in _flatten(self.to_dict()["summary"]):
                    w.writerow([key, val])
        else:
            p = out / f"{self.stem()}.json"
            p.write_text(self.to_json())
        paths.append(p)
        if self.per_rep:
            p = out / f"{self.stem()}_reps.csv"
            cols = list(self.per_rep)
            with open(p, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["rep", *cols])
                for i, row in enumerate(zip(*(self.per_rep[c] for c in cols))):
                    w.writerow([i, *row])
            paths.append(p)
        for name, h in self.histograms.items():
            p = out / f"{self.stem()}_hist_{name}.csv"
            _write_histogram(p, h)
            paths.append(p)
        return paths


def _flatten(d, prefix=""):
    for key, val in d.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            yield from _flatten(val, name + ".")
        elif isinstance(val, list):
            for i, v in enumerate(val):
                if isinstance(v, dict):
                    yield from _flatten(v, f"{name}.{i}.")
                else:
                    yield f"{name}.{i}", v
        else:
            yield name, val


def _write_histogram(path, h: dict):
    edges = h["edges"]
    extra = [k for k in h if k not in ("edges", "counts") and isinstance(h[k], (list, np.ndarray))
             and len(h[k]) == len(h["counts"])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["left", "right", "count", *extra])
        for i, c in enumerate(h["counts"]):
            w.writerow([edges[i], edges[i + 1], c, *(h[k][i] for k in extra)])


def _histogram(values, edges) -> dict:
    counts, edges = np.histogram(np.asarray(values).ravel(), bins=edges)
    return {"edges": edges.tolist(), "counts": counts.tolist()}


def edge_rescaled(values, N: int, T: int, k: int) -> np.ndarray:
    """Per-eigenvalue edge scaling ``(ln(1-l) - c1) / (N^{-2/3} c2)``."""
    c = test_constants(N, T, k)
    lam = np.minimum(np.asarray(values, dtype=float), 1 - 1e-300)
    return (np.log1p(-lam) - c.c1) / (N ** (-2 / 3) * c.c2)


def _rep_seed(seed, i):
    return sub_seed(seed, STREAM_REPLICATION, i)


def _null_table(table, alpha, r) -> AiryQuantileTable:
    if table is None:
        table = reference_quantile_table(sorted({0.90, 0.95, 0.975, 0.99, float(alpha)}))
    table.quantile(r, alpha)
    return table


# ---------------------------------------------------------------- size


@dataclass(frozen=True)
class _SizeRep:
    N: int
    T: int
    k_list: tuple
    r: int
    seed: int

    def __call__(self, i):
        panel = simulate(VarKSpec(self.N, 1, self.T), _rep_seed(self.seed, i))
        out = []
        for k in self.k_list:
            s = modified_spectrum(panel, k)
            out.append(rescale_modified_lr(float(np.log1p(-s.values[: self.r]).sum()), self.r, self.N, self.T, k))
        return out


def size_experiment(N: int = 92, T: int = 522, k_list: Sequence[int] = (1, 2, 3, 4), alpha: float = 0.95,
                    reps: int = 10000, seed: int = 0, *, r: int = 1, threads: int = 1,
                    table: AiryQuantileTable | None = None) -> ExperimentResult:
    """Rejection rate of the modified LR test when ``dX_t`` is pure noise."""
    k_list = tuple(int(k) for k in k_list)
    for k in k_list:
        test_constants(N, T, k)
    table = _null_table(table, alpha, r)
    q = table.quantile(r, alpha)
    t0 = time.perf_counter()
    res = np.asarray(replicate(_SizeRep(N, T, k_list, r, seed), range(reps), threads))
    rej = res > q
    rates = rej.mean(axis=0)
    se = np.sqrt(rates * (1 - rates) / reps)
    summary = {"k": list(k_list), "rejection_rate": rates.tolist(), "stderr": se.tolist(),
               "quantile": q, "alpha": alpha, "r": r}
    per_rep = {f"rescaled_k{k}": res[:, j].tolist() for j, k in enumerate(k_list)}
    params = {"N": N, "T": T, "k_list": list(k_list), "alpha": alpha, "reps": reps, "r": r,
              "table": {"n": table.n, "reps": table.reps, "seed": table.seed}}
    return ExperimentResult("size", params, summary, seed, time.perf_counter() - t0, per_rep)


# ---------------------------------------------------------------- null density


@dataclass(frozen=True, eq=False)
class _DensityRep:
    spec: VarKSpec
    k_test: int
    seed: int

    def __call__(self, i):
        s = modified_spectrum(simulate(self.spec, _rep_seed(self.seed, i)), self.k_test)
        return rescale_modified_lr(float(np.log1p(-s.values[0])), 1, s.N, s.T, self.k_test)


def null_density_experiment(gammas: Sequence = (), N: int = 100, T: int = 500, k_dgp: int = 2,
                            k_test: int | None = None, reps: int = 2000, seed: int = 0, *,
                            threads: int = 1, reference: np.ndarray | None = None) -> ExperimentResult:
    """Distribution of the rescaled top statistic under a no-cointegration DGP with lagged differences.

    The KS distance is taken against the first Airy_1 point (reference
    draws, by default the packaged sample).
    """
    k_test = k_dgp if k_test is None else int(k_test)
    test_constants(N, T, k_test)
    spec = VarKSpec(N, k_dgp, T, gammas=tuple(gammas))
    if reference is None:
        reference = reference_airy_samples()[0][:, 0]
    t0 = time.perf_counter()
    vals = np.asarray(replicate(_DensityRep(spec, k_test, seed), range(reps), threads))
    ks = stats.ks_2samp(vals, reference)
    edges = np.linspace(-7, 5, 61)
    h = _histogram(vals, edges)
    h["reference_density"] = (np.histogram(reference, bins=edges)[0] / (reference.size * np.diff(edges))).tolist()
    summary = {"ks": float(ks.statistic), "ks_pvalue": float(ks.pvalue), "mean": float(vals.mean()),
               "sd": float(vals.std(ddof=1)), "reference_mean": float(reference.mean()),
               "reference_sd": float(reference.std(ddof=1))}
    params = {"N": N, "T": T, "k_dgp": k_dgp, "k_test": k_test, "reps": reps,
              "gammas": [_describe_matrix(g) for g in spec.gammas]}
    return ExperimentResult("null_density", params, summary, seed, time.perf_counter() - t0,
                            {"rescaled": vals.tolist()}, {"rescaled": h})


def _describe_matrix(m):
    if m is None:
        return None
    nz = np.argwhere(m)
    if len(nz) <= 10:
        return {f"{i + 1},{j + 1}": float(m[i, j]) for i, j in nz}
    return {"rank": int(np.linalg.matrix_rank(m)), "nonzeros": int(len(nz))}


# ---------------------------------------------------------------- order sweep


def _count_outliers(s: CanonicalSpectrum, rule: str, threshold: float):
    w = test_wachter_params(s.N, s.T, s.k)
    if rule == "edge":
        score = edge_rescaled(s.values, s.N, s.T, s.k)
        return int((score > threshold).sum()), w, score
    if rule == "absolute":
        return int((s.values > w.lambda_plus + threshold).sum()), w, None
    raise ParameterError(f"unknown outlier rule {rule!r}; use 'edge' or 'absolute'")


def order_sweep(source, k_range: Sequence[int] = (1, 2, 3), *, rule: str = "edge",
                threshold: float | None = None, seed: int | None = 0) -> ExperimentResult:
    """Modified-procedure spectra of one panel for a range of VAR orders.

    ``source`` is a :class:`PanelSeries` or a :class:`VarKSpec` (simulated
    with ``seed``).  An eigenvalue is an outlier when its edge-rescaled value
    ``(ln(1-l) - c1)/(N^{-2/3} c2)`` exceeds ``threshold`` (``rule='edge'``,
    default 3.0) or when it exceeds ``l_+ + threshold`` (``rule='absolute'``,
    default 0.05).  The result flags a sharp transition: outliers for every
    order below some ``k*`` and none from ``k*`` on.
    """
    if threshold is None:
        threshold = EDGE_OUTLIER_THRESHOLD if rule == "edge" else ABS_OUTLIER_MARGIN
    panel = simulate(source, seed) if isinstance(source, VarKSpec) else source
    if not isinstance(panel, PanelSeries):
        raise ParameterError("source must be a PanelSeries or VarKSpec")
    t0 = time.perf_counter()
    counts, lp, top, top_score, spectra = [], [], [], [], {}
    for k in k_range:
        s = modified_spectrum(panel, int(k))
        n, w, score = _count_outliers(s, rule, threshold)
        counts.append(n)
        lp.append(w.lambda_plus)
        top.append(float(s.values[0]))
        top_score.append(float(edge_rescaled(s.values[:1], s.N, s.T, s.k)[0]))
        spectra[int(k)] = s.values
    transition = None
    for j in range(len(counts)):
        if all(c > 0 for c in counts[:j]) and all(c == 0 for c in counts[j:]):
            transition = int(list(k_range)[j])
            break
    summary = {"k": [int(k) for k in k_range], "outliers": counts, "lambda_plus": lp, "lambda_1": top,
               "lambda_1_rescaled": top_score, "transition_k": transition,
               "sharp_transition": transition is not None and counts[0] > 0}
    hists = {}
    for k, vals in spectra.items():
        edges = np.linspace(0, 1, 101)
        h = _histogram(vals, edges)
        w = test_wachter_params(panel.N, panel.T, k)
        h["wachter_pdf"] = wachter_pdf(0.5 * (edges[1:] + edges[:-1]), w).tolist()
        hists[f"k{k}"] = h
    params = {"N": panel.N, "T": panel.T, "k_range": [int(k) for k in k_range], "rule": rule,
              "threshold": threshold}
    res = ExperimentResult("order_sweep", params, summary, seed, time.perf_counter() - t0, histograms=hists)
    res.summary["spectra"] = {str(k): v.tolist() for k, v in spectra.items()}
    return res


# ---------------------------------------------------------------- power


@dataclass(frozen=True, eq=False)
class _PowerRep:
    spec: VarKSpec
    k: int
    r: int
    seed: int

    def __call__(self, i):
        s = modified_spectrum(simulate(self.spec, _rep_seed(self.seed, i)), self.k)
        lr = float(np.log1p(-np.minimum(s.values[: self.r], 1 - 1e-300)).sum())
        return [rescale_modified_lr(lr, self.r, s.N, s.T, self.k), float(s.values[0])]


def power_experiment(pi=None, gammas: Sequence = (), N: int = 100, T: int = 500, k: int = 2,
                     reps: int = 200, seed: int = 0, *, mu=None, alpha: float = 0.95, r: int = 1,
                     margin: float = ABS_OUTLIER_MARGIN, threads: int = 1,
                     table: AiryQuantileTable | None = None) -> ExperimentResult:
    """Rejection rate and top-eigenvalue separation under a cointegrated DGP."""
    test_constants(N, T, k)
    table = _null_table(table, alpha, r)
    q = table.quantile(r, alpha)
    spec = VarKSpec(N, k, T, gammas=tuple(gammas), pi=pi, mu=mu)
    lp = test_wachter_params(N, T, k).lambda_plus
    t0 = time.perf_counter()
    res = np.asarray(replicate(_PowerRep(spec, k, r, seed), range(reps), threads))
    resc, top = res[:, 0], res[:, 1]
    rate = float(np.mean(resc > q))
    summary = {"rejection_rate": rate, "stderr": math.sqrt(rate * (1 - rate) / reps), "quantile": q,
               "lambda_plus": lp, "separated_fraction": float(np.mean(top > lp + margin)),
               "mean_lambda_1": float(top.mean()), "min_lambda_1": float(top.min())}
    params = {"N": N, "T": T, "k": k, "reps": reps, "alpha": alpha, "r": r, "margin": margin,
              "pi": _describe_matrix(spec.pi), "gammas": [_describe_matrix(g) for g in spec.gammas],
              "mu": None if spec.mu is None else float(spec.mu[0]) if np.all(spec.mu == spec.mu[0]) else "vector"}
    return ExperimentResult("power", params, summary, seed, time.perf_counter() - t0,
                            {"rescaled": resc.tolist(), "lambda_1": top.tolist()})


# ---------------------------------------------------------------- stationary first coordinate


@dataclass(frozen=True)
class PowerScenario:
    """First coordinate ``y_t = beta y_{t-1} + xi_t`` with ``Var(xi) = sigma2``; other coordinates random walks."""

    beta: float
    sigma2: float = 1.0
    N: int = 10
    T: int = 20000
    y0: float = 0.0

    def __post_init__(self):
        if not abs(self.beta) < 1:
            raise DomainError(f"need |beta| < 1, got {self.beta}")
        if self.sigma2 <= 0:
            raise ParameterError("sigma2 must be positive")
        if self.N < 1 or self.T < 2:
            raise ParameterError("need N >= 1 and T >= 2")

    @property
    def theta(self) -> float:
        return self.beta - 1


def stationary_corr_limit(beta: float, sigma2: float, drift: float) -> float:
    """``1 / (2/(1-beta) + (1+beta) drift^2 / (6 sigma2))`` with ``drift = y_T - y_0``."""
    return 1.0 / (2 / (1 - beta) + (1 + beta) * drift**2 / (6 * sigma2))


def _stationary_panel(sc: PowerScenario, seed) -> PanelSeries:
    g = rng_for(seed)
    xi = g.normal(0.0, math.sqrt(sc.sigma2), sc.T)
    zi = np.array([sc.beta * sc.y0])
    y, _ = signal.lfilter([1.0], [1.0, -sc.beta], xi, zi=zi)
    data = np.empty((sc.N, sc.T))
    data[0] = y
    if sc.N > 1:
        data[1:] = np.cumsum(g.standard_normal((sc.N - 1, sc.T)), axis=1)
    init = np.zeros((sc.N, 1))
    init[0, 0] = sc.y0
    return PanelSeries(data, init)


@dataclass(frozen=True)
class _StationaryRep:
    sc: PowerScenario
    seed: int

    def __call__(self, i):
        panel = _stationary_panel(self.sc, _rep_seed(self.seed, i))
        y = panel.levels[0]
        dy = np.diff(y)
        T = self.sc.T
        ytil = y[:-1] - np.arange(T) / T * (y[-1] - y[0])
        a = dy - dy.mean()
        b = ytil - ytil.mean()
        corr2 = float((a @ b) ** 2 / ((a @ a) * (b @ b)))
        limit = stationary_corr_limit(self.sc.beta, self.sc.sigma2, y[-1] - y[0])
        lam1 = float(modified_spectrum(panel, 1).values[0])
        return [corr2, limit, lam1, float(y[-1] - y[0])]


def stationary_coordinate_check(sc: PowerScenario, reps: int = 500, seed: int = 0, *, tol: float = 0.02,
                threads: int = 1) -> ExperimentResult:
    """Per-path squared correlation of first-coordinate residuals against its large-T limit.

    Also records the top modified-procedure eigenvalue, which by the
    variational characterization bounds the squared correlation from above.
    """
    t0 = time.perf_counter()
    res = np.asarray(replicate(_StationaryRep(sc, seed), range(reps), threads))
    corr2, limit, lam1, drift = res.T
    err = np.abs(corr2 - limit)
    summary = {"within_tol_fraction": float(np.mean(err < tol)), "max_abs_error": float(err.max()),
               "median_abs_error": float(np.median(err)), "bound_holds_fraction": float(np.mean(lam1 >= corr2 - tol)),
               "min_bound_gap": float((lam1 - corr2).min()), "tol": tol}
    params = {"beta": sc.beta, "sigma2": sc.sigma2, "N": sc.N, "T": sc.T, "y0": sc.y0, "reps": reps}
    per = {"corr2": corr2.tolist(), "limit": limit.tolist(), "lambda_1": lam1.tolist(), "drift": drift.tolist()}
    return ExperimentResult("stationary_coordinate", params, summary, seed, time.perf_counter() - t0, per)


# names used by the interface contract
prop5_check = stationary_coordinate_check
prop5_limit = stationary_corr_limit


# ---------------------------------------------------------------- first-order law


def _total_rank(spec: VarKSpec) -> tuple[int, int]:
    rk = lambda m: 0 if m is None else int(np.linalg.matrix_rank(m))  # noqa: E731
    return rk(spec.pi), sum(rk(g) for g in spec.gammas)


def wachter_lln_check(source, k: int | None = None, seed: int | None = 0, *, det_spec="constant",
                      n_exclude: int | None = None, margin: float = LLN_OUTLIER_MARGIN,
                      procedure: str = "johansen", low_rank_fraction: float = 0.1) -> ExperimentResult:
    """Compare the bulk of a spectrum with the Wachter law ``(2, T/N - k)``.

    When ``source`` is a :class:`VarKSpec`, the top ``rank(Pi)`` eigenvalues
    are excluded from the bulk; otherwise values above ``l_+ + margin`` are.
    The KS comparison is marked not applicable when the parameter matrices
    are not of small rank (total rank above ``low_rank_fraction * N``).
    """
    applicable = True
    if isinstance(source, VarKSpec):
        spec = source
        k = spec.k if k is None else int(k)
        panel = simulate(spec, seed)
        rank_pi, rank_g = _total_rank(spec)
        if n_exclude is None:
            n_exclude = rank_pi
        applicable = rank_pi + rank_g <= low_rank_fraction * spec.N
    else:
        panel = source
        if k is None:
            raise ParameterError("k is required when a panel is given")
    t0 = time.perf_counter()
    w = test_wachter_params(panel.N, panel.T, k)
    if procedure == "johansen":
        s = johansen_spectrum(panel, k, det_spec)
    elif procedure == "modified":
        s = modified_spectrum(panel, k)
    else:
        raise ParameterError("procedure must be 'johansen' or 'modified'")
    vals = s.values
    out_mask = vals > w.lambda_plus + margin
    if n_exclude is None:
        bulk = vals[~out_mask]
    else:
        bulk = vals[int(n_exclude):]
    ks = stats.kstest(bulk, lambda x: wachter_cdf(x, w))
    edges = np.linspace(0, 1, 101)
    h = _histogram(vals, edges)
    h["wachter_pdf"] = wachter_pdf(0.5 * (edges[1:] + edges[:-1]), w).tolist()
    summary = {"ks": float(ks.statistic), "applicable": bool(applicable), "outliers": int(out_mask.sum()),
               "lambda_plus": w.lambda_plus, "lambda_minus": w.lambda_minus, "lambda_1": float(vals[0]),
               "excluded": int(vals.size - bulk.size), "spectrum": vals.tolist()}
    params = {"N": panel.N, "T": panel.T, "k": k, "procedure": procedure, "margin": margin,
              "det_spec": det_spec if isinstance(det_spec, str) else "custom"}
    return ExperimentResult("wachter_lln", params, summary, seed, time.perf_counter() - t0,
                            histograms={"spectrum": h})


# ---------------------------------------------------------------- random-matrix oracles


@dataclass(frozen=True)
class _ProjRep:
    k: int
    N: int
    T_amb: int
    seed: int

    def __call__(self, i):
        spec = ProjectorModelSpec(self.k, self.N, self.T_amb)
        a = projector_model_spectrum(spec, rng=rng_for(self.seed, STREAM_REPLICATION, i, 0))
        b = sample_jacobi_spectrum(projector_jacobi_params(spec), rng=rng_for(self.seed, STREAM_REPLICATION, i, 1))
        return [a[0], b[0]]


def projector_check(k: int = 2, N: int = 2, T_amb: int = 10, reps: int = 5000, seed: int = 0, *,
                    threads: int = 1) -> ExperimentResult:
    """Two-sample KS distance between top eigenvalues of the projector model and of its Jacobi law."""
    spec = ProjectorModelSpec(k, N, T_amb)
    jp = projector_jacobi_params(spec)
    t0 = time.perf_counter()
    res = np.asarray(replicate(_ProjRep(k, N, T_amb, seed), range(reps), threads))
    ks = stats.ks_2samp(res[:, 0], res[:, 1])
    summary = {"ks": float(ks.statistic), "ks_pvalue": float(ks.pvalue), "jacobi_p": jp.p, "jacobi_q": jp.q,
               "mean_projector": float(res[:, 0].mean()), "mean_jacobi": float(res[:, 1].mean())}
    params = {"k": k, "N": N, "T_amb": T_amb, "reps": reps}
    return ExperimentResult("projector_check", params, summary, seed, time.perf_counter() - t0,
                            {"projector_lambda_1": res[:, 0].tolist(), "jacobi_lambda_1": res[:, 1].tolist()})


@dataclass(frozen=True)
class _CouplingRep:
    N: int
    T: int
    k: int
    seed: int

    def __call__(self, i):
        panel = simulate(VarKSpec(self.N, 1, self.T), _rep_seed(self.seed, i))
        a = modified_spectrum(panel, self.k).values
        jp = JacobiParams(self.N, self.N / 2, (self.T - (self.k + 1) * self.N) / 2)
        b = sample_jacobi_spectrum(jp, rng=rng_for(self.seed, STREAM_REPLICATION, i, 1))
        return np.concatenate([a, b])


def coupling_check(N: int = 100, T: int = 500, k: int = 1, reps: int = 200, seed: int = 0, *,
                   threads: int = 1) -> ExperimentResult:
    """Pooled KS distance between null modified-procedure spectra and Jacobi ``(N/2, (T-(k+1)N)/2)`` spectra."""
    if T <= (k + 1) * N:
        raise DomainError("need T > (k+1)N")
    t0 = time.perf_counter()
    res = np.asarray(replicate(_CouplingRep(N, T, k, seed), range(reps), threads))
    a, b = res[:, :N].ravel(), res[:, N:].ravel()
    ks = stats.ks_2samp(a, b)
    edges = np.linspace(0, 1, 101)
    h = _histogram(a, edges)
    h["jacobi_counts"] = np.histogram(b, bins=edges)[0].tolist()
    summary = {"ks": float(ks.statistic), "mean_modified": float(a.mean()), "mean_jacobi": float(b.mean())}
    params = {"N": N, "T": T, "k": k, "reps": reps}
    return ExperimentResult("coupling", params, summary, seed, time.perf_counter() - t0, histograms={"pooled": h})


def rank_one_example_spec(N: int = 150, T: int = 1500) -> VarKSpec:
    """Rank-one DGP: ``dX_t = 1 + 0.95 E12 dX_{t-1} - 0.1 E_.1 X_{t-2} + eps_t``."""
    return VarKSpec(N, 2, T, gammas=(E(1, 2, 0.95),), pi=E_col(1, -0.1), mu=1.0)
