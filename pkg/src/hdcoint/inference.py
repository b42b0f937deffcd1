"""Test statistics, edge rescaling and reject/accept decisions.

The modified LR statistic ``sum_{i<=r} ln(1 - l_i)`` is centered by
``r c1`` and scaled by ``N^{-2/3} c2``.  Because ``c2 < 0``, a large top
eigenvalue gives a large rescaled value, and the test rejects when it exceeds
the ``alpha`` quantile of the sum of the top ``r`` Airy_1 points.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .asymptotics import test_constants
from .ensembles import DEFAULT_ALPHAS, AiryQuantileTable, reference_airy_samples
from .errors import DomainError, ParameterError
from .spectra import CanonicalSpectrum

__all__ = [
    "KINDS",
    "TestReport",
    "spectral_statistic",
    "rescale_modified_lr",
    "mc_p_value",
    "decide",
    "modified_lr_test",
    "DEFAULT_ALPHAS",
]

KINDS = ("LR", "PB", "HW")
UNIT_TOL = 1e-12


def _values(s) -> np.ndarray:
    return np.asarray(s.values if isinstance(s, CanonicalSpectrum) else s, dtype=float)


def spectral_statistic(s, kind: str, r1: int = 0, r2: int | None = None, *,
                       return_flag: bool = False):
    """Sum over ``i = r1+1..r2`` of ``ln(1-l)`` (LR), ``l`` (PB) or ``l/(1-l)`` (HW).

    An eigenvalue within ``1e-12`` of 1 makes LR ``-inf`` and HW ``+inf``; with
    ``return_flag=True`` the result is ``(value, degenerate)``.
    """
    lam = _values(s)
    N = lam.size
    r2 = N if r2 is None else int(r2)
    r1 = int(r1)
    if not 0 <= r1 < r2 <= N:
        raise ParameterError(f"need 0 <= r1 < r2 <= N={N}, got r1={r1}, r2={r2}")
    kind = kind.upper()
    if kind not in KINDS:
        raise ParameterError(f"unknown statistic {kind!r}; choose from {KINDS}")
    window = np.sort(lam)[::-1][r1:r2]
    unit = window >= 1 - UNIT_TOL
    degenerate = bool(unit.any()) and kind != "PB"
    if kind == "PB":
        val = float(window.sum())
    elif degenerate:
        val = -math.inf if kind == "LR" else math.inf
    elif kind == "LR":
        val = float(np.log1p(-window).sum())
    else:
        val = float((window / (1 - window)).sum())
    return (val, degenerate) if return_flag else val


def rescale_modified_lr(lr: float, r: int, N: int, T: int, k: int) -> float:
    """``(lr - r c1) / (N^{-2/3} c2)`` with the constants for ``(N, T, k)``."""
    c = test_constants(N, T, k)
    if math.isinf(lr):
        return math.inf if lr < 0 else -math.inf
    return (lr - r * c.c1) / (N ** (-2 / 3) * c.c2)


def mc_p_value(rescaled: float, r: int, samples: np.ndarray) -> tuple[float, float]:
    """Fraction of partial-sum samples (column ``r-1``) exceeding ``rescaled`` and its binomial stderr."""
    col = np.asarray(samples)[:, r - 1]
    p = float(np.mean(col > rescaled))
    return p, math.sqrt(p * (1 - p) / col.size)


@dataclass(frozen=True)
class TestReport:
    """Outcome of one statistic at one level."""

    statistic_kind: str
    r: int
    raw: float
    centered_rescaled: float | None
    quantile_used: float | None
    alpha: float
    decision: str
    p_value_mc: float | None = None
    p_value_stderr: float | None = None
    degenerate: bool = False
    provenance: dict = field(default_factory=dict)

    __test__ = False

    @property
    def reject(self) -> bool:
        return self.decision == "reject"

    def to_dict(self) -> dict:
        return asdict(self)


def _reference_samples():
    try:
        return reference_airy_samples()
    except FileNotFoundError:
        return None, None


def decide(rescaled: float, r: int, alpha: float, table: AiryQuantileTable, *,
           samples: np.ndarray | None = None, raw: float | None = None,
           provenance: dict | None = None) -> TestReport:
    """Reject iff ``rescaled`` is strictly greater than the tabulated ``alpha`` quantile.

    ``samples`` (``reps x r_max`` partial sums) give the Monte Carlo p-value;
    by default the packaged reference draws are used when they cover ``r``.
    """
    try:
        q = table.quantile(r, alpha)
    except DomainError:
        raise DomainError(f"quantile table lacks r={r}, alpha={alpha}; build one with airy_sum_quantiles "
                          "covering this cell") from None
    prov = {"table": {"n": table.n, "reps": table.reps, "seed": table.seed}}
    prov.update(provenance or {})
    if samples is None:
        samples, ref_prov = _reference_samples()
        if samples is not None:
            prov["p_value_samples"] = ref_prov
    p = se = None
    if samples is not None and np.asarray(samples).shape[1] >= r:
        p, se = mc_p_value(rescaled, r, samples)
    decision = "reject" if rescaled > q else "fail_to_reject"
    return TestReport("modified_LR", int(r), raw if raw is not None else float("nan"), float(rescaled), float(q),
                      float(alpha), decision, p, se, degenerate=math.isinf(rescaled), provenance=prov)


def modified_lr_test(spectrum: CanonicalSpectrum, r: int = 1, alpha: float = 0.95,
                     table: AiryQuantileTable | None = None, *, samples: np.ndarray | None = None) -> TestReport:
    """Full test from a modified-procedure spectrum."""
    from .ensembles import reference_quantile_table

    if table is None:
        table = reference_quantile_table(DEFAULT_ALPHAS if alpha in DEFAULT_ALPHAS else (*DEFAULT_ALPHAS, alpha))
    lr, degenerate = spectral_statistic(spectrum, "LR", 0, r, return_flag=True)
    resc = rescale_modified_lr(lr, r, spectrum.N, spectrum.T, spectrum.k)
    rep = decide(resc, r, alpha, table, samples=samples, raw=lr,
                 provenance={"N": spectrum.N, "T": spectrum.T, "k": spectrum.k})
    if degenerate and not rep.degenerate:
        rep = TestReport(**{**rep.to_dict(), "degenerate": True})
    return rep


