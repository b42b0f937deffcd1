"""Squared sample canonical correlations between changes and lagged levels.

Two constructions are provided:

* :func:`johansen_spectrum` -- the classical procedure: regress ``dX_t`` and
  ``X_{t-k}`` on lagged differences plus deterministic terms, then take the
  canonical correlations of the residuals.
* :func:`modified_spectrum` -- the detrended, cyclically indexed variant whose
  top eigenvalues have Airy_1 fluctuations under the null.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateSpectrumWarning, DimensionError, ParameterError
from .model import DeterministicTerms, PanelSeries, difference

__all__ = [
    "RegressandSet",
    "ResidualPair",
    "CanonicalSpectrum",
    "detrend",
    "cyclic_lag",
    "residualize",
    "canonical_eigs",
    "johansen_regressands",
    "modified_regressands",
    "johansen_spectrum",
    "modified_spectrum",
]

RANK_RTOL = 1e-10
EIG_FLOOR_RTOL = 1e-12
CLAMP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RegressandSet:
    """Changes ``Z0``, levels ``Zk`` and regressors ``Z1``; columns are time."""

    Z0: np.ndarray
    Zk: np.ndarray
    Z1: np.ndarray | None

    def __post_init__(self):
        T = self.Z0.shape[1]
        if self.Zk.shape[1] != T or (self.Z1 is not None and self.Z1.shape[1] != T):
            raise ParameterError("Z0, Zk and Z1 must share the same number of columns")


@dataclass(frozen=True, eq=False)
class ResidualPair:
    R0: np.ndarray
    Rk: np.ndarray


@dataclass(frozen=True, eq=False)
class CanonicalSpectrum:
    """Descending squared canonical correlations in [0, 1]."""

    values: np.ndarray
    N: int
    T: int
    k: int
    procedure: str
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


def detrend(panel: PanelSeries) -> np.ndarray:
    """Shifted, detrended levels ``X_{t-1} - (t-1)/T (X_T - X_0)`` for t = 1..T."""
    T = panel.T
    if T < 2:
        raise DimensionError("detrending needs T >= 2")
    X0 = panel.X0
    lagged = np.hstack([X0[:, None], panel.data[:, :-1]])
    slope = (panel.data[:, -1] - X0)[:, None]
    return lagged - slope * (np.arange(T) / T)[None, :]


def cyclic_lag(M: np.ndarray, i: int) -> np.ndarray:
    """Cyclic lag: column t of the result is column ``t - i`` (mod T) of ``M``."""
    return np.roll(M, int(i), axis=1)


def _orthonormal_rows(A: np.ndarray, rtol: float = RANK_RTOL) -> tuple[np.ndarray, int]:
    """Orthonormal basis (as columns, ``T x r``) of the row space of ``A``."""
    if A.size == 0:
        return np.zeros((A.shape[1], 0)), 0
    Q, R, _ = sla.qr(A.T, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    rank = int((d > rtol * d[0]).sum()) if d.size and d[0] > 0 else 0
    return Q[:, :rank], rank


def residualize(Z: RegressandSet, *, warn: bool = True) -> ResidualPair:
    """Project ``Z0`` and ``Zk`` off the row space of ``Z1``.

    Equivalent to subtracting the least-squares fit; a rank-deficient ``Z1``
    falls back to the minimum-norm (pseudo-inverse) fit with a warning.
    """
    if Z.Z1 is None or Z.Z1.shape[0] == 0:
        return ResidualPair(Z.Z0.copy(), Z.Zk.copy())
    Q, rank = _orthonormal_rows(Z.Z1)
    if rank < Z.Z1.shape[0] and warn:
        warnings.warn(f"regressor matrix has rank {rank} < {Z.Z1.shape[0]}; using pseudo-inverse",
                      DegenerateSpectrumWarning, stacklevel=2)
    R0 = Z.Z0 - (Z.Z0 @ Q) @ Q.T
    Rk = Z.Zk - (Z.Zk @ Q) @ Q.T
    return ResidualPair(R0, Rk)


def _inv_sqrt(S: np.ndarray) -> tuple[np.ndarray, bool]:
    w, U = np.linalg.eigh(S)
    top = w.max() if w.size else 0.0
    keep = w > EIG_FLOOR_RTOL * top if top > 0 else np.zeros_like(w, dtype=bool)
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return (U * inv) @ U.T, bool(keep.all())


def canonical_eigs(R: ResidualPair, *, T: int | None = None, k: int = 0,
                   procedure: str = "custom", warn: bool = True) -> CanonicalSpectrum:
    """Squared canonical correlations of the rows of ``R0`` and ``Rk``.

    Computed as squared singular values of ``S00^{-1/2} S0k Skk^{-1/2}``;
    eigenvalues of ``S`` below ``1e-12 * max`` are dropped (pseudo-inverse).
    """
    R0, Rk = R.R0, R.Rk
    N = Rk.shape[0]
    S00 = R0 @ R0.T
    Skk = Rk @ Rk.T
    S0k = R0 @ Rk.T
    W0, ok0 = _inv_sqrt(S00)
    Wk, okk = _inv_sqrt(Skk)
    if not (ok0 and okk) and warn:
        warnings.warn("singular residual covariance; spectrum computed with a pseudo-inverse",
                      DegenerateSpectrumWarning, stacklevel=2)
    sv = np.linalg.svd(W0 @ S0k @ Wk, compute_uv=False)
    vals = np.zeros(N)
    m = min(N, sv.size)
    vals[:m] = sv[:m] ** 2
    if vals.max(initial=0.0) > 1 + CLAMP_TOL:
        warnings.warn(f"canonical correlation {vals.max():.3g} exceeds 1 beyond tolerance",
                      DegenerateSpectrumWarning, stacklevel=2)
    vals = np.sort(np.clip(vals, 0.0, 1.0))[::-1]
    return CanonicalSpectrum(vals, N=N, T=R0.shape[1] if T is None else T, k=k, procedure=procedure)


def _deterministic(det_spec) -> DeterministicTerms | np.ndarray:
    if det_spec is None:
        return DeterministicTerms.none()
    if isinstance(det_spec, str):
        return DeterministicTerms.parse(det_spec)
    if isinstance(det_spec, DeterministicTerms):
        return det_spec
    return np.atleast_2d(np.asarray(det_spec, dtype=float))


def johansen_regressands(panel: PanelSeries, k: int, det_spec="constant") -> tuple[RegressandSet, np.ndarray]:
    """Build ``Z0 = dX_t``, ``Zk = X_{t-k}``, ``Z1 = (dX_{t-1}..dX_{t-k+1}, D_t)``.

    The sample runs over every t in 1..T whose lags are available from the
    panel's pre-sample columns; earlier t are dropped.  ``det_spec`` is a
    :class:`DeterministicTerms`, a string accepted by
    :meth:`DeterministicTerms.parse`, or a raw ``d x T`` regressor matrix
    aligned with t = 1..T.  Returns the regressands and the time indices used.
    """
    if k < 1:
        raise ParameterError("k must be >= 1")
    p0 = panel.initial.shape[1]
    Y = panel.levels  # column c holds X_{c+1-p0}
    dY = np.diff(Y, axis=1)  # column c holds dX_{c+2-p0}
    t0 = max(1, k + 1 - p0)
    ts = np.arange(t0, panel.T + 1)
    if ts.size == 0:
        raise DimensionError(f"no usable observations for k={k}")
    col = lambda s: s + p0 - 1  # noqa: E731  column of X_s in Y
    dcol = lambda s: s + p0 - 2  # noqa: E731  column of dX_s in dY
    Z0 = dY[:, dcol(ts)]
    Zk = Y[:, col(ts - k)]
    blocks = [dY[:, dcol(ts - i)] for i in range(1, k)]
    det = _deterministic(det_spec)
    if isinstance(det, DeterministicTerms):
        if det.dim:
            blocks.append(det.design(ts))
    else:
        if det.shape[1] != panel.T:
            raise ParameterError(f"deterministic regressors have {det.shape[1]} columns, expected T={panel.T}")
        blocks.append(det[:, ts - 1])
    Z1 = np.vstack(blocks) if blocks else None
    return RegressandSet(Z0, Zk, Z1), ts


def _check_regime(N: int, T_eff: int, m: int, k: int, strict: bool):
    if T_eff - m < 2 * N:
        raise DimensionError(
            f"need more observations than (k+1)N: effective T={T_eff} with {m} regressors "
            f"leaves {T_eff - m} < 2N={2 * N} degrees of freedom (k={k}), which forces unit eigenvalues")
    if strict:
        return
    if T_eff <= (k + 1) * N:
        warnings.warn(f"T={T_eff} <= (k+1)N={(k + 1) * N}: outside the asymptotic regime",
                      RuntimeWarning, stacklevel=3)


def johansen_spectrum(panel: PanelSeries, k: int, det_spec="constant") -> CanonicalSpectrum:
    """Classical procedure: canonical correlations of residualized changes and levels."""
    Z, ts = johansen_regressands(panel, k, det_spec)
    m = 0 if Z.Z1 is None else Z.Z1.shape[0]
    _check_regime(panel.N, ts.size, m, k, strict=False)
    spec = canonical_eigs(residualize(Z), T=panel.T, k=k, procedure="johansen")
    spec.meta.update(t_first=int(ts[0]), t_last=int(ts[-1]), regressors=m,
                     deterministic=det_spec if isinstance(det_spec, str) else
                     (det_spec.describe() if isinstance(det_spec, DeterministicTerms) else "custom"))
    return spec


def modified_regressands(panel: PanelSeries, k: int) -> RegressandSet:
    """Detrended, cyclically lagged regressands of the modified procedure."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    dX = difference(panel)
    Xt = detrend(panel)
    Zk = cyclic_lag(Xt, k - 1)
    Z1 = np.vstack([cyclic_lag(dX, i) for i in range(1, k)] + [np.ones((1, panel.T))])
    return RegressandSet(dX, Zk, Z1)


def modified_spectrum(panel: PanelSeries, k: int) -> CanonicalSpectrum:
    """Modified procedure: detrend, cyclic lags, intercept-only deterministic term."""
    N, T = panel.N, panel.T
    if T <= (k + 1) * N:
        raise DimensionError(f"modified procedure requires T > (k+1)N; got T={T}, N={N}, k={k}")
    Z = modified_regressands(panel, k)
    return canonical_eigs(residualize(Z), T=T, k=k, procedure="modified")
