"""VAR(k) data-generating processes in error-correction form.

The process is

    dX_t = sum_{i<k} Gamma_i dX_{t-i} + Pi X_{t-k} + mu + Phi D_t + eps_t,

for t = 1..T, with eps_t ~ N(0, Lambda) i.i.d. and fixed pre-sample values
X_{1-k}, ..., X_0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from ._rng import STREAM_NOISE, rng_for
from .errors import ParameterError

__all__ = [
    "SparsePattern",
    "DeterministicTerms",
    "VarKSpec",
    "PanelSeries",
    "realize_pattern",
    "draw_noise",
    "simulate",
    "difference",
    "E",
    "E_col",
    "I_rho",
    "scaled_identity",
]

_KINDS = ("E_ij", "E_col", "I_rho", "scaled_identity")


@dataclass(frozen=True)
class SparsePattern:
    """Low-rank parameter matrix described by its nonzero structure.

    Indices are 1-based, matching the usual ``E_12`` notation.

    ``E_ij``
        single entry ``scale`` at (i, j).
    ``E_col``
        column ``j`` filled with ``scale``.
    ``I_rho``
        ``scale`` on the first ``rho`` diagonal entries.
    ``scaled_identity``
        ``scale * I_N``.
    """

    kind: str
    i: int = 1
    j: int = 1
    rho: int = 0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterError(f"unknown pattern kind {self.kind!r}; expected one of {_KINDS}")

    def realize(self, N: int) -> np.ndarray:
        return realize_pattern(self, N)

    def __add__(self, other):
        return _PatternSum((self,)) + other

    def __radd__(self, other):
        return _PatternSum((self,)).__radd__(other)


@dataclass(frozen=True)
class _PatternSum:
    terms: tuple

    def realize(self, N: int) -> np.ndarray:
        return sum((realize_pattern(p, N) for p in self.terms), np.zeros((N, N)))

    def __add__(self, other):
        if isinstance(other, SparsePattern):
            return _PatternSum(self.terms + (other,))
        if isinstance(other, _PatternSum):
            return _PatternSum(self.terms + other.terms)
        return NotImplemented

    def __radd__(self, other):
        if other == 0:
            return self
        return self.__add__(other)


def E(i: int, j: int, scale: float = 1.0) -> SparsePattern:
    return SparsePattern("E_ij", i=i, j=j, scale=scale)


def E_col(j: int, scale: float = 1.0) -> SparsePattern:
    return SparsePattern("E_col", j=j, scale=scale)


def I_rho(rho: int, scale: float = 1.0) -> SparsePattern:
    return SparsePattern("I_rho", rho=rho, scale=scale)


def scaled_identity(scale: float) -> SparsePattern:
    return SparsePattern("scaled_identity", scale=scale)


def realize_pattern(p: SparsePattern, N: int) -> np.ndarray:
    """Materialize a :class:`SparsePattern` as a dense ``N x N`` matrix."""
    if isinstance(p, _PatternSum):
        return p.realize(N)
    out = np.zeros((N, N))
    if p.kind == "E_ij":
        if not (1 <= p.i <= N and 1 <= p.j <= N):
            raise ParameterError(f"E_ij index ({p.i}, {p.j}) outside [1, {N}]")
        out[p.i - 1, p.j - 1] = p.scale
    elif p.kind == "E_col":
        if not 1 <= p.j <= N:
            raise ParameterError(f"E_col column {p.j} outside [1, {N}]")
        out[:, p.j - 1] = p.scale
    elif p.kind == "I_rho":
        if not 0 <= p.rho <= N:
            raise ParameterError(f"I_rho rank {p.rho} outside [0, {N}]")
        out[np.arange(p.rho), np.arange(p.rho)] = p.scale
    else:
        out[np.arange(N), np.arange(N)] = p.scale
    return out


MatrixLike = Union[np.ndarray, SparsePattern, _PatternSum, Sequence[Sequence[float]]]


def _as_matrix(m: MatrixLike, N: int, name: str) -> np.ndarray:
    if isinstance(m, (SparsePattern, _PatternSum)):
        return realize_pattern(m, N)
    a = np.asarray(m, dtype=float)
    if a.shape != (N, N):
        raise ParameterError(f"{name} has shape {a.shape}, expected ({N}, {N})")
    return a


@dataclass(frozen=True)
class DeterministicTerms:
    """Generator for the deterministic regressors D_t.

    Rows are, in order: a constant, a linear trend ``t`` and ``period - 1``
    seasonal 0/1 dummies (the first season is dropped).  Time indices are the
    model's own ``t = 1..T``.
    """

    constant: bool = True
    trend: bool = False
    seasonal_period: int | None = None

    def __post_init__(self):
        if self.seasonal_period is not None and self.seasonal_period < 2:
            raise ParameterError("seasonal_period must be >= 2")

    @classmethod
    def none(cls) -> "DeterministicTerms":
        return cls(constant=False)

    @classmethod
    def parse(cls, text: str) -> "DeterministicTerms":
        """Parse ``"none"``, ``"constant"``, ``"constant+trend"``, ``"seasonal:4"`` ..."""
        text = text.strip().lower()
        if text in ("", "none"):
            return cls.none()
        constant = trend = False
        period = None
        for part in text.split("+"):
            part = part.strip()
            if part == "constant":
                constant = True
            elif part == "trend":
                trend = True
            elif part.startswith("seasonal"):
                _, _, s = part.partition(":")
                if not s:
                    raise ParameterError("seasonal terms need a period, e.g. 'seasonal:4'")
                period = int(s)
            else:
                raise ParameterError(f"unknown deterministic term {part!r}")
        return cls(constant=constant, trend=trend, seasonal_period=period)

    @property
    def dim(self) -> int:
        return int(self.constant) + int(self.trend) + (self.seasonal_period - 1 if self.seasonal_period else 0)

    def design(self, t: np.ndarray) -> np.ndarray:
        """Return the ``dim x len(t)`` matrix with column ``D_t``."""
        t = np.asarray(t)
        rows = []
        if self.constant:
            rows.append(np.ones(t.shape))
        if self.trend:
            rows.append(t.astype(float))
        if self.seasonal_period:
            season = (t - 1) % self.seasonal_period
            rows.extend((season == j).astype(float) for j in range(1, self.seasonal_period))
        if not rows:
            return np.zeros((0, t.size))
        return np.vstack(rows)

    def describe(self) -> str:
        parts = [n for n, on in (("constant", self.constant), ("trend", self.trend)) if on]
        if self.seasonal_period:
            parts.append(f"seasonal:{self.seasonal_period}")
        return "+".join(parts) or "none"


@dataclass(frozen=True, eq=False)
class VarKSpec:
    """Full parameterization of the VAR(k) process.

    ``gammas`` holds Gamma_1..Gamma_{k-1}; entries may be ``None`` for zero
    lags.  ``mu`` is a constant drift, ``phi`` multiplies ``deterministic``'s
    D_t (both may be given).  ``noise_cov`` defaults to the identity and
    ``initial`` (columns X_{1-k}..X_0) to zeros.
    """

    N: int
    k: int
    T: int
    gammas: tuple = ()
    pi: MatrixLike | None = None
    mu: np.ndarray | float | None = None
    phi: np.ndarray | None = None
    deterministic: DeterministicTerms | None = None
    noise_cov: np.ndarray | None = None
    initial: np.ndarray | None = None
    _chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        N, k, T = int(self.N), int(self.k), int(self.T)
        if N < 1 or k < 1 or T < 1:
            raise ParameterError(f"need N, k, T >= 1, got N={N}, k={k}, T={T}")
        set_ = lambda name, value: object.__setattr__(self, name, value)  # noqa: E731
        set_("N", N), set_("k", k), set_("T", T)

        gammas = list(self.gammas)
        if len(gammas) > k - 1:
            raise ParameterError(f"VAR({k}) takes at most {k - 1} Gamma matrices, got {len(gammas)}")
        gammas += [None] * (k - 1 - len(gammas))
        realized = []
        for i, g in enumerate(gammas, start=1):
            m = None if g is None else _as_matrix(g, N, f"Gamma_{i}")
            realized.append(None if m is None or not m.any() else m)
        set_("gammas", tuple(realized))

        pi = None if self.pi is None else _as_matrix(self.pi, N, "Pi")
        set_("pi", None if pi is None or not pi.any() else pi)

        if self.mu is not None:
            mu = np.broadcast_to(np.asarray(self.mu, dtype=float), (N,)).copy()
            set_("mu", mu if mu.any() else None)

        if (self.phi is None) != (self.deterministic is None):
            raise ParameterError("phi and deterministic must be given together")
        if self.phi is not None:
            phi = np.atleast_2d(np.asarray(self.phi, dtype=float))
            if phi.shape != (N, self.deterministic.dim):
                raise ParameterError(f"phi has shape {phi.shape}, expected ({N}, {self.deterministic.dim})")
            set_("phi", phi)

        cov = np.eye(N) if self.noise_cov is None else np.asarray(self.noise_cov, dtype=float)
        if cov.shape != (N, N):
            raise ParameterError(f"noise_cov has shape {cov.shape}, expected ({N}, {N})")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise ParameterError("noise_cov must be symmetric")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ParameterError("noise_cov is not positive definite") from exc
        set_("noise_cov", cov)
        set_("_chol", chol)

        init = np.zeros((N, k)) if self.initial is None else np.asarray(self.initial, dtype=float)
        if init.ndim == 1:
            init = init.reshape(N, 1)
        if init.shape != (N, k):
            raise ParameterError(f"initial has shape {init.shape}, expected ({N}, {k})")
        set_("initial", init)

    @property
    def is_random_walk(self) -> bool:
        """True when Pi and every Gamma_i vanish (the restricted null)."""
        return self.pi is None and all(g is None for g in self.gammas)

    def with_T(self, T: int) -> "VarKSpec":
        return VarKSpec(self.N, self.k, T, self.gammas, self.pi, self.mu, self.phi,
                        self.deterministic, self.noise_cov, self.initial)


@dataclass(frozen=True, eq=False)
class PanelSeries:
    """Observed panel: ``data[:, t-1] = X_t`` for t = 1..T.

    ``initial`` holds pre-sample columns, oldest first; its last column is X_0.
    """

    data: np.ndarray
    initial: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise ParameterError("panel data must be an N x T matrix")
        init = np.asarray(self.initial, dtype=float)
        if init.ndim == 1:
            init = init.reshape(-1, 1)
        if init.shape[0] != data.shape[0] or init.shape[1] < 1:
            raise ParameterError(f"initial has shape {init.shape}; need ({data.shape[0]}, >=1)")
        if not (np.isfinite(data).all() and np.isfinite(init).all()):
            raise ParameterError("panel contains NaN or infinite values")
        if self.labels is not None and len(self.labels) != data.shape[0]:
            raise ParameterError("labels length does not match N")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "initial", init)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def N(self) -> int:
        return self.data.shape[0]

    @property
    def T(self) -> int:
        return self.data.shape[1]

    @property
    def X0(self) -> np.ndarray:
        return self.initial[:, -1]

    @property
    def levels(self) -> np.ndarray:
        """Pre-sample and sample columns side by side, X_{1-p}..X_T."""
        return np.hstack([self.initial, self.data])


def draw_noise(spec: VarKSpec, seed: int | None) -> np.ndarray:
    """Draw the ``N x T`` innovation matrix used by :func:`simulate`.

    Column t is ``chol(Lambda) @ z_t`` where the z_t are consumed in time
    order, so shorter samples are prefixes of longer ones for the same seed.
    """
    z = rng_for(seed, STREAM_NOISE).standard_normal((spec.T, spec.N)).T
    return spec._chol @ z


def simulate(spec: VarKSpec, seed: int | None = None, *, noise: np.ndarray | None = None) -> PanelSeries:
    """Run the error-correction recursion.

    Parameters
    ----------
    spec : VarKSpec
    seed : int, optional
        Seed for the Gaussian innovations; ignored when ``noise`` is given.
    noise : ndarray, optional
        Explicit ``N x T`` innovations, e.g. from :func:`draw_noise`.
    """
    N, k, T = spec.N, spec.k, spec.T
    eps = draw_noise(spec, seed) if noise is None else np.asarray(noise, dtype=float)
    if eps.shape != (N, T):
        raise ParameterError(f"noise has shape {eps.shape}, expected ({N}, {T})")

    shocks = eps.copy()
    if spec.mu is not None:
        shocks += spec.mu[:, None]
    if spec.phi is not None:
        shocks += spec.phi @ spec.deterministic.design(np.arange(1, T + 1))

    if spec.is_random_walk:
        data = spec.initial[:, -1:] + np.cumsum(shocks, axis=1)
        return PanelSeries(data, spec.initial.copy())

    # Y[:, k-1+t] = X_t, so X_{1-k} sits in column 0.
    Y = np.empty((N, k + T))
    Y[:, :k] = spec.initial
    lags = [(i, g) for i, g in enumerate(spec.gammas, start=1) if g is not None]
    for t in range(1, T + 1):
        c = k - 1 + t
        dx = shocks[:, t - 1].copy()
        for i, g in lags:
            dx += g @ (Y[:, c - i] - Y[:, c - i - 1])
        if spec.pi is not None:
            dx += spec.pi @ Y[:, c - k]
        Y[:, c] = Y[:, c - 1] + dx
    return PanelSeries(Y[:, k:], spec.initial.copy())


def difference(panel: PanelSeries) -> np.ndarray:
    """Return the ``N x T`` matrix of first differences X_t - X_{t-1}, t = 1..T."""
    return np.diff(np.hstack([panel.initial[:, -1:], panel.data]), axis=1)
