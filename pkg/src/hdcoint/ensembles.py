"""Random-matrix reference models.

* Haar-distributed rotations,
* Jacobi ensemble spectra through the two-Wishart (MANOVA) construction,
* the product-of-projectors model whose nonzero spectrum is Jacobi,
* top eigenvalues of the real tridiagonal GOE model, and
* Monte Carlo quantiles of partial sums of the Airy_1 point process.
"""

from __future__ import annotations

import csv
import functools
import math
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from ._rng import STREAM_GOE, STREAM_HAAR, STREAM_JACOBI, replicate, rng_for
from ._tridiag import top_eigenvalues
from .errors import DomainError, ParameterError

__all__ = [
    "JacobiParams",
    "ProjectorModelSpec",
    "AiryQuantileTable",
    "DEFAULT_ALPHAS",
    "haar_orthogonal",
    "sample_jacobi_spectrum",
    "projector_jacobi_params",
    "projector_model_spectrum",
    "goe_window",
    "goe_top_eigs",
    "airy_sum_samples",
    "airy_sum_quantiles",
    "reference_airy_samples",
    "reference_quantile_table",
    "write_reference",
]

DEFAULT_ALPHAS = (0.90, 0.95, 0.975, 0.99)
RANK_RTOL = 1e-10
_DOF_TOL = 1e-9


def _rng(seed, rng, *stream) -> np.random.Generator:
    return rng if rng is not None else rng_for(seed, *stream)


def haar_orthogonal(n: int, seed: int | None = None, *, rng: np.random.Generator | None = None) -> np.ndarray:
    """Haar-distributed ``n x n`` rotation (orthogonal, determinant +1).

    QR of a Gaussian matrix with the signs of ``diag(R)`` moved into ``Q``
    gives Haar measure on O(n); flipping the first column when the
    determinant is negative then gives Haar measure on SO(n).
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    g = _rng(seed, rng, STREAM_HAAR)
    Q, R = np.linalg.qr(g.standard_normal((n, n)))
    Q *= np.sign(np.diag(R))[None, :]
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


@dataclass(frozen=True)
class JacobiParams:
    """Jacobi ensemble with density ``det(M)^(p-1) det(1-M)^(q-1)`` on N x N matrices."""

    N: int
    p: float
    q: float

    def __post_init__(self):
        if self.N < 1:
            raise ParameterError("N must be >= 1")
        if not (self.p > 0 and self.q > 0):
            raise ParameterError(f"Jacobi exponents must be positive, got p={self.p}, q={self.q}")

    @property
    def dof(self) -> tuple[float, float]:
        """Wishart degrees of freedom ``(2p + N - 1, 2q + N - 1)``."""
        return 2 * self.p + self.N - 1, 2 * self.q + self.N - 1


def _integer_dof(x: float, name: str) -> int:
    n = round(x)
    if abs(x - n) > _DOF_TOL or n < 1:
        raise ParameterError(
            f"{name} = {x} is not a positive integer; the two-Wishart sampler needs integer degrees "
            "of freedom (use projector_model_spectrum for other exponents)")
    return int(n)


def sample_jacobi_spectrum(jp: JacobiParams, seed: int | None = None, *,
                           rng: np.random.Generator | None = None) -> np.ndarray:
    """Eigenvalues (descending) of a Jacobi ensemble draw.

    With ``A ~ W(N, 2p+N-1)`` and ``B ~ W(N, 2q+N-1)`` independent, the
    eigenvalues of ``(A+B)^{-1/2} A (A+B)^{-1/2}`` follow the Jacobi law.
    """
    n1, n2 = jp.dof
    n1 = _integer_dof(n1, "2p + N - 1")
    n2 = _integer_dof(n2, "2q + N - 1")
    g = _rng(seed, rng, STREAM_JACOBI)
    N = jp.N
    G1 = g.standard_normal((N, n1))
    G2 = g.standard_normal((N, n2))
    A = G1 @ G1.T
    B = G2 @ G2.T
    vals = sla.eigh(A, A + B, eigvals_only=True)
    return np.clip(vals, 0.0, 1.0)[::-1].copy()


@dataclass(frozen=True)
class ProjectorModelSpec:
    """Product-of-projectors model in ambient dimension ``T_amb``."""

    k: int
    N: int
    T_amb: int
    seed: int | None = None

    def __post_init__(self):
        if self.k < 1 or self.N < 1:
            raise ParameterError("k and N must be >= 1")
        if self.T_amb < (self.k + 1) * self.N:
            raise DomainError(f"need T_amb >= (k+1)N = {(self.k + 1) * self.N}, got {self.T_amb}")


def projector_jacobi_params(spec: ProjectorModelSpec) -> JacobiParams:
    """Jacobi exponents ``p = N/2``, ``q = (T_amb - (k+1)N + 1)/2`` of the model's spectrum."""
    return JacobiParams(spec.N, spec.N / 2, (spec.T_amb - (spec.k + 1) * spec.N + 1) / 2)


def _basis(M: np.ndarray) -> np.ndarray:
    if M.shape[1] == 0:
        return M
    Q, R, _ = sla.qr(M, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    rank = int((d > RANK_RTOL * d[0]).sum()) if d[0] > 0 else 0
    return Q[:, :rank]


def _project_out(Q: np.ndarray, M: np.ndarray) -> np.ndarray:
    return M - Q @ (Q.T @ M) if Q.shape[1] else M


def projector_model_spectrum(spec: ProjectorModelSpec, *, rng: np.random.Generator | None = None,
                             max_tries: int = 5) -> np.ndarray:
    """Top ``N`` eigenvalues of ``P1 P2 P1`` for a random rotation ``O``.

    ``V`` is the span of the last ``N`` coordinate vectors, ``P`` projects off
    ``O V, ..., O^{k-1} V``, ``P1`` onto ``P V`` and ``P2`` onto
    ``P O^{k-1} (1+O)^{-1} V``.  The nonzero eigenvalues of ``P1 P2 P1`` are
    the squared cosines of the principal angles between the two ranges.
    """
    g = _rng(spec.seed, rng, STREAM_HAAR)
    T, N, k = spec.T_amb, spec.N, spec.k
    V = np.zeros((T, N))
    V[T - N:, :] = np.eye(N)
    for _ in range(max_tries):
        O = haar_orthogonal(T, rng=g)
        IO = np.eye(T) + O
        W = np.linalg.solve(IO, V)
        if not np.isfinite(W).all() or np.abs(IO @ W - V).max() > 1e-8:
            warnings.warn("1 + O is numerically singular; resampling the rotation", RuntimeWarning, stacklevel=2)
            continue
        blocks, cur = [], V
        for _ in range(k - 1):
            cur = O @ cur
            blocks.append(cur)
        Qs = _basis(np.hstack(blocks)) if blocks else np.zeros((T, 0))
        for _ in range(k - 1):
            W = O @ W
        Q1 = _basis(_project_out(Qs, V))
        Q2 = _basis(_project_out(Qs, W))
        sv = np.linalg.svd(Q1.T @ Q2, compute_uv=False)
        out = np.zeros(N)
        m = min(N, sv.size)
        out[:m] = np.clip(sv[:m] ** 2, 0.0, 1.0)
        return np.sort(out)[::-1]
    raise RuntimeError(f"1 + O singular in {max_tries} consecutive draws")


def goe_window(n: int) -> int:
    """Size of the leading block used for the top of the spectrum, ``ceil(40 n^(1/3))``."""
    return min(n, int(math.ceil(40 * n ** (1 / 3))))


def goe_top_eigs(n: int, r: int, seed: int | None = None, *, rng: np.random.Generator | None = None,
                 window: int | None = None, tol: float = 1e-9) -> np.ndarray:
    """Rescaled top ``r`` eigenvalues ``n^(1/6) (mu_i - 2 sqrt(n))`` of the tridiagonal GOE model.

    The model has ``N(0, 2)`` diagonal and chi-distributed off-diagonal
    entries with ``n-1, ..., 1`` degrees of freedom.  The top eigenvectors are
    localized in the first ``O(n^(1/3))`` coordinates, so by default only the
    leading ``goe_window(n)`` block is sampled; pass ``window=n`` for the full
    matrix.
    """
    if n < 2 or r < 1 or r > n:
        raise ParameterError(f"need n >= 2 and 1 <= r <= n, got n={n}, r={r}")
    m = goe_window(n) if window is None else min(int(window), n)
    m = max(m, r)
    g = _rng(seed, rng, STREAM_GOE)
    d = g.normal(0.0, math.sqrt(2.0), m)
    e2 = g.chisquare(np.arange(n - 1, n - m, -1, dtype=float))
    sqn = math.sqrt(n)
    mu = top_eigenvalues(d, e2, r, m, 2 * sqn - 5 * n ** (-1 / 6), tol)
    return n ** (1 / 6) * (mu - 2 * sqn)


@dataclass(frozen=True)
class _AiryDraw:
    n: int
    r: int
    seed: int
    window: int | None

    def __call__(self, i: int) -> np.ndarray:
        return goe_top_eigs(self.n, self.r, rng=rng_for(self.seed, STREAM_GOE, i), window=self.window)


def airy_sum_samples(r_max: int, n: int, reps: int, seed: int, *, threads: int = 1,
                     window: int | None = None) -> np.ndarray:
    """``reps x r_max`` array of partial sums ``sum_{i<=r}`` of rescaled top eigenvalues.

    Replication ``i`` draws from its own stream, so the result does not depend
    on ``threads``.
    """
    draws = replicate(_AiryDraw(n, r_max, seed, window), range(reps), threads, chunksize=256)
    return np.cumsum(np.asarray(draws), axis=1)


def _quantile_band(x: np.ndarray, alpha: float) -> tuple[float, float]:
    """Empirical quantile and a binomial order-statistic standard error."""
    xs = np.sort(x)
    n = xs.size
    q = float(np.quantile(xs, alpha))
    half = math.sqrt(n * alpha * (1 - alpha))
    lo = xs[max(0, int(math.floor(n * alpha - half)))]
    hi = xs[min(n - 1, int(math.ceil(n * alpha + half)))]
    return q, float(hi - lo) / 2


@dataclass
class AiryQuantileTable:
    """Monte Carlo quantiles of Airy_1 partial sums, keyed by ``r`` then level ``alpha``."""

    quantiles: dict[int, dict[float, float]]
    stderr: dict[int, dict[float, float]]
    n: int
    reps: int
    seed: int | None
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, sums: np.ndarray, alphas: Sequence[float] = DEFAULT_ALPHAS, *, n: int, seed,
                     meta: dict | None = None) -> "AiryQuantileTable":
        qs, se = {}, {}
        for r in range(1, sums.shape[1] + 1):
            qs[r], se[r] = {}, {}
            for a in alphas:
                qs[r][float(a)], se[r][float(a)] = _quantile_band(sums[:, r - 1], float(a))
        return cls(qs, se, int(n), int(sums.shape[0]), seed, dict(meta or {}))

    @property
    def r_max(self) -> int:
        return max(self.quantiles)

    @property
    def alphas(self) -> list[float]:
        return sorted(self.quantiles[min(self.quantiles)])

    def quantile(self, r: int, alpha: float) -> float:
        try:
            return self.quantiles[int(r)][float(alpha)]
        except KeyError:
            raise DomainError(f"no tabulated quantile for r={r}, alpha={alpha}") from None

    def is_monotone(self) -> bool:
        for row in self.quantiles.values():
            vals = [row[a] for a in sorted(row)]
            if any(b <= a for a, b in zip(vals, vals[1:])):
                return False
        return True

    def rows(self) -> list[dict]:
        return [{"r": r, "alpha": a, "quantile": self.quantiles[r][a], "stderr": self.stderr[r][a],
                 "n": self.n, "reps": self.reps, "seed": self.seed}
                for r in sorted(self.quantiles) for a in sorted(self.quantiles[r])]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["r", "alpha", "quantile", "stderr", "n", "reps", "seed"])
            w.writeheader()
            w.writerows(self.rows())

    @classmethod
    def from_csv(cls, path) -> "AiryQuantileTable":
        qs, se = {}, {}
        n = reps = seed = None
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                r, a = int(row["r"]), float(row["alpha"])
                qs.setdefault(r, {})[a] = float(row["quantile"])
                se.setdefault(r, {})[a] = float(row["stderr"])
                n, reps = int(row["n"]), int(row["reps"])
                seed = int(row["seed"]) if row["seed"] not in ("", "None") else None
        if not qs:
            raise ParameterError(f"{path} holds no quantile rows")
        return cls(qs, se, n, reps, seed)


def airy_sum_quantiles(r_max: int, alphas: Iterable[float] = DEFAULT_ALPHAS, n: int = 10**4, reps: int = 20000,
                       seed: int = 0, *, threads: int = 1, window: int | None = None) -> AiryQuantileTable:
    """Monte Carlo quantile table of ``sum_{i<=r}`` rescaled GOE top eigenvalues, ``r = 1..r_max``."""
    if reps < 1000:
        raise ParameterError("reps must be >= 1000 for usable quantile estimates")
    alphas = tuple(float(a) for a in alphas)
    if any(not 0 < a < 1 for a in alphas):
        raise ParameterError("levels must lie in (0, 1)")
    sums = airy_sum_samples(r_max, n, reps, seed, threads=threads, window=window)
    return AiryQuantileTable.from_samples(sums, alphas, n=n, seed=seed,
                                          meta={"window": goe_window(n) if window is None else window})


@functools.lru_cache(maxsize=1)
def _reference() -> dict:
    ref = resources.files("hdcoint") / "data" / "airy_reference.npz"
    with resources.as_file(ref) as path:
        if not Path(path).exists():
            raise FileNotFoundError("packaged Airy_1 reference samples are missing; run "
                                    "`hdcoint quantiles --write-reference`")
        with np.load(path) as z:
            return {key: z[key] for key in z.files}


def reference_airy_samples() -> tuple[np.ndarray, dict]:
    """Packaged partial-sum samples and their provenance (``n``, ``reps``, ``seed``, ``window``)."""
    ref = _reference()
    sums = ref["sums"].astype(float)
    prov = {key: int(ref[key]) for key in ("n", "reps", "seed", "window")}
    return sums, prov


def reference_quantile_table(alphas: Iterable[float] = DEFAULT_ALPHAS) -> AiryQuantileTable:
    """Quantile table computed from the packaged reference samples."""
    sums, prov = reference_airy_samples()
    return AiryQuantileTable.from_samples(sums, tuple(alphas), n=prov["n"], seed=prov["seed"],
                                          meta={"window": prov["window"], "source": "packaged reference"})


def write_reference(path, *, r_max: int = 10, n: int = 10**5, reps: int = 50000, seed: int = 1,
                    threads: int = 1) -> Path:
    """Draw Airy_1 partial-sum samples and store them as the reference ``.npz``."""
    sums = airy_sum_samples(r_max, n, reps, seed, threads=threads)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(path, sums=sums.astype(np.float32), n=n, reps=reps, seed=seed, window=goe_window(n))
    _reference.cache_clear()
    return path
