"""Wachter law, its edge constants and the test centering/scaling constants.

The Wachter distribution with parameters ``p_frak, q_frak > 1`` has density

    mu(x) = (p+q)/(2 pi) * sqrt((x - l_-)(l_+ - x)) / (x (1 - x))

on ``[l_-, l_+]``.  Integrals against it are evaluated after the substitution
``x = l_- + (l_+ - l_-) sin^2(theta)``, which turns the square-root edges into
a smooth integrand so Gauss-Legendre converges geometrically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError

__all__ = [
    "WachterParams",
    "AsymptoticConstants",
    "wachter_params",
    "wachter_pdf",
    "wachter_cdf",
    "wachter_tail",
    "wachter_tail_inverse",
    "wachter_integral",
    "wachter_moment",
    "partial_sum_limits",
    "corollary_limits",
    "test_constants",
    "test_wachter_params",
    "jacobi_to_wachter",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(96)


@dataclass(frozen=True)
class WachterParams:
    p_frak: float
    q_frak: float
    lambda_minus: float
    lambda_plus: float
    c_minus: float
    c_plus: float

    @property
    def support(self) -> tuple[float, float]:
        return self.lambda_minus, self.lambda_plus


@dataclass(frozen=True)
class AsymptoticConstants:
    """Centering ``c1`` and scale ``c2`` for the rescaled LR statistic."""

    c1: float
    c2: float
    lambda_plus: float
    lambda_minus: float
    N: int
    T: int
    k: int

    def as_dict(self) -> dict:
        return {"c1": self.c1, "c2": self.c2, "lambda_plus": self.lambda_plus,
                "lambda_minus": self.lambda_minus}


def wachter_params(p_frak: float, q_frak: float) -> WachterParams:
    """Support edges and edge constants of the Wachter law.

    Raises
    ------
    DomainError
        If either parameter is ``<= 1``.
    """
    p, q = float(p_frak), float(q_frak)
    if not (p > 1 and q > 1):
        raise DomainError(f"Wachter parameters must exceed 1, got p={p}, q={q}")
    s = p + q
    a = np.sqrt(p * (s - 1))
    b = np.sqrt(q)
    lp = (a + b) ** 2 / s**2
    lm = (a - b) ** 2 / s**2
    width = np.sqrt(lp - lm)
    cp = s / 2 * width / (lp * (1 - lp))
    cm = s / 2 * width / (lm * (1 - lm))
    return WachterParams(p, q, float(lm), float(lp), float(cm), float(cp))


def _as_params(w) -> WachterParams:
    if isinstance(w, WachterParams):
        return w
    return wachter_params(*w)


def wachter_pdf(x, w) -> np.ndarray | float:
    """Density of the Wachter law; zero outside the support."""
    w = _as_params(w)
    x = np.asarray(x, dtype=float)
    lm, lp = w.support
    inside = (x > lm) & (x < lp)
    xs = np.where(inside, x, 0.5 * (lm + lp))
    val = (w.p_frak + w.q_frak) / (2 * np.pi) * np.sqrt((xs - lm) * (lp - xs)) / (xs * (1 - xs))
    out = np.where(inside, val, 0.0)
    return out if out.ndim else float(out)


def _theta(x, w: WachterParams):
    lm, lp = w.support
    u = np.clip((np.asarray(x, dtype=float) - lm) / (lp - lm), 0.0, 1.0)
    return np.arcsin(np.sqrt(u))


def _theta_integrand(f: Callable, w: WachterParams) -> Callable:
    """Integrand in theta of ``f(x) mu(x) dx``; smooth on [0, pi/2]."""
    lm, lp = w.support
    d = lp - lm
    pref = (w.p_frak + w.q_frak) / np.pi * d**2

    def g(th):
        s2 = np.sin(th) ** 2
        x = lm + d * s2
        return f(x) * pref * s2 * (1 - s2) / (x * (1 - x))

    return g


def wachter_integral(f: Callable, a, b, w) -> np.ndarray | float:
    """``int_a^b f(x) mu(x) dx`` with ``a, b`` clipped to the support.

    ``f`` must accept numpy arrays.  ``b`` may be an array (vectorized over
    upper limits).
    """
    w = _as_params(w)
    g = _theta_integrand(f, w)
    t0 = _theta(a, w)
    t1 = _theta(b, w)
    t0, t1 = np.broadcast_arrays(t0, t1)
    half = 0.5 * (t1 - t0)[..., None]
    mid = 0.5 * (t1 + t0)[..., None]
    vals = (g(mid + half * _GL_NODES) * _GL_WEIGHTS).sum(axis=-1) * half[..., 0]
    return vals if vals.ndim else float(vals)


def _pin(x, val, w, below, above):
    # exact values off the support, where quadrature only reaches 1 to rounding
    x = np.asarray(x, dtype=float)
    out = np.where(x <= w.lambda_minus, below, np.where(x >= w.lambda_plus, above, val))
    return out if out.ndim else float(out)


def wachter_cdf(x, w):
    """``int_0^x mu``."""
    w = _as_params(w)
    val = wachter_integral(np.ones_like, w.lambda_minus, x, w)
    return _pin(x, val, w, 0.0, 1.0)


def wachter_tail(x, w):
    """Upper tail ``F(x) = int_x^1 mu``; decreasing from 1 at ``l_-`` to 0 at ``l_+``."""
    w = _as_params(w)
    val = wachter_integral(np.ones_like, x, w.lambda_plus, w)
    return _pin(x, val, w, 1.0, 0.0)


def wachter_tail_inverse(rho: float, w) -> float:
    """Solve ``F(x) = rho`` on the support by bracketed root finding."""
    w = _as_params(w)
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"tail level must lie in [0, 1], got {rho}")
    lm, lp = w.support
    if rho == 0.0:
        return lp
    if rho == 1.0:
        return lm
    return float(optimize.brentq(lambda x: wachter_tail(x, w) - rho, lm, lp, xtol=1e-13, rtol=1e-14))


def wachter_moment(j: int, w) -> float:
    """``int x^j mu(x) dx``."""
    w = _as_params(w)
    return wachter_integral(lambda x: x**j, w.lambda_minus, w.lambda_plus, w)


def _adaptive(f: Callable, a: float, b: float, w: WachterParams) -> float:
    if b <= a:
        return 0.0
    g = _theta_integrand(f, w)
    val, _ = integrate.quad(g, float(_theta(a, w)), float(_theta(b, w)), epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(val)


def partial_sum_limits(rho1: float, rho2: float, tau: float, k: int) -> dict:
    """Limits of normalized partial sums of eigenvalue statistics.

    For eigenvalues ``i = r1+1..r2`` with ``r1/N -> rho1``, ``r2/N -> rho2``
    and ``T/N -> tau``, returns the limits of ``(1/N) sum ln(1-l_i)``
    (``lr_limit``), ``(1/N) sum l_i`` (``pb_limit``) and
    ``(1/N) sum l_i/(1-l_i)`` (``hw_limit``) under the law with parameters
    ``(2, tau - k)``.

    When ``rho1 == 0`` the top eigenvalue is not controlled, so the LR value
    is only an asymptotic upper bound and the HW value a lower bound; this is
    recorded in ``flags``.
    """
    rho1, rho2, tau = float(rho1), float(rho2), float(tau)
    if not 0.0 <= rho1 <= rho2 <= 1.0:
        raise DomainError(f"need 0 <= rho1 <= rho2 <= 1, got rho1={rho1}, rho2={rho2}")
    if tau <= k + 1:
        raise DomainError(f"need tau > k + 1, got tau={tau}, k={k}")
    w = wachter_params(2.0, tau - k)
    lo = wachter_tail_inverse(rho2, w)
    hi = wachter_tail_inverse(rho1, w)
    lr = _adaptive(lambda x: np.log1p(-x), lo, hi, w)
    pb = _adaptive(lambda x: x, lo, hi, w)
    hw = _adaptive(lambda x: x / (1 - x), lo, hi, w)
    flags = {"lr": "exact", "pb": "exact", "hw": "exact"}
    if rho1 == 0.0 and rho2 > 0.0:
        flags["lr"] = "upper_bound"
        flags["hw"] = "lower_bound"
    return {"lr_limit": lr, "pb_limit": pb, "hw_limit": hw, "lower": lo, "upper": hi,
            "wachter": w, "flags": flags}


corollary_limits = partial_sum_limits  # name used by the interface contract


def test_wachter_params(N: int, T: int, k: int) -> WachterParams:
    """Wachter parameters ``(2, T/N - k)`` governing the null spectrum."""
    if N < 1 or k < 1:
        raise DomainError("N and k must be positive")
    ratio = T / N
    if ratio <= k + 1:
        raise DomainError(f"T/N = {ratio:.4g} must exceed k + 1 = {k + 1}; the centering constant diverges")
    return wachter_params(2.0, ratio - k)


def test_constants(N: int, T: int, k: int) -> AsymptoticConstants:
    """Centering ``c1 = ln(1 - l_+)`` and scale ``c2`` of the largest-eigenvalue statistic.

    Examples
    --------
    >>> c = test_constants(100, 1000, 2)
    >>> round(c.c1, 6), round(c.c2, 5)
    (-0.693147, -0.34668)
    """
    w = test_wachter_params(N, T, k)
    lp, lm = w.lambda_plus, w.lambda_minus
    s = w.p_frak + w.q_frak
    c1 = float(np.log1p(-lp))
    c2 = float(-(2 ** (2 / 3)) * lp ** (2 / 3) / ((1 - lp) ** (1 / 3) * (lp - lm) ** (1 / 3)) * s ** (-2 / 3))
    return AsymptoticConstants(c1, c2, lp, lm, int(N), int(T), int(k))


test_constants.__test__ = False  # keep pytest from collecting the name
test_wachter_params.__test__ = False


def jacobi_to_wachter(N: int, p: float, q: float) -> tuple[float, float]:
    """Map Jacobi exponents ``(p, q)`` at size ``N`` to Wachter ``(2p/N + 1, 2q/N + 1)``."""
    return 2 * p / N + 1, 2 * q / N + 1
