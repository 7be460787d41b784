"""Characteristic functions, Plancherel entropy windows and Gaussian process rates.

Characteristic functions follow ``phi(t) = E exp(i <t, X>)``.  A stationary
Gaussian process is described by its autocovariances ``r_k`` or by the
spectral density ``G(lam) = sum_k r_k exp(i k lam)`` on ``[0, 2 pi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from . import quadrature
from .distributions import (
    AffineImage,
    Cauchy1D,
    ExponentialProduct,
    Gaussian,
    StableSymmetric1D,
    UniformBody,
)
from .entropy import Estimate
from .inequalities import kconc_upper_bound
from .errors import (
    BetaTooSmall,
    DegenerateSpectrum,
    HorizonTooShort,
    InvalidSpec,
    NonIntegrable,
    NotPositiveDefinite,
    UnsupportedFamily,
)

CF_CUTOFF = 1e-12
CF_STABLE_TOL = 1e-9
SZEGO_GRID = 1 << 14
LOG_CLIP = -700.0
TAIL_FRACTION = 0.25
MIN_HORIZON = 8
LOG_2PI_E = math.log(2 * math.pi * math.e)


# --------------------------------------------------------------------------
# Characteristic functions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CharFn:
    """A characteristic function with optional closed-form ``integral |phi|^2``.

    ``evaluator`` maps an array of shape ``(m, n)`` to ``m`` complex values.
    """

    evaluator: Callable
    n: int
    symmetric: bool = False
    norm2_closed: float | None = None
    name: str = "custom"

    def __call__(self, t):
        t = np.asarray(t, float)
        single = t.ndim <= 1 and (self.n > 1 or t.ndim == 0)
        t = t.reshape(-1, self.n)
        out = np.asarray(self.evaluator(t), dtype=complex)
        return out[0] if single else out

    # -- constructors ------------------------------------------------------
    @classmethod
    def stable(cls, alpha, scale=1.0):
        """Symmetric stable law in one dimension, ``exp(-|s t|**alpha)``."""
        if not 0 < alpha <= 2:
            raise InvalidSpec("alpha must lie in (0, 2]")
        norm2 = 2 ** (1 - 1 / alpha) * math.gamma(1 / alpha) / alpha / scale
        return cls(lambda t: np.exp(-np.abs(scale * t[:, 0]) ** alpha) + 0j, 1, True,
                   norm2, "stable")

    @classmethod
    def cauchy(cls, scale=1.0):
        return cls.stable(1.0, scale)

    @classmethod
    def gaussian(cls, cov, mean=None):
        cov = np.atleast_2d(np.asarray(cov, float))
        n = cov.shape[0]
        mu = np.zeros(n) if mean is None else np.asarray(mean, float).reshape(n)
        sign, logdet = np.linalg.slogdet(cov)
        if sign <= 0:
            raise InvalidSpec("covariance must be positive definite")
        norm2 = math.pi ** (n / 2) * math.exp(-0.5 * logdet)

        def ev(t):
            quad = np.einsum("ij,jk,ik->i", t, cov, t)
            return np.exp(1j * (t @ mu) - 0.5 * quad)
        return cls(ev, n, not mu.any(), norm2, "gaussian")

    @classmethod
    def exponential(cls, rates):
        lam = np.atleast_1d(np.asarray(rates, float))
        norm2 = float(np.prod(math.pi * lam))
        return cls(lambda t: np.prod(lam / (lam - 1j * t), axis=1), lam.size, False, norm2,
                   "exponential")

    @classmethod
    def uniform_cube(cls, n, side=1.0):
        """Uniform on ``[0, side]^n``."""
        def ev(t):
            u = 0.5 * side * t
            # np.sinc(x) = sin(pi x) / (pi x)
            return np.prod(np.exp(1j * u) * np.sinc(u / math.pi), axis=1)
        return cls(ev, n, False, (2 * math.pi / side) ** n, "uniform")

    def affine(self, matrix, shift=None):
        """Characteristic function of ``A X + b``."""
        A = np.atleast_2d(np.asarray(matrix, float))
        b = np.zeros(self.n) if shift is None else np.asarray(shift, float).reshape(self.n)
        det = abs(np.linalg.det(A))
        base = self.evaluator
        norm2 = None if self.norm2_closed is None else self.norm2_closed / det
        return CharFn(lambda t: np.exp(1j * (t @ b)) * base(t @ A), self.n,
                      self.symmetric and not b.any(), norm2, self.name)


def charfn_of(spec):
    """Characteristic function of a density spec when one is known in closed form."""
    if isinstance(spec, Gaussian):
        return CharFn.gaussian(spec.cov, spec.mean)
    if isinstance(spec, ExponentialProduct):
        return CharFn.exponential(spec.rates)
    if isinstance(spec, Cauchy1D):
        return CharFn.cauchy(spec.scale)
    if isinstance(spec, StableSymmetric1D):
        return CharFn.stable(spec.alpha)
    if isinstance(spec, UniformBody) and spec.body_.kind == "cube":
        b = spec.body_
        return CharFn.uniform_cube(b.n, b.size).affine(np.eye(b.n), b.shift)
    if isinstance(spec, AffineImage):
        return charfn_of(spec.base).affine(spec.matrix, spec.shift)
    raise UnsupportedFamily("no closed-form characteristic function for %s" % spec.family)


def _abs2_1d(chf):
    return lambda t: float(abs(chf(np.array([[t]]))[0]) ** 2)


def chf_norm2_quad(chf, *, max_doublings=80):
    """``integral |phi|^2`` by quadrature over growing symmetric windows.

    In one dimension the window ``[-T, T]`` doubles until ``|phi(T)|`` drops
    below the cutoff and the added shell changes the total by less than the
    stability tolerance.  Higher dimensions use adaptive cubature on the
    whole space.
    """
    if chf.n > 1:
        g = lambda t: np.abs(chf.evaluator(t)) ** 2
        value, err, ok = quadrature.integrate_vectorized(g, [(-math.inf, math.inf)] * chf.n,
                                                         atol=1e-10, rtol=1e-10)
        if not ok or not math.isfinite(value):
            raise NonIntegrable("cubature of |phi|^2 did not converge")
        return Estimate(value, err, "quadrature")
    g = _abs2_1d(chf)
    T = 1.0
    total, err = quadrature.integrate_1d(g, -T, T, epsabs=1e-13, epsrel=1e-12)
    for _ in range(max_doublings):
        shell = 0.0
        for lo, hi in ((-2 * T, -T), (T, 2 * T)):
            v, e = quadrature.integrate_1d(g, lo, hi, epsabs=1e-13, epsrel=1e-12)
            shell += v
            err += e
        total += shell
        T *= 2
        edge = max(abs(chf(np.array([[T]]))[0]), abs(chf(np.array([[-T]]))[0]))
        if edge < CF_CUTOFF and shell < CF_STABLE_TOL:
            return Estimate(total, err + shell, "quadrature", detail={"T": T})
    raise NonIntegrable("|phi|^2 tail did not decay below %g" % CF_CUTOFF)


def chf_norm2(chf, method="auto"):
    """``integral |phi(t)|^2 dt``: closed form when known, else quadrature."""
    if method in ("auto", "closed-form") and chf.norm2_closed is not None:
        return Estimate(float(chf.norm2_closed))
    if method == "closed-form":
        raise InvalidSpec("no closed-form norm for this characteristic function")
    return chf_norm2_quad(chf)


@dataclass(frozen=True)
class PlancherelWindow:
    lower: float
    upper: float
    h2: float
    norm2: float
    gap: float
    sharper_upper: float | None = None

    def as_tuple(self):
        return self.lower, self.upper

    def contains(self, h, tol=0.0):
        return self.lower - tol <= h <= self.upper + tol

    def to_dict(self):
        return {"lower": self.lower, "upper": self.upper, "h2": self.h2, "norm2": self.norm2,
                "gap": self.gap, "sharper_upper": self.sharper_upper}


def h2_from_norm(norm2, n):
    """Renyi entropy of order 2 from ``integral |phi|^2``."""
    return n * math.log(2 * math.pi) - math.log(norm2)


def plancherel_window(chf, convexity="log-concave", beta=None, max_density=None):
    """Two-sided entropy window ``[h_2, h_2 + gap]``.

    The gap is ``n`` for log-concave laws and ``beta * sum 1/(beta - i)`` for
    the power class with ``beta >= n + 1``.  With ``max_density`` the sharper
    upper bound ``-log ||f|| + gap`` is also reported.
    """
    n = chf.n
    if convexity == "log-concave":
        gap = float(n)
    elif convexity in ("kappa", "kappa-concave"):
        if beta is None:
            raise InvalidSpec("the power class needs beta")
        if beta < n + 1:
            raise BetaTooSmall("the window needs beta >= n + 1 (beta=%g)" % beta)
        gap = kconc_upper_bound(n, beta)
    else:
        raise InvalidSpec("convexity must be 'log-concave' or 'kappa'")
    norm2 = chf_norm2(chf).value
    h2 = h2_from_norm(norm2, n)
    sharper = None if max_density is None else -math.log(max_density) + gap
    return PlancherelWindow(h2, h2 + gap, h2, norm2, gap, sharper)


def stable_h2_identity(alpha, n, f0):
    """Both sides of the order-2 identity for a rotation-invariant stable law.

    Returns ``(-log(2**(-n/alpha) f0), n * (log f0**(-1/n) + log(2)/alpha))``.
    """
    if not 0 < alpha <= 2:
        raise InvalidSpec("alpha must lie in (0, 2]")
    h2 = -math.log(2 ** (-n / alpha) * f0)
    rel = n * (-math.log(f0) / n + math.log(2) / alpha)
    return h2, rel


def stable_mode_density(alpha):
    """Density at 0 of the one-dimensional law with chf ``exp(-|t|**alpha)``."""
    return special.gamma(1 + 1 / alpha) / math.pi


def stable_kappa_upper(alpha, n):
    """Upper limit ``(1 - log 2 / alpha) / n`` on the concavity exponent."""
    if not 0 < alpha <= 2:
        raise InvalidSpec("alpha must lie in (0, 2]")
    return (1 - math.log(2) / alpha) / n


# --------------------------------------------------------------------------
# Stationary Gaussian processes
# --------------------------------------------------------------------------

class SpectralModel:
    """Stationary Gaussian process given by autocovariances or a named spectrum.

    Named spectra: ``white`` (``sigma2``), ``ar1`` (``phi``, ``sigma2`` of the
    innovation) and ``ma1`` (``theta``, ``sigma2``).  A model given by
    autocovariances treats lags beyond the list as zero.
    """

    def __init__(self, kind, params=None, autocov=None):
        self.kind = kind
        self.params = dict(params or {})
        if kind == "autocov":
            r = np.asarray(autocov, float).reshape(-1)
            if r.size == 0 or not r[0] > 0:
                raise InvalidSpec("autocovariance needs r_0 > 0")
            self._r = r
        elif kind == "white":
            self.params.setdefault("sigma2", 1.0)
        elif kind == "ar1":
            self.params.setdefault("sigma2", 1.0)
            if not abs(self.params.get("phi", math.nan)) < 1:
                raise InvalidSpec("AR(1) needs |phi| < 1")
        elif kind == "ma1":
            self.params.setdefault("sigma2", 1.0)
            if "theta" not in self.params:
                raise InvalidSpec("MA(1) needs theta")
        else:
            raise InvalidSpec("unknown spectral model %r" % kind)
        if kind != "autocov" and not self.params["sigma2"] > 0:
            raise InvalidSpec("sigma2 must be positive")

    @classmethod
    def white(cls, sigma2=1.0):
        return cls("white", {"sigma2": sigma2})

    @classmethod
    def ar1(cls, phi, sigma2=1.0):
        return cls("ar1", {"phi": phi, "sigma2": sigma2})

    @classmethod
    def ma1(cls, theta, sigma2=1.0):
        return cls("ma1", {"theta": theta, "sigma2": sigma2})

    @classmethod
    def from_autocov(cls, r):
        return cls("autocov", autocov=r)

    def autocov(self, n):
        """``r_0, ..., r_{n-1}``."""
        k = np.arange(n)
        p = self.params
        if self.kind == "autocov":
            out = np.zeros(n)
            m = min(n, self._r.size)
            out[:m] = self._r[:m]
            return out
        if self.kind == "white":
            return np.where(k == 0, p["sigma2"], 0.0)
        if self.kind == "ar1":
            phi = p["phi"]
            return p["sigma2"] / (1 - phi * phi) * phi ** k
        th = p["theta"]
        out = np.zeros(n)
        out[0] = p["sigma2"] * (1 + th * th)
        if n > 1:
            out[1] = p["sigma2"] * th
        return out

    def spectral_density(self, lam):
        lam = np.asarray(lam, float)
        p = self.params
        if self.kind == "white":
            return np.full_like(lam, p["sigma2"])
        if self.kind == "ar1":
            return p["sigma2"] / np.abs(1 - p["phi"] * np.exp(1j * lam)) ** 2
        if self.kind == "ma1":
            return p["sigma2"] * np.abs(1 + p["theta"] * np.exp(1j * lam)) ** 2
        k = np.arange(1, self._r.size)
        return self._r[0] + 2 * np.cos(np.multiply.outer(lam, k)) @ self._r[1:]

    def to_dict(self):
        if self.kind == "autocov":
            return {"autocov": self._r.tolist()}
        return {"spectral_density": self.kind, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d):
        if "autocov" in d:
            return cls.from_autocov(d["autocov"])
        if "spectral_density" in d:
            return cls(d["spectral_density"], d.get("params", {}))
        raise InvalidSpec("model needs 'autocov' or 'spectral_density'")

    def __repr__(self):
        return "SpectralModel(%s)" % self.to_dict()


def prediction_variances(r):
    """Innovation variances ``v_0, ..., v_{n-1}`` of the Toeplitz matrix of ``r``.

    Levinson-Durbin recursion; ``log det R_k`` is the running sum of
    ``log v_j`` for ``j < k``.
    """
    r = np.asarray(r, float)
    n = r.size
    v = np.empty(n)
    v[0] = r[0]
    if not v[0] > 0:
        raise NotPositiveDefinite("r_0 must be positive")
    a = np.zeros(0)
    for k in range(1, n):
        acc = r[k] - a @ r[k - 1:0:-1] if k > 1 else r[1]
        refl = acc / v[k - 1]
        a = np.concatenate([a - refl * a[::-1], [refl]])
        v[k] = v[k - 1] * (1 - refl * refl)
        if not v[k] > 0:
            raise NotPositiveDefinite("Toeplitz matrix of order %d is not positive definite" % (k + 1))
    return v


def toeplitz_logdet_trajectory(model, n_max):
    """``log det R_n`` for ``n = 1..n_max``."""
    return np.cumsum(np.log(prediction_variances(model.autocov(n_max))))


def toeplitz_trajectory(model, n_max):
    """Per-coordinate block entropies ``h(X^n)/n`` for ``n = 1..n_max``."""
    logdet = toeplitz_logdet_trajectory(model, n_max)
    n = np.arange(1, n_max + 1)
    return 0.5 * LOG_2PI_E + 0.5 * logdet / n


def toeplitz_block_entropy(model, n):
    """``h(X^n)/n = log(2 pi e)/2 + log det(R_n) / (2n)``."""
    return float(toeplitz_trajectory(model, n)[-1])


def mean_log_spectrum(model, grid=SZEGO_GRID):
    """``(1/2pi) * integral of log G`` by the trapezoid rule on a periodic grid."""
    lam = 2 * math.pi * np.arange(grid) / grid
    G = model.spectral_density(lam)
    tiny = G <= np.exp(LOG_CLIP)
    if tiny.mean() > 1.0 / 256:
        raise DegenerateSpectrum("spectral density vanishes on a set of positive measure")
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.maximum(np.log(np.where(G > 0, G, 0.0)), LOG_CLIP)
    return float(np.mean(logs))


def szego_rate(model, reading="half"):
    """Entropy rate from the spectral density.

    ``reading="half"`` returns ``log(2 pi e)/2 + (1/2) mean log G``, which is
    the limit of the block entropies.  ``reading="literal"`` drops the factor
    ``1/2`` on the integral term and is kept for comparison.
    """
    m = mean_log_spectrum(model)
    if reading == "half":
        return 0.5 * LOG_2PI_E + 0.5 * m
    if reading == "literal":
        return 0.5 * LOG_2PI_E + m
    raise InvalidSpec("reading must be 'half' or 'literal'")


def gaussian_block_max_density(model, n):
    """``||f_n|| = (2 pi)^{-n/2} det(R_n)^{-1/2}`` for the block ``X^n``."""
    logdet = toeplitz_logdet_trajectory(model, n)[-1]
    return math.exp(-0.5 * n * math.log(2 * math.pi) - 0.5 * logdet)


@dataclass(frozen=True)
class RateBounds:
    f_minus: float
    f_plus: float
    upper_rate: float
    window: tuple

    def to_dict(self):
        return {"f_minus": self.f_minus, "f_plus": self.f_plus,
                "upper_rate": self.upper_rate, "window": list(self.window),
                "liminf_limsup_rule": "min/max over the final %d%% of the horizon"
                % int(100 * TAIL_FRACTION)}


def process_rate_bounds(max_density_seq, horizon=None, *, log_values=False):
    """Tail estimates of liminf/limsup of ``(1/n) log ||f_n||^{-1}`` and ``f_+ + 1``.

    ``max_density_seq`` is a sequence of ``||f_n||`` for ``n = 1, 2, ...`` or
    a callable of ``n`` (then ``horizon`` is required).  With
    ``log_values=True`` the entries are ``log ||f_n||``.
    """
    if callable(max_density_seq):
        if horizon is None:
            raise HorizonTooShort("a callable sequence needs a horizon")
        vals = np.array([max_density_seq(n) for n in range(1, horizon + 1)], float)
    else:
        vals = np.asarray(max_density_seq, float)
    N = vals.size
    if N < MIN_HORIZON:
        raise HorizonTooShort("need at least %d terms, got %d" % (MIN_HORIZON, N))
    logs = vals if log_values else np.log(vals)
    a = -logs / np.arange(1, N + 1)
    start = N - max(1, int(math.ceil(TAIL_FRACTION * N)))
    tail = a[start:]
    fm, fp = float(tail.min()), float(tail.max())
    return RateBounds(fm, fp, fp + 1.0, (start + 1, N))
