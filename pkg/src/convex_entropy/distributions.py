"""Density families, their modes, moments and samplers, and a numeric
kappa-concavity classifier.

Every family is a subclass of :class:`DensitySpec`.  The module-level
functions (:func:`pdf`, :func:`max_density`, :func:`moments`, :func:`sample`,
:func:`kappa_classify`) are the public entry points; they dispatch to the
family methods.

Points are passed as arrays of shape ``(n,)`` or ``(m, n)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import quadrature
from .errors import (
    BetaTooSmall,
    IllConditioned,
    InvalidSpec,
    InversionFailed,
    ModeSearchFailed,
    MomentsUndefined,
    NoClosedForm,
    DivergentIntegral,
    DimensionTooHigh,
    SamplerUnavailable,
    SupportSamplingFailed,
)

# beta closer than this to the dimension is rejected (normalizer blows up)
BETA_MARGIN = 1e-6
KAPPA_REL_TOL = 1e-7


def log_unit_ball_volume(n):
    return 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1)


def unit_ball_volume(n):
    return math.exp(log_unit_ball_volume(n))


def unit_volume_radius(n):
    """Radius of the Euclidean ball of volume one."""
    return math.exp(-log_unit_ball_volume(n) / n)


def _as_points(x, n):
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    x = np.atleast_2d(x.reshape(-1, n) if x.ndim <= 1 else x)
    if x.shape[1] != n:
        raise InvalidSpec("points have dimension %d, expected %d" % (x.shape[1], n))
    return x, single


def _pd_matrix(a, what):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape[0] != a.shape[1] or not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise InvalidSpec("%s must be a symmetric square matrix" % what)
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise InvalidSpec("%s must be positive definite" % what) from None
    return 0.5 * (a + a.T)


# --------------------------------------------------------------------------
# Convex bodies
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Body:
    """A convex body: ball, cube, simplex or ellipsoid, translated by ``shift``.

    Canonical placements before the shift: the ball and ellipsoid are centred
    at the origin, the cube is ``[0, side]^n`` and the simplex is
    ``{x >= 0, x_1 + ... + x_n <= scale}``.  The ellipsoid is
    ``{x : x^T Q^{-1} x <= 1}`` for the shape matrix ``Q``.
    """

    kind: str
    n: int
    size: float = 1.0
    shape: np.ndarray | None = None
    shift: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.kind not in ("ball", "cube", "simplex", "ellipsoid"):
            raise InvalidSpec("unknown body kind %r" % self.kind)
        if self.n < 1:
            raise InvalidSpec("dimension must be >= 1")
        shift = np.zeros(self.n) if self.shift is None else np.asarray(self.shift, float)
        if shift.shape != (self.n,):
            raise InvalidSpec("shift must have length n")
        object.__setattr__(self, "shift", shift)
        if self.kind == "ellipsoid":
            q = _pd_matrix(self.shape, "ellipsoid shape matrix")
            if q.shape != (self.n, self.n):
                raise InvalidSpec("shape matrix must be n x n")
            object.__setattr__(self, "shape", q)
        elif not self.size > 0:
            raise InvalidSpec("body size must be positive")

    @classmethod
    def ball(cls, n, radius=1.0, shift=None):
        return cls("ball", n, float(radius), None, shift)

    @classmethod
    def cube(cls, n, side=1.0, shift=None):
        return cls("cube", n, float(side), None, shift)

    @classmethod
    def simplex(cls, n, scale=1.0, shift=None):
        return cls("simplex", n, float(scale), None, shift)

    @classmethod
    def ellipsoid(cls, shape, shift=None):
        shape = np.atleast_2d(np.asarray(shape, float))
        return cls("ellipsoid", shape.shape[0], 1.0, shape, shift)

    def volume(self):
        n, s = self.n, self.size
        if self.kind == "ball":
            return unit_ball_volume(n) * s ** n
        if self.kind == "cube":
            return s ** n
        if self.kind == "simplex":
            return s ** n / math.factorial(n)
        return unit_ball_volume(n) * math.sqrt(np.linalg.det(self.shape))

    def contains(self, x):
        y = np.atleast_2d(x) - self.shift
        if self.kind == "ball":
            return np.einsum("ij,ij->i", y, y) <= self.size ** 2
        if self.kind == "cube":
            return np.all((y >= 0) & (y <= self.size), axis=1)
        if self.kind == "simplex":
            return np.all(y >= 0, axis=1) & (y.sum(axis=1) <= self.size)
        sol = np.linalg.solve(self.shape, y.T).T
        return np.einsum("ij,ij->i", y, sol) <= 1.0

    def mean(self):
        if self.kind == "cube":
            return self.shift + self.size / 2
        if self.kind == "simplex":
            return self.shift + self.size / (self.n + 1)
        return self.shift.copy()

    def covariance(self):
        n, s = self.n, self.size
        if self.kind == "ball":
            return np.eye(n) * s * s / (n + 2)
        if self.kind == "cube":
            return np.eye(n) * s * s / 12
        if self.kind == "simplex":
            # uniform on the simplex is Dirichlet(1, ..., 1) scaled by s
            scale = s * s / ((n + 1) ** 2 * (n + 2))
            return scale * ((n + 1) * np.eye(n) - np.ones((n, n)))
        return self.shape / (n + 2)

    def bounding_box(self):
        n, s, c = self.n, self.size, self.shift
        if self.kind == "ball":
            return [(c[i] - s, c[i] + s) for i in range(n)]
        if self.kind in ("cube", "simplex"):
            return [(c[i], c[i] + s) for i in range(n)]
        half = np.sqrt(np.diag(self.shape))
        return [(c[i] - half[i], c[i] + half[i]) for i in range(n)]

    def sample(self, rng, m):
        n = self.n
        if self.kind == "cube":
            return self.shift + self.size * rng.random((m, n))
        if self.kind == "simplex":
            e = rng.standard_exponential((m, n + 1))
            return self.shift + self.size * e[:, :n] / e.sum(axis=1, keepdims=True)
        g = rng.standard_normal((m, n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = rng.random(m) ** (1.0 / n)
        y = g * r[:, None]
        if self.kind == "ball":
            return self.shift + self.size * y
        L = np.linalg.cholesky(self.shape)
        return self.shift + y @ L.T

    def to_dict(self):
        d = {"kind": self.kind, "n": self.n, "shift": self.shift.tolist()}
        if self.kind == "ellipsoid":
            d["shape"] = self.shape.tolist()
        else:
            d["size"] = self.size
        return d

    @classmethod
    def from_dict(cls, d):
        kind = d["kind"]
        if kind == "ellipsoid":
            return cls.ellipsoid(d["shape"], d.get("shift"))
        return cls(kind, int(d["n"]), float(d.get("size", 1.0)), None, d.get("shift"))


# --------------------------------------------------------------------------
# Convexity descriptor
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Convexity:
    """Known convexity class of a family.

    ``kind`` is ``"log-concave"``, ``"kappa"`` (density ``phi**-beta`` with
    convex ``phi``) or ``"unknown"``.
    """

    kind: str
    beta: float = math.inf

    def kappa_of(self, n):
        """Measure-level exponent: 0 if log-concave, -1/(beta - n) otherwise."""
        if self.kind == "log-concave":
            return 0.0
        if self.kind == "kappa":
            return -1.0 / (self.beta - n)
        return -math.inf

    @property
    def log_concave(self):
        return self.kind == "log-concave"


# --------------------------------------------------------------------------
# Density families
# --------------------------------------------------------------------------

class DensitySpec:
    """Base class; subclasses implement the family-specific pieces."""

    family = "abstract"
    n: int

    # -- evaluation ---------------------------------------------------------
    def logpdf(self, x):
        raise NotImplementedError

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    # -- closed forms (optional) --------------------------------------------
    def max_density(self):
        raise NoClosedForm("%s has no closed-form maximum density" % self.family)

    def mode(self):
        raise NoClosedForm("%s has no closed-form mode" % self.family)

    def mean_cov(self):
        raise NoClosedForm("%s has no closed-form moments" % self.family)

    def entropy(self):
        raise NoClosedForm("%s has no closed-form entropy" % self.family)

    def renyi_integral_log(self, p):
        """log of the integral of f**p."""
        raise NoClosedForm("%s has no closed-form Renyi entropy" % self.family)

    def convexity(self):
        return Convexity("unknown")

    # -- integration geometry -------------------------------------------------
    def support_box(self):
        return [(-math.inf, math.inf)] * self.n

    def body(self):
        """The support as a :class:`Body` when it is one, else ``None``."""
        return None

    def breakpoints(self):
        """Hints for 1-D quadrature (kinks and peaks)."""
        return []

    # -- sampling -------------------------------------------------------------
    def draw(self, rng, m):
        raise SamplerUnavailable("%s has no sampler" % self.family)

    # -- serialization ---------------------------------------------------------
    def params(self):
        raise NotImplementedError

    def to_dict(self):
        return {"family": self.family, "params": self.params()}

    def __repr__(self):
        return "%s(%s)" % (type(self).__name__, self.params())


class Gaussian(DensitySpec):
    family = "gaussian"

    def __init__(self, cov, mean=None):
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        self.cov = _pd_matrix(cov, "covariance")
        self.n = self.cov.shape[0]
        self.mean = np.zeros(self.n) if mean is None else np.asarray(mean, float).reshape(self.n)
        self._chol = np.linalg.cholesky(self.cov)
        self._logdet = 2.0 * np.log(np.diag(self._chol)).sum()

    @classmethod
    def isotropic(cls, n, variance=1.0, mean=None):
        return cls(np.eye(n) * variance, mean)

    def logpdf(self, x):
        x, single = _as_points(x, self.n)
        z = np.linalg.solve(self._chol, (x - self.mean).T)
        out = -0.5 * (z * z).sum(axis=0) - 0.5 * (self.n * math.log(2 * math.pi) + self._logdet)
        return out[0] if single else out

    def max_density(self):
        return math.exp(-0.5 * (self.n * math.log(2 * math.pi) + self._logdet))

    def mode(self):
        return self.mean.copy()

    def mean_cov(self):
        return self.mean.copy(), self.cov.copy()

    def entropy(self):
        return 0.5 * (self.n * math.log(2 * math.pi * math.e) + self._logdet)

    def renyi_integral_log(self, p):
        n = self.n
        return (-(p - 1) / 2 * (n * math.log(2 * math.pi) + self._logdet)
                - n / 2 * math.log(p))

    def convexity(self):
        return Convexity("log-concave")

    def breakpoints(self):
        return [float(self.mean[0])]

    def draw(self, rng, m):
        return self.mean + rng.standard_normal((m, self.n)) @ self._chol.T

    def params(self):
        return {"cov": self.cov.tolist(), "mean": self.mean.tolist()}


class ExponentialProduct(DensitySpec):
    """Independent exponential coordinates on the positive orthant."""

    family = "exponential_product"

    def __init__(self, rates):
        self.rates = np.atleast_1d(np.asarray(rates, dtype=float))
        if np.any(self.rates <= 0):
            raise InvalidSpec("rates must be positive")
        self.n = self.rates.size

    @classmethod
    def unit(cls, n):
        return cls(np.ones(n))

    def logpdf(self, x):
        x, single = _as_points(x, self.n)
        inside = np.all(x >= 0, axis=1)
        val = np.log(self.rates).sum() - x @ self.rates
        out = np.where(inside, val, -np.inf)
        return out[0] if single else out

    def max_density(self):
        return float(np.prod(self.rates))

    def mode(self):
        return np.zeros(self.n)

    def mean_cov(self):
        return 1.0 / self.rates, np.diag(1.0 / self.rates ** 2)

    def entropy(self):
        return float(np.sum(1.0 - np.log(self.rates)))

    def renyi_integral_log(self, p):
        return float(np.sum((p - 1) * np.log(self.rates) - math.log(p)))

    def convexity(self):
        return Convexity("log-concave")

    def support_box(self):
        return [(0.0, math.inf)] * self.n

    def breakpoints(self):
        return [0.0]

    def draw(self, rng, m):
        return rng.standard_exponential((m, self.n)) / self.rates

    def params(self):
        return {"rates": self.rates.tolist()}


class UniformBody(DensitySpec):
    family = "uniform_body"

    def __init__(self, body):
        self.body_ = body if isinstance(body, Body) else Body.from_dict(body)
        self.n = self.body_.n
        self._vol = self.body_.volume()

    def logpdf(self, x):
        x, single = _as_points(x, self.n)
        out = np.where(self.body_.contains(x), -math.log(self._vol), -np.inf)
        return out[0] if single else out

    def max_density(self):
        return 1.0 / self._vol

    def mode(self):
        return self.body_.mean()

    def mean_cov(self):
        return self.body_.mean(), self.body_.covariance()

    def entropy(self):
        return math.log(self._vol)

    def renyi_integral_log(self, p):
        return (1 - p) * math.log(self._vol)

    def convexity(self):
        return Convexity("log-concave")

    def support_box(self):
        return self.body_.bounding_box()

    def body(self):
        return self.body_

    def draw(self, rng, m):
        return self.body_.sample(rng, m)

    def params(self):
        return {"body": self.body_.to_dict()}


class ParetoMV(DensitySpec):
    """Density proportional to ``(a + x_1 + ... + x_n)**-beta`` on the orthant."""

    family = "pareto"

    def __init__(self, n, beta, a=1.0):
        self.n, self.beta, self.a = int(n), float(beta), float(a)
        if self.a <= 0:
            raise InvalidSpec("a must be positive")
        if self.beta <= self.n:
            raise BetaTooSmall("Pareto density needs beta > n (beta=%g, n=%d)" % (self.beta, self.n))
        if self.beta - self.n < BETA_MARGIN:
            raise IllConditioned("beta - n = %g is below %g" % (self.beta - self.n, BETA_MARGIN))
        # log of (beta-1)...(beta-n) = 1 / (a**(n-beta) Z)
        self._log_falling = float(np.sum(np.log(self.beta - np.arange(1, self.n + 1))))
        self._log_norm = -self._log_falling - (self.beta - self.n) * math.log(self.a)

    def logpdf(self, x):
        x, single = _as_points(x, self.n)
        inside = np.all(x >= 0, axis=1)
        s = self.a + np.where(inside, x.sum(axis=1), 0.0)
        out = np.where(inside, -self.beta * np.log(s) - self._log_norm, -np.inf)
        return out[0] if single else out

    def max_density(self):
        return math.exp(self._log_falling - self.n * math.log(self.a))

    def mode(self):
        return np.zeros(self.n)

    def mean_cov(self):
        k = self.beta - self.n
        if k <= 2:
            raise MomentsUndefined("Pareto covariance needs beta > n + 2")
        a = self.a
        mean = np.full(self.n, a / (k - 1))
        second = a * a * (np.ones((self.n, self.n)) + np.eye(self.n)) / ((k - 1) * (k - 2))
        return mean, second - np.outer(mean, mean)

    def entropy(self):
        return self.beta * float(np.sum(1.0 / (self.beta - np.arange(1, self.n + 1)))) \
            - math.log(self.max_density())

    def renyi_integral_log(self, p):
        bp = self.beta * p
        if bp <= self.n:
            raise DivergentIntegral("integral of f**p diverges for p*beta <= n")
        log_z_bp = -float(np.sum(np.log(bp - np.arange(1, self.n + 1)))) - (bp - self.n) * math.log(self.a)
        return -p * self._log_norm + log_z_bp

    def convexity(self):
        return Convexity("kappa", self.beta)

    def support_box(self):
        return [(0.0, math.inf)] * self.n

    def breakpoints(self):
        return [0.0]

    def draw(self, rng, m):
        # coordinates are peeled off from the last one: its marginal is a 1-D
        # Pareto with exponent beta-k+1, and the rest is Pareto(k-1, beta, a+x)
        u = rng.random((m, self.n))
        x = np.empty((m, self.n))
        scale = np.full(m, self.a)
        for k in range(self.n, 0, -1):
            gamma = self.beta - k + 1
            x[:, k - 1] = scale * ((1.0 - u[:, k - 1]) ** (-1.0 / (gamma - 1)) - 1.0)
            scale = scale + x[:, k - 1]
        return x

    def params(self):
        return {"n": self.n, "beta": self.beta, "a": self.a}


class Cauchy1D(DensitySpec):
    family = "cauchy"

    def __init__(self, scale=1.0):
        self.scale = float(scale)
        if self.scale <= 0:
            raise InvalidSpec("scale must be positive")
        self.n = 1

    def logpdf(self, x):
        x, single = _as_points(x, 1)
        u = x[:, 0] / self.scale
        out = -math.log(math.pi * self.scale) - np.log1p(u * u)
        return out[0] if single else out

    def max_density(self):
        return 1.0 / (math.pi * self.scale)

    def mode(self):
        return np.zeros(1)

    def mean_cov(self):
        raise MomentsUndefined("Cauchy distribution has no mean or variance")

    def entropy(self):
        return math.log(4 * math.pi * self.scale)

    def renyi_integral_log(self, p):
        if p <= 0.5:
            raise DivergentIntegral("integral of Cauchy f**p diverges for p <= 1/2")
        s = self.scale
        return (-p * math.log(math.pi) + (1 - p) * math.log(s) + 0.5 * math.log(math.pi)
                + special.gammaln(p - 0.5) - special.gammaln(p))

    def convexity(self):
        return Convexity("kappa", 2.0)

    def breakpoints(self):
        return [0.0]

    def draw(self, rng, m):
        return (self.scale * np.tan(math.pi * (rng.random(m) - 0.5)))[:, None]

    def params(self):
        return {"scale": self.scale}


class StableSymmetric1D(DensitySpec):
    """Symmetric alpha-stable law with characteristic function exp(-|t|**alpha)."""

    family = "stable"
    CF_CUTOFF = 1e-12

    def __init__(self, alpha):
        self.alpha = float(alpha)
        if not 0 < self.alpha <= 2:
            raise InvalidSpec("alpha must lie in (0, 2]")
        self.n = 1
        self._tmax = (-math.log(self.CF_CUTOFF)) ** (1.0 / self.alpha)

    def _density_at(self, x):
        from scipy import integrate
        import warnings

        a = self.alpha
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            if x == 0:
                val, err = integrate.quad(lambda t: math.exp(-t ** a), 0, self._tmax,
                                          epsabs=1e-14, epsrel=1e-12, limit=400)
            else:
                val, err = integrate.quad(lambda t: math.exp(-t ** a), 0, self._tmax,
                                          weight="cos", wvar=abs(x), epsabs=1e-14,
                                          epsrel=1e-12, limit=400)
        if not np.isfinite(val) or err > 1e-8:
            raise InversionFailed("Fourier inversion did not converge at x=%g" % x, partial=val / math.pi)
        return max(val / math.pi, 0.0)

    def pdf(self, x):
        x, single = _as_points(x, 1)
        out = np.array([self._density_at(float(v)) for v in x[:, 0]])
        return out[0] if single else out

    def logpdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))

    def max_density(self):
        # value at the mode 0: (1/pi) * Gamma(1 + 1/alpha)
        return math.gamma(1 + 1 / self.alpha) / math.pi

    def mode(self):
        return np.zeros(1)

    def mean_cov(self):
        if self.alpha < 2:
            raise MomentsUndefined("stable law with alpha < 2 has infinite variance")
        return np.zeros(1), np.array([[2.0]])

    def entropy(self):
        if self.alpha == 2:
            return 0.5 * math.log(2 * math.pi * math.e * 2.0)
        return super().entropy()

    def renyi_integral_log(self, p):
        if p == 2:
            # Plancherel: integral f^2 = (1/2pi) * 2^(1-1/alpha) Gamma(1/alpha) / alpha
            a = self.alpha
            return math.log((2 ** (1 - 1 / a)) * math.gamma(1 / a) / a / (2 * math.pi))
        return super().renyi_integral_log(p)

    def convexity(self):
        if self.alpha == 2:
            return Convexity("log-concave")
        return Convexity("unknown")

    def breakpoints(self):
        return [0.0]

    def draw(self, rng, m):
        # Chambers-Mallows-Stuck, symmetric case
        a = self.alpha
        v = math.pi * (rng.random(m) - 0.5)
        w = rng.standard_exponential(m)
        if a == 1:
            x = np.tan(v)
        else:
            x = (np.sin(a * v) / np.cos(v) ** (1 / a)
                 * (np.cos(v - a * v) / w) ** ((1 - a) / a))
        return x[:, None]

    def params(self):
        return {"alpha": self.alpha}


_EXPR_NAMESPACE = {
    name: getattr(np, name)
    for name in ("abs", "exp", "log", "log1p", "sqrt", "sum", "maximum", "minimum",
                 "sin", "cos", "tan", "arctan", "cosh", "sinh", "tanh", "where", "pi", "e",
                 "square", "hypot")
}


def compile_expression(expr, n):
    """Turn an expression in ``x`` (``x[0]`` .. ``x[n-1]``) into a callable.

    The callable takes an array whose first axis indexes coordinates, so the
    same expression evaluates one point or a batch.
    """
    code = compile(expr, "<phi>", "eval")

    def func(x):
        return eval(code, {"__builtins__": {}}, dict(_EXPR_NAMESPACE, x=x, n=n))

    func.expr = expr
    return func


class PotentialDensity(DensitySpec):
    """Density ``phi(x)**-beta`` (or ``exp(-phi(x))``) on a box, up to normalization.

    ``phi`` is a convex function given as a callable acting on arrays whose
    first axis indexes coordinates, or as an expression string for
    :func:`compile_expression`.  ``beta=None`` selects the log-concave form.
    The normalizing constant is computed by quadrature unless supplied.
    """

    family = "potential"

    def __init__(self, n, phi, beta=None, support=None, normalizer=None):
        self.n = int(n)
        if isinstance(phi, str):
            self.expr = phi
            phi = compile_expression(phi, self.n)
        else:
            self.expr = getattr(phi, "expr", None)
        self.phi = phi
        self.beta = None if beta is None or beta == math.inf else float(beta)
        if self.beta is not None:
            if self.beta <= self.n:
                raise BetaTooSmall("potential density needs beta > n")
            if self.beta - self.n < BETA_MARGIN:
                raise IllConditioned("beta - n is below %g" % BETA_MARGIN)
        box = support if support is not None else [(-math.inf, math.inf)] * self.n
        self.support = [(float(lo), float(hi)) for lo, hi in box]
        if len(self.support) != self.n:
            raise InvalidSpec("support must list one interval per coordinate")
        self._log_z = None if normalizer is None else math.log(normalizer)
        self._mode = None

    # unnormalized log density on coordinates-first arrays
    def _log_unnorm(self, xt):
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.asarray(self.phi(xt), dtype=float)
            if self.beta is None:
                return -v
            return np.where(v > 0, -self.beta * np.log(np.where(v > 0, v, 1.0)), -np.inf)

    def _inside(self, x):
        ok = np.ones(x.shape[0], dtype=bool)
        for i, (lo, hi) in enumerate(self.support):
            ok &= (x[:, i] > lo) & (x[:, i] < hi)
        return ok

    @property
    def log_normalizer(self):
        if self._log_z is None:
            if self.n > 3:
                raise DimensionTooHigh("normalizer quadrature needs n <= 3; pass normalizer")
            mode = self.mode()
            shift = float(self._log_unnorm(mode[:, None])[0])

            def g(p):
                return math.exp(float(self._log_unnorm(p[:, None])[0]) - shift)

            if self.n == 1:
                lo, hi = self.support[0]
                z, _ = quadrature.integrate_1d(lambda t: g(np.array([t])), lo, hi,
                                               points=[float(mode[0])])
            else:
                z, _ = quadrature.integrate_box(g, self.support)
            self._log_z = math.log(z) + shift
        return self._log_z

    def logpdf(self, x):
        x, single = _as_points(x, self.n)
        inside = self._inside(x)
        out = np.full(x.shape[0], -np.inf)
        if inside.any():
            out[inside] = self._log_unnorm(x[inside].T) - self.log_normalizer
        return out[0] if single else out

    def potential(self, x):
        """phi at a single point, +inf outside the support."""
        x = np.asarray(x, float)
        if not self._inside(x[None, :])[0]:
            return math.inf
        v = float(np.asarray(self.phi(x[:, None])).reshape(-1)[0])
        if self.beta is not None and v <= 0:
            return math.inf
        return v

    def mode(self):
        if self._mode is None:
            self._mode = locate_mode(self).point
        return self._mode.copy()

    def max_density(self):
        return float(np.exp(self.logpdf(self.mode())))

    def mean_cov(self):
        if self.beta is not None and self.beta <= self.n + 2:
            raise MomentsUndefined("second moments need beta > n + 2")
        if self.n > 3:
            raise DimensionTooHigh("moment quadrature needs n <= 3")
        n = self.n
        f = lambda p: float(np.exp(self.logpdf(p)))
        mean = np.array([quadrature.integrate_box(lambda p, i=i: p[i] * f(p), self.support)[0]
                         for i in range(n)])
        cov = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                v, _ = quadrature.integrate_box(
                    lambda p, i=i, j=j: (p[i] - mean[i]) * (p[j] - mean[j]) * f(p), self.support)
                cov[i, j] = cov[j, i] = v
        return mean, cov

    def convexity(self):
        if self.beta is None:
            return Convexity("log-concave")
        return Convexity("kappa", self.beta)

    def support_box(self):
        return list(self.support)

    def breakpoints(self):
        try:
            return [float(self.mode()[0])]
        except ModeSearchFailed:
            return []

    def draw(self, rng, m):
        if self.n != 1:
            raise SamplerUnavailable("potential densities are sampled only in one dimension")
        grid, cdf = self._cdf_table()
        u = rng.random(m)
        return np.interp(u, cdf, grid)[:, None]

    def _cdf_table(self, size=1 << 15):
        if getattr(self, "_table", None) is None:
            lo, hi = self.support[0]
            c = float(self.mode()[0])
            # map t in (-1, 1) onto the support, densely around the mode
            t = np.linspace(-1, 1, size + 1)[1:-1]
            if math.isinf(lo) and math.isinf(hi):
                x = c + np.tan(t * math.pi / 2)
                dx = (math.pi / 2) / np.cos(t * math.pi / 2) ** 2
            elif math.isinf(hi):
                s = (t + 1) / 2
                x = lo + s / (1 - s)
                dx = 0.5 / (1 - s) ** 2
            elif math.isinf(lo):
                s = (t + 1) / 2
                x = hi - (1 - s) / s
                dx = 0.5 / s ** 2
            else:
                x = lo + (hi - lo) * (t + 1) / 2
                dx = np.full_like(t, (hi - lo) / 2)
            dens = np.exp(self.logpdf(x[:, None])) * dx
            cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(t))])
            cdf /= cdf[-1]
            keep = np.concatenate([[True], np.diff(cdf) > 0])
            self._table = (x[keep], cdf[keep])
        return self._table

    def params(self):
        if self.expr is None:
            raise InvalidSpec("only expression-based potentials serialize")
        d = {"n": self.n, "phi": self.expr, "beta": self.beta,
             "support": [list(b) for b in self.support]}
        if self._log_z is not None:
            d["normalizer"] = math.exp(self._log_z)
        return d


class AffineImage(DensitySpec):
    """Law of ``A X + b`` for ``X`` drawn from ``base`` and invertible ``A``."""

    family = "affine"

    def __init__(self, base, matrix, shift=None):
        self.base = base
        self.n = base.n
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        if self.matrix.shape != (self.n, self.n):
            raise InvalidSpec("matrix must be n x n")
        sign, logdet = np.linalg.slogdet(self.matrix)
        if sign == 0 or not np.isfinite(logdet):
            raise InvalidSpec("affine matrix must be invertible")
        self.log_abs_det = float(logdet)
        self.shift = np.zeros(self.n) if shift is None else np.asarray(shift, float).reshape(self.n)
        self._inv = np.linalg.inv(self.matrix)

    def to_base(self, x):
        return (x - self.shift) @ self._inv.T

    def logpdf(self, x):
        x, single = _as_points(x, self.n)
        out = self.base.logpdf(self.to_base(x)) - self.log_abs_det
        out = np.atleast_1d(out)
        return out[0] if single else out

    def max_density(self):
        return max_density(self.base) * math.exp(-self.log_abs_det)

    def mode(self):
        return self.matrix @ self.base.mode() + self.shift

    def mean_cov(self):
        mu, cov = self.base.mean_cov()
        return self.matrix @ mu + self.shift, self.matrix @ cov @ self.matrix.T

    def entropy(self):
        return self.base.entropy() + self.log_abs_det

    def renyi_integral_log(self, p):
        return self.base.renyi_integral_log(p) + (1 - p) * self.log_abs_det

    def convexity(self):
        return self.base.convexity()

    def draw(self, rng, m):
        return self.base.draw(rng, m) @ self.matrix.T + self.shift

    def support_box(self):
        box = self.base.support_box()
        A = self.matrix
        diagonal = not np.any(A - np.diag(np.diag(A)))
        if diagonal:
            out = []
            for (lo, hi), a, b in zip(box, np.diag(A), self.shift):
                ends = sorted((a * lo + b, a * hi + b))
                out.append((float(ends[0]), float(ends[1])))
            return out
        if all(math.isfinite(v) for pair in box for v in pair):
            corners = np.array(list(itertools.product(*box))) @ A.T + self.shift
            return list(zip(corners.min(axis=0).tolist(), corners.max(axis=0).tolist()))
        return [(-math.inf, math.inf)] * self.n

    def breakpoints(self):
        if self.n != 1:
            return []
        a, b = self.matrix[0, 0], self.shift[0]
        return sorted(a * t + b for t in self.base.breakpoints())

    def params(self):
        return {"base": self.base.to_dict(), "matrix": self.matrix.tolist(),
                "shift": self.shift.tolist()}


FAMILIES = {
    "gaussian": lambda p: Gaussian(p["cov"], p.get("mean")),
    "exponential_product": lambda p: ExponentialProduct(p["rates"]),
    "uniform_body": lambda p: UniformBody(Body.from_dict(p["body"])),
    "pareto": lambda p: ParetoMV(p["n"], p["beta"], p.get("a", 1.0)),
    "cauchy": lambda p: Cauchy1D(p.get("scale", 1.0)),
    "stable": lambda p: StableSymmetric1D(p["alpha"]),
    "potential": lambda p: PotentialDensity(p["n"], p["phi"], p.get("beta"),
                                            p.get("support"), p.get("normalizer")),
    "affine": lambda p: AffineImage(spec_from_dict(p["base"]), p["matrix"], p.get("shift")),
}


def spec_from_dict(d):
    """Build a spec from ``{"family": ..., "params": {...}}``."""
    try:
        builder = FAMILIES[d["family"]]
    except KeyError:
        raise InvalidSpec("unknown family %r" % d.get("family")) from None
    return builder(d.get("params", {}))


def spec_to_dict(spec):
    return spec.to_dict()


# --------------------------------------------------------------------------
# Public operations
# --------------------------------------------------------------------------

def pdf(spec, x):
    """Density of ``spec`` at ``x`` (0 outside the support)."""
    return spec.pdf(x)


def logpdf(spec, x):
    return spec.logpdf(x)


@dataclass
class ModeResult:
    point: np.ndarray
    value: float
    grad_norm: float
    iterations: int
    converged: bool


def _fd_gradient(func, x, f0):
    g = np.empty_like(x)
    for i in range(x.size):
        h = 1e-6 * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        fp, fm = func(x + e), func(x - e)
        if math.isinf(fp) and math.isinf(fm):
            g[i] = 0.0
        elif math.isinf(fp):
            g[i] = (f0 - fm) / h
        elif math.isinf(fm):
            g[i] = (fp - f0) / h
        else:
            g[i] = (fp - fm) / (2 * h)
    return g


def _start_point(support):
    x = []
    for lo, hi in support:
        if math.isinf(lo) and math.isinf(hi):
            x.append(0.0)
        elif math.isinf(hi):
            x.append(lo + 1.0)
        elif math.isinf(lo):
            x.append(hi - 1.0)
        else:
            x.append(0.5 * (lo + hi))
    return np.array(x)


def minimize_convex(func, x0, *, grad_tol=1e-8, max_iter=20000):
    """Backtracking gradient descent with central finite differences.

    Returns ``(x, f(x), grad_norm, iterations, converged)``.  A stalled line
    search counts as converged (kinks and boundary minima stall there).
    """
    x = np.asarray(x0, float)
    fx = func(x)
    if not math.isfinite(fx):
        raise ModeSearchFailed("start point is outside the domain", partial=x)
    step = 1.0
    gn = math.inf
    for it in range(1, max_iter + 1):
        g = _fd_gradient(func, x, fx)
        gn = float(np.linalg.norm(g))
        if gn <= grad_tol:
            return x, fx, gn, it, True
        t = min(step * 2, 1e6)
        while t > 1e-18:
            cand = x - t * g
            fc = func(cand)
            if math.isfinite(fc) and fc <= fx - 1e-4 * t * gn * gn:
                break
            t *= 0.5
        else:
            return x, fx, gn, it, True
        x, fx, step = cand, fc, t
    return x, fx, gn, max_iter, False


def locate_mode(spec):
    """Mode of a potential density by descent on phi."""
    if not isinstance(spec, PotentialDensity):
        m = spec.mode()
        return ModeResult(m, float(spec.pdf(m)), 0.0, 0, True)
    x, fx, gn, it, ok = minimize_convex(spec.potential, _start_point(spec.support))
    if not ok:
        raise ModeSearchFailed("mode search did not converge (|grad|=%g)" % gn, partial=x)
    return ModeResult(x, fx, gn, it, ok)


def max_density(spec):
    """Essential supremum of the density."""
    return float(spec.max_density())


@dataclass
class Moments:
    mean: np.ndarray
    cov: np.ndarray
    sigma2: float
    stderr: float = 0.0

    def to_dict(self):
        return {"mean": self.mean.tolist(), "cov": self.cov.tolist(),
                "sigma2": self.sigma2, "stderr": self.stderr}


def moments(spec):
    """Mean, covariance and ``det(cov)**(1/n)``."""
    mean, cov = spec.mean_cov()
    cov = np.atleast_2d(cov)
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise MomentsUndefined("covariance is singular")
    return Moments(np.atleast_1d(mean), cov, math.exp(logdet / spec.n))


def sample(spec, seed, m):
    """``m`` i.i.d. draws, shape ``(m, n)``; deterministic in ``seed``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.default_rng(seed)
    return spec.draw(rng, int(m))


def kappa_n(kappa, n):
    """Density-level exponent kappa / (1 - n kappa)."""
    if kappa == -math.inf:
        return -1.0 / n
    if kappa >= 1.0 / n:
        return math.inf
    return kappa / (1 - n * kappa)


def power_mean(a, b, t, r):
    """Weighted power mean ``(t a**r + (1-t) b**r)**(1/r)`` with the usual limits."""
    if r == math.inf:
        return np.maximum(a, b)
    if r == -math.inf:
        return np.minimum(a, b)
    if r == 0:
        with np.errstate(divide="ignore"):
            return np.exp(t * np.log(a) + (1 - t) * np.log(b))
    a, b, t = np.asarray(a, float), np.asarray(b, float), np.asarray(t, float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        la, lb = np.log(a), np.log(b)
        # expm1/log1p keep orders near 0 accurate; logaddexp covers large |r log x|
        s = t * np.expm1(r * la) + (1 - t) * np.expm1(r * lb)
        near = np.log1p(s) / r
        far = np.logaddexp(np.log(t) + r * la, np.log1p(-t) + r * lb) / r
        out = np.exp(np.where(np.isfinite(s), near, far))
    return out if out.ndim else float(out)


@dataclass
class KappaReport:
    kappa: float
    trials: int
    worst_violation: float
    verdict: str
    tolerance: float = KAPPA_REL_TOL

    def to_dict(self):
        return {"kappa": self.kappa, "trials": self.trials,
                "worst_violation": self.worst_violation, "verdict": self.verdict,
                "tolerance": self.tolerance}


def kappa_classify(spec, kappa, trials=2000, seed=0, tol=KAPPA_REL_TOL):
    """Test the density-level kappa_n-concavity inequality on random triples.

    Points come from the spec's own sampler; the reported violation is
    ``(rhs - lhs) / rhs`` maximized over the triples.
    """
    n = spec.n
    if kappa > 1.0 / n:
        raise InvalidSpec("kappa must not exceed 1/n")
    rng = np.random.default_rng(seed)
    x = spec.draw(rng, trials)
    y = spec.draw(rng, trials)
    t = rng.random(trials)
    fx, fy = np.atleast_1d(spec.pdf(x)), np.atleast_1d(spec.pdf(y))
    ok = (fx > 0) & (fy > 0)
    if not ok.any():
        raise SupportSamplingFailed("no sampled point landed in the support")
    x, y, t, fx, fy = x[ok], y[ok], t[ok], fx[ok], fy[ok]
    z = t[:, None] * x + (1 - t[:, None]) * y
    fz = np.atleast_1d(spec.pdf(z))
    rhs = power_mean(fx, fy, t, kappa_n(kappa, n))
    violation = float(np.max((rhs - fz) / rhs))
    verdict = "pass" if violation <= tol else "fail"
    return KappaReport(float(kappa), int(ok.sum()), violation, verdict, tol)
