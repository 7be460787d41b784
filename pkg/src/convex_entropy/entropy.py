"""Shannon and Renyi entropies and related functionals.

Entropies are in nats.  Each estimator returns an :class:`Estimate` carrying
the value, an uncertainty (zero for closed forms, a quadrature error bound,
or a batch standard error) and the method that produced it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .distributions import (
    AffineImage,
    Gaussian,
    PotentialDensity,
    StableSymmetric1D,
    UniformBody,
    locate_mode,
    max_density,
    moments,
)
from .errors import (
    BetaTooSmall,
    DimensionTooHigh,
    DivergentIntegral,
    InvalidSpec,
    NoClosedForm,
    NonConvergence,
    SingularCovariance,
)

MC_BATCHES = 16
QUAD_TOL = 1e-6
LOG_2PI_E = math.log(2 * math.pi * math.e)


@dataclass
class Estimate:
    value: float
    uncertainty: float = 0.0
    method: str = "closed-form"
    n_samples: int | None = None
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in ("closed-form", "quadrature", "monte-carlo"):
            raise ValueError("unknown method %r" % self.method)
        if self.uncertainty < 0:
            raise ValueError("uncertainty must be non-negative")

    def to_dict(self):
        detail = dict(self.detail)
        if self.n_samples is not None:
            detail["n_samples"] = self.n_samples
        return {"value": self.value, "uncertainty": self.uncertainty,
                "method": self.method, "detail": detail}

    def shifted(self, delta):
        return Estimate(self.value + delta, self.uncertainty, self.method,
                        self.n_samples, dict(self.detail))


# --------------------------------------------------------------------------
# Gaussian matching
# --------------------------------------------------------------------------

@dataclass
class GaussFit:
    """A Gaussian matched to a density by maximum density or by covariance."""

    matched_by: str
    mean: np.ndarray
    cov: np.ndarray

    def gaussian(self):
        return Gaussian(self.cov, self.mean)

    def entropy(self):
        n = self.mean.size
        return 0.5 * (n * LOG_2PI_E + np.linalg.slogdet(self.cov)[1])

    def to_dict(self):
        return {"matched_by": self.matched_by, "mean": self.mean.tolist(),
                "cov": self.cov.tolist()}


def gauss_fit(spec, matched_by="covariance"):
    """Isotropic Gaussian with the same peak height, or Gaussian with equal moments."""
    n = spec.n
    if matched_by == "max-density":
        m = max_density(spec)
        # (2 pi sigma^2)^(n/2) = 1 / ||f||
        sigma2 = m ** (-2.0 / n) / (2 * math.pi)
        return GaussFit("max-density", np.asarray(locate_mode(spec).point, float),
                        sigma2 * np.eye(n))
    if matched_by == "covariance":
        mo = moments(spec)
        return GaussFit("covariance", mo.mean, mo.cov)
    raise InvalidSpec("matched_by must be 'max-density' or 'covariance'")


# --------------------------------------------------------------------------
# Closed forms
# --------------------------------------------------------------------------

def entropy_closed(spec):
    """Exact Shannon entropy for families that have one."""
    if isinstance(spec, (PotentialDensity,)) or (
            isinstance(spec, StableSymmetric1D) and spec.alpha != 2):
        raise NoClosedForm("%s has no closed-form entropy" % spec.family)
    return Estimate(float(spec.entropy()))


def renyi_closed(spec, p):
    """Exact Renyi entropy of order ``p``; ``p = inf`` gives ``-log ||f||``."""
    if p == 1:
        return entropy_closed(spec)
    if p == math.inf:
        return Estimate(-math.log(max_density(spec)))
    if not p > 0:
        raise InvalidSpec("Renyi order must be positive")
    log_int = spec.renyi_integral_log(p)
    if not math.isfinite(log_int):
        raise DivergentIntegral("integral of f**p is infinite")
    return Estimate(float(log_int / (1 - p)))


# --------------------------------------------------------------------------
# Quadrature
# --------------------------------------------------------------------------

def _split_ranges(support, center):
    """Split each coordinate range at the centre so peaks sit on cell edges."""
    pieces = []
    for (lo, hi), c in zip(support, center):
        if lo < c < hi:
            pieces.append([(lo, c), (c, hi)])
        else:
            pieces.append([(lo, hi)])
    return [list(cell) for cell in itertools.product(*pieces)]


def _functional_quad(spec, integrand, *, eps, atol=None):
    """Integrate ``integrand(log f)`` over the support; returns ``(value, err, ok)``.

    ``integrand`` acts elementwise on arrays and must vanish at ``-inf``.
    ``eps`` is the relative tolerance and, unless ``atol`` is given, also the
    absolute one.
    """
    atol = eps if atol is None else atol
    if isinstance(spec, UniformBody):
        def g(x):
            return float(integrand(np.array([float(spec.logpdf(x))]))[0])
        v, e = quadrature.integrate_body(g, spec.body_, epsabs=atol, epsrel=eps)
        return v, e, True

    def gv(x):
        lf = np.atleast_1d(spec.logpdf(x))
        out = np.zeros_like(lf)
        fin = np.isfinite(lf)
        out[fin] = integrand(lf[fin])
        return out

    try:
        center = locate_mode(spec).point
    except NoClosedForm:
        center = np.zeros(spec.n)
    total, err, ok = 0.0, 0.0, True
    for cell in _split_ranges(spec.support_box(), center):
        if spec.n == 1:
            v, e = quadrature.integrate_1d(lambda t: float(gv(np.array([[t]]))[0]),
                                           *cell[0], epsabs=atol, epsrel=eps)
            c = True
        else:
            v, e, c = quadrature.integrate_vectorized(gv, cell, atol=atol, rtol=eps)
        total, err, ok = total + v, err + e, ok and c
    return total, err, ok


def _check_dim(spec):
    if spec.n > 3:
        raise DimensionTooHigh("quadrature is limited to n <= 3 (n=%d)" % spec.n)


def entropy_quad(spec, *, tol=QUAD_TOL):
    """Shannon entropy by adaptive quadrature of ``-f log f`` (n <= 3)."""
    _check_dim(spec)
    if isinstance(spec, AffineImage):
        return entropy_quad(spec.base, tol=tol).shifted(spec.log_abs_det)
    eps = min(1e-8, tol / 100)
    value, err, ok = _functional_quad(spec, lambda lf: -np.exp(lf) * lf, eps=eps)
    est = Estimate(value, err, "quadrature", detail={"error_bound": err})
    if not (ok and math.isfinite(value) and err <= tol):
        raise NonConvergence("entropy quadrature error %g exceeds %g" % (err, tol), partial=est)
    return est


def renyi_quad(spec, p, *, tol=QUAD_TOL):
    """Renyi entropy of order ``p`` from a quadrature of ``f**p`` (n <= 3)."""
    if p == 1:
        return entropy_quad(spec, tol=tol)
    if not p > 0 or p == math.inf:
        raise InvalidSpec("Renyi quadrature needs a finite order p > 0")
    _check_dim(spec)
    if isinstance(spec, AffineImage):
        return renyi_quad(spec.base, p, tol=tol).shifted(spec.log_abs_det)
    eps = min(1e-8, tol / 100)
    integrand = lambda lf: np.exp(p * lf)
    value, err, ok = _functional_quad(spec, integrand, eps=eps)
    if not value > 0 or not math.isfinite(value):
        raise DivergentIntegral("integral of f**p is not a positive finite number")
    if err > eps * value:
        # small integrals: make the absolute tolerance relative to the first pass
        value, err, ok = _functional_quad(spec, integrand, eps=eps, atol=eps * value)
    h = math.log(value) / (1 - p)
    # first-order propagation of the integral's error
    dh = err / (value * abs(1 - p))
    est = Estimate(h, dh, "quadrature", detail={"integral": value, "error_bound": err})
    if not ok or dh > tol:
        raise NonConvergence("Renyi quadrature error %g exceeds %g" % (dh, tol), partial=est)
    return est


# --------------------------------------------------------------------------
# Monte Carlo
# --------------------------------------------------------------------------

def entropy_mc(spec, seed, m, *, batches=MC_BATCHES):
    """Plug-in estimate ``-mean(log f(X_i))`` with a batch standard error.

    The ``m`` draws are split over independent batches, each with its own
    substream spawned from ``seed``.
    """
    m = int(m)
    batches = min(batches, m)
    if batches < 2:
        raise InvalidSpec("Monte Carlo needs at least two samples")
    sizes = np.full(batches, m // batches)
    sizes[: m % batches] += 1
    streams = np.random.SeedSequence(seed).spawn(batches)
    means = np.empty(batches)
    for i, (size, ss) in enumerate(zip(sizes, streams)):
        x = spec.draw(np.random.default_rng(ss), int(size))
        means[i] = -np.mean(spec.logpdf(x))
    value = float(np.average(means, weights=sizes))
    stderr = float(np.std(means, ddof=1) / math.sqrt(batches))
    return Estimate(value, stderr, "monte-carlo", n_samples=m,
                    detail={"batches": batches, "seed": seed})


def entropy(spec, method="auto", *, seed=0, m=200_000):
    """Closed form when available, then quadrature for n <= 3, then Monte Carlo."""
    if method == "closed-form":
        return entropy_closed(spec)
    if method == "quadrature":
        return entropy_quad(spec)
    if method == "monte-carlo":
        return entropy_mc(spec, seed, m)
    if method != "auto":
        raise InvalidSpec("unknown method %r" % method)
    try:
        return entropy_closed(spec)
    except NoClosedForm:
        pass
    if spec.n <= 3:
        return entropy_quad(spec)
    return entropy_mc(spec, seed, m)


# --------------------------------------------------------------------------
# Multivariate Pareto integrals
# --------------------------------------------------------------------------

def _check_pareto(n, beta, a):
    if a <= 0:
        raise InvalidSpec("a must be positive")
    if n < 0 or beta <= n:
        raise BetaTooSmall("integral over the orthant is finite only for beta > n")


def pareto_Z(n, beta, a):
    """Integral of ``(a + x_1 + ... + x_n)**-beta`` over the positive orthant."""
    _check_pareto(n, beta, a)
    return a ** (n - beta) / float(np.prod(beta - np.arange(1, n + 1)))


def pareto_L(n, beta, a):
    """Integral of ``log(a + sum x) * (a + sum x)**-beta`` over the orthant."""
    _check_pareto(n, beta, a)
    return pareto_Z(n, beta, a) * (math.log(a) + float(np.sum(1.0 / (beta - np.arange(1, n + 1)))))


def pareto_Z_recursion(n, beta, a):
    """``Z_n`` as a 1-D integral over the last coordinate of ``Z_{n-1}``."""
    if n < 1:
        raise InvalidSpec("recursion needs n >= 1")
    base = (lambda s: s ** -beta) if n == 1 else (lambda s: pareto_Z(n - 1, beta, s))
    return quadrature.integrate_1d(lambda y: base(a + y), 0.0, math.inf)[0]


def pareto_L_recursion(n, beta, a):
    """``L_n`` as a 1-D integral over the last coordinate of ``L_{n-1}``."""
    if n < 1:
        raise InvalidSpec("recursion needs n >= 1")
    if n == 1:
        base = lambda s: math.log(s) * s ** -beta
    else:
        base = lambda s: pareto_L(n - 1, beta, s)
    return quadrature.integrate_1d(lambda y: base(a + y), 0.0, math.inf)[0]


# --------------------------------------------------------------------------
# Distance from Gaussianity and isotropic constant
# --------------------------------------------------------------------------

def D_gaussianity(spec, method="auto", **kw):
    """Relative entropy from the covariance-matched Gaussian, ``h(Z) - h(X)``."""
    hz = gauss_fit(spec, "covariance").entropy()
    hx = entropy(spec, method, **kw)
    return Estimate(hz - hx.value, hx.uncertainty, hx.method, hx.n_samples,
                    dict(hx.detail, h_gaussian=hz, h=hx.value))


def isotropic_constant(spec):
    """``||f||**(1/n) * det(R)**(1/(2n))``."""
    mo = moments(spec)
    return max_density(spec) ** (1.0 / spec.n) * math.sqrt(mo.sigma2)


def _logdet_pd(R):
    R = np.atleast_2d(np.asarray(R, float))
    if R.shape[0] != R.shape[1]:
        raise InvalidSpec("covariance must be square")
    try:
        L = np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        raise SingularCovariance("covariance is not positive definite") from None
    logdet = 2 * float(np.sum(np.log(np.diag(L))))
    if not math.isfinite(logdet):
        raise SingularCovariance("covariance is singular")
    return R, logdet


def gaussian_independence_distance(R):
    """``I = 0.5 * log(prod(R_ii) / det R)`` for a centred Gaussian with covariance ``R``."""
    R, logdet = _logdet_pd(R)
    return 0.5 * (float(np.sum(np.log(np.diag(R)))) - logdet)


def gaussian_kl(R, R0):
    """Relative entropy of N(0, R) from N(0, R0)."""
    R, ld = _logdet_pd(R)
    R0, ld0 = _logdet_pd(R0)
    n = R.shape[0]
    return 0.5 * (float(np.trace(np.linalg.solve(R0, R))) - n + ld0 - ld)


def gaussian_chain_rule(R, reference_variances=None):
    """Both sides of the relative-entropy chain rule for a Gaussian.

    The reference is the product Gaussian with the given variances (ones by
    default).  Returns ``(D(f||f0), sum_i D(f_i||f0_i) + I(f))``.
    """
    R = np.atleast_2d(np.asarray(R, float))
    v0 = np.ones(R.shape[0]) if reference_variances is None else np.asarray(reference_variances, float)
    lhs = gaussian_kl(R, np.diag(v0))
    marginals = sum(gaussian_kl([[R[i, i]]], [[v0[i]]]) for i in range(R.shape[0]))
    return lhs, marginals + gaussian_independence_distance(R)
