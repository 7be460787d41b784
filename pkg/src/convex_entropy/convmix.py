"""Peak densities of self-convolutions and entropy bounds for scale mixtures.

Self-convolution ``f^{*m}`` is the density of ``X_1 + ... + X_m`` for i.i.d.
``X_i ~ f``.  Scale mixtures use a mixing density ``m`` on ``(0, inf)``:
either over the variance ``v`` of a standard Gaussian base, or over a scalar
scale ``s`` of a log-concave base ``exp(-phi)`` with its mode at 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import interpolate, optimize, special, stats

from . import quadrature
from .distributions import (
    AffineImage,
    Cauchy1D,
    ExponentialProduct,
    Gaussian,
    StableSymmetric1D,
    UniformBody,
    locate_mode,
    max_density,
    moments,
)
from .entropy import Estimate
from .errors import (
    ConditionViolated,
    DivergentMixingMoment,
    GridEvaluationFailed,
    InnerQuadratureFailure,
    InvalidSpec,
    KappaOutOfRange,
    MomentsUndefined,
    NoClosedForm,
    UnsupportedFamily,
)
from .inequalities import make_check

FFT_POINTS = 1 << 16
FFT_SPAN_STD = 12.0
TAIL_RATIO = 1e-16
MAX_SPAN_PEAKS = 400.0
CONVEXITY_GRID = (1e-3, 1e3, 64)
CONVEXITY_REL_TOL = 1e-6
LOG_2PI_E = math.log(2 * math.pi * math.e)


# --------------------------------------------------------------------------
# Self-convolution
# --------------------------------------------------------------------------

def junge_bound(n, kappa, m):
    """``(exp(1 - kappa n) / sqrt(m))**n``, the factor bounding ``||f^{*m}|| / ||f||``."""
    if not -1 <= kappa <= 0:
        raise KappaOutOfRange("kappa must lie in [-1, 0] (got %g)" % kappa)
    if m < 1:
        raise InvalidSpec("m must be >= 1")
    return (math.exp(1 - kappa * n) / math.sqrt(m)) ** n


def spec_kappa(spec):
    """Measure-level concavity exponent: 0 if log-concave, ``-1/(beta - n)`` for the power class."""
    conv = spec.convexity()
    if conv.kind == "unknown":
        raise KappaOutOfRange("convexity class of %s is unknown; pass kappa" % spec.family)
    return conv.kappa_of(spec.n)


@dataclass(frozen=True)
class ConvolutionResult:
    m: int
    peak: float
    method: str
    base_peak: float
    kappa: float
    bound: float
    slack: float
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {"m": self.m, "peak": self.peak, "method": self.method,
                "base_peak": self.base_peak, "kappa": self.kappa, "bound": self.bound,
                "slack": self.slack, "detail": self.detail}


def irwin_hall_peak(m):
    """Exact peak (at ``m/2``) of the density of a sum of ``m`` uniforms on [0, 1]."""
    if m == 1:
        return Fraction(1)
    x = Fraction(m, 2)
    total = Fraction(0)
    for k in range(int(x) + 1):
        total += (-1) ** k * math.comb(m, k) * (x - k) ** (m - 1)
    return total / math.factorial(m - 1)


def gamma_mode_density(m, rate=1.0):
    """Peak density of the sum of ``m`` exponentials with the given rate."""
    if m == 1:
        return rate
    k = m - 1
    return rate * math.exp(k * math.log(k) - k - special.gammaln(m))


def convolution_peak_closed(spec, m):
    """``||f^{*m}||`` in closed form, or raise :class:`NoClosedForm`."""
    if isinstance(spec, AffineImage):
        return convolution_peak_closed(spec.base, m) * math.exp(-spec.log_abs_det)
    if isinstance(spec, Gaussian):
        return max_density(spec) * m ** (-spec.n / 2)
    if isinstance(spec, ExponentialProduct):
        return float(np.prod([gamma_mode_density(m, r) for r in spec.rates]))
    if isinstance(spec, UniformBody) and spec.body_.kind == "cube":
        side = spec.body_.size
        return float(irwin_hall_peak(m)) ** spec.n / side ** spec.n
    if isinstance(spec, Cauchy1D):
        return max_density(spec) / m
    if isinstance(spec, StableSymmetric1D):
        return max_density(spec) * m ** (-1 / spec.alpha)
    raise NoClosedForm("no closed-form self-convolution for %s" % spec.family)


def _grid_range(spec):
    """Interval carrying the density up to a relative tail of ``TAIL_RATIO``."""
    lo, hi = spec.support_box()[0]
    peak = max_density(spec)
    center = float(locate_mode(spec).point[0])
    try:
        width = FFT_SPAN_STD * math.sqrt(moments(spec).sigma2)
    except (MomentsUndefined, NoClosedForm):
        width = FFT_SPAN_STD / peak
    a, b = max(lo, center - width), min(hi, center + width)
    # heavy tails: stop widening once the cells would get coarse
    max_span = MAX_SPAN_PEAKS / peak
    for _ in range(10):
        if b - a >= max_span:
            break
        ok = True
        if a > lo and float(spec.pdf(np.array([[a]]))[0]) > TAIL_RATIO * peak:
            a, ok = max(lo, a - (b - a)), False
        if b < hi and float(spec.pdf(np.array([[b]]))[0]) > TAIL_RATIO * peak:
            b, ok = min(hi, b + (b - a)), False
        if ok:
            break
    return a, b


def _cell_masses(spec, a, b, N):
    """Probabilities of ``N`` equal cells on ``[a, b]`` by 4-point Gauss-Legendre."""
    h = (b - a) / N
    nodes, weights = np.polynomial.legendre.leggauss(4)
    left = a + h * np.arange(N)
    pts = left[:, None] + 0.5 * h * (nodes[None, :] + 1)
    dens = np.asarray(spec.pdf(pts.reshape(-1, 1)), float).reshape(N, 4)
    return 0.5 * h * dens @ weights, h


def _fft_power(p, m):
    L = 1 << int(math.ceil(math.log2(m * p.size)))
    q = np.fft.irfft(np.fft.rfft(p, L) ** m, L)[: m * (p.size - 1) + 1]
    return np.maximum(q, 0.0)


def _refined_max(y):
    """Peak of samples refined by a parabola through the top three."""
    j = int(np.argmax(y))
    if 0 < j < y.size - 1:
        l, c, r = y[j - 1], y[j], y[j + 1]
        denom = l - 2 * c + r
        if denom < 0:
            return float(c - 0.125 * (r - l) ** 2 / denom) if abs(r - l) <= -denom else float(c)
    return float(y[j])


def convolution_peak_fft(spec, m, *, points=FFT_POINTS):
    """``||f^{*m}||`` for a one-dimensional density by FFT on a uniform grid.

    The base density is replaced by cell masses (support endpoints sit on
    cell edges), the masses are convolved ``m`` times, and the result is
    extrapolated in the cell width (Richardson, second order).
    """
    if spec.n != 1:
        raise UnsupportedFamily("the FFT path is one-dimensional")
    a, b = _grid_range(spec)
    if m == 1:
        x = np.linspace(a, b, points + 1)
        return float(np.max(spec.pdf(x[:, None]))), {"grid": [a, b], "points": points}
    peaks = []
    for N in (points // 2, points):
        p, h = _cell_masses(spec, a, b, N)
        peaks.append(_refined_max(_fft_power(p, m) / h))
    coarse, fine = peaks
    return fine + (fine - coarse) / 3.0, {"grid": [a, b], "points": points,
                                          "unextrapolated": fine}


def self_convolve_max(spec, m, kappa=None, method="auto"):
    """Peak of the ``m``-fold self-convolution with its convolution bound."""
    m = int(m)
    if m < 1:
        raise InvalidSpec("m must be >= 1")
    k = spec_kappa(spec) if kappa is None else float(kappa)
    factor = junge_bound(spec.n, k, m)
    base = max_density(spec)
    detail = {}
    if method in ("auto", "closed-form"):
        try:
            peak = convolution_peak_closed(spec, m)
            used = "closed-form"
        except NoClosedForm:
            if method == "closed-form":
                raise
            method = "fft"
    if method == "fft":
        if spec.n != 1:
            raise UnsupportedFamily("generic self-convolution is only available in one dimension")
        peak, detail = convolution_peak_fft(spec, m)
        used = "fft"
    elif method not in ("auto", "closed-form"):
        raise InvalidSpec("method must be 'auto', 'closed-form' or 'fft'")
    bound = factor * base
    return ConvolutionResult(m, float(peak), used, base, k, bound, bound - peak, detail)


# --------------------------------------------------------------------------
# Mixing densities
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Mixing:
    """A named mixing law on ``(0, inf)``: ``gamma``, ``invgamma``, ``lognormal`` or ``point``."""

    family: str
    params: dict

    def __post_init__(self):
        if self.family not in ("gamma", "invgamma", "lognormal", "point"):
            raise InvalidSpec("unknown mixing family %r" % self.family)

    @property
    def dist(self):
        p = self.params
        if self.family == "gamma":
            return stats.gamma(p["shape"], scale=1.0 / p.get("rate", 1.0))
        if self.family == "invgamma":
            return stats.invgamma(p["shape"], scale=p.get("scale", 1.0))
        if self.family == "lognormal":
            return stats.lognorm(p.get("sigma", 1.0), scale=math.exp(p.get("mu", 0.0)))
        raise InvalidSpec("a point mass has no density")

    def logpdf(self, v):
        """log mixing density; closed forms avoid per-call overhead inside quadrature."""
        p = self.params
        v = np.asarray(v, float)
        with np.errstate(divide="ignore", invalid="ignore"):
            lv = np.log(v)
            if self.family == "gamma":
                k, rate = p["shape"], p.get("rate", 1.0)
                out = k * math.log(rate) - special.gammaln(k) + (k - 1) * lv - rate * v
            elif self.family == "invgamma":
                k, sc = p["shape"], p.get("scale", 1.0)
                out = k * math.log(sc) - special.gammaln(k) - (k + 1) * lv - sc / v
            elif self.family == "lognormal":
                mu, sig = p.get("mu", 0.0), p.get("sigma", 1.0)
                out = -lv - math.log(sig * math.sqrt(2 * math.pi)) - (lv - mu) ** 2 / (2 * sig * sig)
            else:
                raise InvalidSpec("a point mass has no density")
            out = np.where(v > 0, out, -np.inf)
        return float(out) if out.ndim == 0 else out

    def sample(self, rng, m):
        if self.family == "point":
            return np.full(m, float(self.params["value"]))
        return self.dist.rvs(size=m, random_state=rng)

    def log_moment(self):
        """``E log V``."""
        p = self.params
        if self.family == "point":
            return math.log(p["value"])
        if self.family == "gamma":
            return float(special.digamma(p["shape"])) - math.log(p.get("rate", 1.0))
        if self.family == "invgamma":
            return math.log(p.get("scale", 1.0)) - float(special.digamma(p["shape"]))
        return float(p.get("mu", 0.0))

    def power_moment(self, r):
        """``E V**r``; raises :class:`DivergentMixingMoment` when infinite."""
        p = self.params
        if self.family == "point":
            return float(p["value"]) ** r
        if self.family == "gamma":
            k, rate = p["shape"], p.get("rate", 1.0)
            if k + r <= 0:
                raise DivergentMixingMoment("E V^%g diverges for shape %g" % (r, k))
            return math.exp(special.gammaln(k + r) - special.gammaln(k) - r * math.log(rate))
        if self.family == "invgamma":
            k, s = p["shape"], p.get("scale", 1.0)
            if k - r <= 0:
                raise DivergentMixingMoment("E V^%g diverges for shape %g" % (r, k))
            return math.exp(special.gammaln(k - r) - special.gammaln(k) + r * math.log(s))
        mu, sig = p.get("mu", 0.0), p.get("sigma", 1.0)
        return math.exp(r * mu + 0.5 * (r * sig) ** 2)

    def to_dict(self):
        return {"family": self.family, **self.params}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        return cls(d.pop("family"), d)


class MixtureSpec:
    """A scale mixture.

    ``parameterization="variance"``: ``Y = sqrt(V) Z`` with ``Z`` standard
    Gaussian on R^n.  ``parameterization="scale"``: ``Y = S X`` with ``X``
    drawn from a log-concave ``base`` whose mode is 0 and ``S ~ m``.
    """

    def __init__(self, n, mixing, parameterization="variance", base=None):
        self.n = int(n)
        self.mixing = mixing if isinstance(mixing, Mixing) else Mixing.from_dict(mixing)
        if parameterization not in ("variance", "scale"):
            raise InvalidSpec("parameterization must be 'variance' or 'scale'")
        self.parameterization = parameterization
        if base is None:
            base = Gaussian.isotropic(self.n)
        if base.n != self.n:
            raise InvalidSpec("base dimension differs from n")
        self.base = base
        if parameterization == "variance" and not (
                isinstance(base, Gaussian) and np.allclose(base.cov, np.eye(self.n))
                and not base.mean.any()):
            raise InvalidSpec("the variance parameterization uses the standard Gaussian base")
        mode = np.asarray(base.mode(), float)
        if np.abs(mode).max() > 1e-6:
            raise InvalidSpec("the base density must have its mode at 0")

    def base_potential_at_zero(self):
        """``phi(0) = -log f(0)`` for the normalized base."""
        return -float(self.base.logpdf(np.zeros(self.n)))

    def to_dict(self):
        d = {"n": self.n, "mixing": self.mixing.to_dict(),
             "parameterization": self.parameterization}
        if self.parameterization == "scale":
            d["base"] = self.base.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        from .distributions import spec_from_dict

        base = spec_from_dict(d["base"]) if "base" in d else None
        return cls(d["n"], Mixing.from_dict(d["mixing"]), d.get("parameterization", "variance"), base)

    def __repr__(self):
        return "MixtureSpec(%s)" % self.to_dict()


@dataclass(frozen=True)
class MixtureBounds:
    """Entropy bracket; unpacks as ``(lower, upper)``."""

    lower: float
    upper: float
    upper_corrected: float | None
    h_base: float
    offsets: dict

    def __iter__(self):
        return iter((self.lower, self.upper))

    def to_dict(self):
        return {"lower": self.lower, "upper": self.upper,
                "upper_corrected": self.upper_corrected, "h_base": self.h_base,
                "offsets": self.offsets}


def mixture_bounds(mix, *, require_condition=True):
    """Entropy bracket for the mixture.

    Variance parameterization: lower ``h(g) + (n/2) E log V`` and upper
    ``h(g) + n/2 - log E[1/V]``.  ``upper_corrected`` is the bound read off
    the peak at 0, ``h(g) + n/2 - log E[V^{-n/2}]``; the two agree at
    ``n = 2``.  Scale parameterization: lower ``h(f) + n E log S`` and upper
    ``n + phi(0) - log E[S^{-n}]``.

    With ``require_condition`` the convexity condition is checked first.
    """
    n = mix.n
    if require_condition and mix.mixing.family != "point":
        check = mixture_logconcavity_condition(mix)
        if check.verdict == "fail":
            raise ConditionViolated("mixing density fails the convexity condition")
    mx = mix.mixing
    if mix.parameterization == "variance":
        hg = 0.5 * n * LOG_2PI_E
        lower_off = 0.5 * n * mx.log_moment()
        upper_off = 0.5 * n - math.log(mx.power_moment(-1))
        corrected_off = 0.5 * n - math.log(mx.power_moment(-n / 2))
        return MixtureBounds(hg + lower_off, hg + upper_off, hg + corrected_off, hg,
                             {"lower": lower_off, "upper": upper_off,
                              "upper_corrected": corrected_off})
    from .entropy import entropy

    hf = entropy(mix.base).value
    lower = hf + n * mx.log_moment()
    upper = n + mix.base_potential_at_zero() - math.log(mx.power_moment(-n))
    return MixtureBounds(lower, upper, None, hf, {"lower": lower - hf, "upper": upper - hf})


def _second_differences(func, v):
    """Second differences of ``func`` on a log-spaced grid, in ``log v``."""
    try:
        y = np.array([func(x) for x in v], float)
    except Exception as exc:
        raise GridEvaluationFailed("could not evaluate the condition on the grid: %s" % exc) from exc
    if not np.all(np.isfinite(y)):
        raise GridEvaluationFailed("condition function is not finite on the grid")
    # unequal spacing in v: divided differences of the second order
    x0, x1, x2 = v[:-2], v[1:-1], v[2:]
    d1 = (y[1:-1] - y[:-2]) / (x1 - x0)
    d2 = (y[2:] - y[1:-1]) / (x2 - x1)
    return 2 * (d2 - d1) / (x2 - x0), y


def mixture_logconcavity_condition(mix, *, grid=CONVEXITY_GRID, samples=400, seed=0):
    """Sufficient condition for a log-concave mixture.

    Variance parameterization: ``(n/2) log v - log m(v)`` must be convex; the
    worst relative second difference on the grid is reported.  Scale
    parameterization: the Hessian of ``phi(x/s) - log m(s) + n log s`` in
    ``(x, s)`` must be positive semidefinite at random sample points.
    """
    mx = mix.mixing
    n = mix.n
    if mx.family == "point":
        raise GridEvaluationFailed("a point mass has no density to test")
    if mix.parameterization == "variance":
        lo, hi, k = grid
        v = np.geomspace(lo, hi, k)
        sd, y = _second_differences(lambda t: 0.5 * n * math.log(t) - float(mx.logpdf(t)), v)
        # relative to the size of the terms being differenced
        scale = np.maximum(np.abs(y[1:-1]), 1.0) / np.maximum(v[1:-1] ** 2, 1e-300)
        worst = float(np.min(sd / scale))
        return make_check("MIXTURE_CONDITION", "convexity", -worst, 0.0,
                          rel_tol=CONVEXITY_REL_TOL, anchor="variance-mixing convexity condition",
                          inputs={"grid": [lo, hi, k], "worst_relative_second_difference": worst})
    rng = np.random.default_rng(seed)
    phi = lambda x: -float(mix.base.logpdf(x))
    logm = lambda s: float(mx.logpdf(s))

    def phibar(z):
        x, s = z[:-1], z[-1]
        return phi(x / s) - logm(s) + n * math.log(s)

    worst = math.inf
    for _ in range(samples):
        s = float(mx.sample(rng, 1)[0])
        # pull towards the mode so the stencil stays inside a bounded support
        x = s * (1 - 1e-2) * mix.base.draw(rng, 1)[0]
        z = np.concatenate([x, [s]])
        H = _fd_hessian(phibar, z, 1e-4 * s)
        if not np.all(np.isfinite(H)):
            raise GridEvaluationFailed("Hessian is not finite at a sample point")
        ev = np.linalg.eigvalsh(0.5 * (H + H.T))
        rel = ev[0] / max(1.0, np.abs(ev).max())
        worst = min(worst, float(rel))
    return make_check("MIXTURE_CONDITION", "hessian", -worst, 0.0, rel_tol=1e-4,
                      anchor="scale-mixing joint convexity condition",
                      inputs={"samples": samples, "worst_relative_eigenvalue": worst})


def _fd_hessian(func, z, step):
    k = z.size
    H = np.empty((k, k))
    h = np.full(k, step)
    f0 = func(z)
    for i in range(k):
        for j in range(i, k):
            ei = np.zeros(k)
            ej = np.zeros(k)
            ei[i] = h[i]
            ej[j] = h[j]
            if i == j:
                val = (func(z + ei) - 2 * f0 + func(z - ei)) / h[i] ** 2
            else:
                val = (func(z + ei + ej) - func(z + ei - ej) - func(z - ei + ej)
                       + func(z - ei - ej)) / (4 * h[i] * h[j])
            H[i, j] = H[j, i] = val
    return H


# --------------------------------------------------------------------------
# Mixture density and Monte Carlo entropy
# --------------------------------------------------------------------------

def _variance_mixture_logpdf_radial(mix, r):
    """log density of the Gaussian variance mixture at radius ``r``, by quadrature in v."""
    n = mix.n
    mx = mix.mixing
    if mx.family == "point":
        v = mx.params["value"]
        return -0.5 * n * math.log(2 * math.pi * v) - r * r / (2 * v)

    def log_integrand(u):
        # v = exp(u) keeps the integrand smooth near 0
        v = math.exp(u)
        return float(mx.logpdf(v)) + u - 0.5 * n * math.log(2 * math.pi * v) - r * r / (2 * v)

    lo, hi = math.log(mx.dist.ppf(1e-15)), math.log(mx.dist.isf(1e-15))
    hi = max(hi, 2 * math.log(max(r, 1e-300)) + 5.0)
    peak = optimize.minimize_scalar(lambda u: -log_integrand(u), bounds=(lo, hi),
                                    method="bounded", options={"xatol": 1e-10})
    u0, top = float(peak.x), -float(peak.fun)
    g = lambda u: math.exp(log_integrand(u) - top)
    total, err = 0.0, 0.0
    for a, b in ((lo - 10.0, u0), (u0, hi + 10.0)):
        val, e = quadrature.integrate_1d(g, a, b, epsabs=0, epsrel=1e-11, limit=400)
        total, err = total + val, err + e
    if not total > 0 or err > 1e-8 * total:
        raise InnerQuadratureFailure("mixture density quadrature failed at r=%g" % r)
    return math.log(total) + top


def _radial_logpdf_vectorized(mix, r, nodes):
    """log mixture density at radii ``r`` by composite Gauss-Legendre in ``log v``."""
    n = mix.n
    mx = mix.mixing
    lo, hi = math.log(mx.dist.ppf(1e-15)), math.log(mx.dist.isf(1e-15))
    # the Gaussian factor pushes mass towards v ~ r^2 / n for large r
    hi = max(hi, math.log(max(r.max(), 1e-300) ** 2) + 5.0)
    panels = nodes // 8
    x, w = np.polynomial.legendre.leggauss(8)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    u = (edges[:-1, None] + half[:, None] * (x[None, :] + 1)).ravel()
    wu = (half[:, None] * w[None, :]).ravel()
    v = np.exp(u)
    base = np.log(wu) + mx.logpdf(v) + u - 0.5 * n * np.log(2 * math.pi * v)
    return special.logsumexp(base[None, :] - (r[:, None] ** 2) / (2 * v[None, :]), axis=1)


def mixture_logpdf_table(mix, r_max, nodes=2049):
    """Spline of the log mixture density against ``asinh(r)`` on ``[0, r_max]``."""
    u = np.linspace(0.0, math.asinh(r_max), nodes)
    r = np.sinh(u)
    if mix.mixing.family == "point":
        vals = np.array([_variance_mixture_logpdf_radial(mix, t) for t in r])
    else:
        vals = _radial_logpdf_vectorized(mix, r, 4096)
        check = _radial_logpdf_vectorized(mix, r, 8192)
        if not np.all(np.isfinite(vals)) or np.max(np.abs(vals - check)) > 1e-9:
            raise InnerQuadratureFailure("mixture density quadrature did not settle")
    return interpolate.CubicSpline(u, vals)


def mixture_logpdf(mix, y):
    """log density of a Gaussian variance mixture at the points ``y``, shape ``(m, n)``."""
    if mix.parameterization != "variance":
        raise UnsupportedFamily("mixture density is implemented for Gaussian variance mixtures")
    y = np.atleast_2d(np.asarray(y, float))
    return np.array([_variance_mixture_logpdf_radial(mix, float(np.linalg.norm(row))) for row in y])


def mixture_entropy_mc(mix, seed, samples, *, batches=16):
    """Plug-in entropy estimate of a Gaussian variance mixture with batch stderr."""
    if mix.parameterization != "variance":
        raise UnsupportedFamily("Monte Carlo mixture entropy is implemented for Gaussian variance mixtures")
    n = mix.n
    samples = int(samples)
    streams = np.random.SeedSequence(seed).spawn(batches)
    sizes = np.full(batches, samples // batches)
    sizes[: samples % batches] += 1
    radii = []
    for size, ss in zip(sizes, streams):
        rng = np.random.default_rng(ss)
        v = mix.mixing.sample(rng, int(size))
        z = rng.standard_normal((int(size), n))
        radii.append(np.linalg.norm(np.sqrt(v)[:, None] * z, axis=1))
    r_max = max(float(r.max()) for r in radii) * 1.01 + 1e-12
    spline = mixture_logpdf_table(mix, r_max)
    means = np.array([-np.mean(spline(np.arcsinh(r))) for r in radii])
    value = float(np.average(means, weights=sizes))
    stderr = float(np.std(means, ddof=1) / math.sqrt(batches))
    return Estimate(value, stderr, "monte-carlo", n_samples=samples,
                    detail={"batches": batches, "seed": seed})


def mixture_entropy_quad(mix, *, tol=1e-8):
    """Entropy of a Gaussian variance mixture by radial quadrature.

    ``h = -|S^{n-1}| * int_0^inf r^{n-1} g(r) log g(r) dr`` with ``g`` from the
    inner quadrature over ``v``.
    """
    if mix.parameterization != "variance":
        raise UnsupportedFamily("quadrature mixture entropy is implemented for Gaussian variance mixtures")
    n = mix.n
    log_sphere = math.log(2.0) + 0.5 * n * math.log(math.pi) - special.gammaln(0.5 * n)

    def integrand(r):
        lg = _variance_mixture_logpdf_radial(mix, r)
        if r == 0.0:
            return 0.0 if n > 1 else -math.exp(log_sphere + lg) * lg
        return -math.exp(log_sphere + (n - 1) * math.log(r) + lg) * lg

    val, err = quadrature.integrate_1d(integrand, 0.0, math.inf, epsabs=tol, epsrel=tol, limit=400)
    if err > 10 * tol * max(1.0, abs(val)):
        raise InnerQuadratureFailure("radial entropy quadrature did not converge")
    return Estimate(val, err, "quadrature", detail={"radial": True})
