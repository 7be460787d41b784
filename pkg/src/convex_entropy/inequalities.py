"""Executable bound checks.

Each catalog entry turns one inequality about entropies, maximum densities,
moments or integral norms into computable left and right sides.  A
two-sided statement produces one :class:`BoundCheck` per side.  Every side
is arranged as ``lhs <= rhs`` with ``slack = rhs - lhs``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from . import quadrature
from .distributions import (
    PotentialDensity,
    UniformBody,
    compile_expression,
    kappa_classify,
    locate_mode,
    max_density,
    moments,
    log_unit_ball_volume,
    unit_volume_radius,
)
from .entropy import entropy, isotropic_constant, renyi_closed, renyi_quad
from .errors import (
    BetaTooSmall,
    CurveEvaluationFailed,
    InvalidSpec,
    MomentsUndefined,
    NoClosedForm,
    PreconditionViolated,
    RegimeViolated,
)

REL_TOL = 1e-7
EQ_TOL = 1e-9
MEDIAN_TOL = 1e-10
GRID_POINTS = 17
LOG_2PI_E = math.log(2 * math.pi * math.e)


@dataclass(frozen=True)
class BoundCheck:
    """One side of one inequality, arranged as ``lhs <= rhs``."""

    check_id: str
    anchor: str
    side: str
    lhs: float
    rhs: float
    slack: float
    verdict: str
    tol: float
    eq_tol: float = EQ_TOL
    equality_case: str = ""
    inputs: dict = field(default_factory=dict)

    def to_dict(self):
        return {"check_id": self.check_id, "anchor": self.anchor, "side": self.side,
                "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                "verdict": self.verdict, "tol": self.tol, "eq_tol": self.eq_tol,
                "equality_case": self.equality_case, "inputs": self.inputs}

    @property
    def ok(self):
        return self.verdict != "fail"


def make_check(check_id, side, lhs, rhs, *, uncertainty=0.0, equality_case="",
               inputs=None, anchor=None, rel_tol=REL_TOL, eq_tol=EQ_TOL):
    """Build a :class:`BoundCheck`; the tolerance grows with MC/quadrature uncertainty."""
    lhs, rhs = float(lhs), float(rhs)
    slack = rhs - lhs
    scale = max(1.0, abs(lhs), abs(rhs)) if math.isfinite(lhs) and math.isfinite(rhs) else 1.0
    tol = rel_tol * scale + 3.0 * float(uncertainty)
    if math.isnan(slack):
        verdict = "fail"
    elif abs(slack) <= eq_tol:
        verdict = "equality"
    elif slack >= -tol:
        verdict = "pass"
    else:
        verdict = "fail"
    if anchor is None:
        anchor = CATALOG[check_id].anchor if check_id in CATALOG else check_id
    return BoundCheck(check_id, anchor, side, lhs, rhs, slack, verdict, tol, eq_tol,
                      equality_case, dict(inputs or {}))


# --------------------------------------------------------------------------
# Closed-form bound values
# --------------------------------------------------------------------------

def _harmonic_tail(n, beta):
    return float(np.sum(1.0 / (beta - np.arange(1, n + 1))))


def kconc_upper_bound(n, beta):
    """``beta * sum_{i<=n} 1/(beta - i)``; equals ``n`` at ``beta = inf``."""
    if beta == math.inf:
        return float(n)
    if beta <= n:
        raise BetaTooSmall("the bound needs beta > n")
    return beta * _harmonic_tail(n, beta)


def beta_regime_bound(n, beta, regime, beta0, form="printed"):
    """Per-coordinate bound on ``h/n - log ||f||^{-1/n}`` in a range of beta.

    ``regime="multiplicative"`` covers ``beta >= beta0 * n`` with constant
    ``beta0 / (beta0 - 1)``.  ``regime="additive"`` covers
    ``beta >= beta0 + n``; ``form="printed"`` gives
    ``1/(n-1) + (1 + beta0/n) log(1 + (n-1)/beta0)`` and ``form="corrected"``
    bounds the harmonic block by its largest term, giving
    ``(1 + beta0/n) (1/beta0 + log(1 + (n-1)/beta0))``.
    """
    if beta < n + 1:
        raise RegimeViolated("beta must be at least n + 1")
    if regime == "multiplicative":
        if not beta0 > 1:
            raise RegimeViolated("multiplicative regime needs beta0 > 1")
        if beta < beta0 * n:
            raise RegimeViolated("multiplicative regime needs beta >= beta0 * n")
        return beta0 / (beta0 - 1)
    if regime != "additive":
        raise InvalidSpec("regime must be 'multiplicative' or 'additive'")
    if not beta0 >= 1:
        raise RegimeViolated("additive regime needs beta0 >= 1")
    if beta < beta0 + n:
        raise RegimeViolated("additive regime needs beta >= beta0 + n")
    log_term = math.log1p((n - 1) / beta0)
    if form == "corrected":
        return (1 + beta0 / n) * (1 / beta0 + log_term)
    if form != "printed":
        raise InvalidSpec("form must be 'printed' or 'corrected'")
    if n == 1:
        # 1/(n-1) is undefined; use the expression before simplification
        return (beta0 + n) / n * (1 / (beta0 + n - 1) + log_term)
    return 1 / (n - 1) + (1 + beta0 / n) * log_term


def iso_lower_constant(n):
    """``(omega_n^{-2/n} / (n + 2), 1 / (2 pi e))``."""
    if n < 1:
        raise InvalidSpec("n must be >= 1")
    finite = math.exp(-2.0 * log_unit_ball_volume(n) / n) / (n + 2)
    return finite, 1.0 / (2 * math.pi * math.e)


def iso_lower_constant_stirling(n):
    """Stirling approximation ``(1/(2 pi e)) * n/(n+2) * (pi n)^{1/n}``."""
    return n / (n + 2) * (math.pi * n) ** (1.0 / n) / (2 * math.pi * math.e)


def renyi_cvx_bound(n, beta, p):
    """``1/(p-1) * log[prod(beta p - i) / prod(beta - i)]``; ``n log p/(p-1)`` at ``beta = inf``."""
    if beta == math.inf:
        return n * math.log(p) / (p - 1)
    i = np.arange(1, n + 1)
    return float(np.sum(np.log(beta * p - i) - np.log(beta - i))) / (p - 1)


def renyi_gap_bound(n, beta, p):
    """``1/(p-1) * sum log[1 + beta (p-1)/(beta - i)]``."""
    if beta == math.inf:
        return n * math.log(p) / (p - 1)
    i = np.arange(1, n + 1)
    return float(np.sum(np.log1p(beta * (p - 1) / (beta - i)))) / (p - 1)


def _renyi_log_factor(p):
    """``log p / (p - 1)``, continuous at 1 and 0 at infinity."""
    if p == math.inf:
        return 0.0
    if p == 1:
        return 1.0
    return math.log(p) / (p - 1)


# --------------------------------------------------------------------------
# Median and one-dimensional helpers
# --------------------------------------------------------------------------

def cdf_1d(spec, x):
    lo, _ = spec.support_box()[0]
    if x <= lo:
        return 0.0
    f = lambda t: float(spec.pdf(np.array([[t]]))[0])
    pts = [b for b in spec.breakpoints() if lo < b < x]
    return quadrature.integrate_1d(f, lo, x, points=pts or None)[0]


def median(spec):
    """Median of a one-dimensional density by root-finding on its CDF."""
    if spec.n != 1:
        raise InvalidSpec("median needs a one-dimensional spec")
    lo, hi = spec.support_box()[0]
    try:
        c = float(locate_mode(spec).point[0])
    except NoClosedForm:
        c = 0.0
    width = 1.0
    try:
        width = math.sqrt(moments(spec).sigma2)
    except (MomentsUndefined, NoClosedForm):
        pass
    a, b = c, c
    g = lambda x: cdf_1d(spec, x) - 0.5
    for _ in range(200):
        if g(a) <= 0:
            break
        a = max(a - width, lo) if math.isfinite(lo) else a - width
        width *= 2
    for _ in range(200):
        if g(b) >= 0:
            break
        b = min(b + width, hi) if math.isfinite(hi) else b + width
        width *= 2
    if a == b:
        return a
    return optimize.brentq(g, a, b, xtol=MEDIAN_TOL, rtol=4 * np.finfo(float).eps)


# --------------------------------------------------------------------------
# Catalog
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CatalogEntry:
    check_id: str
    anchor: str
    requires: tuple


CATALOG = {e.check_id: e for e in [
    CatalogEntry("SHANNON_LO", "entropy is at least minus log of the maximum density", ("any",)),
    CatalogEntry("SHANNON_UP", "log-concave entropy is at most n minus log of the maximum density",
                 ("log-concave",)),
    CatalogEntry("GAUSS_WINDOW", "log-concave entropy within n/2 of the peak-matched Gaussian",
                 ("log-concave",)),
    CatalogEntry("RENYI_UP", "log-concave Renyi entropy above the min-entropy by at most n log p/(p-1)",
                 ("log-concave",)),
    CatalogEntry("RENYI_COMPARE", "log-concave Renyi entropies of two orders compared",
                 ("log-concave",)),
    CatalogEntry("KCONC_UP", "convex-measure entropy above the min-entropy by at most beta sum 1/(beta-i)",
                 ("kappa",)),
    CatalogEntry("RENYI_CVX", "convex-measure Renyi entropy above the min-entropy, and order gaps",
                 ("kappa",)),
    CatalogEntry("ONED_SIGMA", "one-dimensional log-concave peak and entropy against the standard deviation",
                 ("log-concave", "1d", "finite-cov")),
    CatalogEntry("MED_MAX", "one-dimensional log-concave peak at most twice the density at the median",
                 ("log-concave", "1d", "finite-cov")),
    CatalogEntry("ISO_LB", "isotropic constant at least that of the Euclidean ball",
                 ("finite-cov",)),
    CatalogEntry("D_ISO", "distance from Gaussianity against the isotropic constant",
                 ("log-concave", "finite-cov")),
    CatalogEntry("FRADELIZI", "log-concave peak at most e^n times the density at the mean",
                 ("log-concave",)),
    CatalogEntry("BORELL_LC", "normalized power integrals of a concave function are log-concave in p",
                 ("domain",)),
    CatalogEntry("REBORELL_LC", "normalized negative power integrals of a convex function are log-concave in p",
                 ("potential",)),
    CatalogEntry("BERWALD", "normalized norms of a concave function decrease in the order",
                 ("domain",)),
    CatalogEntry("HENSLEY_BALL", "the uniform ball minimizes the rescaled radial functional",
                 ("any",)),
]}


def _spec_beta(spec):
    """Largest beta for which the spec is known to be in the convex class."""
    conv = spec.convexity()
    if conv.kind == "log-concave":
        return math.inf
    if conv.kind == "kappa":
        return conv.beta
    return None


def _is_log_concave(spec, params):
    conv = spec.convexity()
    if conv.kind == "log-concave":
        return True
    if conv.kind == "unknown" and params.get("classify", False):
        report = kappa_classify(spec, 0.0, trials=params.get("classify_trials", 2000),
                                seed=params.get("seed", 0))
        return report.verdict == "pass"
    return False


def check_preconditions(check_id, spec, params=None):
    """Raise :class:`PreconditionViolated` unless ``spec`` is admissible."""
    params = params or {}
    try:
        entry = CATALOG[check_id]
    except KeyError:
        raise InvalidSpec("unknown check %r" % check_id) from None
    for req in entry.requires:
        if req == "log-concave" and not _is_log_concave(spec, params):
            raise PreconditionViolated("%s needs a log-concave density" % check_id)
        if req == "1d" and spec.n != 1:
            raise PreconditionViolated("%s needs a one-dimensional density" % check_id)
        if req == "kappa":
            beta = _check_beta(spec, params)
            if beta < spec.n + 1:
                raise PreconditionViolated("%s needs beta >= n + 1 (beta=%g)" % (check_id, beta))
        if req == "finite-cov" or (check_id == "HENSLEY_BALL"
                                   and params.get("rho", "t2") == "t2"):
            try:
                moments(spec)
            except (MomentsUndefined, NoClosedForm) as exc:
                raise PreconditionViolated("%s needs a finite covariance: %s" % (check_id, exc)) from None
        if req == "domain" and not isinstance(spec, UniformBody):
            raise PreconditionViolated("%s needs a uniform spec giving the domain" % check_id)
        if req == "potential" and not (isinstance(spec, PotentialDensity)
                                       and spec.beta is not None):
            raise PreconditionViolated("%s needs a power-type potential spec giving phi" % check_id)
    return entry


def _check_beta(spec, params):
    known = _spec_beta(spec)
    if known is None:
        raise PreconditionViolated("convexity class of %s is unknown" % spec.family)
    beta = params.get("beta", known)
    beta = math.inf if beta is None else float(beta)
    if beta > known:
        raise PreconditionViolated("spec is only known to be in the class for beta <= %g" % known)
    return beta


def _h(spec, params):
    return entropy(spec, params.get("method", "auto"), seed=params.get("seed", 0),
                   m=params.get("m", 200_000))


def _hp(spec, p):
    if p == math.inf:
        return renyi_closed(spec, p)
    if p == 1:
        return entropy(spec)
    try:
        return renyi_closed(spec, p)
    except NoClosedForm:
        return renyi_quad(spec, p)


def _log_norm(spec):
    return math.log(max_density(spec))


# --------------------------------------------------------------------------
# Individual checks
# --------------------------------------------------------------------------

def _shannon_lo(spec, params):
    h = _h(spec, params)
    return [make_check("SHANNON_LO", "lower", -_log_norm(spec), h.value,
                       uncertainty=h.uncertainty, equality_case="uniform")]


def _shannon_up(spec, params):
    h = _h(spec, params)
    return [make_check("SHANNON_UP", "upper", h.value, spec.n - _log_norm(spec),
                       uncertainty=h.uncertainty, equality_case="exponential product")]


def _gauss_window(spec, params):
    from .entropy import gauss_fit

    h = _h(spec, params)
    hz = gauss_fit(spec, "max-density").entropy()
    half = spec.n / 2
    return [
        make_check("GAUSS_WINDOW", "lower", hz - half, h.value, uncertainty=h.uncertainty,
                   equality_case="uniform on a convex set", inputs={"h_gaussian": hz}),
        make_check("GAUSS_WINDOW", "upper", h.value, hz + half, uncertainty=h.uncertainty,
                   equality_case="exponential product", inputs={"h_gaussian": hz}),
    ]


def _renyi_up(spec, params):
    p = float(params.get("p", 2.0))
    if not p > 1:
        raise InvalidSpec("RENYI_UP needs p > 1")
    hp = _hp(spec, p)
    base = -_log_norm(spec)
    inputs = {"p": p}
    return [
        make_check("RENYI_UP", "lower", base, hp.value, uncertainty=hp.uncertainty,
                   equality_case="uniform", inputs=inputs),
        make_check("RENYI_UP", "upper", hp.value, base + spec.n * _renyi_log_factor(p),
                   uncertainty=hp.uncertainty, equality_case="exponential product", inputs=inputs),
    ]


def _renyi_compare(spec, params):
    p = float(params.get("p", 2.0))
    q = float(params.get("q", math.inf))
    if p < 1 or q < 1:
        raise InvalidSpec("RENYI_COMPARE needs p, q >= 1")
    hp, hq = _hp(spec, p), _hp(spec, q)
    n = spec.n
    eq = "exponential product" if q == math.inf else ""
    return [make_check("RENYI_COMPARE", "upper", hp.value / n, _renyi_log_factor(p) + hq.value / n,
                       uncertainty=(hp.uncertainty + hq.uncertainty) / n, equality_case=eq,
                       inputs={"p": p, "q": q})]


def _kconc_up(spec, params):
    beta = _check_beta(spec, params)
    h = _h(spec, params)
    lhs = h.value + _log_norm(spec)
    return [make_check("KCONC_UP", "upper", lhs, kconc_upper_bound(spec.n, beta),
                       uncertainty=h.uncertainty, equality_case="multivariate Pareto",
                       inputs={"beta": beta})]


def _renyi_cvx(spec, params):
    beta = _check_beta(spec, params)
    n = spec.n
    p = float(params.get("p", 2.0))
    q = float(params.get("q", math.inf))
    if not p > 1 or not q > p:
        raise InvalidSpec("RENYI_CVX needs 1 < p < q")
    hp, hq = _hp(spec, p), _hp(spec, q)
    per = hp.value / n + _log_norm(spec) / n
    inputs = {"beta": beta, "p": p, "q": q}
    unc = hp.uncertainty / n
    total = renyi_cvx_bound(n, beta, p)
    return [
        make_check("RENYI_CVX", "lower", 0.0, per, uncertainty=unc, equality_case="uniform",
                   inputs=inputs),
        make_check("RENYI_CVX", "upper", per, total, uncertainty=unc, inputs=inputs),
        make_check("RENYI_CVX", "upper_sharp", n * per, total, uncertainty=hp.uncertainty,
                   equality_case="multivariate Pareto", inputs=inputs),
        make_check("RENYI_CVX", "gap_lower", 0.0, (hp.value - hq.value) / n,
                   uncertainty=(hp.uncertainty + hq.uncertainty) / n, inputs=inputs),
        make_check("RENYI_CVX", "gap_upper", (hp.value - hq.value) / n,
                   renyi_gap_bound(n, beta, p),
                   uncertainty=(hp.uncertainty + hq.uncertainty) / n, inputs=inputs),
    ]


def _oned_sigma(spec, params):
    sigma = math.sqrt(moments(spec).sigma2)
    inv = 1.0 / max_density(spec)
    h = _h(spec, params)
    return [
        make_check("ONED_SIGMA", "norm_lower", sigma / math.sqrt(2), inv),
        make_check("ONED_SIGMA", "norm_upper", inv, math.sqrt(12) * sigma, equality_case="uniform"),
        make_check("ONED_SIGMA", "entropy_lower", math.log(sigma) - 0.5 * math.log(2), h.value,
                   uncertainty=h.uncertainty),
        make_check("ONED_SIGMA", "entropy_upper", h.value, math.log(sigma) + 0.5 * LOG_2PI_E,
                   uncertainty=h.uncertainty, equality_case="Gaussian"),
    ]


def _med_max(spec, params):
    m = median(spec)
    fm = float(spec.pdf(np.array([[m]]))[0])
    top = max_density(spec)
    s2 = moments(spec).sigma2
    inputs = {"median": m}
    return [
        make_check("MED_MAX", "peak", top, 2 * fm, equality_case="exponential (limit)",
                   inputs=inputs),
        make_check("MED_MAX", "median_variance_lower", 1 / 12, s2 * fm * fm,
                   equality_case="uniform", inputs=inputs),
        make_check("MED_MAX", "median_variance_upper", s2 * fm * fm, 0.5,
                   equality_case="double exponential", inputs=inputs),
    ]


def _iso_lb(spec, params):
    lf = isotropic_constant(spec)
    finite, _ = iso_lower_constant(spec.n)
    return [make_check("ISO_LB", "lower", finite, lf * lf, equality_case="uniform ball or ellipsoid")]


def _d_iso(spec, params):
    from .entropy import D_gaussianity

    n = spec.n
    lf = isotropic_constant(spec)
    d = D_gaussianity(spec, params.get("method", "auto"), seed=params.get("seed", 0),
                      m=params.get("m", 200_000))
    unc = d.uncertainty / n
    return [
        make_check("D_ISO", "lower", math.log(math.sqrt(2 * math.pi / math.e) * lf), d.value / n,
                   uncertainty=unc, equality_case="exponential product"),
        make_check("D_ISO", "upper", d.value / n, math.log(math.sqrt(2 * math.pi * math.e) * lf),
                   uncertainty=unc, equality_case="uniform"),
        make_check("D_ISO", "gauss_constant", 1.0, math.sqrt(2 * math.pi * math.e) * lf),
    ]


def _fradelizi(spec, params):
    n = spec.n
    mean = moments(spec).mean
    log_f_mean = float(spec.logpdf(mean))
    log_f_mode = _log_norm(spec)
    h = _h(spec, params)
    return [
        make_check("FRADELIZI", "sup", log_f_mode, n + log_f_mean,
                   equality_case="exponential product", inputs={"mean": mean.tolist()}),
        make_check("FRADELIZI", "entropy_lower", -log_f_mean - n, h.value,
                   uncertainty=h.uncertainty),
        make_check("FRADELIZI", "entropy_upper", h.value, -log_f_mode + n,
                   uncertainty=h.uncertainty, equality_case="exponential product"),
    ]


# --------------------------------------------------------------------------
# Norms of concave and convex functions
# --------------------------------------------------------------------------

def _as_function(f, n):
    if isinstance(f, str):
        return compile_expression(f, n)
    return f


def _point_eval(func, x):
    return float(np.asarray(func(np.asarray(x, float)[:, None])).reshape(-1)[0])


def power_integral(f, body, p):
    """Integral of ``f**p`` over a :class:`Body` for a non-negative function ``f``."""
    func = _as_function(f, body.n)
    g = lambda x: max(_point_eval(func, x), 0.0) ** p
    if body.n == 1:
        lo, hi = body.bounding_box()[0]
        return quadrature.integrate_1d(lambda t: g(np.array([t])), lo, hi)[0]

    def gv(x):
        v = np.asarray(func(x.T), float).reshape(-1)
        return np.maximum(v, 0.0) ** p

    value, _, ok = quadrature.integrate_body_vectorized(gv, body)
    if ok:
        return value
    return quadrature.integrate_body(g, body)[0]


def negative_power_integral(spec, p):
    """Integral of ``phi**-p`` over the support of a potential spec."""
    n = spec.n

    def gv(x):
        v = np.asarray(spec.phi(x.T), float).reshape(-1)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = np.where(v > 0, v, np.inf) ** -p
        return np.where(np.isfinite(out), out, 0.0)

    if n == 1:
        lo, hi = spec.support[0]
        return quadrature.integrate_1d(lambda t: float(gv(np.array([[t]]))[0]), lo, hi)[0]
    return quadrature.integrate_vectorized(gv, spec.support)[0]


def borell_curve(f, body):
    """``p -> C(n+p, n) * integral f**p``, on ``p > 0``."""
    n = body.n

    def curve(p):
        return math.exp(special.gammaln(n + p + 1) - special.gammaln(p + 1)
                        - special.gammaln(n + 1)) * power_integral(f, body, p)
    return curve


def reborell_curve(spec):
    """``p -> (p-1)...(p-n)/n! * integral phi**-p``, on ``p > n + 1``."""
    n = spec.n

    def curve(p):
        falling = float(np.prod(p - np.arange(1, n + 1))) / math.factorial(n)
        return falling * negative_power_integral(spec, p)
    return curve


def log_grid(lo, hi, k=GRID_POINTS):
    return np.geomspace(lo, hi, k)


def logconcavity_in_p(curve, p_grid, *, check_id="LOGCONCAVITY_IN_P", rel_tol=REL_TOL,
                      anchor=None):
    """Midpoint log-concavity of a positive curve over all pairs of grid points.

    ``lhs`` is the worst value of ``(log c(p) + log c(q))/2 - log c((p+q)/2)``
    and ``rhs`` is 0.
    """
    p_grid = np.asarray(p_grid, float)
    cache = {}

    def logc(p):
        if p not in cache:
            try:
                v = float(curve(p))
            except Exception as exc:
                raise CurveEvaluationFailed("curve failed at p=%g: %s" % (p, exc)) from exc
            if not (v > 0 and math.isfinite(v)):
                raise CurveEvaluationFailed("curve value %r at p=%g is not positive and finite" % (v, p))
            cache[p] = math.log(v)
        return cache[p]

    worst, at = -math.inf, None
    for i in range(len(p_grid)):
        for j in range(i + 1, len(p_grid)):
            p, q = float(p_grid[i]), float(p_grid[j])
            d = 0.5 * (logc(p) + logc(q)) - logc(0.5 * (p + q))
            if d > worst:
                worst, at = d, (p, q)
    scale = max([1.0] + [abs(v) for v in cache.values()])
    return make_check(check_id, "midpoint", worst, 0.0, rel_tol=rel_tol * scale,
                      anchor=anchor or "midpoint log-concavity in p",
                      equality_case="log-affine curve",
                      inputs={"worst_pair": list(at) if at else None,
                              "grid": p_grid.tolist()})


def _borell_lc(spec, params):
    f = params["f"]
    grid = params.get("grid")
    if grid is None:
        grid = log_grid(params.get("p_min", 0.1), params.get("p_max", 10.0))
    if min(grid) <= 0:
        raise PreconditionViolated("BORELL_LC grid must lie in p > 0")
    c = logconcavity_in_p(borell_curve(f, spec.body_), grid, check_id="BORELL_LC",
                          anchor=CATALOG["BORELL_LC"].anchor)
    return [c]


def _reborell_lc(spec, params):
    n = spec.n
    grid = params.get("grid")
    if grid is None:
        lo = params.get("p_min", n + 1.1)
        grid = log_grid(lo, params.get("p_max", 10.0 * (n + 1)))
    if min(grid) <= n + 1:
        raise PreconditionViolated("REBORELL_LC grid must lie in p > n + 1")
    c = logconcavity_in_p(reborell_curve(spec), grid, check_id="REBORELL_LC",
                          anchor=CATALOG["REBORELL_LC"].anchor)
    return [c]


def berwald_norms(f, body, p):
    """``(C(n+p, n) / |body|)**(1/p) * ||f||_p``."""
    n = body.n
    logc = special.gammaln(n + p + 1) - special.gammaln(p + 1) - special.gammaln(n + 1)
    return math.exp((logc - math.log(body.volume())) / p) * power_integral(f, body, p) ** (1 / p)


def _berwald(spec, params):
    p = float(params.get("p", 1.0))
    q = float(params.get("q", 2.0))
    if not 0 < p < q:
        raise InvalidSpec("BERWALD needs 0 < p < q")
    f = params["f"]
    lhs = berwald_norms(f, spec.body_, q)
    rhs = berwald_norms(f, spec.body_, p)
    return [make_check("BERWALD", "decreasing", lhs, rhs,
                       equality_case="linear function vanishing on a facet",
                       inputs={"p": p, "q": q, "f": f if isinstance(f, str) else repr(f)})]


# --------------------------------------------------------------------------
# Radial functional minimized by the ball
# --------------------------------------------------------------------------

def ball_radial_value(n, rho="t2", r=None):
    """The functional for the uniform ball of volume one centred at 0."""
    rn = unit_volume_radius(n)
    if rho == "t2":
        return n * rn * rn / (n + 2)
    if rho == "indicator":
        return max(0.0, 1.0 - (r / rn) ** n)
    raise InvalidSpec("rho must be 't2' or 'indicator'")


def radial_functional(spec, rho="t2", r=None, *, seed=0, m=200_000):
    """``E rho(||f||^{1/n} |X|)``; returns ``(value, uncertainty)``.

    ``rho="t2"`` is the squared norm and ``rho="indicator"`` is the indicator
    of ``[r, inf)``.
    """
    n = spec.n
    scale = max_density(spec) ** (1.0 / n)
    if rho == "t2":
        mo = moments(spec)
        return scale * scale * (float(mo.mean @ mo.mean) + float(np.trace(mo.cov))), 0.0
    if rho != "indicator":
        raise InvalidSpec("rho must be 't2' or 'indicator'")
    if r is None or r < 0:
        raise InvalidSpec("indicator rho needs a radius r >= 0")
    t = r / scale
    if isinstance(spec, UniformBody) and spec.body_.kind == "ball" and not spec.body_.shift.any():
        return max(0.0, 1.0 - (t / spec.body_.size) ** n), 0.0
    if n == 1:
        lo, hi = spec.support_box()[0]
        f = lambda x: float(spec.pdf(np.array([[x]]))[0])
        pts = spec.breakpoints()
        left = quadrature.integrate_1d(f, lo, -t, points=pts)[0] if lo < -t else 0.0
        right = quadrature.integrate_1d(f, t, hi, points=pts)[0] if t < hi else 0.0
        return left + right, 0.0
    rng_seq = np.random.SeedSequence(seed).spawn(16)
    means = []
    for ss in rng_seq:
        x = spec.draw(np.random.default_rng(ss), m // 16)
        means.append(np.mean(np.linalg.norm(x, axis=1) >= t))
    return float(np.mean(means)), float(np.std(means, ddof=1) / 4.0)


def hensley_ball_check(spec, rho="t2", r=None, **kw):
    lhs = ball_radial_value(spec.n, rho, r)
    rhs, unc = radial_functional(spec, rho, r, **kw)
    return make_check("HENSLEY_BALL", rho, lhs, rhs, uncertainty=unc,
                      equality_case="uniform ball centred at 0",
                      inputs={"rho": rho, "r": r})


def _hensley(spec, params):
    return [hensley_ball_check(spec, params.get("rho", "t2"), params.get("r"),
                               seed=params.get("seed", 0), m=params.get("m", 200_000))]


_RUNNERS = {
    "SHANNON_LO": _shannon_lo,
    "SHANNON_UP": _shannon_up,
    "GAUSS_WINDOW": _gauss_window,
    "RENYI_UP": _renyi_up,
    "RENYI_COMPARE": _renyi_compare,
    "KCONC_UP": _kconc_up,
    "RENYI_CVX": _renyi_cvx,
    "ONED_SIGMA": _oned_sigma,
    "MED_MAX": _med_max,
    "ISO_LB": _iso_lb,
    "D_ISO": _d_iso,
    "FRADELIZI": _fradelizi,
    "BORELL_LC": _borell_lc,
    "REBORELL_LC": _reborell_lc,
    "BERWALD": _berwald,
    "HENSLEY_BALL": _hensley,
}


def run_check(check_id, spec, params=None):
    """Run one catalog check; returns a list with one :class:`BoundCheck` per side."""
    params = dict(params or {})
    check_preconditions(check_id, spec, params)
    return _RUNNERS[check_id](spec, params)


def admissible(check_id, spec, params=None):
    try:
        check_preconditions(check_id, spec, params)
    except PreconditionViolated:
        return False
    return True


def run_catalog(spec, check_ids=None, params=None):
    """Run every admissible check on ``spec``; inadmissible ones are skipped."""
    out = []
    for cid in check_ids or CATALOG:
        if "domain" in CATALOG[cid].requires and "f" not in (params or {}):
            continue
        if admissible(cid, spec, params):
            out.extend(run_check(cid, spec, params))
    return out


def art_ratio(spec, **kw):
    """``D(f) / (n log n / 4)``; a monitored quantity, not a pass/fail check."""
    from .entropy import D_gaussianity

    n = spec.n
    if n < 2:
        raise InvalidSpec("the ratio needs n >= 2")
    return D_gaussianity(spec, **kw).value / (0.25 * n * math.log(n))


__all__ = [
    "BoundCheck", "CATALOG", "CatalogEntry", "run_check", "run_catalog", "make_check",
    "kconc_upper_bound", "beta_regime_bound", "iso_lower_constant",
    "iso_lower_constant_stirling", "logconcavity_in_p", "hensley_ball_check", "median",
    "borell_curve", "reborell_curve", "berwald_norms", "renyi_cvx_bound", "renyi_gap_bound",
    "art_ratio",
]
