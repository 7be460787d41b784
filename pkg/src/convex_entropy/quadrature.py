"""Thin wrappers over scipy's adaptive quadrature for boxes and bodies.

All routines return ``(value, abserr)``.  Integrands take a point as a 1-D
array of length ``n``.
"""

import math
import warnings

import numpy as np
from scipy import integrate

EPSABS = 1e-10
EPSREL = 1e-10
LIMIT = 200


def _opts(epsabs, epsrel, limit, points=None):
    opts = {"epsabs": epsabs, "epsrel": epsrel, "limit": limit}
    if points is not None:
        opts["points"] = points
    return opts


def integrate_1d(func, lo, hi, *, points=None, epsabs=EPSABS, epsrel=EPSREL,
                 limit=LIMIT):
    """Adaptive 1-D quadrature; ``points`` are ignored on infinite ranges."""
    if np.isinf(lo) or np.isinf(hi):
        points = None
    elif points is not None:
        points = [p for p in points if lo < p < hi] or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err = integrate.quad(func, lo, hi, points=points, epsabs=epsabs,
                                    epsrel=epsrel, limit=limit)
    return value, err


def integrate_ranges(func, ranges, *, epsabs=EPSABS, epsrel=EPSREL, limit=LIMIT):
    """Nested quadrature; ``ranges[k]`` may be a callable of the outer coordinates.

    Follows the :func:`scipy.integrate.nquad` convention that ``ranges[0]``
    belongs to the innermost variable ``x[0]``.
    """
    n = len(ranges)
    if n == 1 and not callable(ranges[0]):
        lo, hi = ranges[0]
        return integrate_1d(lambda t: func(np.array([t])), lo, hi,
                            epsabs=epsabs, epsrel=epsrel, limit=limit)

    def wrapped(*xs):
        return func(np.asarray(xs, dtype=float))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err = integrate.nquad(wrapped, ranges,
                                     opts=_opts(epsabs, epsrel, limit))
    return value, err


def _compactify(bounds):
    """Maps from the unit cube (or [-1, 1] for full lines) onto each range.

    Returns ``(lo, hi, forward)`` where ``forward(t)`` gives the points and
    the Jacobian weights.
    """
    kinds, lo, hi = [], [], []
    for a, b in bounds:
        a, b = float(a), float(b)
        if math.isinf(a) and math.isinf(b):
            kinds.append(("line", 0.0))
            lo.append(-1.0)
            hi.append(1.0)
        elif math.isinf(b):
            kinds.append(("up", a))
            lo.append(0.0)
            hi.append(1.0)
        elif math.isinf(a):
            kinds.append(("down", b))
            lo.append(0.0)
            hi.append(1.0)
        else:
            kinds.append(("finite", 0.0))
            lo.append(a)
            hi.append(b)

    def forward(t):
        x = np.array(t, dtype=float, copy=True)
        w = np.ones(t.shape[0])
        for i, (kind, c) in enumerate(kinds):
            u = t[:, i]
            if kind == "line":
                x[:, i] = u / (1 - u * u)
                w *= (1 + u * u) / (1 - u * u) ** 2
            elif kind == "up":
                x[:, i] = c + u / (1 - u)
                w /= (1 - u) ** 2
            elif kind == "down":
                x[:, i] = c - u / (1 - u)
                w /= (1 - u) ** 2
        return x, w

    return np.array(lo), np.array(hi), forward


def integrate_vectorized(func, bounds, *, atol=1e-8, rtol=1e-8, max_subdivisions=20000):
    """Adaptive Gauss-Kronrod cubature over a box (infinite limits allowed).

    ``func`` maps an ``(m, n)`` array of points to ``m`` values.  Infinite
    ranges are mapped onto finite ones here rather than inside scipy.
    Returns ``(value, error_estimate, converged)``.
    """
    lo, hi, forward = _compactify(bounds)

    def g(t):
        x, w = forward(t)
        with np.errstate(over="ignore", invalid="ignore"):
            v = func(x) * w
        return np.where(np.isfinite(v), v, 0.0)

    res = integrate.cubature(g, lo, hi, rule="gk21", atol=atol, rtol=rtol,
                             max_subdivisions=max_subdivisions)
    return float(res.estimate), float(res.error), res.status == "converged"


def integrate_box(func, bounds, **kw):
    """Integrate over a product of intervals ``[(lo, hi), ...]`` (may be infinite)."""
    return integrate_ranges(func, [tuple(b) for b in bounds], **kw)


def integrate_body(func, body, **kw):
    """Integrate over a :class:`~convex_entropy.distributions.Body` (n <= 3)."""
    n = body.n
    c = body.shift
    if body.kind == "cube":
        s = body.size
        return integrate_box(func, [(c[i], c[i] + s) for i in range(n)], **kw)
    if body.kind == "simplex":
        s = body.size

        def simplex_range(k):
            def rng(*outer):
                used = sum(o - c[k + 1 + j] for j, o in enumerate(outer))
                return (c[k], c[k] + s - used)
            return rng

        ranges = [simplex_range(k) for k in range(n - 1)] + [(c[n - 1], c[n - 1] + s)]
        return integrate_ranges(func, ranges, **kw)
    if body.kind == "ball":
        r = body.size

        def ball_range(k):
            def rng(*outer):
                left = r * r - sum((o - c[k + 1 + j]) ** 2 for j, o in enumerate(outer))
                w = np.sqrt(max(left, 0.0))
                return (c[k] - w, c[k] + w)
            return rng

        ranges = [ball_range(k) for k in range(n - 1)] + [(c[n - 1] - r, c[n - 1] + r)]
        return integrate_ranges(func, ranges, **kw)
    if body.kind == "ellipsoid":
        L = np.linalg.cholesky(body.shape)
        jac = abs(np.linalg.det(L))
        from .distributions import Body

        unit = Body.ball(n, 1.0)
        value, err = integrate_body(lambda y: func(c + L @ y), unit, **kw)
        return value * jac, err * jac
    raise ValueError("unknown body kind %r" % body.kind)


def _body_map(body):
    """Map from a box onto ``body``; returns ``(lo, hi, forward)`` like :func:`_compactify`."""
    n = body.n
    c = body.shift
    s = body.size
    if body.kind == "cube":
        return np.zeros(n), np.full(n, s), lambda t: (c + t, np.ones(t.shape[0]))
    if body.kind == "simplex":
        def forward(t):
            # collapsed coordinates: each coordinate takes a share of what is left
            x = np.empty_like(t)
            left = np.full(t.shape[0], s)
            w = np.ones(t.shape[0])
            for k in range(n):
                x[:, k] = left * t[:, k]
                w *= left
                left = left * (1 - t[:, k])
            return c + x, w
        return np.zeros(n), np.ones(n), forward
    if body.kind in ("ball", "ellipsoid"):
        def unit_ball(t):
            # chords: the last coordinate first, each later chord shrinks with the outer ones
            x = np.empty_like(t)
            used = np.zeros(t.shape[0])
            w = np.ones(t.shape[0])
            for k in range(n - 1, -1, -1):
                half = np.sqrt(np.maximum(1.0 - used, 0.0))
                x[:, k] = half * t[:, k]
                w *= half
                used = used + x[:, k] ** 2
            return x, w

        if body.kind == "ball":
            return -np.ones(n), np.ones(n), lambda t: (
                c + s * unit_ball(t)[0], s ** n * unit_ball(t)[1])
        L = np.linalg.cholesky(body.shape)
        jac = abs(float(np.linalg.det(L)))

        def forward(t):
            y, w = unit_ball(t)
            return c + y @ L.T, jac * w
        return -np.ones(n), np.ones(n), forward
    raise ValueError("unknown body kind %r" % body.kind)


def integrate_body_vectorized(func, body, *, atol=1e-12, rtol=1e-11, max_subdivisions=20000):
    """Adaptive cubature over a body for a vectorized ``func`` of ``(m, n)`` points.

    Returns ``(value, error_estimate, converged)``.
    """
    lo, hi, forward = _body_map(body)
    span = hi - lo

    def g(u):
        # quintic smoothstep per coordinate flattens algebraic endpoint singularities
        v = (u - lo) / span
        t = lo + span * v ** 3 * (10 - 15 * v + 6 * v * v)
        dt = np.prod(30 * v * v * (1 - v) ** 2, axis=1)
        x, w = forward(t)
        w = w * dt
        with np.errstate(over="ignore", invalid="ignore"):
            v = func(x) * w
        return np.where(np.isfinite(v), v, 0.0)

    res = integrate.cubature(g, lo, hi, rule="gk21", atol=atol, rtol=rtol,
                             max_subdivisions=max_subdivisions)
    return float(res.estimate), float(res.error), res.status == "converged"
