import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convex_entropy import distributions as D
from convex_entropy.errors import (
    BetaTooSmall,
    InvalidSpec,
    MomentsUndefined,
    NotPositiveDefinite,
)


def test_pareto_density_at_origin():
    assert D.pdf(D.ParetoMV(1, 2.0, 1.0), [0.0]) == pytest.approx(1.0, rel=1e-14)


def test_cauchy_density_at_origin():
    assert D.pdf(D.Cauchy1D(), [0.0]) == pytest.approx(1 / math.pi, rel=1e-14)


@pytest.mark.parametrize("n,var", [(1, 1.0), (2, 0.5), (3, 2.0)])
def test_gaussian_max_density(n, var):
    g = D.Gaussian.isotropic(n, var)
    assert D.max_density(g) == pytest.approx((2 * math.pi * var) ** (-n / 2), rel=1e-13)


@pytest.mark.parametrize("spec", [
    D.ParetoMV(2, 3.5, 1.0),
    D.ExponentialProduct([1.0, 2.0]),
    D.Gaussian([[2.0, 0.3], [0.3, 1.0]], [1.0, -1.0]),
    D.UniformBody(D.Body.simplex(2)),
])
def test_density_integrates_to_one_mpmath(spec):
    f = lambda x, y: float(D.pdf(spec, [float(x), float(y)]))
    lo, hi = zip(*spec.support_box())
    lo = [a if math.isfinite(a) else -mp.inf for a in lo]
    hi = [b if math.isfinite(b) else mp.inf for b in hi]
    mp.mp.dps = 15
    if isinstance(spec, D.UniformBody):
        total = mp.quad(lambda x: mp.quad(lambda y: f(x, y), [0, 1 - x]), [0, 1])
    else:
        total = mp.quad(f, [lo[0], hi[0]], [lo[1], hi[1]])
    assert float(total) == pytest.approx(1.0, abs=2e-6)


def test_pareto_mean_one_dimensional():
    # density 2(1+x)^-3: mean 1, infinite variance
    spec = D.ParetoMV(1, 3.0, 1.0)
    mean = mp.quad(lambda x: x * 2 * (1 + x) ** -3, [0, mp.inf])
    assert float(mean) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(MomentsUndefined):
        D.moments(spec)


def test_pareto_moments_beta5():
    spec = D.ParetoMV(1, 5.0, 1.0)
    m = D.moments(spec)
    mean = mp.quad(lambda x: x * 4 * (1 + x) ** -5, [0, mp.inf])
    var = mp.quad(lambda x: (x - mean) ** 2 * 4 * (1 + x) ** -5, [0, mp.inf])
    assert m.mean[0] == pytest.approx(float(mean), rel=1e-12)
    assert m.cov[0, 0] == pytest.approx(float(var), rel=1e-10)


def test_pareto_needs_beta_above_n():
    with pytest.raises(BetaTooSmall):
        D.ParetoMV(2, 2.0)


def test_gaussian_rejects_indefinite_covariance():
    with pytest.raises((NotPositiveDefinite, InvalidSpec)):
        D.Gaussian([[1.0, 2.0], [2.0, 1.0]])


@pytest.mark.parametrize("kind", ["ball", "cube", "simplex"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_body_volume_and_samples(kind, n):
    body = getattr(D.Body, kind)(n)
    vol = {"ball": math.pi ** (n / 2) / math.gamma(n / 2 + 1), "cube": 1.0,
           "simplex": 1 / math.factorial(n)}[kind]
    assert body.volume() == pytest.approx(vol, rel=1e-13)
    pts = body.sample(np.random.default_rng(0), 4000)
    assert body.contains(pts).all()
    assert np.allclose(pts.mean(axis=0), body.mean(), atol=0.03)


def test_sampling_is_deterministic_in_seed():
    spec = D.ParetoMV(2, 4.0)
    assert np.array_equal(D.sample(spec, 7, 100), D.sample(spec, 7, 100))
    assert not np.array_equal(D.sample(spec, 7, 100), D.sample(spec, 8, 100))


@pytest.mark.parametrize("spec", [
    D.ParetoMV(2, 6.0, 1.5), D.ExponentialProduct([0.5, 2.0]), D.UniformBody(D.Body.ball(2)),
    D.Gaussian([[1.0, 0.5], [0.5, 2.0]]),
])
def test_sample_moments_match(spec):
    x = D.sample(spec, 3, 200_000)
    m = D.moments(spec)
    assert np.allclose(x.mean(axis=0), m.mean, atol=0.02)
    assert np.allclose(np.cov(x.T), m.cov, atol=0.05 * np.abs(m.cov).max())


def test_affine_image_density():
    base = D.ExponentialProduct([1.0, 1.0])
    A = np.array([[2.0, 1.0], [0.0, 1.0]])
    b = np.array([0.5, -1.0])
    spec = D.AffineImage(base, A, b)
    x = np.array([3.0, 0.5])
    y = np.linalg.solve(A, x - b)
    assert D.pdf(spec, x) == pytest.approx(D.pdf(base, y) / 2.0, rel=1e-13)


def test_potential_density_normalizes():
    spec = D.PotentialDensity(1, "x[0]**2/2")
    assert D.pdf(spec, [0.0]) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-9)
    assert D.locate_mode(spec).point[0] == pytest.approx(0.0, abs=1e-6)


def test_spec_roundtrip():
    spec = D.AffineImage(D.ParetoMV(2, 4.0), [[1.0, 0.2], [0.0, 1.0]], [1.0, 0.0])
    again = D.spec_from_dict(D.spec_to_dict(spec))
    x = np.array([2.0, 1.5])
    assert D.pdf(again, x) == D.pdf(spec, x)


@pytest.mark.parametrize("spec,kappa", [
    (D.ExponentialProduct([1.0]), 0.0),
    (D.ParetoMV(1, 2.0), -1.0),
    (D.ParetoMV(2, 5.0), -1.0 / 3.0),
    (D.PotentialDensity(1, "-2*log(1-abs(x[0]))", support=[(-1, 1)]), 1.0 / 3.0),
])
def test_kappa_classifier_accepts(spec, kappa):
    assert D.kappa_classify(spec, kappa, trials=2000, seed=1).verdict == "pass"


def test_kappa_classifier_rejects_too_strong_kappa():
    # a Pareto law is not log-concave
    assert D.kappa_classify(D.ParetoMV(1, 2.0), 0.0, trials=2000, seed=1).verdict == "fail"


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.01, 100), b=st.floats(0.01, 100), t=st.floats(0, 1),
       r1=st.floats(-3, 1), r2=st.floats(-3, 1))
def test_power_mean_monotone_in_order(a, b, t, r1, r2):
    lo, hi = sorted((r1, r2))
    assert D.power_mean(a, b, t, lo) <= D.power_mean(a, b, t, hi) * (1 + 1e-12)


def test_affine_support_box_maps_endpoints():
    spec = D.AffineImage(D.ExponentialProduct([1.0, 2.0]), np.diag([-2.0, 0.5]), [1.0, 0.0])
    assert spec.support_box() == [(-math.inf, 1.0), (0.0, math.inf)]
    cube = D.AffineImage(D.UniformBody(D.Body.cube(2)), [[1.0, 1.0], [0.0, 1.0]])
    assert cube.support_box() == [(0.0, 2.0), (0.0, 1.0)]
