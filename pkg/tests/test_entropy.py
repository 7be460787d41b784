import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convex_entropy import distributions as D
from convex_entropy import entropy as E
from convex_entropy.errors import BetaTooSmall, DimensionTooHigh, NoClosedForm, SingularCovariance

mp.mp.dps = 20


def mp_entropy_1d(logf, lo, hi, points=()):
    """-int f log f by mpmath on [lo, hi] split at ``points``."""
    nodes = [lo, *points, hi]
    return float(mp.quad(lambda x: -mp.exp(logf(x)) * logf(x), nodes))


# --------------------------------------------------------------------------
# closed forms against independent formulas
# --------------------------------------------------------------------------

@pytest.mark.parametrize("cov", [[[1.0]], [[2.0, 0.5], [0.5, 1.0]], np.diag([0.5, 1.0, 3.0])])
def test_gaussian_entropy(cov):
    cov = np.asarray(cov, float)
    n = cov.shape[0]
    expected = 0.5 * math.log((2 * math.pi * math.e) ** n * np.linalg.det(cov))
    g = D.Gaussian(cov)
    assert E.entropy_closed(g).value == pytest.approx(expected, rel=1e-13)
    if n <= 3:
        assert E.entropy_quad(g).value == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("rates", [[1.0], [0.5, 2.0], [1.0, 3.0, 0.25]])
def test_exponential_entropy(rates):
    spec = D.ExponentialProduct(rates)
    expected = len(rates) - sum(math.log(r) for r in rates)
    assert E.entropy(spec).value == pytest.approx(expected, rel=1e-13)
    assert E.entropy_quad(spec).value == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("body", [D.Body.cube(2, 2.0), D.Body.ball(3), D.Body.simplex(3)])
def test_uniform_entropy_is_log_volume(body):
    spec = D.UniformBody(body)
    assert E.entropy(spec).value == pytest.approx(math.log(body.volume()), rel=1e-12)
    assert E.entropy_quad(spec).value == pytest.approx(math.log(body.volume()), abs=1e-6)


def test_cauchy_entropy_mpmath():
    logf = lambda x: -mp.log(mp.pi * (1 + x * x))
    ref = mp_entropy_1d(logf, -mp.inf, mp.inf, [0])
    assert ref == pytest.approx(math.log(4 * math.pi), abs=1e-12)
    assert E.entropy_quad(D.Cauchy1D()).value == pytest.approx(ref, abs=1e-6)
    assert E.entropy_closed(D.Cauchy1D(2.0)).value == pytest.approx(math.log(8 * math.pi), rel=1e-13)


def test_stable_alpha2_is_gaussian_variance_two():
    spec = D.StableSymmetric1D(2.0)
    assert E.entropy_closed(spec).value == pytest.approx(0.5 * math.log(4 * math.pi * math.e))


def test_stable_general_alpha_has_no_closed_form():
    with pytest.raises(NoClosedForm):
        E.entropy_closed(D.StableSymmetric1D(1.5))


def test_potential_entropy_quadrature_mpmath():
    # density proportional to exp(-x^4)
    spec = D.PotentialDensity(1, "x[0]**4")
    z = mp.quad(lambda x: mp.exp(-x ** 4), [-mp.inf, 0, mp.inf])
    ref = mp_entropy_1d(lambda x: -x ** 4 - mp.log(z), -mp.inf, mp.inf, [0])
    assert E.entropy(spec).value == pytest.approx(ref, abs=1e-6)


def test_affine_entropy_adds_log_det():
    base = D.ParetoMV(2, 4.0)
    A = np.array([[1.5, 0.3], [-0.2, 0.8]])
    spec = D.AffineImage(base, A, [1.0, 2.0])
    expected = E.entropy(base).value + math.log(abs(np.linalg.det(A)))
    assert E.entropy(spec).value == pytest.approx(expected, rel=1e-12)
    assert E.entropy_quad(spec).value == pytest.approx(expected, abs=1e-6)


def test_quadrature_dimension_limit():
    with pytest.raises(DimensionTooHigh):
        E.entropy_quad(D.Gaussian.isotropic(4))


# --------------------------------------------------------------------------
# Pareto normalizers
# --------------------------------------------------------------------------

@pytest.mark.parametrize("n,beta,a", [(1, 2.0, 1.0), (2, 3.5, 1.0), (2, 4.0, 2.0), (3, 5.0, 1.0)])
def test_pareto_Z_and_L_mpmath(n, beta, a):
    # integrate over the sum s = x_1 + ... + x_n, whose surface factor is s^(n-1)/(n-1)!
    w = lambda s: s ** (n - 1) / mp.factorial(n - 1)
    Z = mp.quad(lambda s: w(s) * (a + s) ** -beta, [0, mp.inf])
    L = mp.quad(lambda s: w(s) * mp.log(a + s) * (a + s) ** -beta, [0, mp.inf])
    assert E.pareto_Z(n, beta, a) == pytest.approx(float(Z), rel=1e-12)
    assert E.pareto_L(n, beta, a) == pytest.approx(float(L), rel=1e-12)
    assert E.pareto_Z_recursion(n, beta, a) == pytest.approx(float(Z), rel=1e-8)
    assert E.pareto_L_recursion(n, beta, a) == pytest.approx(float(L), rel=1e-8)


def test_pareto_Z_examples():
    assert E.pareto_Z(1, 2.0, 1.0) == pytest.approx(1.0)
    assert E.pareto_Z(2, 4.0, 2.0) == pytest.approx(1 / 24)


def test_pareto_Z_diverges_at_beta_n():
    with pytest.raises(BetaTooSmall):
        E.pareto_Z(2, 2.0, 1.0)


@pytest.mark.parametrize("n,beta", [(1, 2.0), (2, 3.5), (3, 5.0)])
def test_pareto_entropy_identity(n, beta):
    spec = D.ParetoMV(n, beta)
    harmonic = beta * sum(1 / (beta - i) for i in range(1, n + 1))
    expected = harmonic - math.log(D.max_density(spec))
    assert E.entropy_closed(spec).value == pytest.approx(expected, rel=1e-12)


# --------------------------------------------------------------------------
# Renyi entropies
# --------------------------------------------------------------------------

@pytest.mark.parametrize("spec", [D.Gaussian([[1.0, 0.2], [0.2, 2.0]]), D.ExponentialProduct([1.0, 2.0]),
                                  D.ParetoMV(1, 3.0), D.Cauchy1D()])
@pytest.mark.parametrize("p", [0.75, 2.0, 3.0])
def test_renyi_closed_matches_quadrature(spec, p):
    assert E.renyi_quad(spec, p).value == pytest.approx(E.renyi_closed(spec, p).value, abs=1e-6)


def test_cauchy_renyi_half_diverges():
    from convex_entropy.errors import DivergentIntegral
    with pytest.raises(DivergentIntegral):
        E.renyi_closed(D.Cauchy1D(), 0.5)


def test_renyi_exponential_formula():
    # int e^{-p x} dx = 1/p
    for p in (0.5, 2.0, 5.0):
        assert E.renyi_closed(D.ExponentialProduct([1.0]), p).value == pytest.approx(
            math.log(p) / (p - 1), rel=1e-13)


@settings(max_examples=30, deadline=None)
@given(p=st.floats(0.35, 8.0), q=st.floats(0.35, 8.0), beta=st.floats(3.1, 12.0))
def test_renyi_non_increasing_in_order(p, q, beta):
    lo, hi = sorted((p, q))
    spec = D.ParetoMV(1, beta)
    # orders p <= 1/beta diverge; beta > 3 and p > 0.35 keep them finite
    assert E.renyi_closed(spec, hi).value <= E.renyi_closed(spec, lo).value + 1e-12


def test_renyi_limits():
    spec = D.Gaussian.isotropic(2, 1.5)
    assert E.renyi_closed(spec, 1).value == E.entropy_closed(spec).value
    assert E.renyi_closed(spec, math.inf).value == pytest.approx(-math.log(D.max_density(spec)))


# --------------------------------------------------------------------------
# Monte Carlo
# --------------------------------------------------------------------------

@pytest.mark.parametrize("spec", [D.ParetoMV(2, 3.5), D.ExponentialProduct([1.0, 2.0, 0.5]),
                                  D.UniformBody(D.Body.ball(3))])
def test_monte_carlo_within_stderr(spec):
    est = E.entropy_mc(spec, seed=11, m=100_000)
    exact = E.entropy_closed(spec).value
    assert est.method == "monte-carlo"
    assert abs(est.value - exact) <= 4 * est.uncertainty + 1e-12


def test_monte_carlo_reproducible():
    spec = D.Gaussian.isotropic(2)
    a = E.entropy_mc(spec, seed=5, m=20_000)
    b = E.entropy_mc(spec, seed=5, m=20_000)
    assert a.value == b.value and a.uncertainty == b.uncertainty


def test_auto_falls_back_to_quadrature():
    est = E.entropy(D.PotentialDensity(1, "abs(x[0])**3"))
    assert est.method == "quadrature"


# --------------------------------------------------------------------------
# Gaussianity, isotropic constant, independence
# --------------------------------------------------------------------------

def test_D_of_uniform_interval():
    d = E.D_gaussianity(D.UniformBody(D.Body.cube(1)))
    assert d.value == pytest.approx(0.5 * math.log(2 * math.pi * math.e / 12), rel=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_D_affine_invariant(n):
    base = D.ExponentialProduct([1.0] * n)
    rng = np.random.default_rng(n)
    A = rng.normal(size=(n, n)) + 2 * np.eye(n)
    d0 = E.D_gaussianity(base).value
    d1 = E.D_gaussianity(D.AffineImage(base, A, rng.normal(size=n))).value
    assert d1 == pytest.approx(d0, rel=1e-10)
    assert d0 == pytest.approx(n * (0.5 * math.log(2 * math.pi * math.e) - 1), rel=1e-12)


def test_isotropic_constant_cube():
    assert E.isotropic_constant(D.UniformBody(D.Body.cube(3))) == pytest.approx(12 ** -0.5)


def test_gaussian_independence_distance_bivariate():
    rho = 0.6
    R = np.array([[2.0, rho * math.sqrt(2.0)], [rho * math.sqrt(2.0), 1.0]])
    assert E.gaussian_independence_distance(R) == pytest.approx(-0.5 * math.log(1 - rho ** 2))


def test_gaussian_kl_against_mc():
    R = np.array([[1.0, 0.3], [0.3, 2.0]])
    R0 = np.diag([1.5, 1.0])
    x = np.random.default_rng(0).multivariate_normal(np.zeros(2), R, size=400_000)
    lp = lambda S: -0.5 * np.einsum("ij,jk,ik->i", x, np.linalg.inv(S), x) - 0.5 * np.linalg.slogdet(2 * math.pi * S)[1]
    diff = lp(R) - lp(R0)
    assert E.gaussian_kl(R, R0) == pytest.approx(diff.mean(), abs=4 * diff.std() / math.sqrt(diff.size))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_gaussian_chain_rule(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    B = rng.normal(size=(n, n))
    R = B @ B.T + 0.1 * np.eye(n)
    lhs, rhs = E.gaussian_chain_rule(R, rng.uniform(0.5, 2.0, size=n))
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)


def test_singular_covariance_rejected():
    with pytest.raises(SingularCovariance):
        E.gaussian_independence_distance([[1.0, 1.0], [1.0, 1.0]])


def test_gauss_fit_max_density():
    spec = D.ExponentialProduct([1.0, 1.0])
    fit = E.gauss_fit(spec, "max-density")
    assert D.max_density(fit.gaussian()) == pytest.approx(D.max_density(spec))
