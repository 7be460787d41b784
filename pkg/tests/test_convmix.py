import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from convex_entropy import convmix as C
from convex_entropy import distributions as D
from convex_entropy.errors import (
    ConditionViolated,
    DivergentMixingMoment,
    GridEvaluationFailed,
    InvalidSpec,
    KappaOutOfRange,
    NoClosedForm,
)

LOG_2PI_E = math.log(2 * math.pi * math.e)


def gamma_mix(shape, rate=1.0, n=1):
    return C.MixtureSpec(n, C.Mixing("gamma", {"shape": shape, "rate": rate}))


def mp_variance_gamma_pdf(y, k, rate):
    """Gaussian variance mixture with Gamma(k, rate) mixing, via a Bessel K closed form."""
    y = abs(mp.mpf(y))
    nu = k - mp.mpf(1) / 2
    if y == 0:
        return rate ** k / mp.gamma(k) / mp.sqrt(2 * mp.pi) * mp.gamma(nu) / rate ** nu
    b = y * y / 2
    return (rate ** k / mp.gamma(k) / mp.sqrt(2 * mp.pi)
            * 2 * (b / rate) ** (nu / 2) * mp.besselk(nu, 2 * mp.sqrt(rate * b)))


def mp_variance_gamma_entropy(k, rate):
    f = lambda y: mp_variance_gamma_pdf(y, k, rate)
    return float(2 * mp.quad(lambda y: -f(y) * mp.log(f(y)), [0, 1, 5, mp.inf]))


# --------------------------------------------------------------------------
# self-convolution peaks
# --------------------------------------------------------------------------

def test_junge_bound_values():
    assert C.junge_bound(1, 0.0, 1) == pytest.approx(math.e)
    assert C.junge_bound(2, 0.0, 4) == pytest.approx((math.e / 2) ** 2)
    assert C.junge_bound(1, -1.0, 1) == pytest.approx(math.e ** 2)
    with pytest.raises(KappaOutOfRange):
        C.junge_bound(1, 0.5, 2)


def test_irwin_hall_peaks_brute_force():
    assert C.irwin_hall_peak(2) == 1
    assert C.irwin_hall_peak(3) == Fraction(3, 4)
    # discrete convolution of the uniform density converges to the same peak
    h = 1e-3
    base = np.ones(int(1 / h))
    dens = base.copy()
    for m in range(2, 6):
        dens = np.convolve(dens, base) * h
        assert dens.max() == pytest.approx(float(C.irwin_hall_peak(m)), abs=5e-3)


def test_gamma_mode_density():
    assert C.gamma_mode_density(3) == pytest.approx(2 * math.exp(-2))
    assert C.gamma_mode_density(1, 2.5) == 2.5
    k = 7
    assert C.gamma_mode_density(k, 2.0) == pytest.approx(
        2.0 * (k - 1) ** (k - 1) * math.exp(-(k - 1)) / math.factorial(k - 1))


@pytest.mark.parametrize("spec,m,peak", [
    (D.Gaussian([[2.0]]), 4, (2 * math.pi * 2.0) ** -0.5 / 2),
    (D.UniformBody(D.Body.cube(1)), 2, 1.0),
    (D.ExponentialProduct([1.0]), 3, 2 * math.exp(-2)),
])
def test_worked_convolution_examples(spec, m, peak):
    res = C.self_convolve_max(spec, m)
    assert res.peak == pytest.approx(peak, rel=1e-13)
    assert res.method == "closed-form"
    assert res.peak <= res.bound


@pytest.mark.parametrize("spec", [
    D.Gaussian([[1.7]], [0.4]), D.ExponentialProduct([1.0]), D.ExponentialProduct([3.0]),
    D.UniformBody(D.Body.cube(1)), D.UniformBody(D.Body.cube(1, 2.5, [-1.0])),
    D.AffineImage(D.ExponentialProduct([1.0]), [[-2.0]], [1.0]),
])
@pytest.mark.parametrize("m", [2, 3, 7, 16])
def test_fft_matches_closed_form(spec, m):
    closed = C.convolution_peak_closed(spec, m)
    fft, _ = C.convolution_peak_fft(spec, m)
    assert fft == pytest.approx(closed, rel=1e-6)


def test_fft_heavy_tail_cauchy():
    for m in (2, 5):
        fft, _ = C.convolution_peak_fft(D.Cauchy1D(), m)
        assert fft == pytest.approx(1 / (math.pi * m), rel=1e-6)


def test_fft_generic_potential():
    # exp(-|x|^3) has no closed form; a direct numeric convolution at 0 is the oracle for m=2
    spec = D.PotentialDensity(1, "abs(x[0])**3")
    z = float(mp.quad(lambda x: mp.exp(-abs(x) ** 3), [-mp.inf, 0, mp.inf]))
    at0 = float(mp.quad(lambda x: mp.exp(-2 * abs(x) ** 3), [-mp.inf, 0, mp.inf])) / z ** 2
    res = C.self_convolve_max(spec, 2)
    assert res.method == "fft"
    assert res.peak == pytest.approx(at0, rel=1e-6)


def test_no_closed_form_for_potential():
    with pytest.raises(NoClosedForm):
        C.convolution_peak_closed(D.PotentialDensity(1, "x[0]**4"), 2)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("family", ["gaussian", "exponential", "uniform"])
def test_junge_holds_closed_forms(n, family):
    spec = {"gaussian": D.Gaussian.isotropic(n, 0.7),
            "exponential": D.ExponentialProduct([1.0 + i for i in range(n)]),
            "uniform": D.UniformBody(D.Body.cube(n, 1.3))}[family]
    for m in range(1, 17):
        res = C.self_convolve_max(spec, m)
        assert res.peak <= res.bound * (1 + 1e-12)
        assert res.kappa == 0.0


def test_pareto_uses_kappa():
    res = C.self_convolve_max(D.ParetoMV(1, 3.0), 3)
    assert res.kappa == pytest.approx(-0.5)
    assert res.method == "fft"
    assert res.peak <= res.bound


# --------------------------------------------------------------------------
# mixing laws
# --------------------------------------------------------------------------

@pytest.mark.parametrize("mixing", [
    C.Mixing("gamma", {"shape": 2.5, "rate": 1.5}), C.Mixing("invgamma", {"shape": 3.0, "scale": 2.0}),
    C.Mixing("lognormal", {"mu": 0.3, "sigma": 0.7}),
])
def test_mixing_logpdf_matches_scipy(mixing):
    v = np.array([0.05, 0.7, 2.0, 9.0])
    assert np.allclose(mixing.logpdf(v), mixing.dist.logpdf(v), rtol=1e-12)


@pytest.mark.parametrize("mixing", [
    C.Mixing("gamma", {"shape": 2.5, "rate": 1.5}), C.Mixing("invgamma", {"shape": 3.0, "scale": 2.0}),
    C.Mixing("lognormal", {"mu": 0.3, "sigma": 0.7}),
])
@pytest.mark.parametrize("r", [-1.0, -0.5, 1.0])
def test_mixing_moments_quadrature(mixing, r):
    ref = mixing.dist.expect(lambda v: v ** r)
    assert mixing.power_moment(r) == pytest.approx(ref, rel=1e-7)
    ref_log = mixing.dist.expect(np.log)
    assert mixing.log_moment() == pytest.approx(ref_log, rel=1e-7, abs=1e-9)


def test_divergent_moment():
    with pytest.raises(DivergentMixingMoment):
        C.Mixing("gamma", {"shape": 1.0}).power_moment(-1.0)


# --------------------------------------------------------------------------
# variance mixtures of Gaussians
# --------------------------------------------------------------------------

def test_condition_examples():
    assert C.mixture_logconcavity_condition(gamma_mix(2.0)).verdict != "fail"
    assert C.mixture_logconcavity_condition(gamma_mix(1.0)).verdict == "fail"
    assert C.mixture_logconcavity_condition(gamma_mix(2.0, n=2)).verdict != "fail"


def test_condition_failure_blocks_bounds():
    with pytest.raises(ConditionViolated):
        C.mixture_bounds(gamma_mix(1.0))


def test_point_mass_bounds_and_condition():
    mix = C.MixtureSpec(1, C.Mixing("point", {"value": 1.0}))
    b = C.mixture_bounds(mix)
    assert b.lower == pytest.approx(0.5 * LOG_2PI_E)
    assert b.upper - b.h_base == pytest.approx(0.5)
    with pytest.raises(GridEvaluationFailed):
        C.mixture_logconcavity_condition(mix)


@pytest.mark.parametrize("k,lower,upper", [(2.0, 0.2114, 0.5), (3.0, 0.4614, 0.5 + math.log(2))])
def test_gamma_bracket_offsets(k, lower, upper):
    b = C.mixture_bounds(gamma_mix(k))
    assert b.offsets["lower"] == pytest.approx(0.5 * special.digamma(k), rel=1e-13)
    assert b.offsets["lower"] == pytest.approx(lower, abs=1e-4)
    assert b.offsets["upper"] == pytest.approx(upper, rel=1e-12)


def test_mixture_pdf_bessel_oracle():
    mix = gamma_mix(2.0, 1.5)
    y = np.array([[0.0], [0.3], [1.0], [4.0], [12.0]])
    ref = [float(mp.log(mp_variance_gamma_pdf(t, 2, 1.5))) for t in y[:, 0]]
    assert np.allclose(C.mixture_logpdf(mix, y), ref, rtol=1e-9, atol=1e-9)


def test_mixture_table_matches_scalar():
    mix = gamma_mix(3.0, n=2)
    r = np.array([0.0, 0.1, 1.0, 5.0, 20.0])
    spline = C.mixture_logpdf_table(mix, 25.0)
    scalar = C.mixture_logpdf(mix, np.column_stack([r, np.zeros_like(r)]))
    assert np.allclose(spline(np.arcsinh(r)), scalar, atol=1e-8)


@pytest.mark.parametrize("k", [2, 3])
def test_mixture_entropy_quad_bessel_oracle(k):
    ref = mp_variance_gamma_entropy(k, 1)
    assert C.mixture_entropy_quad(gamma_mix(float(k))).value == pytest.approx(ref, abs=1e-7)


@pytest.mark.parametrize("k", [2.0, 3.0])
def test_gamma_mixture_inside_bracket(k):
    mix = gamma_mix(k)
    b = C.mixture_bounds(mix)
    est = C.mixture_entropy_mc(mix, seed=1, samples=200_000)
    assert b.lower - 3 * est.uncertainty <= est.value <= b.upper + 3 * est.uncertainty
    assert est.value == pytest.approx(C.mixture_entropy_quad(mix).value, abs=4 * est.uncertainty)


def test_mc_reproducible():
    a = C.mixture_entropy_mc(gamma_mix(2.0), seed=3, samples=20_000)
    b = C.mixture_entropy_mc(gamma_mix(2.0), seed=3, samples=20_000)
    assert a.value == b.value


def test_printed_upper_offset_can_fail_when_n_is_one():
    # condition holds, yet the entropy exceeds the printed upper bound; the
    # bound read off the peak at 0 still holds
    mix = gamma_mix(200.0, 2000.0)
    assert C.mixture_logconcavity_condition(mix).verdict != "fail"
    b = C.mixture_bounds(mix)
    h = mp_variance_gamma_entropy(200, 2000)
    assert h > b.upper + 0.5
    assert b.lower <= h <= b.upper_corrected


@settings(max_examples=25, deadline=None)
@given(k=st.floats(1.6, 40.0), rate=st.floats(0.1, 10.0), n=st.integers(1, 4))
def test_corrected_bracket_contains_jensen(k, rate, n):
    mix = gamma_mix(k, rate, n)
    if C.mixture_logconcavity_condition(mix).verdict == "fail":
        return
    b = C.mixture_bounds(mix)
    # Jensen: E log V <= log E V^{...}, so the bracket is ordered
    assert b.lower <= b.upper_corrected + 1e-12


def test_two_dimensional_mixture_inside_corrected_bracket():
    mix = gamma_mix(2.0, 1.0, n=2)
    b = C.mixture_bounds(mix)
    h = C.mixture_entropy_quad(mix).value
    assert b.lower <= h <= b.upper_corrected
    assert b.upper == pytest.approx(b.upper_corrected)


# --------------------------------------------------------------------------
# scale mixtures of a log-concave base
# --------------------------------------------------------------------------

def uniform_scale_mix(k):
    base = D.UniformBody(D.Body.cube(1, 2.0, [-1.0]))
    return C.MixtureSpec(1, C.Mixing("gamma", {"shape": k}), "scale", base)


def test_scale_condition_uniform_base():
    assert C.mixture_logconcavity_condition(uniform_scale_mix(2.0)).verdict != "fail"
    assert C.mixture_logconcavity_condition(uniform_scale_mix(4.0)).verdict != "fail"


def test_scale_condition_fails_for_gaussian_base():
    mix = C.MixtureSpec(1, C.Mixing("gamma", {"shape": 3.0}), "scale", D.Gaussian([[1.0]]))
    assert C.mixture_logconcavity_condition(mix).verdict == "fail"


def test_scale_mixture_laplace_equality():
    # uniform on [-1, 1] scaled by Gamma(2) is the Laplace law exp(-|x|)/2
    f = lambda x: mp.quad(lambda s: s * mp.exp(-s) / (2 * s), [abs(x), mp.inf])
    assert float(f(0.7)) == pytest.approx(math.exp(-0.7) / 2, rel=1e-12)
    b = C.mixture_bounds(uniform_scale_mix(2.0))
    assert b.upper == pytest.approx(1 + math.log(2), rel=1e-13)
    assert b.lower < 1 + math.log(2)


@pytest.mark.parametrize("k", [3.0, 5.0])
def test_scale_mixture_bracket_mpmath(k):
    g = lambda s: s ** (k - 1) * mp.exp(-s) / mp.gamma(k)
    f = lambda x: mp.quad(lambda s: g(s) / (2 * s), [x, x + 1, mp.inf])
    h = float(2 * mp.quad(lambda x: -f(x) * mp.log(f(x)), [0, 1, 10, 60]))
    b = C.mixture_bounds(uniform_scale_mix(k))
    assert b.lower <= h <= b.upper


def test_variance_path_needs_standard_gaussian():
    with pytest.raises(InvalidSpec):
        C.MixtureSpec(1, C.Mixing("gamma", {"shape": 2.0}), "variance", D.Gaussian([[2.0]]))


def test_mixture_spec_roundtrip():
    mix = uniform_scale_mix(3.0)
    again = C.MixtureSpec.from_dict(mix.to_dict())
    assert again.to_dict() == mix.to_dict()
    assert C.mixture_bounds(again, require_condition=False).upper == pytest.approx(
        C.mixture_bounds(mix, require_condition=False).upper)
