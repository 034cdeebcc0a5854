import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sc

from cattaneo.special_fn import (
    SERIES_RADIUS,
    MLParams,
    _ml_contour,
    _ml_series,
    dirichlet_kernel,
    mittag_leffler,
    mittag_leffler_real,
)
from cattaneo.transforms import LaplaceInverterConfig, laplace_invert
from cattaneo.validation import ml_series_oracle

# values of the 60-digit truncated series (see ml_series_oracle), frozen
ML_07_1_M32 = 0.12829027257981523
ML_04_18_M5 = 0.190397182441355


def test_exponential():
    assert mittag_leffler(MLParams(1.0, 1.0), 1.0).real == pytest.approx(math.e, rel=1e-15)


def test_cosine_zero():
    assert abs(mittag_leffler(MLParams(2.0, 1.0), -((math.pi / 2) ** 2))) <= 1e-12


def test_series_oracle_value():
    assert ml_series_oracle(0.7, 1.0, -3.2) == pytest.approx(ML_07_1_M32, rel=1e-15)
    v = mittag_leffler(MLParams(0.7, 1.0), -3.2)
    assert v.real == pytest.approx(ML_07_1_M32, rel=1e-10)


def test_real_fast_path_examples():
    assert mittag_leffler_real(MLParams(0.4, 1.8), 0.0) == pytest.approx(1 / math.gamma(1.8), rel=1e-15)
    assert mittag_leffler_real(MLParams(1.0, 2.0), -2.0) == pytest.approx((1 - math.exp(-2)) / 2, rel=1e-13)
    assert ml_series_oracle(0.4, 1.8, -5.0, nterms=800) == pytest.approx(ML_04_18_M5, rel=1e-15)
    assert mittag_leffler_real(MLParams(0.4, 1.8), -5.0) == pytest.approx(ML_04_18_M5, rel=1e-10)


def test_real_input_has_zero_imaginary_part():
    for x in (-30.0, -3.0, -0.5, 0.5, 4.0):
        v = mittag_leffler(MLParams(0.6, 1.3), x)
        assert abs(v.imag) <= 1e-14
        assert mittag_leffler_real(MLParams(0.6, 1.3), x) == v.real


@pytest.mark.parametrize("beta", [0.1, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0])
def test_value_at_zero_is_one(beta):
    assert mittag_leffler(MLParams(beta, 1.0), 0.0) == 1.0


@pytest.mark.parametrize("beta", [0.2, 0.4, 0.6, 0.8, 1.0])
def test_completely_monotone_on_negative_axis(beta):
    xs = -np.linspace(0, 40, 161)
    v = mittag_leffler_real(MLParams(beta, 1.0), xs)
    assert np.all(v > 0) and np.all(v <= 1)
    assert np.all(np.diff(v) <= 1e-15)


@pytest.mark.parametrize(
    "beta,gamma,z",
    [(0.7, 1.0, -3.2), (0.4, 1.0, -1.0), (0.4, 1.8, -1.0), (0.5, 1.0, -8.0), (1.3, 0.7, 2.5), (0.9, 2.0, -12.0)],
)
def test_against_series_oracle(beta, gamma, z):
    ref = ml_series_oracle(beta, gamma, z, nterms=1000, dps=80)
    assert mittag_leffler_real(MLParams(beta, gamma), z) == pytest.approx(ref, rel=1e-10)


def test_crossover_is_seamless():
    rng = np.random.default_rng(7)
    for _ in range(100):
        a = rng.uniform(0.2, 1.0)
        b = rng.uniform(0.5, 2.5)
        z = SERIES_RADIUS * np.exp(1j * rng.uniform(0, math.pi))
        s, c = _ml_series(z, a, b), _ml_contour(z, a, b)
        assert abs(s - c) <= 1e-8 * abs(s)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(0.1, 1.5),
    st.floats(0.5, 2.0),
    st.floats(-20, 20),
    st.floats(0.01, 20),
)
def test_conjugate_symmetry_exact(beta, gamma, re, im):
    p = MLParams(beta, gamma)
    z = complex(re, im)
    try:
        v = mittag_leffler(p, z)
    except OverflowError:
        with pytest.raises(OverflowError):
            mittag_leffler(p, z.conjugate())
        return
    assert mittag_leffler(p, z.conjugate()) == v.conjugate()


def test_overflow_raises():
    # E_{1/8}(3) ~ 8 exp(3^8) is not representable
    with pytest.raises(OverflowError):
        mittag_leffler(MLParams(0.125), 3.0 + 0.5j)
    with pytest.raises(OverflowError):
        mittag_leffler_real(MLParams(0.125), 3.0)
    assert np.isfinite(mittag_leffler(MLParams(0.125), 2.0 + 0.1j))


def test_large_gamma_keeps_residue_in_range():
    # e^p overflows for p = 800 but p^(1-gamma) brings the residue back
    p = MLParams(1.0, 120.0)
    v = mittag_leffler(p, 800.0).real
    assert math.isfinite(v)
    # ml_series_oracle(1, 120, 800, nterms=3000)
    assert v == pytest.approx(92.87034749499772, rel=1e-10)


def test_array_input():
    z = np.array([[0.0, -1.0], [2.0j, -3.0 + 1.0j]])
    v = mittag_leffler(MLParams(0.5, 1.0), z)
    assert v.shape == z.shape
    assert v[1, 1] == mittag_leffler(MLParams(0.5, 1.0), -3.0 + 1.0j)


def test_beta_half_closed_form():
    # E_{1/2,1}(-x) = exp(x^2) erfc(x)
    for x in (0.3, 1.0, 4.0, 20.0):
        assert mittag_leffler_real(MLParams(0.5, 1.0), -x) == pytest.approx(sc.erfcx(x), rel=1e-10)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        MLParams(0.0, 1.0)
    with pytest.raises(ValueError):
        MLParams(0.5, math.nan)
    with pytest.raises(ValueError):
        mittag_leffler(MLParams(0.5), complex(math.inf, 0))
    with pytest.raises(ValueError):
        mittag_leffler_real(MLParams(0.5), math.nan)


# kernel: its Laplace transform in x is eta^(a-1) z E_{2,2}(-eta^a z^2)


def _kernel_transform(alpha, z, eta):
    return eta ** (alpha - 1) * z * mittag_leffler(MLParams(2.0, 2.0), -(eta**alpha) * z * z)


def test_kernel_transform_closed_form():
    # E_{2,2}(-w^2) = sin(w)/w
    for alpha, z, eta in [(0.5, 1.0, 2.0), (0.3, 2.0, 0.7)]:
        w = eta ** (alpha / 2) * z
        ref = eta ** (alpha - 1) * z * math.sin(w) / w
        assert _kernel_transform(alpha, z, eta).real == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("z", [0.5, 1.0, 2.0])
def test_kernel_laplace_pair(x, z):
    alpha = 0.5
    cfg = LaplaceInverterConfig(tol=1e-10)
    inv = laplace_invert(lambda eta: _kernel_transform_vec(alpha, z, eta), x, cfg)
    assert dirichlet_kernel(alpha, x, z) == pytest.approx(inv, rel=1e-6)


def _kernel_transform_vec(alpha, z, eta):
    w = eta ** (alpha / 2) * z
    return eta ** (alpha - 1) * z * np.sin(w) / w


@pytest.mark.parametrize("alpha", [0.2, 0.8])
def test_kernel_laplace_pair_other_orders(alpha):
    inv = laplace_invert(lambda eta: _kernel_transform_vec(alpha, 1.3, eta), 0.7)
    assert dirichlet_kernel(alpha, 0.7, 1.3) == pytest.approx(inv, rel=1e-6)


def test_kernel_small_x_extended_precision():
    # large z^2/x^alpha: float64 terms cancel, the mpmath path takes over
    v = dirichlet_kernel(0.5, 1e-3, 2.0)
    inv = laplace_invert(lambda eta: _kernel_transform_vec(0.5, 2.0, eta), 1e-3)
    assert math.isfinite(v)
    assert v == pytest.approx(inv, rel=1e-6)


def test_kernel_is_real_and_small_z_linear():
    v1, v2 = dirichlet_kernel(0.5, 1.0, 1e-4), dirichlet_kernel(0.5, 1.0, 2e-4)
    assert isinstance(v1, float)
    assert v2 / v1 == pytest.approx(2.0, rel=1e-6)


def test_kernel_rejects():
    with pytest.raises(ValueError):
        dirichlet_kernel(0.5, 1.0, 0.0)
    with pytest.raises(ValueError):
        dirichlet_kernel(0.5, 0.0, 1.0)
    with pytest.raises(ValueError):
        dirichlet_kernel(1.0, 1.0, 1.0)
