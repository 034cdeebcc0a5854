import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from scipy import integrate, stats
from scipy import special as sc

from cattaneo.stable import (
    RngStream,
    SamplerExhausted,
    StableParams,
    TemperedParams,
    sample_stable,
    sample_tempered,
    stable_density,
    tempered_density,
)

LEVY_AT_1 = math.exp(-0.25) / (2 * math.sqrt(math.pi))


def levy_cdf(x, t=1.0):
    # one-sided 1/2-stable law with E exp(-u S) = exp(-t sqrt(u))
    return sc.erfc(t / (2 * np.sqrt(x)))


# {{{ densities


def test_levy_closed_form():
    assert stable_density(StableParams(0.5, 1.0), 1.0) == pytest.approx(LEVY_AT_1, rel=1e-9)


@pytest.mark.parametrize("x", [0.05, 0.3, 2.0, 15.0])
def test_levy_closed_form_grid(x):
    t = 1.3
    exact = t / (2 * math.sqrt(math.pi)) * x**-1.5 * math.exp(-t * t / (4 * x))
    assert stable_density(StableParams(0.5, t), x) == pytest.approx(exact, rel=1e-8)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7, 0.9])
def test_normalization(alpha):
    p = StableParams(alpha, 1.0)
    f = lambda x: stable_density(p, x)  # noqa: E731
    total = sum(integrate.quad(f, a, b, limit=200, epsabs=1e-12)[0] for a, b in [(0, 1), (1, 100)])
    # the tail beyond 100 is ~ x^-alpha / Gamma(1-alpha)
    tail, _ = integrate.quad(f, 100, np.inf, limit=400)
    assert total + tail == pytest.approx(1.0, abs=1e-6)


def test_scaling_identity():
    a, t, x = 0.7, 2.0, 1.3
    lhs = stable_density(StableParams(a, t), x)
    rhs = t ** (-1 / a) * stable_density(StableParams(a, 1.0), x * t ** (-1 / a))
    assert lhs == pytest.approx(rhs, rel=1e-8)


@pytest.mark.parametrize("alpha", [0.1, 0.25, 0.5, 0.6, 0.8, 0.9, 0.95, 0.99])
def test_two_routes_agree(alpha):
    p = StableParams(alpha, 1.0)
    xs = np.geomspace(0.05, 50, 25)
    b = stable_density(p, xs, method="integral")
    xs, b = xs[b > 1e-6], b[b > 1e-6]
    a = stable_density(p, xs, method="inversion")
    assert np.max(np.abs(a / b - 1)) <= 1e-6


def test_density_rejects():
    with pytest.raises(ValueError):
        stable_density(StableParams(0.5), 0.0)
    with pytest.raises(ValueError):
        stable_density(StableParams(0.5), 1.0, method="series")
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            StableParams(bad)
    with pytest.raises(ValueError):
        TemperedParams(0.5, -1.0)


def test_tempered_reduces_at_zero_rate():
    x = 0.8
    assert tempered_density(TemperedParams(0.6, 0.0, 1.0), x) == stable_density(StableParams(0.6, 1.0), x)


def test_tempered_pointwise():
    assert tempered_density(TemperedParams(0.5, 1.0, 1.0), 1.0) == pytest.approx(LEVY_AT_1, rel=1e-9)


def test_tempered_normalization():
    p = TemperedParams(0.5, 2.0, 0.7)
    f = lambda x: tempered_density(p, x)  # noqa: E731
    total = sum(integrate.quad(f, a, b, limit=200, epsabs=1e-13)[0] for a, b in [(0, 0.5), (0.5, 5), (5, 60)])
    assert total == pytest.approx(1.0, abs=1e-6)


# }}}


# {{{ samplers


def test_rng_stream_reproducible_and_distinct():
    a = RngStream(11, 3).generator().random(5)
    b = RngStream(11, 3).generator().random(5)
    c = RngStream(11, 4).generator().random(5)
    d = RngStream(11, 3).generator(stage=1).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)
    with pytest.raises(ValueError):
        RngStream(-1)


def test_stable_deterministic():
    p = StableParams(0.6, 1.0)
    assert sample_stable(p, RngStream(5, 9)) == sample_stable(p, RngStream(5, 9))


def test_stable_thread_independent():
    p = TemperedParams(0.7, 1.0, 2.0)
    serial = [sample_tempered(p, RngStream(2, i)) for i in range(200)]
    with ThreadPoolExecutor(4) as ex:
        threaded = list(ex.map(lambda i: sample_tempered(p, RngStream(2, i)), range(200)))
    assert serial == threaded


def test_stable_laplace_transform():
    p = StableParams(0.5, 1.0)
    x = sample_stable(p, RngStream(20240607, 0), size=100_000)
    w = np.exp(-x)
    assert abs(w.mean() - math.exp(-1)) <= 4 * w.std(ddof=1) / math.sqrt(w.size)


def test_stable_ks_levy():
    x = sample_stable(StableParams(0.5, 1.0), RngStream(7, 0), size=10_000)
    assert stats.kstest(x, levy_cdf).pvalue > 0.01


def test_tempered_zero_rate_delegates():
    p = TemperedParams(0.6, 0.0, 1.5)
    assert sample_tempered(p, RngStream(1, 1)) == sample_stable(p.untempered, RngStream(1, 1))


def test_tempered_moments():
    p = TemperedParams(0.7, 1.0, 1.0)
    y = sample_tempered(p, RngStream(99, 0), size=100_000)
    se = y.std(ddof=1) / math.sqrt(y.size)
    # derivatives of t[(s + lam)^a - lam^a] at s = 0
    mean = p.alpha * p.lam ** (p.alpha - 1) * p.t
    var = p.alpha * (1 - p.alpha) * p.lam ** (p.alpha - 2) * p.t
    assert abs(y.mean() - mean) <= 4 * se
    d = (y - y.mean()) ** 2
    assert abs(d.mean() - var) <= 4 * d.std(ddof=1) / math.sqrt(y.size)


def test_tempered_laplace_transform():
    p = TemperedParams(0.7, 1.0, 1.0)
    s = 0.5
    w = np.exp(-s * sample_tempered(p, RngStream(3, 0), size=100_000))
    exact = math.exp(-p.t * ((s + p.lam) ** p.alpha - p.lam**p.alpha))
    assert abs(w.mean() - exact) <= 4 * w.std(ddof=1) / math.sqrt(w.size)


def test_tempered_large_time_uses_many_pieces():
    # lam^a t = 50 would leave plain rejection an acceptance rate of e^-50
    p = TemperedParams(0.5, 25.0, 10.0)
    y = sample_tempered(p, RngStream(4, 0), size=2000)
    mean = p.alpha * p.lam ** (p.alpha - 1) * p.t
    assert abs(y.mean() - mean) <= 4 * y.std(ddof=1) / math.sqrt(y.size)


def test_tempered_scalar_matches_law():
    p = TemperedParams(0.7, 1.0, 1.0)
    y = np.array([sample_tempered(p, RngStream(8, i)) for i in range(5000)])
    mean = p.alpha * p.lam ** (p.alpha - 1)
    assert abs(y.mean() - mean) <= 4 * y.std(ddof=1) / math.sqrt(y.size)


def test_tempered_guard():
    # lam^a t = 1: each proposal is accepted with probability about 1/e
    p = TemperedParams(0.5, 1.0, 1.0)
    with pytest.raises(SamplerExhausted):
        sample_tempered(p, RngStream(1), size=1000, max_tries=1)
    with pytest.raises(SamplerExhausted):
        for i in range(200):
            sample_tempered(p, RngStream(1, i), max_tries=1)


# }}}
