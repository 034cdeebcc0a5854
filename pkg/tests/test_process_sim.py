import json
import math

import numpy as np
import pytest

from cattaneo import analytic as an
from cattaneo.process_sim import (
    TrajectoryEnsemble,
    compare,
    empirical_cf,
    read_ensemble_csv,
    run_ensemble,
    sample_inverse_subordinator,
    sample_summed_subordinator,
    sample_W,
    write_ensemble_csv,
)
from cattaneo.stable import RngStream

P = an.CattaneoParams(0.7, 0.4, 1.0, 0.5)


@pytest.fixture(scope="module")
def ens_w():
    return run_ensemble(P, 1.0, 20_000, seed=123)


def test_refuses_outside_validity_range():
    bad = an.CattaneoParams(0.7, 0.6, 1.0, 0.5)
    with pytest.raises(ValueError, match=r"\(0, 1/2\)"):
        sample_W(bad, 1.0, RngStream(1))
    with pytest.raises(ValueError):
        run_ensemble(bad, 1.0, 10, 1)
    with pytest.raises(ValueError):
        run_ensemble(P, 1.0, 0, 1)


def test_inverse_subordinator_nonnegative_finite():
    x = sample_inverse_subordinator(P, 1.0, RngStream(5), size=10_000)
    assert np.all(x >= 0) and np.all(np.isfinite(x))
    assert sample_inverse_subordinator(P, 0.0, RngStream(5)) == 0.0


def test_inverse_subordinator_monotone_coupling():
    ts = [0.1, 0.5, 1.0, 2.0, 5.0]
    for i in range(200):
        vals = [sample_inverse_subordinator(P, t, RngStream(9, i)) for t in ts]
        assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_inverse_subordinator_crosses_level():
    # A(L(t)) = t on the coupled path
    for t in (0.3, 1.0, 4.0):
        ell = sample_inverse_subordinator(P, t, RngStream(4, 7))
        # same stream, same stage: the pair (S1, S2) is reused
        a = sample_summed_subordinator(P, ell, RngStream(4, 7))
        assert a == pytest.approx(t, rel=1e-12)


def test_inversion_identity():
    # P[L(1) > 0.5] = P[A(0.5) < 1], from independent streams
    n = 100_000
    ell = sample_inverse_subordinator(P, 1.0, RngStream(1, 0), size=n)
    a = sample_summed_subordinator(P, 0.5, RngStream(1, 1), size=n)
    p1, p2 = np.mean(ell > 0.5), np.mean(a < 1.0)
    se = math.sqrt(p1 * (1 - p1) / n + p2 * (1 - p2) / n)
    assert abs(p1 - p2) <= 4 * se


def test_mean_curve_matches_u():
    means = []
    for t in (0.25, 0.5, 1.0, 2.0, 4.0):
        e = run_ensemble(P, t, 20_000, seed=77, quantity="L")
        m, se = e.mean()
        assert abs(m - an.mean_subordinator(P, t)) <= 4 * se
        means.append(m)
    assert all(a <= b for a, b in zip(means, means[1:]))


def test_sample_w_deterministic():
    assert sample_W(P, 1.0, RngStream(3, 8)) == sample_W(P, 1.0, RngStream(3, 8))
    assert sample_W(P, 1.0, RngStream(3, 8)) != sample_W(P, 1.0, RngStream(3, 9))


def test_sample_w_bad_order():
    with pytest.raises(ValueError):
        sample_W(P, 1.0, RngStream(1), order="LTB")


def test_single_draw_is_stream_zero():
    e = run_ensemble(P, 1.0, 1, seed=42)
    assert e.n == 1
    assert e.samples[0] == sample_W(P, 1.0, RngStream(42, 0))


def test_threads_do_not_change_samples():
    a = run_ensemble(P, 0.7, 400, seed=5, threads=1)
    b = run_ensemble(P, 0.7, 400, seed=5, threads=3)
    assert np.array_equal(a.samples, b.samples)


def test_zero_mean(ens_w):
    m, se = ens_w.mean()
    assert abs(m) <= 4 * se


@pytest.mark.parametrize("xi", [0.25, 0.5, 1.0])
def test_empirical_cf_matches_char_fn(ens_w, xi):
    c, se = empirical_cf(ens_w, xi)
    assert abs(c.real - an.char_fn(P, xi, 1.0).real) <= 4 * se
    s = np.sin(xi * ens_w.samples)
    assert abs(c.imag) <= 4 * s.std(ddof=1) / math.sqrt(ens_w.n)


def test_empirical_cf_symmetries(ens_w):
    assert empirical_cf(ens_w, 0.0) == (1 + 0j, 0.0)
    c1, _ = empirical_cf(ens_w, 0.8)
    c2, _ = empirical_cf(ens_w, -0.8)
    assert c1 == c2.conjugate()


def test_swapped_composition_detected(ens_w):
    # B(L(T(t))) in place of B(T(L(t))) misses the characteristic function
    wrong = run_ensemble(P, 1.0, 20_000, seed=123, quantity="W_swapped")
    z = []
    for xi in (0.25, 0.5, 1.0):
        c, se = empirical_cf(wrong, xi)
        z.append(abs(c.real - an.char_fn(P, xi, 1.0).real) / se)
    assert max(z) > 4


def test_variance_identity(ens_w):
    x1 = run_ensemble(P, 1.0, 20_000, seed=124, quantity="X1")
    v_x, _ = x1.variance()
    v_w, se_w = ens_w.variance()
    assert abs(v_w - an.mean_subordinator(P, 1.0) * v_x) <= 0.05 * v_w + 4 * se_w
    # Var X(1) = 2 E T(1) = 2 alpha lam^(alpha-1)
    assert abs(v_x - 1.4) <= 4 * x1.variance()[1]


def test_ensemble_validation():
    with pytest.raises(ValueError):
        TrajectoryEnsemble(1.0, np.array([0.0, np.inf]), RngStream(1), P)
    e = TrajectoryEnsemble(1.0, np.array([1.0]), RngStream(1), P)
    assert e.mean() == (1.0, 0.0) and e.variance() == (0.0, 0.0)


def test_compare_reports():
    r = compare("q", 1.02, 0.01, 1.0)
    assert r.z_score == pytest.approx(2.0) and r.passed
    r = compare("q", 1.05, 0.01, 1.0)
    assert not r.passed and r.verdict == "fail"
    r = compare("q", 1.05, 0.01, 1.0, kind="reported")
    assert r.verdict == "reported" and r.passed
    r = compare("q", 1.0005, 0.0, 1.0, rel=1e-3)
    assert r.passed
    assert set(r.to_dict()) >= {"quantity", "mc_estimate", "std_error", "oracle", "z_score", "verdict"}


def test_csv_round_trip(tmp_path, ens_w):
    e = run_ensemble(P, 0.5, 100, seed=9)
    path = tmp_path / "s.csv"
    write_ensemble_csv(e, path)
    back = read_ensemble_csv(path)
    assert np.array_equal(back, e.samples)
    meta = json.loads((tmp_path / "s.csv.json").read_text())
    assert meta["n"] == 100 and meta["t"] == 0.5
    assert meta["seed"]["master_seed"] == 9
    assert meta["moments"]["mean"] == pytest.approx(back.mean(), rel=1e-12)
    assert meta["moments"]["var"] == pytest.approx(back.var(ddof=1), rel=1e-12)
