import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tsrfc.sim import (
    AR2Coeffs,
    AR2Spec,
    MixtureSpec,
    ScenarioSpec,
    TimeSeries,
    ar2_coeffs,
    generate_scenario,
    simulate_ar2,
    simulate_mixture,
)
from tsrfc.spectral import ar2_true_spectrum


def _roots(u1, u2):
    # 1 - u1 y - u2 y^2 = 0, solved with the quadratic formula
    a, b, c = -u2, -u1, 1.0
    disc = np.sqrt(complex(b * b - 4 * a * c))
    return (-b + disc) / (2 * a), (-b - disc) / (2 * a)


@pytest.mark.parametrize(
    "nu, M, u1, u2",
    [
        # 2 cos(2 pi nu) / M and -1/M^2 evaluated directly
        (0.21, 1.15, 0.43250415, -0.75614367),
        (0.22, 1.15, 0.32588055, -0.75614367),
    ],
)
def test_ar2_coeffs_values(nu, M, u1, u2):
    c = ar2_coeffs(AR2Spec(nu, M, 1.0))
    assert c.u1 == pytest.approx(u1, abs=1e-8)
    assert c.u2 == pytest.approx(u2, abs=1e-8)
    assert c.sigma == 1.0


def test_quarter_frequency_gives_zero_u1():
    for ws in (1.0, 4.0, 100.0):
        c = ar2_coeffs(AR2Spec(ws / 4, 1.3, ws))
        assert abs(c.u1) < 1e-15


@pytest.mark.parametrize("nu, M", [(0.0, 1.1), (0.5, 1.1), (0.6, 1.1), (0.2, 1.0), (0.2, 0.9)])
def test_ar2_spec_rejects_invalid(nu, M):
    with pytest.raises(ValueError):
        AR2Spec(nu, M, 1.0)


@settings(max_examples=200, deadline=None)
@given(
    ws=st.floats(0.1, 100.0),
    frac=st.floats(0.001, 0.499),
    M=st.floats(1.0001, 20.0),
)
def test_roots_have_modulus_M(ws, frac, M):
    c = ar2_coeffs(AR2Spec(frac * ws, M, ws))
    for r in _roots(c.u1, c.u2):
        assert abs(abs(r) - M) < 1e-10 * M
    r1, _ = _roots(c.u1, c.u2)
    assert abs(abs(np.angle(r1)) - 2 * np.pi * frac) < 1e-8


def test_white_noise_lag1_autocorrelation():
    x = simulate_ar2(AR2Coeffs(0.0, 0.0, 1.0), T=1000, seed=3).values
    x = x - x.mean()
    r1 = (x[:-1] @ x[1:]) / (x @ x)
    assert abs(r1) < 3 / np.sqrt(1000)


def test_simulated_spectrum_peaks_near_nu():
    from tsrfc.spectral import LagWindowConfig, estimate_spectrum
    coeffs = ar2_coeffs(AR2Spec(0.21, 1.15))
    ts = simulate_ar2(coeffs, T=1000, seed=11)
    est = estimate_spectrum(ts, LagWindowConfig())
    true = ar2_true_spectrum(coeffs, est.freqs)
    assert abs(est.freqs[np.argmax(est.values)] - true.freqs[np.argmax(true.values)]) < 0.02


def test_simulation_is_deterministic():
    c = ar2_coeffs(AR2Spec(0.21, 1.15))
    a = simulate_ar2(c, 500, seed=42).values
    b = simulate_ar2(c, 500, seed=42).values
    assert np.array_equal(a, b)
    assert not np.array_equal(a, simulate_ar2(c, 500, seed=43).values)


def test_non_causal_rejected():
    with pytest.raises(ValueError):
        simulate_ar2(AR2Coeffs(0.5, 0.6), 100, seed=0)


def test_recursion_matches_explicit_loop():
    c = AR2Coeffs(0.4, -0.5, 2.0)
    rng = np.random.default_rng(9)
    eps = rng.standard_normal(130) * 2.0
    x = np.zeros(130)
    for t in range(130):
        x[t] = eps[t] + (c.u1 * x[t - 1] if t >= 1 else 0) + (c.u2 * x[t - 2] if t >= 2 else 0)
    got = simulate_ar2(c, T=100, burn_in=30, seed=np.random.default_rng(9)).values
    np.testing.assert_allclose(got, x[30:], rtol=1e-12, atol=1e-12)


def test_variance_stable_across_burn_in():
    c = ar2_coeffs(AR2Spec(0.21, 1.15))
    # stationary AR(2) variance in closed form
    gamma0 = (1 - c.u2) / ((1 + c.u2) * ((1 - c.u2) ** 2 - c.u1**2))
    for burn in (500, 1000):
        v = np.mean([simulate_ar2(c, 2000, burn_in=burn, seed=s).values.var() for s in range(10)])
        assert np.isfinite(v)
        assert abs(v / gamma0 - 1) < 0.10


def test_single_component_mixture_equals_ar2():
    spec = AR2Spec(0.21, 1.15)
    mix = simulate_mixture(MixtureSpec((spec,), (1.0,), noise_sd=0.0), 300, 100, seed=5).values
    ar = simulate_ar2(ar2_coeffs(spec), 300, 100, seed=5).values
    np.testing.assert_array_equal(mix, ar)


def test_zero_weight_component_has_no_effect():
    s1, s2 = AR2Spec(0.20, 1.05), AR2Spec(0.25, 1.1)
    a = simulate_mixture(MixtureSpec((s1, s2), (1.0, 0.0), noise_sd=0.0), 400, 100, seed=2).values
    b = simulate_ar2(ar2_coeffs(s1), 400, 100, seed=2).values
    np.testing.assert_allclose(a, b)


def test_two_component_mixture_has_two_modal_regions():
    from tsrfc.spectral import LagWindowConfig, estimate_spectrum
    mix = MixtureSpec((AR2Spec(0.20, 1.05), AR2Spec(0.25, 1.1)), (1.0, 1.0))
    est = estimate_spectrum(simulate_mixture(mix, 1000, seed=1), LagWindowConfig())
    f, v = est.freqs, est.values
    left = v[(f > 0.19) & (f < 0.21)].max()
    right = v[(f > 0.24) & (f < 0.26)].max()
    trough = v[(f > 0.22) & (f < 0.23)].min()
    assert left > 1.5 * trough and right > 1.5 * trough


def test_mixture_rejects_empty():
    with pytest.raises(ValueError):
        MixtureSpec((), ())
    with pytest.raises(ValueError):
        MixtureSpec((AR2Spec(0.2, 1.1),), (1.0, 2.0))


@pytest.mark.parametrize("scheme, n, n0", [("clean", 100, 0), ("i", 111, 11), ("ii", 111, 11), ("iii", 111, 11)])
def test_scenario_counts(scheme, n, n0):
    series, labels = generate_scenario(ScenarioSpec(scheme=scheme, seed=1, T=200))
    assert len(series) == n
    assert np.sum(labels == 0) == n0
    assert np.sum(labels == 1) == 50 and np.sum(labels == 2) == 50
    assert all(len(s) == 200 for s in series)


def test_clean_scheme_forces_no_contamination():
    assert ScenarioSpec(scheme="clean", n_contaminating=11).n_contaminating == 0


def test_scenario_reproducible():
    a, la = generate_scenario(ScenarioSpec(scheme="iii", seed=7, T=300))
    b, lb = generate_scenario(ScenarioSpec(scheme="iii", seed=7, T=300))
    assert np.array_equal(la, lb)
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))


def test_substreams_do_not_shift_with_counts():
    a, _ = generate_scenario(ScenarioSpec(scheme="i", seed=4, T=100, n_per_cluster=5, n_contaminating=3))
    b, _ = generate_scenario(ScenarioSpec(scheme="i", seed=4, T=100, n_per_cluster=6, n_contaminating=4))
    # first five of each clean group and the first three contaminants are unchanged
    assert np.array_equal(a[0].values, b[0].values)
    assert np.array_equal(a[5].values, b[6].values)
    assert np.array_equal(a[10].values, b[12].values)


def test_scheme_i_contaminants_are_weaker():
    series, labels = generate_scenario(ScenarioSpec(scheme="i", seed=0, T=1000))
    v = np.array([s.values.var() for s in series])
    assert v[labels == 0].mean() < v[labels > 0].mean()


def test_time_series_validation():
    with pytest.raises(ValueError):
        TimeSeries(np.array([1.0]))
    with pytest.raises(ValueError):
        TimeSeries(np.array([1.0, np.nan]))
