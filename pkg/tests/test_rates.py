import numpy as np
import pytest

from anosovlab.flow import DecayCurve
from anosovlab.rates import (
    ObservableDictionary, build_dictionary, discrepancy, discrepancy_report,
    envelope_checks, fit_exponential, lyapunov_estimate, prefactor_exponent,
)
from anosovlab.spectral import TorusMap

CAT = np.array([[2, 1], [1, 1]])


def _curve(t, v, s=None):
    t = np.asarray(t, float)
    v = np.asarray(v, float)
    s = np.zeros_like(v) if s is None else np.asarray(s, float)
    return DecayCurve(t, v, s)


# ---------------------------------------------------------------------------
# exponential fits

def test_exact_exponential_recovered():
    t = np.linspace(0, 10, 21)
    fit = fit_exponential(_curve(t, 2.0 * np.exp(-0.7 * t)), (0, 10))
    assert abs(fit.beta - 0.7) < 1e-10
    assert abs(fit.C - 2.0) < 1e-10
    assert fit.r2 > 1 - 1e-12


def test_constant_data_zero_rate():
    t = np.linspace(0, 5, 11)
    fit = fit_exponential(_curve(t, np.full(11, 1.3), np.full(11, 0.01)),
                          (0, 5))
    assert fit.ci[0] <= 0.0 <= fit.ci[1] or abs(fit.beta) < 1e-12


def test_too_few_points_rejected():
    t = np.linspace(0, 4, 5)
    with pytest.raises(ValueError):
        fit_exponential(_curve(t, np.exp(-t)), (0, 4))


def test_near_zero_points_excluded_and_reported():
    t = np.linspace(0, 10, 21)
    v = np.exp(-t)
    s = np.full(21, 0.01)
    # the tail dips below 2 sigma and must be set aside, not logged
    fit = fit_exponential(_curve(t, v, s), (0, 10))
    assert len(fit.excluded) >= 2
    assert fit.n_used + len(fit.excluded) == 21
    assert abs(fit.beta - 1.0) < 0.05


def test_ci_calibration():
    # known rate 0.4 with 5% multiplicative noise: the 95% bootstrap CI
    # should cover the truth in at least 93 of 100 trials
    t = np.linspace(0, 8, 17)
    v0 = 3.0 * np.exp(-0.4 * t)
    rng = np.random.default_rng(7)
    hits = 0
    for trial in range(100):
        v = v0 * (1 + 0.05 * rng.standard_normal(t.size))
        fit = fit_exponential(_curve(t, v, 0.05 * v0), (0, 8),
                              n_boot=300, seed=trial)
        hits += fit.ci[0] <= 0.4 <= fit.ci[1]
    assert hits >= 93


def test_prefactor_exponent_powers():
    nus = [1e-1, 1e-2, 1e-3, 1e-4]
    t = np.linspace(0, 6, 13)

    def fits(power):
        out = []
        for nu in nus:
            C = nu ** -power
            out.append(fit_exponential(_curve(t, C * np.exp(-0.5 * t)), (0, 6)))
        return out

    assert abs(prefactor_exponent(nus, fits(2)).K_hat - 2.0) < 1e-9
    assert abs(prefactor_exponent(nus, fits(0)).K_hat - 0.0) < 1e-9


def test_prefactor_needs_four_members():
    t = np.linspace(0, 6, 13)
    fits = [fit_exponential(_curve(t, np.exp(-0.5 * t)), (0, 6))] * 3
    with pytest.raises(ValueError):
        prefactor_exponent([1e-1, 1e-2, 1e-3], fits)


def test_partial_flag_on_unconverged():
    nus = [1e-1, 1e-2, 1e-3, 1e-4]
    t = np.linspace(0, 6, 13)
    fits = [fit_exponential(_curve(t, np.exp(-0.5 * t)), (0, 6))] * 4
    sweep = prefactor_exponent(nus, fits, converged=[True, True, False, True])
    assert sweep.partial


# ---------------------------------------------------------------------------
# envelope checks

def test_envelope_constant_datum_trivial():
    t = np.linspace(0, 20, 21)
    rep = envelope_checks(_curve(t, np.zeros(21)), 1e-2, 1.0)
    assert rep["envelope_pass"] and rep["short_time_pass"]
    assert rep["C_env_needed"] == 1.0


def test_envelope_rejects_large_nu():
    with pytest.raises(ValueError):
        envelope_checks(_curve([0, 1], [1, 1]), 0.5, 10.0)


def test_pure_diffusion_fails_envelope():
    # rate 4 pi^2 nu is far slower than 1/log(1/nu) at nu = 1e-3: the
    # negative control must violate the enhanced envelope at late times
    nu = 1e-3
    t = np.linspace(0, 120, 61)
    rep = envelope_checks(_curve(t, np.exp(-4 * np.pi ** 2 * nu * t)), nu, 20.0)
    assert not rep["envelope_pass"]
    assert rep["C_env_needed"] > 100.0


def test_fast_decay_passes_envelope():
    nu = 1e-3
    t = np.linspace(0, 40, 41)
    rep = envelope_checks(_curve(t, 1.7 * np.exp(-0.9 * t)), nu, 20.0)
    assert rep["envelope_pass"] and rep["short_time_pass"]
    assert rep["C_env_needed"] <= 2.0


def test_short_time_bound_flags_excess_growth():
    nu = 1e-2
    t = np.linspace(0, 4.0, 21)
    growing = np.exp(5 * nu * t)          # grows faster than e^{2 nu t}
    rep = envelope_checks(_curve(t, growing), nu, 50.0)
    assert not rep["short_time_pass"]
    ok = np.exp(1.5 * nu * t)             # within the allowed growth
    rep2 = envelope_checks(_curve(t, ok), nu, 50.0)
    assert rep2["short_time_pass"]


# ---------------------------------------------------------------------------
# Lyapunov estimates

def test_lyapunov_flow_exact():
    est = lyapunov_estimate("bolza-flow", 40, 3)
    assert abs(est.gamma0 - 1.0) < 1e-8
    assert est.system == "bolza-flow"


def test_lyapunov_cat_map():
    est = lyapunov_estimate(TorusMap(CAT, 0.0, []), 1500, 5)
    target = np.log((3 + np.sqrt(5)) / 2)
    assert abs(est.gamma0 / target - 1) < 1e-10


def test_lyapunov_perturbed_continuity():
    shape = [((1, 0), (1.0, 1.0), "sin")]
    base = np.log((3 + np.sqrt(5)) / 2)
    est = lyapunov_estimate(TorusMap(CAT, 0.05, shape), 3000, 5)
    assert abs(est.gamma0 / base - 1) < 0.10


def test_lyapunov_ci_shrinks_and_horizons_agree():
    shape = [((1, 0), (1.0, 1.0), "sin")]
    tm = TorusMap(CAT, 0.04, shape)
    a = lyapunov_estimate(tm, 2000, 6, seed=5)
    b = lyapunov_estimate(tm, 4000, 6, seed=6)
    assert (b.ci[1] - b.ci[0]) <= (a.ci[1] - a.ci[0])
    overlap = min(a.ci[1], b.ci[1]) - max(a.ci[0], b.ci[0])
    assert overlap > 0


def test_lyapunov_horizon_validation():
    with pytest.raises(ValueError):
        lyapunov_estimate("bolza-flow", 5, 2)
    with pytest.raises(ValueError):
        lyapunov_estimate(TorusMap(CAT, 0.0, []), 100, 2)


# ---------------------------------------------------------------------------
# discrepancy dictionary

def test_dictionary_has_twenty_entries():
    d = build_dictionary(integrals=np.zeros(20))
    assert len(d) == 20


def test_dictionary_length_consistency():
    with pytest.raises(ValueError):
        ObservableDictionary(["a"], [lambda s: s], np.zeros(2))


def test_single_point_discrepancy():
    from anosovlab.geometry import sample_uniform
    d = build_dictionary(integrals=np.zeros(20))
    state = sample_uniform(1, seed=3)
    vals = np.array([np.mean(f(state)) for f in d.funcs])
    assert abs(discrepancy(state, d) - np.abs(vals).max()) < 1e-12


def test_empty_ensemble_rejected():
    d = build_dictionary(integrals=np.zeros(20))
    with pytest.raises(ValueError):
        discrepancy(np.zeros((0, 2, 2)), d)


def test_discrepancy_reduces_first():
    from anosovlab.geometry import bolza_group, sample_uniform
    group, _ = bolza_group()
    d = build_dictionary(integrals=np.zeros(20))
    states = sample_uniform(500, seed=4)
    moved = np.einsum("ij,njk->nik", group.gen_array[1], states)
    assert abs(discrepancy(states, d) - discrepancy(moved, d)) < 1e-9


def test_report_names_argmax():
    d = build_dictionary(integrals=np.zeros(20))
    from anosovlab.geometry import sample_uniform
    rep = discrepancy_report(sample_uniform(200, seed=5), d)
    assert rep["argmax"] in rep["names"]
    assert rep["max_deviation"] >= rep["deviations"].min()
