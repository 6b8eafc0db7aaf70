import json
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hawkesnet.errors import ModeRecoveryFailure
from hawkesnet.model import ExpKernel, HawkesModel, analytic_cov_fourier
from hawkesnet.modes import TraceProfile, default_omega_grid, fit_modes, trace_profile
from hawkesnet.reference import FIVE_NODE_MODES, poisson_model


def analytic_profile(model, z=2.0, min_gain=0.0, grid=None):
    fn = lambda w: analytic_cov_fourier(model, w, z)  # noqa: E731
    if grid is None:
        grid = default_omega_grid(fn, z)
    return trace_profile(fn, z, grid, min_gain=min_gain)


@st.composite
def separated_models(draw):
    m = draw(st.integers(1, 3))
    D = draw(st.integers(1, 3))
    ratios = draw(st.lists(st.floats(1.3, 2.0), min_size=D - 1, max_size=D - 1))
    betas = draw(st.floats(0.3, 1.5)) * np.cumprod(np.r_[1.0, ratios])
    coeffs = np.array(draw(st.lists(st.floats(0.1, 1.0), min_size=D * m * m, max_size=D * m * m))).reshape(D, m, m)
    rho = np.max(np.abs(np.linalg.eigvals(np.tensordot(1 / betas, coeffs, axes=(0, 0)))))
    coeffs *= draw(st.floats(0.2, 0.8)) / rho
    v = np.array(draw(st.lists(st.floats(0.2, 2.0), min_size=m, max_size=m)))
    return HawkesModel(ExpKernel(betas, coeffs), v)


# --- trace profile -------------------------------------------------------------

def test_poisson_profile_is_sum_of_inverse_rates():
    rates = [0.5, 0.4, 2.0]
    prof = analytic_profile(poisson_model(rates), grid=np.geomspace(0.01, 20, 50))
    np.testing.assert_allclose(prof.values, np.sum(1 / np.array(rates)), rtol=1e-12)


def test_univariate_profile_closed_form(uni):
    w = np.array([0.1, 0.5, 1.0, 2.0, 5.0])
    prof = analytic_profile(uni, grid=w)
    expected = np.abs(1 - 0.2 / (1 - 1j * w)) ** 2 / 0.625
    np.testing.assert_allclose(prof.values, expected, rtol=1e-12)


def test_singular_point_dropped_with_warning():
    def fn(w):
        return np.zeros((2, 2)) if w == 1.0 else np.eye(2)

    with pytest.warns(UserWarning, match="dropped 1 of 3"):
        prof = trace_profile(fn, 2.0, [0.5, 1.0, 1.5])
    assert prof.dropped == (1.0,)
    np.testing.assert_array_equal(prof.omega, [0.5, 1.5])


def test_low_gain_points_dropped():
    with pytest.warns(UserWarning):
        prof = trace_profile(lambda w: np.eye(1), 2.0, [0.5, np.pi, 3.0], min_gain=0.3)
    assert np.pi in prof.dropped


def test_nonpositive_grid_rejected():
    with pytest.raises(ValueError):
        trace_profile(lambda w: np.eye(1), 2.0, [0.0, 1.0])


def test_identical_replicates_have_zero_stderr(uni):
    fn = lambda w: analytic_cov_fourier(uni, w, 2.0)  # noqa: E731
    prof = trace_profile(fn, 2.0, [0.3, 0.6, 0.9], replicate_fns=[fn] * 5)
    np.testing.assert_array_equal(prof.stderr, 0.0)
    assert prof.noise_level == 0.0


def test_noise_level_is_rms_relative_stderr():
    prof = TraceProfile(np.array([1.0, 2.0]), np.array([2.0, 4.0]), 2.0, (), np.array([0.2, 0.8]))
    assert prof.noise_level == pytest.approx(np.sqrt((0.1 ** 2 + 0.2 ** 2) / 2))


# --- mode fitting --------------------------------------------------------------

def test_five_node_modes_from_analytic_profile(five):
    t0 = time.perf_counter()
    est = fit_modes(analytic_profile(five), D_max=6)
    assert time.perf_counter() - t0 < 10
    assert est.D == 3
    np.testing.assert_allclose(est.betas, FIVE_NODE_MODES, rtol=1e-3)
    assert est.scores[3] <= est.scores[2] / 10


def test_five_node_modes_from_main_lobe_only(five):
    # the largest mode sits beyond the last retained frequency
    prof = analytic_profile(five, min_gain=0.3)
    assert prof.omega.max() < 2.0
    est = fit_modes(prof, D_max=6)
    assert est.D == 3
    np.testing.assert_allclose(est.betas, FIVE_NODE_MODES, rtol=1e-3)


def test_univariate_mode(uni):
    est = fit_modes(analytic_profile(uni), D_max=6)
    assert est.D == 1
    assert est.betas[0] == pytest.approx(1.0, rel=1e-6)


def test_two_node_modes(two_node):
    est = fit_modes(analytic_profile(two_node), D_max=6)
    np.testing.assert_allclose(est.betas, two_node.kernel.betas, rtol=1e-3)


def test_constant_profile_reports_no_excitation():
    prof = analytic_profile(poisson_model([0.5, 0.4]), grid=np.geomspace(0.01, 20, 80))
    with pytest.raises(ModeRecoveryFailure, match="no excitation") as info:
        fit_modes(prof, D_max=6)
    assert info.value.diagnostics["residuals"][0] < 1e-12


def test_too_few_frequencies_rejected(uni):
    prof = analytic_profile(uni, grid=np.geomspace(0.1, 10, 59))
    with pytest.raises(ValueError):
        fit_modes(prof, D_max=6)


def test_noise_floor_suppresses_weak_structure(uni):
    # a profile whose stated noise dwarfs its variation looks like no excitation
    prof = analytic_profile(uni)
    noisy = TraceProfile(prof.omega, prof.values, prof.z, (), np.full(prof.values.size, 0.5) * prof.values)
    with pytest.raises(ModeRecoveryFailure):
        fit_modes(noisy, D_max=3)


def test_estimate_serialises(five):
    d = fit_modes(analytic_profile(five), D_max=4).to_dict()
    assert json.loads(json.dumps(d))["D"] == 3


@pytest.mark.parametrize("c", [0.5, 3.0])
def test_time_scale_equivariance(two_node, c):
    # rescaling time by c divides modes, kernel and rates by c
    k = two_node.kernel
    scaled = HawkesModel(ExpKernel(k.betas / c, k.coeffs / c), two_node.v / c)
    est = fit_modes(analytic_profile(two_node, z=2.0), D_max=4)
    est_c = fit_modes(analytic_profile(scaled, z=2.0 * c), D_max=4)
    assert est_c.D == est.D
    np.testing.assert_allclose(est_c.betas, est.betas / c, rtol=1e-6)


@given(separated_models())
@settings(max_examples=15)
def test_noiseless_recovery_property(model):
    est = fit_modes(analytic_profile(model), D_max=4)
    assert est.D == model.kernel.D
    np.testing.assert_allclose(est.betas, model.kernel.betas, rtol=1e-3)
