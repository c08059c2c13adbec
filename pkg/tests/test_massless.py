import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rnw.errors import SpecialFunctionDomainError, UnsupportedParameters
from rnw.massless import (
    V_nu,
    V_tilde_nu,
    analytic_residual,
    classify,
    coupling_scan,
    decay_class,
    derivative_relation_error,
    gauss_limit,
    l2_classify,
    massless_family,
    residual_even,
    residual_odd,
    sign_structure,
    u_hat_nu,
    u_nu,
    v_nu,
)
from rnw.spectral import fourier_transform, make_pi_grid, sample
from rnw.specfun import gamma
from rnw.verify import decay_fit, plateau_fit

WINDOW = np.linspace(50, 400, 20001)


def test_eigenfunction_examples():
    assert u_nu(0.3, 0.0) == 1
    assert v_nu(1, 1.0) == 0.5


@given(st.floats(min_value=0.01, max_value=3.0), st.floats(min_value=-1e3, max_value=1e3))
def test_u_nu_normalisation(nu, x):
    assert u_nu(nu, x) * (1 + x * x) ** nu == pytest.approx(1, rel=1e-12)


def test_potential_values_at_origin():
    # the closed form with the eigen-equation fixes V_1/2(0) = -2/pi
    assert V_nu(0.5, 0.0) == pytest.approx(-2 / math.pi, rel=1e-15)
    assert V_tilde_nu(1, 0.0) == -2
    assert V_tilde_nu(1.5, 0.0) == pytest.approx(-8 / math.pi, rel=1e-12)


def test_closed_forms_continue_the_general_formula():
    x = np.linspace(0, 30, 301)
    np.testing.assert_allclose(V_nu(0.5, x), (V_nu(0.5 - 1e-7, x) + V_nu(0.5 + 1e-7, x)) / 2, atol=1e-5)
    np.testing.assert_allclose(V_tilde_nu(1.5, x), (V_tilde_nu(1.5 - 1e-7, x) + V_tilde_nu(1.5 + 1e-7, x)) / 2,
                               atol=1e-5)
    np.testing.assert_allclose(V_tilde_nu(1, x), V_tilde_nu(1 + 1e-9, x), atol=1e-6)


def test_gauss_plateau():
    nu = 0.3
    expected = -(2 * gamma(0.8) / (math.sqrt(math.pi) * gamma(0.3))) * gamma(0.5) * gamma(0.2) / gamma(-0.3)
    assert gauss_limit(nu) == pytest.approx(expected, rel=1e-12)
    # |x| V approaches its limit like x^(2 nu - 1); extrapolate the plateau
    plateau, _ = plateau_fit(WINDOW, WINDOW * V_nu(nu, WINDOW), 2 * nu - 1)
    assert plateau == pytest.approx(expected, rel=0.05)


@pytest.mark.parametrize("parity,nu,alpha", [("even", 0.3, -1), ("even", 0.75, -0.5), ("odd", 1, -2),
                                             ("odd", 1.75, -0.5), ("odd", 0.6, -1)])
def test_decay_table(parity, nu, alpha):
    fam = massless_family(parity, nu)
    fit = decay_fit((WINDOW, fam.potential(WINDOW)))
    assert fit.exponent == pytest.approx(alpha, abs=0.1)


@pytest.mark.parametrize("parity,nu", [("even", 0.5), ("odd", 1.5)])
def test_log_corrected_boundedness(parity, nu):
    V = massless_family(parity, nu).potential(WINDOW)
    ratio = np.abs(V) * WINDOW / np.log(WINDOW)
    assert ratio.max() <= 1.2 * ratio.min()
    fit = decay_fit((WINDOW, V), model="power_log")
    assert fit.exponent == pytest.approx(-1, abs=0.1)


def test_u_hat_nu():
    assert u_hat_nu(1, 1.0) == pytest.approx(math.sqrt(math.pi / 2) / math.e, rel=1e-12)
    k = np.linspace(-5, 5, 11)
    np.testing.assert_array_equal(u_hat_nu(0.75, k), u_hat_nu(0.75, -k))
    with pytest.raises(SpecialFunctionDomainError):
        u_hat_nu(0.4, 0.0)


def test_u_hat_nu_matches_discrete_transform():
    g = make_pi_grid(163, 2 ** 18)
    k, vh = fourier_transform(sample(lambda x: u_nu(0.75, x), g), pad=4, tail=True)
    sel = (np.abs(k) > 0.05) & (np.abs(k) < 20)
    exact = u_hat_nu(0.75, np.asarray(k[sel], float))
    err = np.linalg.norm(np.asarray(vh[sel].real, float) - exact) / np.linalg.norm(exact)
    assert err <= 1e-5


def test_analytic_residuals():
    x = np.linspace(-400, 400, 80001)
    assert analytic_residual("even", x) <= 1e-9
    assert analytic_residual("odd", x) <= 1e-9


def test_spectral_residuals():
    assert residual_even(0.3) <= 1e-4
    assert residual_odd(1.75) <= 1e-4


def test_derivative_relation():
    assert derivative_relation_error(1.5) <= 1e-7
    assert derivative_relation_error(1.75) <= 1e-7


def test_classification():
    assert classify("even", 0.3) == "eigenvalue" and classify("even", 0.25) == "resonance"
    assert classify("odd", 0.8) == "eigenvalue" and classify("odd", 0.7) == "resonance"
    for nu in (0.2, 0.25, 0.26, 0.3, 0.75, 1.0):
        assert l2_classify(nu) == classify("even", nu)
    assert decay_class("even", 0.5) == "O(log|x|/|x|)"
    assert decay_class("odd", 1) == "O(|x|^-2)"


def test_family_guards():
    with pytest.raises(UnsupportedParameters):
        massless_family("odd", 2.5)
    with pytest.raises(UnsupportedParameters):
        massless_family("even", 1.5)
    with pytest.raises(ValueError):
        massless_family("neither", 1)


@pytest.mark.parametrize("nu", [0.3, 0.75])
def test_sign_structure(nu):
    info = sign_structure(nu)
    assert info["tail_sign"] == 1
    assert info["zero_count"] >= 1
    x = np.linspace(info["X0"] + 1, 400, 1000)
    assert np.all(V_nu(nu, x) > 0)


def test_coupling_scan_examples():
    points, delta = coupling_scan(0.75, [0.0, 0.5, 1.5])
    assert points[0].e_box >= -delta
    assert points[1].e0_estimate >= -delta
    assert points[2].e0_estimate < -delta
    with pytest.raises(ValueError):
        coupling_scan(0.75, [-1.0])
