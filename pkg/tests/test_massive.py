import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rnw.massive import (
    MT_CONSTANTS,
    build_massive,
    build_moses_tuan,
    energy,
    eval_g,
    eval_h,
    eval_h_derivatives,
    eval_h_tilde,
    eval_h_tilde_derivatives,
    radial_lift,
    rescale,
    rescale_discrepancy,
)
from rnw.spectral import derivative, make_pi_grid, sample
from rnw.verify import decay_fit

SMALL = make_pi_grid(32, 2 ** 14)


def test_g_and_h_examples():
    assert eval_g(0.0) == 0 and eval_h(0.0) == 1
    assert eval_g(math.pi / 2) == pytest.approx(math.pi, rel=1e-15)
    for x in (0.5, 2.0, 10.0):
        assert 1 / (6 * (1 + x * x)) < eval_h(x) < 1 / (x * x + 2 / 3)


def test_h_derivatives_match_spectral():
    h1, h2 = derivative(sample(eval_h, SMALL), 1), derivative(sample(eval_h, SMALL), 2)
    _, a1, a2 = eval_h_derivatives(SMALL.nodes)
    assert np.max(np.abs(h1.values - a1)) <= 1e-9
    assert np.max(np.abs(h2.values - a2)) <= 1e-8


@given(st.floats(min_value=0.05, max_value=30.0), st.sampled_from([-1.0, 1.0]))
def test_h_tilde_derivatives_finite_differences(x, s):
    x = s * x
    step = 1e-4
    q = [np.asarray(eval_h_tilde_derivatives(np.longdouble(x + j * step))) for j in (-1, 0, 1)]
    for order in range(3):
        fd = (q[2][order] - q[0][order]) / (2 * step)
        assert float(fd) == pytest.approx(float(q[1][order + 1]), abs=2e-6)


def test_h_tilde_third_derivative_at_origin():
    _, _, q2, q3 = eval_h_tilde_derivatives(np.array([0.0, -1e-300]))
    assert q2[0] == 0
    assert q3[0] == -8 and q3[1] == 8


def test_energy_against_mpmath():
    mpmath.mp.dps = 40
    exact = mpmath.sqrt(21317) - 146
    assert float(energy(146)) == pytest.approx(float(exact), rel=1e-16)
    assert float(exact) == pytest.approx(3.4246e-3, rel=1e-4)


def test_massive_structure(massive146):
    model = massive146
    guard = model.grid.guard_mask()
    assert model.lam > 0 and model.certified
    assert model.u.is_odd(1e-12)
    V = model.V.values
    assert np.max(np.abs(V - np.roll(V[::-1], 1))[guard]) <= 1e-7 * model.sup_V
    x = model.grid.nodes
    assert np.all(model.f.values * (1 + x * x) >= 2)
    assert model.imag_diagnostic <= 1e-7 * model.sup_V
    assert model.seam_diagnostic <= 1e-6 * model.sup_V


def test_massive_removable_singularities(massive146):
    for k in (1, 2, 3):
        assert np.isfinite(massive146.V.at(k * math.pi))
    assert np.all(np.isfinite(massive146.V.values))


def test_massive_xV_bounded(massive146):
    x = np.asarray(massive146.grid.nodes, float)
    V = np.asarray(massive146.V.values, float)
    sel = (np.abs(x) >= 50) & (np.abs(x) <= 400)
    xv = np.abs(x[sel] * V[sel])
    inner, outer = np.abs(x[sel]) < 200, np.abs(x[sel]) >= 200
    assert xv[outer].max() <= 1.1 * xv[inner].max()


def test_rescale(massive146):
    assert rescale(massive146, 1) is massive146
    doubled = rescale(massive146, 2)
    assert doubled.m == 292 and doubled.certified
    assert rescale_discrepancy(doubled) <= 1e-12
    assert not rescale(massive146, 0.5).certified
    with pytest.raises(ValueError):
        rescale(massive146, 0)


def test_radial_lift(massive146):
    lift = radial_lift(massive146)
    assert np.all(lift.r > 0)
    f0 = float(massive146.f.at(0.0))
    assert lift.v_at_zero == pytest.approx(f0 / math.sqrt(4 * math.pi), rel=1e-9)
    assert float(lift.v[0]) == pytest.approx(lift.v_at_zero, rel=1e-5)
    lhs, rhs = lift.norm_identity()
    assert lhs == pytest.approx(rhs, rel=1e-14)


def test_uncertified_build_is_flagged():
    model = build_massive(10, SMALL)
    assert not model.certified
    assert not build_moses_tuan(20, SMALL).certified


@pytest.mark.parametrize("kwargs", [{"m": 0}, {"m": 146, "eps_sin": 0.0}, {"m": 146, "eps_sin": 0.7}])
def test_build_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        build_massive(grid=SMALL, **kwargs)


def test_moses_tuan(mt40):
    x = mt40.grid.nodes
    assert mt40.h_tilde.at(0.0) == 1 == eval_h_tilde(0.0)
    assert mt40.certified
    assert np.all(mt40.f_tilde.values * np.sqrt(1 + x * x) >= 2)
    c1, c2 = MT_CONSTANTS["c1"], MT_CONSTANTS["c2"]
    r = np.sqrt(1 + x * x)
    assert np.all(mt40.h_tilde.values * r >= c1) and np.all(mt40.h_tilde.values * r <= c2)
    assert decay_fit(mt40.V_tilde).exponent == pytest.approx(-1, abs=0.1)
    assert mt40.imag_diagnostic <= 1e-7 * mt40.sup_V
