
import numpy as np
import pytest

from rnw.errors import CertificationError
from rnw.limits import (
    V_inf,
    V_mt,
    build_limit_model,
    classical_mt_identity,
    classical_nw_identity,
    default_c_values,
    limit_3d_check,
    limit_scan,
    moment_sums,
    nw_asymptote_envelope,
    u_mt,
    u_nw,
)
from rnw.massive import eval_h
from rnw.spectral import make_pi_grid
from rnw.verify import decay_fit


def test_classical_identities():
    assert classical_nw_identity() <= 1e-5
    assert classical_mt_identity() <= 1e-5


def test_classical_eigenfunctions_at_origin():
    assert u_nw(1e-6) == pytest.approx(1, abs=1e-10)
    assert u_mt(1e-6) == pytest.approx(1, abs=1e-5)


def test_nw_asymptote():
    env = nw_asymptote_envelope()
    # r |r V_NW + 8 sin 2r| bounded: no growth from the first to the last blocks
    assert env[-10:].max() <= 1.5 * env[:10].max()


def test_mt_potential_decay():
    r = np.linspace(50, 400, 200001)
    assert decay_fit((r, V_mt(r))).exponent == pytest.approx(-1, abs=0.1)


def test_default_c_values():
    assert default_c_values(1.0) == [160, 320, 640, 1280, 2560]
    assert all(c * 2.0 > 146 for c in default_c_values(2.0))


def test_limit_model_examples():
    grid = make_pi_grid(163, 2 ** 18)
    model = build_limit_model(1.0, 256.0, grid)
    assert model.certified
    h = eval_h(grid.nodes)
    assert np.max(np.abs(model.u_c.values - model.u_inf.values)) <= np.max(np.abs(model.f_c.values - h))
    # Taylor expansion of c(sqrt(1+m^2c^2) - mc) around 1/(2m)
    assert abs(float(model.lambda_c) - 0.5) <= 0.5 * 2 / (2 * 256.0 ** 2)


def test_limit_scan_table(limit_table):
    rows = limit_table.rows
    assert all(3.2 <= r <= 4.8 for r in limit_table.ratios())
    assert -2.4 <= limit_table.rate_exponent <= -1.6
    for key in ("e0", "e1", "e2", "lambda_err", "V_err"):
        vals = [getattr(r, key) for r in rows]
        assert all(a > b for a, b in zip(vals, vals[1:])), key
    for r in rows:
        assert r.e0 <= r.f_err * (1 + 1e-12) <= r.l1_bound * (1 + 1e-9) <= r.rate_bound * (1 + 1e-9)
        # the opposite sign convention does not converge
        assert r.V_err_opposite > 100 * r.V_err


def test_limit_scan_requires_certified_speeds():
    with pytest.raises(CertificationError):
        limit_scan(1.0, [100.0])


def test_V_inf_conventions():
    x = np.array([0.5, 1.0, 4.0])
    plus, minus = V_inf(x, 1.0, 1), V_inf(x, 1.0, -1)
    np.testing.assert_allclose(plus + minus, 1.0)


def test_moment_sums_converge_under_refinement():
    fine = moment_sums(make_pi_grid(163, 2 ** 20))
    coarse = moment_sums(make_pi_grid(163, 2 ** 19))
    assert all(np.isfinite(fine))
    np.testing.assert_allclose(coarse, fine, rtol=1e-2)


def test_limit_3d():
    rows = limit_3d_check(1.0, [160.0, 320.0])
    assert rows[1].v_err < rows[0].v_err and rows[1].W_err < rows[0].W_err
    for row in rows:
        assert row.v_err <= row.envelope
        assert row.v0_err <= 1e-3
