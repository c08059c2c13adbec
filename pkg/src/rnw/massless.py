"""Zero-energy families for the massless operator ``|p| + V``.

Even family: ``u_nu = (1+x^2)^-nu`` with

    V_nu = -C_nu (1+x^2)^nu 2F1(1, 1/2+nu; 1/2; -x^2),
    C_nu = 2 Gamma(1/2+nu) / (sqrt(pi) Gamma(nu)).

Odd family: ``v_nu = x (1+x^2)^-nu`` with

    V~_nu = -(4 Gamma(nu+1/2) / (sqrt(pi) Gamma(nu))) (1+x^2)^nu 2F1(2, 1/2+nu; 3/2; -x^2).

The odd prefactor equals ``-2(1-2nu) Gamma(nu-1/2) / ((1-nu) sqrt(pi) Gamma(nu-1))``
and stays finite at ``nu = 1``.  At ``nu = 1/2`` (even) and ``nu = 3/2``
(odd) the hypergeometric connection formula degenerates and the elementary
closed forms with ``arcsinh`` are used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import fft as sfft
from scipy.integrate import quad
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import SpecialFunctionDomainError, UnsupportedParameters
from .specfun import arcsinh, bessel_k, gamma, hyp2f1
from .spectral import (
    GridSpec,
    MultiplierSymbol,
    SampledFunction,
    apply_multiplier,
    default_grid,
    derivative,
    make_grid,
)

__all__ = [
    "u_nu",
    "v_nu",
    "V_nu",
    "V_tilde_nu",
    "u_hat_nu",
    "even_coefficient",
    "gauss_limit",
    "classify",
    "decay_class",
    "expected_decay",
    "MasslessFamily",
    "massless_family",
    "residual_even",
    "residual_odd",
    "analytic_residual",
    "derivative_relation_error",
    "l2_window_norms",
    "l2_classify",
    "sign_structure",
    "CouplingPoint",
    "coupling_scan",
]


def u_nu(nu: float, x):
    return (1 + np.asarray(x) ** 2) ** (-nu)


def v_nu(nu: float, x):
    x = np.asarray(x)
    return x * (1 + x * x) ** (-nu)


def even_coefficient(nu: float) -> float:
    return 2 * gamma(0.5 + nu) / (math.sqrt(math.pi) * gamma(nu))


def _odd_coefficient(nu: float) -> float:
    return 4 * gamma(nu + 0.5) / (math.sqrt(math.pi) * gamma(nu))


def V_nu(nu: float, x):
    """Even-family potential; ``nu = 1/2`` uses the closed form.

    Half-integers ``nu >= 3/2`` hit the logarithmic case of the connection
    formula and are not supported.
    """
    if not nu > 0:
        raise SpecialFunctionDomainError("V_nu requires nu > 0")
    x = np.asarray(x)
    s = 1 + x * x
    if nu == 0.5:
        ax = np.abs(x)
        return -(2 / np.pi) * (1 / np.sqrt(s) - ax * arcsinh(ax) / s)
    if nu > 1 and 2 * nu == math.floor(2 * nu) and nu != math.floor(nu):
        raise UnsupportedParameters(f"V_nu at half-integer nu = {nu} is not supported")
    return -even_coefficient(nu) * s ** nu * hyp2f1(1.0, 0.5 + nu, 0.5, -x * x)


def V_tilde_nu(nu: float, x):
    """Odd-family potential for ``1/2 < nu < 2``."""
    if not 0.5 < nu < 2:
        raise UnsupportedParameters(f"V_tilde_nu needs 1/2 < nu < 2, got {nu}")
    x = np.asarray(x)
    s = 1 + x * x
    if nu == 1:
        return -2 / s
    if nu == 1.5:
        ax = np.abs(x)
        safe = np.where(ax > 0, ax, 1)
        # arcsinh(x)/x -> 1 as x -> 0
        ratio = np.where(ax > 1e-4, arcsinh(safe) / safe, 1 - ax * ax / 6)
        return -(2 / np.pi) * (3 / np.sqrt(s) + (1 - 2 * x * x) * ratio / s)
    return -_odd_coefficient(nu) * s ** nu * hyp2f1(2.0, 0.5 + nu, 1.5, -x * x)


def gauss_limit(nu: float) -> float:
    """Limit of ``|x| V_nu(x)`` for ``0 < nu < 1/2``.

    Equals ``-C_nu * Gamma(1/2) Gamma(1/2-nu) / Gamma(-nu)``, the Gauss value
    of ``2F1(1/2+nu, -1/2; 1/2; 1)`` times ``-C_nu``.
    """
    if not 0 < nu < 0.5:
        raise ValueError("the 1/|x| limit exists for 0 < nu < 1/2")
    return -even_coefficient(nu) * gamma(0.5) * gamma(0.5 - nu) / gamma(-nu)


def u_hat_nu(nu: float, k):
    """Unitary Fourier transform ``2^(1-nu)/Gamma(nu) |k|^(nu-1/2) K_(nu-1/2)(|k|)``."""
    if not nu > 0:
        raise SpecialFunctionDomainError("u_hat_nu requires nu > 0")
    ak = np.abs(np.asarray(k, dtype=float))
    zero = ak == 0
    if np.any(zero) and nu <= 0.5:
        raise SpecialFunctionDomainError("u_hat_nu is singular at k = 0 for nu <= 1/2")
    s = nu - 0.5
    pref = 2 ** (1 - nu) / gamma(nu)
    safe = np.where(zero, 1.0, ak)
    out = pref * safe ** s * bessel_k(abs(s), safe)
    if np.any(zero):
        # |k|^s K_s(|k|) -> 2^(s-1) Gamma(s) for s > 0
        out = np.where(zero, pref * 2 ** (s - 1) * gamma(s), out)
    return out[()] if np.ndim(out) == 0 else out


def classify(parity: str, nu: float) -> str:
    """``"eigenvalue"`` if the zero-energy solution is square integrable, else ``"resonance"``."""
    if parity == "even":
        return "eigenvalue" if nu > 0.25 else "resonance"
    if parity == "odd":
        return "eigenvalue" if nu > 0.75 else "resonance"
    raise ValueError("parity must be 'even' or 'odd'")


def decay_class(parity: str, nu: float) -> str:
    if parity == "even":
        if 0 < nu < 0.5:
            return "O(|x|^-1)"
        if nu == 0.5:
            return "O(log|x|/|x|)"
        if 0.5 < nu < 1:
            return "O(|x|^-(2-2nu))"
        return "not covered"
    if parity == "odd":
        if nu == 1:
            return "O(|x|^-2)"
        if 0.5 < nu < 1.5:
            return "O(|x|^-1)"
        if nu == 1.5:
            return "O(log|x|/|x|)"
        if 1.5 < nu < 2:
            return "O(|x|^-(4-2nu))"
        return "not covered"
    raise ValueError("parity must be 'even' or 'odd'")


def expected_decay(parity: str, nu: float) -> tuple[str, float] | None:
    """``(fit model, exponent)`` predicted by the decay table, or ``None``."""
    label = decay_class(parity, nu)
    table = {
        "O(|x|^-1)": ("power", -1.0),
        "O(log|x|/|x|)": ("power_log", -1.0),
        "O(|x|^-2)": ("power", -2.0),
        "O(|x|^-(2-2nu))": ("power", -(2 - 2 * nu)),
        "O(|x|^-(4-2nu))": ("power", -(4 - 2 * nu)),
    }
    return table.get(label)


@dataclass(frozen=True)
class MasslessFamily:
    parity: str
    nu: float
    eigenfunction: Callable
    potential: Callable
    classification: str
    decay_class: str

    def describe(self) -> dict:
        return {"family": f"massless-{self.parity}", "nu": self.nu,
                "classification": self.classification, "decay_class": self.decay_class}


def massless_family(parity: str, nu: float) -> MasslessFamily:
    if parity == "even":
        if not nu > 0:
            raise UnsupportedParameters("even family needs nu > 0")
        if nu > 1 and 2 * nu == math.floor(2 * nu) and nu != math.floor(nu):
            raise UnsupportedParameters(f"V_nu at half-integer nu = {nu} is not supported")
        eig, pot = (lambda x: u_nu(nu, x)), (lambda x: V_nu(nu, x))
    elif parity == "odd":
        if not 0.5 < nu < 2:
            raise UnsupportedParameters(f"odd family needs 1/2 < nu < 2, got {nu}")
        eig, pot = (lambda x: v_nu(nu, x)), (lambda x: V_tilde_nu(nu, x))
    else:
        raise ValueError("parity must be 'even' or 'odd'")
    return MasslessFamily(parity, float(nu), eig, pot, classify(parity, nu), decay_class(parity, nu))


def _residual(fam: MasslessFamily, grid: GridSpec) -> float:
    x = grid.nodes
    w = SampledFunction(grid, fam.eigenfunction(x))
    kin = apply_multiplier(w, MultiplierSymbol("abs_k")).values.real
    res = kin + fam.potential(x) * w.values
    guard = grid.guard_mask()
    return float(np.linalg.norm(res[guard]) / np.linalg.norm(w.values[guard]))


def residual_even(nu: float, grid: GridSpec | None = None) -> float:
    """Relative L2 norm of ``|p| u_nu + V_nu u_nu`` on ``|x| <= L/2``."""
    return _residual(massless_family("even", nu), grid or default_grid())


def residual_odd(nu: float, grid: GridSpec | None = None) -> float:
    """Relative L2 norm of ``|p| v_nu + V~_nu v_nu`` on ``|x| <= L/2``."""
    return _residual(massless_family("odd", nu), grid or default_grid())


def analytic_residual(parity: str, x) -> float:
    """``nu = 1`` residual using the Poisson-kernel values of ``|p|`` (no transforms).

    ``|p| (1+x^2)^-1 = (1-x^2)/(1+x^2)^2`` and ``|p| x/(1+x^2) = 2x/(1+x^2)^2``.
    Returns ``sup|kinetic + V w| / sup|kinetic|``.
    """
    x = np.asarray(x, dtype=float)
    s = 1 + x * x
    if parity == "even":
        kin = (1 - x * x) / s ** 2
        res = kin + V_nu(1.0, x) * u_nu(1.0, x)
    elif parity == "odd":
        kin = 2 * x / s ** 2
        res = kin + V_tilde_nu(1.0, x) * v_nu(1.0, x)
    else:
        raise ValueError("parity must be 'even' or 'odd'")
    return float(np.max(np.abs(res)) / np.max(np.abs(kin)))


def derivative_relation_error(nu: float, grid: GridSpec | None = None) -> float:
    """``sup|v_nu - u_(nu-1)' / (2-2nu)| / sup|v_nu|`` on ``|x| <= L/2``, spectrally.

    Needs ``nu > 1`` so that ``u_(nu-1)`` decays and has a valid transform.
    """
    if not nu > 1:
        raise UnsupportedParameters("the spectral derivative check needs nu > 1")
    grid = grid or default_grid()
    x = grid.nodes
    du = derivative(SampledFunction(grid, u_nu(nu - 1, x)), 1, pad=4).values.real
    v = v_nu(nu, x)
    guard = grid.guard_mask()
    return float(np.max(np.abs(v - du / (2 - 2 * nu))[guard]) / np.max(np.abs(v[guard])))


def l2_window_norms(nu: float, radii=(50.0, 100.0, 200.0, 400.0, 800.0)) -> list[float]:
    """``int_{-R}^{R} u_nu^2`` for each window radius ``R``."""
    out = []
    for R in radii:
        val, _ = quad(lambda t: (1 + t * t) ** (-2 * nu), 0, R, limit=200)
        out.append(2 * val)
    return out


def l2_classify(nu: float, radii=(50.0, 100.0, 200.0, 400.0, 800.0)) -> str:
    """Detect square integrability of ``u_nu`` from how window increments scale.

    Increments over ``[R, 2R]`` scale like ``2^(1-4 nu)`` per doubling, so a
    non-negative log-ratio signals divergence.
    """
    norms = l2_window_norms(nu, radii)
    inc = np.diff(norms)
    rates = np.log2(inc[1:] / inc[:-1])
    return "eigenvalue" if float(np.mean(rates)) < -0.01 else "resonance"


def sign_structure(nu: float, parity: str = "even", x_max: float = 400.0, n: int = 400001) -> dict:
    """Zeros of the potential on ``[0, x_max]`` and the point beyond which it keeps one sign."""
    fam = massless_family(parity, nu)
    x = np.linspace(0.0, x_max, n)
    V = fam.potential(x)
    sgn = np.sign(V)
    flips = np.nonzero(sgn[1:] * sgn[:-1] < 0)[0]
    zeros = [float(x[i] - V[i] * (x[i + 1] - x[i]) / (V[i + 1] - V[i])) for i in flips]
    x0 = zeros[-1] if zeros else 0.0
    return {"zeros": zeros, "zero_count": len(zeros), "X0": x0,
            "tail_sign": int(sgn[-1]), "at_most_one_zero": len(zeros) <= 1}


# ---------------------------------------------------------------------------
# critical coupling


@dataclass(frozen=True)
class CouplingPoint:
    coupling: float
    e_box: float
    e0_estimate: float
    converged: bool


def coupling_scan(nu: float, couplings, grid: GridSpec | None = None, tol: float = 1e-12,
                  seed: int = 0) -> tuple[list[CouplingPoint], float]:
    """Lowest eigenvalue of the discretised ``|p| + lambda V_nu`` per coupling.

    ``|p|`` is the circulant matrix of the symbol ``|k|`` applied by FFT.  The
    box has discrete spectrum while the continuum operator has essential
    spectrum ``[0, inf)``; the reported bottom-of-spectrum estimate is
    ``E_box`` when it lies below ``-delta_grid`` and 0 otherwise.  Returns the points and ``delta_grid``, the slack
    measured from the free operator.
    """
    grid = grid or make_grid(256.0, 2 ** 12, precision="double")
    if grid.N > 2 ** 12:
        raise ValueError("coupling_scan is meant for N <= 2^12")
    x = np.asarray(grid.nodes, dtype=float)
    n = grid.N
    k = np.abs(np.asarray(grid.frequencies(), dtype=float))
    V = massless_family("even", nu).potential(x)
    v0 = np.random.default_rng(seed).standard_normal(n)

    def lowest(lam: float) -> tuple[float, bool]:
        diag = lam * V

        def matvec(w):
            w = np.ravel(w)
            return sfft.ifft(k * sfft.fft(w)).real + diag * w

        op = LinearOperator((n, n), matvec=matvec, dtype=float)
        try:
            val = eigsh(op, k=1, which="SA", v0=v0, tol=tol, return_eigenvectors=False)
            return float(val[0]), True
        except ArpackNoConvergence as exc:
            vals = exc.eigenvalues
            return (float(vals[0]) if len(vals) else float("nan")), False

    free, _ = lowest(0.0)
    delta = max(abs(free), tol)
    points = []
    for lam in couplings:
        if lam < 0:
            raise ValueError("couplings must be >= 0")
        e, ok = lowest(float(lam))
        # energies within the grid slack of 0 are indistinguishable from the threshold
        points.append(CouplingPoint(float(lam), e, e if e < -delta else 0.0, ok))
    return points, delta
