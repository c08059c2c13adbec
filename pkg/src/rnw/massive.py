"""Massive Neumann-Wigner and Moses-Tuan constructions.

For mass ``m`` the potential is built from

    g(x) = 2x - sin 2x,   h = 1/(1 + g^2),   f = (omega_+(p) + omega_-(p)) h,
    u = f sin x,          V = lambda - (omega(p) u) / u,

with ``omega(p) = sqrt(p^2 + m^2) - m``, ``omega_pm(p) = sqrt((p +- 1)^2 + m^2)``
and ``lambda = sqrt(1 + m^2) - m``.  Away from the zeros of ``sin x`` the
quotient form (formula A) is used directly.  Close to them the regular form
(formula B)

    V = -(omega_+(p) - lambda_0) f / f - 16 e^{-ix} g h^2 sin x / f

is used instead; both are evaluated on a band around the switch-over and
their mismatch is kept as the seam diagnostic.  The Moses-Tuan variant
replaces ``h`` by ``1/(1 + g(|x|))`` and the second term by
``-8 h^2 e^{-ix} sin|x| / f``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import CertificationError
from .spectral import (
    PI_LD,
    GridSpec,
    MultiplierSymbol,
    SampledFunction,
    apply_multiplier,
    default_grid,
    derivative,
)

__all__ = [
    "MASSIVE_THRESHOLD",
    "MT_THRESHOLD",
    "MT_CONSTANTS",
    "eval_g",
    "eval_h",
    "eval_h_derivatives",
    "eval_h_tilde",
    "eval_h_tilde_derivatives",
    "energy",
    "MassiveModel",
    "MTModel",
    "build_massive",
    "build_moses_tuan",
    "rescale",
    "rescale_discrepancy",
    "RadialLift",
    "radial_lift",
]

MASSIVE_THRESHOLD = 146.0
MT_THRESHOLD = 34.0
MT_CONSTANTS = {"c1": 0.26, "c2": 1.02, "c3": 2.2}


def eval_g(x):
    return 2 * x - np.sin(2 * x)


def eval_h(x):
    g = eval_g(x)
    return 1 / (1 + g * g)


def eval_h_derivatives(x):
    """``(h, h', h'')`` from ``h' = -2 g g' h^2`` and its derivative."""
    g = eval_g(x)
    g1 = 4 * np.sin(x) ** 2
    g2 = 4 * np.sin(2 * x)
    h = 1 / (1 + g * g)
    h1 = -2 * g * g1 * h * h
    h2 = 6 * g1 * g1 * h * h - 8 * g1 * g1 * h ** 3 - 2 * g * g2 * h * h
    return h, h1, h2


def eval_h_tilde(x):
    return 1 / (1 + eval_g(np.abs(x)))


def eval_h_tilde_derivatives(x):
    """``(h~, h~', h~'', h~''')`` with one-sided values at ``x = 0``.

    With ``q = 1/(1 + G)`` and ``G = g(x)`` for ``x > 0``:
    ``q' = -G' q^2``, ``q'' = -G'' q^2 + 2 G'^2 q^3`` and
    ``q''' = -G''' q^2 + 6 G' G'' q^3 - 6 G'^3 q^4``; ``x < 0`` follows by
    parity (odd derivatives flip sign).
    """
    ax = np.abs(x)
    s = np.where(x < 0, -1, 1)
    G = eval_g(ax)
    G1 = 4 * np.sin(ax) ** 2
    G2 = 4 * np.sin(2 * ax)
    G3 = 8 * np.cos(2 * ax)
    q = 1 / (1 + G)
    q1 = -G1 * q ** 2
    q2 = -G2 * q ** 2 + 2 * G1 ** 2 * q ** 3
    q3 = -G3 * q ** 2 + 6 * G1 * G2 * q ** 3 - 6 * G1 ** 3 * q ** 4
    return q, s * q1, q2, s * q3


def energy(m, dtype=np.longdouble):
    """``lambda = sqrt(1 + m^2) - m``, evaluated without cancellation."""
    m = dtype(m)
    return 1 / (np.sqrt(1 + m * m) + m)


def _sum_symbol(m):
    wp = MultiplierSymbol("omega_plus", m)
    wm = MultiplierSymbol("omega_minus", m)
    return lambda k: wp(k) + wm(k)


def _shift_symbol(m):
    # omega_+(k) - lambda_0 = (k^2 + 2k) / (omega_+(k) + lambda_0)
    def sym(k):
        mm = k.dtype.type(m)
        lam0 = np.sqrt(1 + mm * mm)
        return (k * k + 2 * k) / (np.sqrt((k + 1) ** 2 + mm * mm) + lam0)
    return sym


@dataclass(frozen=True, eq=False)
class _Potential:
    m: float
    lam: np.longdouble
    grid: GridSpec
    eps_sin: float
    g: SampledFunction
    h: SampledFunction
    f: SampledFunction
    u: SampledFunction
    V: SampledFunction
    imV: SampledFunction
    imag_diagnostic: float
    seam_diagnostic: float
    sup_V: float
    certified: bool
    scale: float = 1.0

    @property
    def sin_x(self) -> np.ndarray:
        return np.sin(self.grid.nodes * self.grid.dtype(self.scale))

    def regular_mask(self) -> np.ndarray:
        """Nodes where the quotient formula is used (``|sin x| >= eps_sin``)."""
        return np.abs(self.sin_x) >= self.eps_sin

    def columns(self) -> dict:
        x = self.grid.nodes
        return {"x": x, "g": self.g.values, "h": self.h.values, "f": self.f.values,
                "u": self.u.values, "V": self.V.values, "imV": self.imV.values}

    def describe(self) -> dict:
        return {"family": self.family, "m": float(self.m), "lambda": float(self.lam),
                "eps_sin": self.eps_sin, "scale": self.scale, "certified": self.certified,
                "grid": self.grid.describe()}


@dataclass(frozen=True, eq=False)
class MassiveModel(_Potential):
    family = "massive-nw"


@dataclass(frozen=True, eq=False)
class MTModel(_Potential):
    family = "moses-tuan"
    constants = MT_CONSTANTS

    # the tilde names used in the Moses-Tuan construction
    @property
    def h_tilde(self) -> SampledFunction:
        return self.h

    @property
    def f_tilde(self) -> SampledFunction:
        return self.f

    @property
    def u_tilde(self) -> SampledFunction:
        return self.u

    @property
    def V_tilde(self) -> SampledFunction:
        return self.V


def _assemble(grid: GridSpec, m: float, h: np.ndarray, second_term, eps_sin: float):
    """Shared part of both constructions: ``f``, ``u``, and ``V`` by formulas A/B."""
    x = grid.nodes
    hs = SampledFunction(grid, h)
    f = apply_multiplier(hs, _sum_symbol(m)).values.real
    sinx = np.sin(x)
    u = f * sinx
    lam = energy(m, grid.dtype)
    wu = apply_multiplier(SampledFunction(grid, u), MultiplierSymbol("omega", m)).values
    regular = np.abs(sinx) >= eps_sin
    band = regular & (np.abs(sinx) <= 2 * eps_sin)
    need_b = ~regular | band

    V = np.zeros(grid.N, dtype=grid.cdtype)
    V[regular] = lam - wu[regular] / u[regular]
    del wu
    shift = apply_multiplier(SampledFunction(grid, f), _shift_symbol(m)).values
    phase = np.exp(-1j * x[need_b].astype(grid.cdtype))
    VB = -shift[need_b] / f[need_b] + second_term(need_b) * phase / f[need_b]
    del shift
    VA_band = V[need_b]
    seam_vals = np.abs(VA_band - VB)[band[need_b]]
    V[~regular] = VB[~regular[need_b]]

    guard = grid.guard_mask()
    sup_V = float(np.max(np.abs(V.real[guard])))
    imag = float(np.max(np.abs(V.imag[guard])))
    seam_guard = guard[need_b][band[need_b]]
    seam = float(np.max(seam_vals[seam_guard])) if np.any(seam_guard) else 0.0
    return f, u, V, lam, imag, seam, sup_V


def build_massive(m: float, grid: GridSpec | None = None, eps_sin: float = 1e-3) -> MassiveModel:
    """Massive Neumann-Wigner model.

    Masses below 146 are allowed but the model is flagged uncertified.  For a
    certified mass, a violation of ``f >= 2 <x>^-2`` means the grid is not
    resolving the construction and raises :class:`CertificationError`.
    """
    if not m > 0:
        raise ValueError("mass must be positive")
    if not 0 < eps_sin < 0.5:
        raise ValueError("eps_sin must lie in (0, 0.5)")
    grid = grid or default_grid()
    x = grid.nodes
    g = eval_g(x)
    h = 1 / (1 + g * g)

    def second(sel):
        xs = x[sel]
        return -16 * g[sel] * h[sel] ** 2 * np.sin(xs)

    f, u, V, lam, imag, seam, sup_V = _assemble(grid, m, h, second, eps_sin)
    certified = m >= MASSIVE_THRESHOLD
    if certified and np.any(f * (1 + x * x) < 2):
        raise CertificationError("f >= 2<x>^-2 fails on the grid; the grid does not resolve m")
    return MassiveModel(m=float(m), lam=lam, grid=grid, eps_sin=eps_sin,
                        g=SampledFunction(grid, g), h=SampledFunction(grid, h),
                        f=SampledFunction(grid, f), u=SampledFunction(grid, u),
                        V=SampledFunction(grid, V.real), imV=SampledFunction(grid, V.imag),
                        imag_diagnostic=imag, seam_diagnostic=seam, sup_V=sup_V,
                        certified=certified)


def build_moses_tuan(m: float, grid: GridSpec | None = None, eps_sin: float = 1e-3) -> MTModel:
    """Moses-Tuan model with ``h~ = 1/(1 + g(|x|))``; certified for ``m > 34``."""
    if not m > 0:
        raise ValueError("mass must be positive")
    if not 0 < eps_sin < 0.5:
        raise ValueError("eps_sin must lie in (0, 0.5)")
    grid = grid or default_grid()
    x = grid.nodes
    ax = np.abs(x)
    g = eval_g(ax)
    h = 1 / (1 + g)

    def second(sel):
        return -8 * h[sel] ** 2 * np.sin(ax[sel])

    f, u, V, lam, imag, seam, sup_V = _assemble(grid, m, h, second, eps_sin)
    certified = m > MT_THRESHOLD
    if certified and np.any(f * np.sqrt(1 + x * x) < 2):
        raise CertificationError("f~ >= 2<x>^-1 fails on the grid; the grid does not resolve m")
    return MTModel(m=float(m), lam=lam, grid=grid, eps_sin=eps_sin,
                   g=SampledFunction(grid, g), h=SampledFunction(grid, h),
                   f=SampledFunction(grid, f), u=SampledFunction(grid, u),
                   V=SampledFunction(grid, V.real), imV=SampledFunction(grid, V.imag),
                   imag_diagnostic=imag, seam_diagnostic=seam, sup_V=sup_V,
                   certified=certified)


def rescale(model: _Potential, a: float):
    """The scaled triple ``(u(a.), a V(a.), a lambda)``, an eigen-triple at mass ``a m``.

    The samples are reused on the grid ``x' = x / a`` with the same ``N``, so
    the discrete problem is the original one seen in new units.  Use
    :func:`rescale_discrepancy` to rebuild the potential at the new mass and
    compare.  The result is certified iff ``a m`` clears the mass threshold.
    """
    if not a > 0:
        raise ValueError("scale factor must be positive")
    if a == 1:
        return model
    old = model.grid
    periods = None if old.pi_periods is None else old.pi_periods / a
    grid = GridSpec(half_width=old.half_width / a, num_points=old.N,
                    precision=old.precision, pi_periods=periods)
    A = grid.dtype(a)
    new_m = a * model.m

    def moved(sf):
        return SampledFunction(grid, sf.values)

    out = replace(model, m=new_m, lam=A * model.lam, grid=grid,
                  g=moved(model.g), h=moved(model.h), f=moved(model.f), u=moved(model.u),
                  V=SampledFunction(grid, A * model.V.values),
                  imV=SampledFunction(grid, A * model.imV.values),
                  imag_diagnostic=a * model.imag_diagnostic,
                  seam_diagnostic=a * model.seam_diagnostic, sup_V=a * model.sup_V,
                  certified=(new_m >= MASSIVE_THRESHOLD if model.family == "massive-nw"
                             else new_m > MT_THRESHOLD),
                  scale=model.scale * a)
    return out


def rescale_discrepancy(model: _Potential) -> float:
    """``sup|V_rebuilt - V| / sup|V|`` with ``V_rebuilt = lambda - omega(p)u/u`` off the zeros."""
    wu = apply_multiplier(model.u, MultiplierSymbol("omega", model.m)).values.real
    mask = model.regular_mask() & model.grid.guard_mask()
    rebuilt = model.lam - wu[mask] / model.u.values[mask]
    return float(np.max(np.abs(rebuilt - model.V.values[mask]))) / model.sup_V


@dataclass(frozen=True, eq=False)
class RadialLift:
    """Radial 3D eigenfunction ``v(r) = u(r)/(sqrt(4 pi) r)`` with ``W(r) = V(r)``."""

    source: _Potential
    r: np.ndarray
    v: np.ndarray
    W: np.ndarray
    v_at_zero: float

    def norm_identity(self) -> tuple[float, float]:
        """``(int 4 pi r^2 v^2 dr, int u^2 dr)`` over the half-line nodes."""
        d = self.source.grid.spacing
        lhs = float(np.sum(4 * PI_LD * self.r ** 2 * self.v ** 2) * d)
        half = self.source.grid.N // 2
        rhs = float(np.sum(self.source.u.values[half + 1:] ** 2) * d)
        return lhs, rhs


def radial_lift(model: _Potential) -> RadialLift:
    grid = model.grid
    half = grid.N // 2
    r = grid.nodes[half + 1:]
    u = model.u.values[half + 1:]
    norm = np.sqrt(4 * PI_LD).astype(grid.dtype)
    du0 = derivative(model.u).values[half]
    return RadialLift(source=model, r=r, v=u / (norm * r), W=model.V.values[half + 1:].copy(),
                      v_at_zero=float(du0 / norm))
