"""Non-relativistic limit and the classical reference potentials.

With the speed of light ``c`` restored the kinetic energy is
``c(sqrt(p^2 + M^2) - M)`` with ``M = m c``, so the relativistic model at
speed ``c`` is the massive model at mass ``M`` with ``V_c = c V_M``,
``lambda_c = c lambda_M`` and ``f_c = f_M / (2M)``.  As ``c -> oo``,
``u_c -> u_oo = h sin x`` and ``V_c -> (1/2m)(1 + u_oo''/u_oo)``.

``f_c - h`` is formed in Fourier space as ``h_hat (o_+ + o_-)/(2M)`` with
``o_pm = (k +- 1)^2 / (sqrt((k +- 1)^2 + M^2) + M)``, which avoids the
cancellation in ``f_c - h`` at large ``c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import fft as sfft

from .errors import CertificationError
from .massive import (
    MASSIVE_THRESHOLD,
    build_massive,
    build_moses_tuan,
    eval_g,
    eval_h_derivatives,
    eval_h_tilde_derivatives,
)
from .spectral import GridSpec, SampledFunction, _workers, default_grid

__all__ = [
    "LimitModel",
    "build_limit_model",
    "default_c_values",
    "LimitRow",
    "LimitTable",
    "limit_scan",
    "V_inf",
    "u_nw",
    "V_nw",
    "u_mt",
    "V_mt",
    "radial_laplacian_fd",
    "classical_nw_identity",
    "classical_mt_identity",
    "nw_asymptote_envelope",
    "moment_sums",
    "Limit3DRow",
    "limit_3d_check",
    "off_singular_mask",
]


# ---------------------------------------------------------------------------
# classical pairs (radial variable r > 0)


def u_nw(r):
    r = np.asarray(r, dtype=float)
    g = eval_g(r)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.sin(r) / (r * (1 + g * g))
    return np.where(r == 0, 1.0, out)


def V_nw(r):
    r = np.abs(np.asarray(r, dtype=float))
    g = eval_g(r)
    s, c = np.sin(r), np.cos(r)
    return -32 * s * (g ** 3 * c - 3 * g * g * s ** 3 + g * c + s ** 3) / (1 + g * g) ** 2


def u_mt(r):
    r = np.asarray(r, dtype=float)
    g = eval_g(np.abs(r))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.sin(np.abs(r)) / (np.abs(r) * (1 + g))
    return np.where(r == 0, 1.0, out)


def V_mt(r):
    r = np.abs(np.asarray(r, dtype=float))
    g = eval_g(r)
    return -32 * np.sin(r) * ((r + 0.5) * np.cos(r) - np.sin(r)) / (1 + g) ** 2


# sixth-order central stencils
_D1 = np.array([-1, 9, -45, 0, 45, -9, 1]) / 60.0
_D2 = np.array([2, -27, 270, -490, 270, -27, 2]) / 180.0


def radial_laplacian_fd(func: Callable, r: float, step: float = 1e-4) -> float:
    """``u'' + (2/r) u'`` by sixth-order central differences."""
    pts = r + step * np.arange(-3, 4)
    vals = np.asarray(func(pts), dtype=float)
    d1 = float(_D1 @ vals) / step
    d2 = float(_D2 @ vals) / step ** 2
    return d2 + 2 * d1 / r


def _identity_residual(u: Callable, V: Callable, radii, step: float) -> float:
    worst = 0.0
    for r in radii:
        r = float(r)
        if abs(r - math.pi * round(r / math.pi)) < 1e-3:
            raise ValueError(f"radius {r} is within 1e-3 of a multiple of pi")
        ur = float(u(r))
        res = -radial_laplacian_fd(u, r, step) + float(V(r)) * ur - ur
        worst = max(worst, abs(res))
    return worst


def classical_nw_identity(radii=(0.7, 1.9, 5.3, 12.1), step: float = 1e-4) -> float:
    """Largest ``|(-Delta + V_NW) u_NW - u_NW|`` over the radii."""
    return _identity_residual(u_nw, V_nw, radii, step)


def classical_mt_identity(radii=(0.7, 1.9, 5.3), step: float = 1e-4) -> float:
    """Largest ``|(-Delta + V_MT) u_MT - u_MT|`` over the radii."""
    return _identity_residual(u_mt, V_mt, radii, step)


def nw_asymptote_envelope(r_min: float = 50.0, r_max: float = 400.0, n: int = 200001):
    """Block maxima of ``r |r V_NW(r) + 8 sin 2r|`` over windows of width pi.

    Bounded values confirm ``V_NW = -8 sin(2r)/r + O(r^-2)``.
    """
    r = np.linspace(r_min, r_max, n)
    q = r * np.abs(r * V_nw(r) + 8 * np.sin(2 * r))
    edges = np.arange(r_min, r_max, math.pi)
    idx = np.searchsorted(r, edges)
    return np.array([q[a:b].max() for a, b in zip(idx[:-1], idx[1:]) if b > a])


# ---------------------------------------------------------------------------
# relativistic -> classical


def off_singular_mask(x: np.ndarray, margin: float = 0.2) -> np.ndarray:
    """Nodes whose distance to the nearest multiple of pi exceeds ``margin``."""
    xf = np.asarray(x, dtype=float)
    return np.abs(xf - np.pi * np.round(xf / np.pi)) > margin


def V_inf(x, m: float, sign: int = 1, family: str = "massive-nw"):
    """``(1/2m)(1 + sign * u_oo''/u_oo)`` with ``u_oo = h sin x``; ``sign=+1`` is the limit.

    ``sign=-1`` is the opposite convention, kept for comparison only.
    """
    x = np.asarray(x)
    if family == "massive-nw":
        h, h1, h2 = eval_h_derivatives(x)
    else:
        h, h1, h2, _ = eval_h_tilde_derivatives(x)
    s, c = np.sin(x), np.cos(x)
    ratio = (h2 * s + 2 * h1 * c - h * s) / (h * s)
    return (1 + sign * ratio) / (2 * m)


@dataclass(frozen=True, eq=False)
class LimitModel:
    m: float
    c: float
    grid: GridSpec
    f_c: SampledFunction
    u_c: SampledFunction
    V_c: SampledFunction
    lambda_c: float
    u_inf: SampledFunction
    certified: bool
    family: str = "massive-nw"

    def V_inf(self, x, sign: int = 1):
        return V_inf(x, self.m, sign, self.family)


def build_limit_model(m: float, c: float, grid: GridSpec | None = None,
                      family: str = "massive-nw") -> LimitModel:
    """Relativistic model at speed ``c``; certified when ``c m`` clears the mass threshold."""
    grid = grid or default_grid()
    M = m * c
    builder = build_massive if family == "massive-nw" else build_moses_tuan
    model = builder(M, grid)
    two_m = grid.dtype(2 * M)
    C = grid.dtype(c)
    u_inf = SampledFunction(grid, model.h.values * np.sin(grid.nodes))
    return LimitModel(m=float(m), c=float(c), grid=grid,
                      f_c=SampledFunction(grid, model.f.values / two_m),
                      u_c=SampledFunction(grid, model.u.values / two_m),
                      V_c=SampledFunction(grid, C * model.V.values),
                      lambda_c=C * model.lam, u_inf=u_inf,
                      certified=model.certified, family=family)


def default_c_values(m: float, count: int = 5) -> list[float]:
    """``(160/m) * 2^j`` for ``j < count``: every ``c m`` clears 146 with room."""
    return [160.0 / m * 2 ** j for j in range(count)]


@dataclass(frozen=True)
class LimitRow:
    c: float
    e0: float
    e1: float
    e2: float
    lambda_err: float
    V_err: float
    V_err_opposite: float
    f_err: float
    l1_bound: float
    rate_bound: float


@dataclass(frozen=True)
class LimitTable:
    m: float
    family: str
    rows: list = field(default_factory=list)

    @property
    def rate_exponent(self) -> float:
        c = np.log([r.c for r in self.rows])
        e = np.log([r.e0 for r in self.rows])
        return float(np.polyfit(c, e, 1)[0])

    def ratios(self) -> list[float]:
        return [a.e0 / b.e0 for a, b in zip(self.rows[:-1], self.rows[1:])]

    def summary(self) -> dict:
        return {"m": self.m, "family": self.family, "rate_exponent": self.rate_exponent,
                "e0_ratios": self.ratios(), "c_values": [r.c for r in self.rows]}


def _fft(a):
    return sfft.fft(np.fft.ifftshift(a), workers=_workers())


def _ifft(a):
    return np.fft.fftshift(sfft.ifft(a, workers=_workers()))


def limit_scan(m: float, c_values=None, grid: GridSpec | None = None,
               family: str = "massive-nw", margin: float = 0.2) -> LimitTable:
    """Convergence table of the relativistic model towards the classical one.

    Per ``c``: ``e0 = sup|u_c - u_oo|`` and the same for the first two
    derivatives, ``|lambda_c - 1/(2m)|``, and ``sup|V_c - V_oo|`` over the
    off-singular nodes in the guard region.  ``l1_bound`` is the discrete
    ``||f_c_hat - h_hat||_1`` bound on ``sup|f_c - h|`` and ``rate_bound`` the
    explicit ``(1/2m)(2k^2+2)/(m c^2) |h_hat|`` bound on it.
    """
    grid = grid or default_grid()
    c_values = list(c_values) if c_values is not None else default_c_values(m)
    threshold = MASSIVE_THRESHOLD if family == "massive-nw" else 34.0
    bad = [c for c in c_values if not c * m >= threshold]
    if bad:
        raise CertificationError(f"c*m below {threshold} for c in {bad}")
    x = grid.nodes
    k = grid.frequencies()
    if family == "massive-nw":
        g = eval_g(x)
        h = 1 / (1 + g * g)
    else:
        h = 1 / (1 + eval_g(np.abs(x)))
    H = _fft(h)
    sinx, cosx = np.sin(x), np.cos(x)
    guard = grid.guard_mask()
    test = guard & off_singular_mask(x, margin)
    vinf = V_inf(x[test], m, 1, family)
    vinf_opp = V_inf(x[test], m, -1, family)
    n = grid.N
    rows = []
    for c in c_values:
        M = grid.dtype(m * c)
        op = (k + 1) ** 2 / (np.sqrt((k + 1) ** 2 + M * M) + M)
        om = (k - 1) ** 2 / (np.sqrt((k - 1) ** 2 + M * M) + M)
        D = H * (op + om) / (2 * M)
        del op, om
        d0 = _ifft(D).real
        d1 = _ifft(1j * k * D).real
        d2 = _ifft(-k * k * D).real
        e0 = float(np.max(np.abs(d0 * sinx)))
        e1 = float(np.max(np.abs(d1 * sinx + d0 * cosx)))
        e2 = float(np.max(np.abs(d2 * sinx + 2 * d1 * cosx - d0 * sinx)))
        f_err = float(np.max(np.abs(d0)))
        l1 = float(np.sum(np.abs(D)) / n)
        rate = float(np.sum((2 * k * k + 2) / (m * c * c) * np.abs(H)) / (2 * m) / n)
        del D, d0, d1, d2
        model = build_limit_model(m, c, grid, family)
        Vc = model.V_c.values[test]
        lam_err = float(abs(model.lambda_c - grid.dtype(1) / (2 * grid.dtype(m))))
        rows.append(LimitRow(c=float(c), e0=e0, e1=e1, e2=e2, lambda_err=lam_err,
                             V_err=float(np.max(np.abs(Vc - vinf))),
                             V_err_opposite=float(np.max(np.abs(Vc - vinf_opp))),
                             f_err=f_err, l1_bound=l1, rate_bound=rate))
        del model, Vc
    return LimitTable(m=float(m), family=family, rows=rows)


def moment_sums(grid: GridSpec, n_max: int = 6, floor: float = 1e-13) -> list[float]:
    """Discrete ``(1/N) sum |k|^n |h_hat_n|`` for ``n = 0..n_max``, estimating ``||k^n h_hat||_1``."""
    x = grid.nodes
    g = eval_g(x)
    H = np.abs(_fft(1 / (1 + g * g)))
    ak = np.abs(grid.frequencies())
    # h_hat decays exponentially; beyond the roundoff floor the samples are noise
    # that k^n would amplify, so only resolved modes enter the sums
    keep = H > floor * H.max()
    H, ak = H[keep], ak[keep]
    # h_hat(k_n) ~ Delta/sqrt(2 pi) * FFT_n and dk = 2 pi/(N Delta)
    scale = math.sqrt(2 * math.pi) / grid.N
    return [float(np.sum(ak ** n * H)) * scale for n in range(n_max + 1)]


@dataclass(frozen=True)
class Limit3DRow:
    c: float
    v_err: float
    W_err: float
    envelope: float
    v0_err: float


def limit_3d_check(m: float, c_values=None, grid: GridSpec | None = None,
                   margin: float = 0.2) -> list[Limit3DRow]:
    """Radial lift of ``u_c`` against ``u_NW / sqrt(4 pi)`` and ``W_c`` against ``V_NW/(2m)``.

    The lift ``v = u/(sqrt(4 pi) r)`` carries the normalisation of the unitary
    radial map, so the classical eigenfunction appears divided by
    ``sqrt(4 pi)``; the potential converges to ``V_NW/(2m)`` because the
    eigenvalue tends to ``1/(2m)`` rather than 1.
    """
    grid = grid or default_grid()
    c_values = list(c_values) if c_values is not None else default_c_values(m)
    half = grid.N // 2
    guard = grid.guard_mask()[half + 1:]
    r = grid.nodes[half + 1:]
    rf = np.asarray(r, dtype=float)
    norm = math.sqrt(4 * math.pi)
    target_v = u_nw(rf) / norm
    test = guard & off_singular_mask(r, margin)
    target_W = V_nw(rf[test]) / (2 * m)
    rows = []
    for c in c_values:
        model = build_limit_model(m, c, grid)
        u = model.u_c.values[half + 1:]
        v = np.asarray(u / (norm * r), dtype=float)
        e0 = float(np.max(np.abs(model.u_c.values - model.u_inf.values)))
        # value at r -> 0 is u_c'(0)/sqrt(4 pi) = f_c(0)/sqrt(4 pi)
        v0 = float(model.f_c.values[half]) / norm
        rows.append(Limit3DRow(
            c=float(c),
            v_err=float(np.max(np.abs(v[guard] - target_v[guard]))),
            W_err=float(np.max(np.abs(np.asarray(model.V_c.values[half + 1:][test], float)
                                      - target_W))),
            envelope=e0 / (norm * float(rf[0])),
            v0_err=abs(v0 - 1 / norm),
        ))
        del model
    return rows
