"""Uniform grids, sampled functions and Fourier multipliers.

A multiplier ``K(p)`` acts on samples ``v(x_j)`` by a discrete Fourier
transform, pointwise multiplication by ``K(k)`` and the inverse transform.
The grid ``x_j = -L + j*Delta`` has ``x_{N/2} = 0``; transforms use the
layout in which the node ``x = 0`` sits at index 0, so the discrete
frequencies are ``k = 2*pi*fftfreq(P, Delta)`` for a (possibly padded)
transform length ``P``.

Two details matter for the accuracy targets of the massive constructions:

* the default half-width is ``L = 163*pi`` so that ``sin x`` and ``e^{ix}``
  are periodic on the grid and the modulation ``e^{ix}`` is an exact shift by
  163 frequency bins;
* arrays are held in ``np.longdouble`` by default.  ``scipy.fft`` transforms
  long double natively and the extra digits keep the roundoff amplified by
  symbols of size ``m`` well below the tolerances.

Long-range symbols (``|k|`` and the massless ``omega``) see the slowly
decaying tails of their inputs, so for them the samples are zero-padded four
times and the pad is filled with a fitted power-law continuation of each
tail.  Localised kernels (all ``m > 0`` symbols) are applied unpadded since a
pad would introduce artificial jumps at ``|x| = L``.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import fft as sfft
from scipy import signal, special

from .errors import GridError, SpecialFunctionDomainError
from .specfun import DEFAULT_POLICY, AccuracyPolicy, sinh2_cosh_integral

__all__ = [
    "PI_LD",
    "GridSpec",
    "make_grid",
    "make_pi_grid",
    "default_grid",
    "SampledFunction",
    "sample",
    "MultiplierSymbol",
    "SYMBOL_NAMES",
    "apply_multiplier",
    "derivative",
    "fourier_transform",
    "modulation_shift_check",
    "omega0_kernel",
    "inv_omega0_kernel_convolve",
]

PI_LD = np.longdouble("3.14159265358979323846264338327950288")

_DTYPES = {"extended": (np.longdouble, np.clongdouble), "double": (np.float64, np.complex128)}


def _workers() -> int:
    raw = os.environ.get("RNW_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class GridSpec:
    """Symmetric uniform grid on ``[-L, L)`` with ``N`` nodes.

    ``pi_periods`` set means ``L = pi_periods * pi`` exactly (in the working
    precision); otherwise ``L = half_width``.
    """

    half_width: float
    num_points: int
    precision: str = "extended"
    pi_periods: float | None = None

    def __post_init__(self) -> None:
        n = self.num_points
        if not isinstance(n, (int, np.integer)) or n < 2 or n & (n - 1):
            raise GridError(f"num_points must be a power of two >= 2, got {n!r}")
        if not self.half_width > 0 or not math.isfinite(self.half_width):
            raise GridError(f"half_width must be positive, got {self.half_width!r}")
        if self.precision not in _DTYPES:
            raise GridError(f"precision must be one of {sorted(_DTYPES)}")

    @property
    def dtype(self):
        return _DTYPES[self.precision][0]

    @property
    def cdtype(self):
        return _DTYPES[self.precision][1]

    @property
    def L(self):
        if self.pi_periods is not None:
            pi = PI_LD if self.precision == "extended" else np.pi
            return self.dtype(self.pi_periods) * self.dtype(pi)
        return self.dtype(self.half_width)

    @property
    def N(self) -> int:
        return int(self.num_points)

    @property
    def spacing(self):
        return 2 * self.L / self.N

    @cached_property
    def nodes(self) -> np.ndarray:
        x = -self.L + self.spacing * np.arange(self.N, dtype=self.dtype)
        x[self.N // 2] = 0
        x.flags.writeable = False
        return x

    def frequencies(self, pad: int = 1) -> np.ndarray:
        """Angular frequencies of a length ``pad*N`` transform, in FFT order."""
        p = pad * self.N
        idx = np.concatenate([np.arange(p // 2), np.arange(-p // 2, 0)]).astype(self.dtype)
        pi = PI_LD if self.precision == "extended" else np.pi
        return (2 * self.dtype(pi) / (p * self.spacing)) * idx

    def guard_mask(self, fraction: float = 0.5) -> np.ndarray:
        """Nodes with ``|x| <= fraction*L``, where periodisation error is small."""
        return np.abs(self.nodes) <= fraction * self.L

    def index_of(self, x: float) -> int:
        return int(np.argmin(np.abs(self.nodes - self.dtype(x))))

    def describe(self) -> dict:
        return {
            "L": float(self.L),
            "N": self.N,
            "spacing": float(self.spacing),
            "precision": self.precision,
            "pi_periods": self.pi_periods,
        }


def make_grid(L: float, N: int, precision: str = "extended") -> GridSpec:
    """Grid on ``[-L, L)`` with ``N`` (a power of two) nodes."""
    return GridSpec(half_width=float(L), num_points=int(N), precision=precision)


def make_pi_grid(periods: int, N: int, precision: str = "extended") -> GridSpec:
    """Grid with ``L = periods*pi`` so that ``sin x`` is periodic on it."""
    if int(periods) != periods or periods < 1:
        raise GridError("periods must be a positive integer")
    return GridSpec(half_width=float(periods) * math.pi, num_points=int(N),
                    precision=precision, pi_periods=int(periods))


def default_grid(precision: str = "extended") -> GridSpec:
    """``L = 163*pi`` (about 512.08), ``N = 2^20``."""
    return make_pi_grid(163, 2 ** 20, precision)


def _reflect(v: np.ndarray) -> np.ndarray:
    # values at -x_j; x_0 = -L is identified with +L
    return np.roll(v[::-1], 1)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        if v.shape != (self.grid.N,):
            raise GridError(f"expected {self.grid.N} samples, got shape {v.shape}")
        if not np.iscomplexobj(v):
            v = v.astype(self.grid.dtype, copy=False)
        else:
            v = v.astype(self.grid.cdtype, copy=False)
        if v.flags.writeable:
            v = v.copy() if v.base is not None else v
            v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def sup(self, mask=None) -> float:
        v = self.values if mask is None else self.values[mask]
        return float(np.max(np.abs(v))) if v.size else 0.0

    def _scale(self) -> float:
        return max(self.sup(), np.finfo(float).tiny)

    def is_real(self, tol: float = 1e-9) -> bool:
        if not np.iscomplexobj(self.values):
            return True
        return float(np.max(np.abs(self.values.imag))) <= tol * self._scale()

    def is_even(self, tol: float = 1e-9) -> bool:
        return float(np.max(np.abs(self.values - _reflect(self.values)))) <= tol * self._scale()

    def is_odd(self, tol: float = 1e-9) -> bool:
        return float(np.max(np.abs(self.values + _reflect(self.values)))) <= tol * self._scale()

    @property
    def real(self) -> "SampledFunction":
        return SampledFunction(self.grid, np.real(self.values))

    @property
    def imag(self) -> "SampledFunction":
        return SampledFunction(self.grid, np.imag(self.values))

    def at(self, x: float):
        """Sample at the node nearest to ``x``."""
        return self.values[self.grid.index_of(x)]

    def _other(self, other):
        if isinstance(other, SampledFunction):
            if other.grid != self.grid:
                raise GridError("operands live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return SampledFunction(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return SampledFunction(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return SampledFunction(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return SampledFunction(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return SampledFunction(self.grid, self.values / self._other(other))

    def __neg__(self):
        return SampledFunction(self.grid, -self.values)


def sample(f: Callable, grid: GridSpec) -> SampledFunction:
    """Evaluate a vectorised callable at the grid nodes."""
    vals = np.asarray(f(grid.nodes))
    if vals.shape != (grid.N,):
        vals = np.broadcast_to(vals, (grid.N,)).copy()
    return SampledFunction(grid, vals)


# ---------------------------------------------------------------------------
# symbols

SYMBOL_NAMES = ("omega0", "omega", "omega_plus", "omega_minus", "T", "abs_k", "inv_omega0")


@dataclass(frozen=True)
class MultiplierSymbol:
    """One of the Fourier symbols of the relativistic kinetic energy.

    Differences of square roots are evaluated in rationalised form so that
    no cancellation occurs when ``m`` is large.
    """

    name: str
    mass: float = 0.0

    def __post_init__(self) -> None:
        if self.name not in SYMBOL_NAMES:
            raise ValueError(f"unknown symbol {self.name!r}; expected one of {SYMBOL_NAMES}")
        if not self.mass >= 0:
            raise ValueError("mass must be >= 0")
        if self.name == "inv_omega0" and self.mass == 0:
            raise SpecialFunctionDomainError("inv_omega0 is singular at k = 0 when m = 0")

    def lam0(self, dtype=np.longdouble):
        m = dtype(self.mass)
        return np.sqrt(1 + m * m)

    def lam(self, dtype=np.longdouble):
        # sqrt(1+m^2) - m without cancellation
        m = dtype(self.mass)
        return 1 / (np.sqrt(1 + m * m) + m)

    @property
    def is_even(self) -> bool:
        return self.name not in ("omega_plus", "omega_minus")

    @property
    def long_range(self) -> bool:
        """Symbols that are not smooth at k = 0 act through slowly decaying kernels."""
        return self.name == "abs_k" or (self.mass == 0 and self.name != "T")

    def __call__(self, k: np.ndarray) -> np.ndarray:
        m = k.dtype.type(self.mass)
        m2 = m * m
        name = self.name
        if name == "omega0":
            return np.sqrt(k * k + m2)
        if name == "omega":
            return k * k / (np.sqrt(k * k + m2) + m) if self.mass > 0 else np.abs(k)
        if name == "omega_plus":
            return np.sqrt((k + 1) ** 2 + m2)
        if name == "omega_minus":
            return np.sqrt((k - 1) ** 2 + m2)
        if name == "T":
            w0 = np.sqrt(k * k + m2)
            wp = np.sqrt((k + 1) ** 2 + m2)
            wm = np.sqrt((k - 1) ** 2 + m2)
            return (2 * k + 1) / (wp + w0) + (1 - 2 * k) / (wm + w0)
        if name == "abs_k":
            return np.abs(k)
        return 1 / np.sqrt(k * k + m2)


SymbolLike = Union[MultiplierSymbol, Callable[[np.ndarray], np.ndarray]]


# ---------------------------------------------------------------------------
# transforms


def _tail_model(xs: np.ndarray, vs: np.ndarray):
    """Fit ``v ~ s*c*|x|^-a`` by log-log least squares; ``None`` unless single-signed."""
    vs = np.asarray(vs, dtype=float)
    if not (np.all(vs > 0) or np.all(vs < 0)):
        return None
    lx = np.log(np.abs(np.asarray(xs, dtype=float)))
    (slope, icept) = np.polyfit(lx, np.log(np.abs(vs)), 1)
    return float(np.sign(vs[0])), math.exp(icept), -slope


def _forward_layout(sf: SampledFunction, pad: int, tail: bool) -> np.ndarray:
    grid = sf.grid
    n, half = grid.N, grid.N // 2
    p = pad * n
    v = sf.values
    a = np.zeros(p, dtype=grid.cdtype)
    a[:half] = v[half:]
    a[p - half:] = v[:half]
    if tail and pad > 1 and sf.is_real(0.0):
        vr = np.real(v)
        x = grid.nodes
        npad = p - n
        nr = npad // 2
        w = max(4, n // 4)
        d = grid.spacing
        right = _tail_model(x[-w:], vr[-w:])
        left = _tail_model(x[1:w + 1], vr[1:w + 1])
        if right is not None:
            xr = grid.L + d * np.arange(nr, dtype=grid.dtype)
            s, c, alpha = right
            a[half:half + nr] = s * c * np.abs(xr) ** (-grid.dtype(alpha))
        if left is not None:
            xl = -grid.L - d * np.arange(npad - nr, 0, -1, dtype=grid.dtype)
            s, c, alpha = left
            a[half + nr:p - half] = s * c * np.abs(xl) ** (-grid.dtype(alpha))
    return a


def _resolve_padding(sym, pad, tail):
    long_range = isinstance(sym, MultiplierSymbol) and sym.long_range
    if pad is None:
        pad = 4 if long_range else 1
    if tail is None:
        tail = pad > 1
    if int(pad) != pad or pad < 1 or pad & (pad - 1):
        raise GridError("pad must be a power of two >= 1")
    return int(pad), bool(tail)


def apply_multiplier(sf: SampledFunction, sym: SymbolLike, pad: int | None = None,
                     tail: bool | None = None) -> SampledFunction:
    """Apply the Fourier multiplier ``sym(p)`` to ``sf``; the result is complex.

    ``pad=None`` picks 4 with tail continuation for long-range symbols and 1
    otherwise.  ``sym`` may be any callable mapping frequencies to values.
    """
    if not np.all(np.isfinite(sf.values)):
        raise ValueError("apply_multiplier needs finite samples")
    pad, tail = _resolve_padding(sym, pad, tail)
    grid = sf.grid
    a = _forward_layout(sf, pad, tail)
    k = grid.frequencies(pad)
    spec = sfft.fft(a, workers=_workers(), overwrite_x=True)
    spec *= sym(k)
    del k
    r = sfft.ifft(spec, workers=_workers(), overwrite_x=True)
    half = grid.N // 2
    p = pad * grid.N
    return SampledFunction(grid, np.concatenate([r[p - half:], r[:half]]))


def derivative(sf: SampledFunction, order: int = 1, pad: int = 1,
               tail: bool | None = None) -> SampledFunction:
    """Spectral derivative, multiplying by ``(ik)^order``; real input gives real output.

    ``pad > 1`` (with tail continuation by default) suits slowly decaying input.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    out = apply_multiplier(sf, lambda kk: (1j * kk) ** order, pad=pad, tail=tail)
    return out.real if np.isrealobj(sf.values) else out


def fourier_transform(sf: SampledFunction, pad: int = 1, tail: bool = False):
    """Unitary transform ``(2 pi)^-1/2 int e^{-ikx} v(x) dx`` by the trapezoidal rule.

    Returns ``(k, v_hat)`` with ``k`` sorted increasingly.
    """
    grid = sf.grid
    a = _forward_layout(sf, pad, tail)
    spec = sfft.fft(a, workers=_workers()) * (grid.spacing / np.sqrt(2 * grid.dtype(PI_LD)))
    k = grid.frequencies(pad)
    return sfft.fftshift(k), sfft.fftshift(spec)


def modulation_shift_check(sf: SampledFunction, m: float) -> float:
    """``sup|omega_+(p) v - e^{-ix} omega_0(p) e^{ix} v|``, zero in the continuum."""
    phase = np.exp(1j * sf.grid.nodes.astype(sf.grid.cdtype))
    direct = apply_multiplier(sf, MultiplierSymbol("omega_plus", m))
    shifted = apply_multiplier(sf * phase, MultiplierSymbol("omega0", m))
    return float(np.max(np.abs(direct.values - np.conj(phase) * shifted.values)))


# ---------------------------------------------------------------------------
# kernels


def omega0_kernel(x, m: float, policy: AccuracyPolicy = DEFAULT_POLICY):
    """Off-diagonal kernel ``-sqrt(2/pi) m^2 int_0^inf exp(-m|x| cosh t) sinh(t)^2 dt``."""
    if not m > 0:
        raise SpecialFunctionDomainError("omega0_kernel requires m > 0")
    arr = np.abs(np.asarray(x, dtype=float))
    if np.any(arr == 0):
        raise SpecialFunctionDomainError("omega0_kernel is not defined at x = 0")
    return -math.sqrt(2 / math.pi) * m * m * sinh2_cosh_integral(m * arr, policy)


# cubic Lagrange basis on the nodes t = -1, 0, 1, 2
def _cubic_basis(t: np.ndarray) -> np.ndarray:
    return np.stack([
        -t * (t - 1) * (t - 2) / 6,
        (t + 1) * (t - 1) * (t - 2) / 2,
        -(t + 1) * t * (t - 2) / 2,
        (t + 1) * t * (t - 1) / 6,
    ])


def _k0_weights(m: float, d: float, cutoff: float = 42.0) -> np.ndarray:
    """Product-integration weights ``w_j`` with ``int K(s) f(x-s) ds ~ sum_j w_j f(x - j d)``.

    ``K(s) = K_0(m|s|)/pi``.  On each cell ``[c d, (c+1) d]`` the samples are
    interpolated by the cubic through the cells' four neighbouring nodes; the
    logarithmic singularity in the two cells touching ``s = 0`` is removed by
    the substitution ``t = tau^6``.
    """
    ncell = int(math.ceil(cutoff / (m * d))) + 1
    tg, wg = leggauss(12)
    tg, wg = (tg + 1) / 2, wg / 2
    ts, ws = leggauss(40)
    ts, ws = (ts + 1) / 2, ws / 2
    t_sing, w_sing = ts ** 6, 6 * ts ** 5 * ws
    weights = np.zeros(2 * ncell + 3)
    centre = ncell + 1

    # regular cells c = 1..ncell-1 (and by symmetry c = -ncell..-2)
    cells = np.arange(1, ncell)
    s = (cells[:, None] + tg[None, :]) * d
    kern = special.k0(m * s) / math.pi
    basis = _cubic_basis(tg)  # (4, q)
    contrib = d * np.einsum("cq,bq,q->cb", kern, basis, wg)  # (cells, 4)
    for b in range(4):
        np.add.at(weights, centre + cells + b - 1, contrib[:, b])
        # mirror cell [-(c+1) d, -c d]: its left node index is -(c+1); with t' = 1 - t
        # the nodes -c+1, -c, -c-1, -c-2 carry basis b
        np.add.at(weights, centre - cells - b + 1, contrib[:, b])

    # singular cell c = 0 and its mirror c = -1
    kern0 = special.k0(m * t_sing * d) / math.pi
    basis0 = _cubic_basis(t_sing)
    c0 = d * (basis0 * (kern0 * w_sing)).sum(axis=1)
    for b in range(4):
        weights[centre + b - 1] += c0[b]
        weights[centre - b + 1] += c0[b]
    return weights


def inv_omega0_kernel_convolve(sf: SampledFunction, m: float,
                               policy: AccuracyPolicy = DEFAULT_POLICY) -> SampledFunction:
    """``omega_0(p)^{-1}`` applied by direct convolution with ``K_0(m|x-y|)/pi``.

    Independent of the FFT route: it uses real-space product integration and
    treats the samples as zero outside ``[-L, L)``.
    """
    if not m > 0:
        raise SpecialFunctionDomainError("inv_omega0_kernel_convolve requires m > 0")
    d = float(sf.grid.spacing)
    if d * m > 0.5:
        warnings.warn(f"kernel scale 1/m={1/m:.3g} is not resolved by spacing {d:.3g}",
                      RuntimeWarning, stacklevel=2)
    w = _k0_weights(float(m), d)
    vals = sf.values
    if np.iscomplexobj(vals):
        re = signal.oaconvolve(np.asarray(vals.real, float), w, mode="same")
        im = signal.oaconvolve(np.asarray(vals.imag, float), w, mode="same")
        out = re + 1j * im
    else:
        out = signal.oaconvolve(np.asarray(vals, float), w, mode="same")
    return SampledFunction(sf.grid, out)
