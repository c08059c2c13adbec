"""Special functions needed by the closed-form potentials.

Gamma uses a Lanczos approximation with reflection, modified Bessel K of
real order uses the trapezoidal rule on ``K_nu(z) = int_0^inf exp(-z cosh t)
cosh(nu t) dt`` (the integrand is analytic in a strip, so the rule converges
geometrically), and the Gauss hypergeometric function is restricted to the
four parameter families listed in :data:`SUPPORTED_FAMILIES`.

Array-valued functions keep the floating dtype of their argument, so
``np.longdouble`` inputs are evaluated in extended precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GammaPoleError, SpecialFunctionDomainError, UnsupportedParameters

__all__ = [
    "AccuracyPolicy",
    "DEFAULT_POLICY",
    "SUPPORTED_FAMILIES",
    "gamma",
    "rgamma",
    "bessel_k",
    "hyp2f1",
    "arcsinh",
]


@dataclass(frozen=True)
class AccuracyPolicy:
    target_rel_err: float = 1e-12
    max_terms: int = 10000
    quadrature_points: int = 2000

    def __post_init__(self) -> None:
        if not self.target_rel_err > 0:
            raise ValueError("target_rel_err must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if self.quadrature_points < 16:
            raise ValueError("quadrature_points must be >= 16")


DEFAULT_POLICY = AccuracyPolicy()

# Lanczos coefficients for g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _is_pole(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def _sinpi(x: float) -> float:
    # reduce first so that sin(pi x) keeps relative accuracy near the integers
    r = math.fmod(x, 2.0)
    if r < 0:
        r += 2.0
    if r > 1.0:
        return -_sinpi(r - 1.0)
    if r > 0.5:
        r = 1.0 - r
    return math.sin(math.pi * r)


def gamma(x: float, policy: AccuracyPolicy = DEFAULT_POLICY) -> float:
    """Gamma function of a real argument.

    Uses the reflection formula ``Gamma(x) Gamma(1-x) = pi / sin(pi x)`` for
    ``x < 1/2``.  Raises :class:`GammaPoleError` at 0, -1, -2, ...
    """
    x = float(x)
    if math.isnan(x):
        raise SpecialFunctionDomainError("gamma of NaN")
    if _is_pole(x):
        raise GammaPoleError(f"gamma has a pole at {x!r}")
    if x < 0.5:
        return math.pi / (_sinpi(x) * gamma(1.0 - x, policy))
    x -= 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    half = t ** ((x + 0.5) / 2.0)
    return math.sqrt(2.0 * math.pi) * half * math.exp(-t) * half * acc


def rgamma(x: float) -> float:
    """Reciprocal gamma, equal to zero at the poles of gamma."""
    x = float(x)
    if _is_pole(x):
        return 0.0
    return 1.0 / gamma(x)


# ---------------------------------------------------------------------------
# modified Bessel function of the second kind


def _kernel_cutoff(zmin: float, order: float) -> float:
    # smallest T with zmin (cosh T - 1) - order T >= 45, i.e. a relative tail < 1e-19
    t = math.acosh(1.0 + 45.0 / zmin)
    for _ in range(20):
        t_new = math.acosh(1.0 + (45.0 + order * t) / zmin)
        if abs(t_new - t) < 1e-12:
            break
        t = t_new
    return t_new


def _cosh_integral(z: np.ndarray, weight, order_growth: float, policy: AccuracyPolicy) -> np.ndarray:
    """``exp(z) * int_0^inf exp(-z cosh t) weight(t) dt`` for each entry of ``z``.

    ``weight`` must be even in ``t`` and grow at most like ``exp(order_growth t)``.
    """
    out = np.empty_like(z)
    n = policy.quadrature_points
    block = max(1, 2_000_000 // n)
    order = np.argsort(z)
    zs = z[order]
    res = np.empty_like(zs)
    for start in range(0, zs.size, block):
        zc = zs[start:start + block]
        tmax = _kernel_cutoff(float(zc[0]), order_growth)
        t = np.linspace(0.0, tmax, n).astype(z.dtype)
        h = t[1] - t[0]
        w = np.full(n, h, dtype=z.dtype)
        w[0] = h / 2
        w[-1] = h / 2
        cm1 = 2.0 * np.sinh(t / 2) ** 2
        vals = np.exp(-zc[:, None] * cm1[None, :]) * weight(t)[None, :]
        res[start:start + block] = vals @ w
    out[order] = res
    return out


def _as_float_array(z) -> np.ndarray:
    arr = np.asarray(z)
    if arr.dtype != np.longdouble:
        arr = arr.astype(float)
    return arr


def bessel_k(order: float, z, policy: AccuracyPolicy = DEFAULT_POLICY):
    """Modified Bessel function ``K_order(z)`` for ``order >= 0`` and ``z > 0``."""
    order = float(order)
    if order < 0:
        raise SpecialFunctionDomainError("bessel_k requires order >= 0")
    arr = _as_float_array(z)
    if not np.all(arr > 0):
        raise SpecialFunctionDomainError("bessel_k requires z > 0")
    flat = arr.reshape(-1)
    scaled = _cosh_integral(flat, lambda t: np.cosh(order * t), order, policy)
    out = (scaled * np.exp(-flat)).reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


def sinh2_cosh_integral(z, policy: AccuracyPolicy = DEFAULT_POLICY):
    """``int_0^inf exp(-z cosh t) sinh(t)^2 dt`` for ``z > 0``."""
    arr = _as_float_array(z)
    if not np.all(arr > 0):
        raise SpecialFunctionDomainError("requires z > 0")
    flat = arr.reshape(-1)
    scaled = _cosh_integral(flat, lambda t: np.sinh(t) ** 2, 2.0, policy)
    out = (scaled * np.exp(-flat)).reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Gauss hypergeometric function

#: ``(c, fixed upper parameter)``; the other upper parameter is free.  These
#: are the families produced by the massless potentials and their Pfaff images.
SUPPORTED_FAMILIES: tuple[tuple[float, float], ...] = (
    (0.5, 1.0),
    (0.5, -0.5),
    (1.5, 2.0),
    (1.5, -0.5),
)


def _family_fixed(a: float, b: float, c: float) -> float:
    for cc, fixed in SUPPORTED_FAMILIES:
        if c == cc and fixed in (a, b):
            return fixed
    raise UnsupportedParameters(
        f"2F1({a}, {b}; {c}; z) is outside the supported families {SUPPORTED_FAMILIES}"
    )


def _nonpos_int(v: float) -> bool:
    return v <= 0 and v == math.floor(v)


def _series(a: float, b: float, c: float, z: np.ndarray, max_terms: int) -> np.ndarray:
    eps = np.finfo(z.dtype).eps
    term = np.ones_like(z)
    total = np.ones_like(z)
    if z.size == 0:
        return total
    warmup = abs(a) + abs(b) + 2
    for n in range(max_terms):
        coef = (a + n) * (b + n) / ((c + n) * (n + 1.0))
        if coef == 0.0:
            return total
        term = term * (coef * z)
        total = total + term
        if n > warmup and np.all(np.abs(term) <= eps * np.abs(total)):
            return total
    raise UnsupportedParameters(f"2F1 series did not converge in {max_terms} terms")


def _gauss_value(a: float, b: float, c: float) -> float:
    s = c - a - b
    if not s > 0:
        raise UnsupportedParameters("Gauss summation needs c - a - b > 0")
    return gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b)


def _f_unit(a: float, b: float, c: float, w: np.ndarray, policy: AccuracyPolicy) -> np.ndarray:
    """2F1 on ``0 <= w <= 1`` without family checks."""
    if _nonpos_int(a) or _nonpos_int(b):
        return _series(a, b, c, w, policy.max_terms)
    out = np.empty_like(w)
    near = w <= 0.5
    one = w == 1.0
    far = ~near & ~one
    out[near] = _series(a, b, c, w[near], policy.max_terms)
    if np.any(one):
        out[one] = _gauss_value(a, b, c)
    if np.any(far):
        s = c - a - b
        if s == math.floor(s):
            raise UnsupportedParameters(
                f"c - a - b = {s} is an integer: logarithmic case near z = 1 not supported"
            )
        q = 1.0 - w[far]
        coef1 = gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b)
        coef2 = gamma(c) * gamma(-s) * rgamma(a) * rgamma(b)
        part = np.zeros_like(q)
        if coef1 != 0.0:
            part = part + coef1 * _series(a, b, 1.0 - s, q, policy.max_terms)
        if coef2 != 0.0:
            part = part + coef2 * q ** s * _series(c - a, c - b, 1.0 + s, q, policy.max_terms)
        out[far] = part
    return out


def hyp2f1(a: float, b: float, c: float, z, policy: AccuracyPolicy = DEFAULT_POLICY, pfaff: str = "a"):
    """Gauss hypergeometric function for ``z <= 1`` on the supported families.

    ``0 <= z <= 1/2`` sums the series directly, ``1/2 < z < 1`` uses the
    ``1 - z`` connection formula, ``z = 1`` uses Gauss's summation and
    ``z < 0`` is mapped to ``z / (z - 1)`` by the Pfaff transformation.
    ``pfaff`` picks which upper parameter the transformation keeps
    (``"a"``: ``(1-z)^-a F(a, c-b; c; .)``, ``"b"``: ``(1-z)^-b F(c-a, b; c; .)``).
    """
    a, b, c = float(a), float(b), float(c)
    _family_fixed(a, b, c)
    if _nonpos_int(c):
        raise UnsupportedParameters("c must not be a non-positive integer")
    if pfaff not in ("a", "b"):
        raise ValueError("pfaff must be 'a' or 'b'")
    arr = _as_float_array(z)
    if np.any(np.isnan(arr)) or np.any(arr > 1):
        raise SpecialFunctionDomainError("hyp2f1 requires z <= 1")
    flat = arr.reshape(-1)
    out = np.empty_like(flat)
    neg = flat < 0
    pos = ~neg
    if np.any(pos):
        out[pos] = _f_unit(a, b, c, flat[pos], policy)
    if np.any(neg):
        zn = flat[neg]
        w = zn / (zn - 1.0)
        if pfaff == "a":
            out[neg] = (1.0 - zn) ** (-a) * _f_unit(a, c - b, c, w, policy)
        else:
            out[neg] = (1.0 - zn) ** (-b) * _f_unit(c - a, b, c, w, policy)
    out = out.reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


def arcsinh(x):
    """Inverse hyperbolic sine, odd and free of cancellation for large |x|."""
    arr = _as_float_array(x)
    ax = np.abs(arr)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.log1p(ax + ax * ax / (1.0 + np.sqrt(1.0 + ax * ax)))
        inv = np.where(ax > 1, 1.0 / np.where(ax > 1, ax, 1.0), 0.0)
        large = np.log(np.where(ax > 1, ax, 1.0)) + np.log1p(np.sqrt(1.0 + inv * inv))
    out = np.sign(arr) * np.where(ax > 1, large, small)
    return out[()] if out.ndim == 0 else out
