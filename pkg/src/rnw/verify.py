"""Bound checks, decay fits, eigen-residuals and verification reports.

Every inequality is recorded as a :class:`BoundCheck` whose margin is the
minimum over its sample set of ``(rhs - lhs) * weight``, where ``weight`` is
the decay rate of the bound (``<x>^p``) so that margins are comparable across
the grid.  A check passes iff ``margin >= -tol_abs``.  The ids and anchors
live in :data:`CHECK_CATALOG`; tests audit the suites against it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientData
from .massive import (
    MT_CONSTANTS,
    MTModel,
    MassiveModel,
    _Potential,
    _shift_symbol,
    eval_h_tilde_derivatives,
)
from .massless import (
    analytic_residual,
    classify,
    expected_decay,
    l2_classify,
    massless_family,
    residual_even,
    residual_odd,
    sign_structure,
)
from .specfun import bessel_k
from .spectral import (
    GridSpec,
    MultiplierSymbol,
    SampledFunction,
    apply_multiplier,
    default_grid,
    derivative,
    inv_omega0_kernel_convolve,
    modulation_shift_check,
    omega0_kernel,
)

__all__ = [
    "CatalogEntry",
    "CHECK_CATALOG",
    "catalog_ids",
    "BoundCheck",
    "DecayFit",
    "VerificationReport",
    "bounds_suite",
    "decay_fit",
    "plateau_fit",
    "trend_slope",
    "eigen_residual",
    "assemble_report",
    "verify_model",
    "verify_massless",
    "verify_classical",
]

DEFAULT_TOL = 1e-7


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    family: str
    anchor: str
    tol_abs: float = DEFAULT_TOL


def _entries():
    nw, mt = "massive-nw", "moses-tuan"
    ev, od = "massless-even", "massless-odd"
    rows = [
        ("Lemma-bh-h1-lower", nw, 'Lemma "bh": "1/6 * 1/(1+x^2) < h(x)"', DEFAULT_TOL),
        ("Lemma-bh-h1-upper", nw, 'Lemma "bh": "h(x) < 1/(x^2+2/3)"', DEFAULT_TOL),
        ("Lemma-bh-h2", nw, 'Lemma "bh": "|h\'(x)| <= 8 h(x)^{3/2}"', 1e-6),
        ("Lemma-bh-h3", nw, 'Lemma "bh": "|h\'\'(x)| <= 120 h(x)^{3/2}"', 1e-6),
        ("Lemma-bome-lower", nw,
         'Lemma "bome": "sqrt(2/pi)(1-e^{-1}) e^{-m|x|}/sqrt(1+2m|x|) <= omega_0^{-1} kernel"',
         DEFAULT_TOL),
        ("Lemma-bome-upper", nw, 'Lemma "bome": "omega_0^{-1} kernel <= e^{-m|x|}/sqrt(m|x|)"',
         DEFAULT_TOL),
        ("Lemma-lbomeh", nw, 'Lemma "lbomeh": "omega_0(p)^{-1} h(x) >= 1/(25m) <x>^{-2}"',
         DEFAULT_TOL),
        ("Lemma-ubomeh", nw,
         'Lemma "ubomeh": "omega_0(p)^{-1} h(x) <= (3+4m^2)/(sqrt(2) m^3) <x>^{-2}"', DEFAULT_TOL),
        ("Lemma-ub-p2sqh", nw, 'Lemma "ub p2sqh": "|omega_0(p)^{-1} p^2 h(x)| <= 700/m <x>^{-3}"',
         DEFAULT_TOL),
        ("Lemma-lb-of-ome-h", nw, 'Lemma "lb of ome h": "omega_0(p) h(x) >= <x>^{-2}"',
         DEFAULT_TOL),
        ("Prop-lb-of-f", nw, 'Prop "lb of f": "f(x) >= 2<x>^{-2}"', DEFAULT_TOL),
        ("Prop-lb-of-f-kernel", nw, 'Prop "lb of f": "omega_0 kernel ... <= 0"', DEFAULT_TOL),
        ("Prop-lb-of-f-T", nw, 'Prop "lb of f": "T(p) is positivity preserving"', DEFAULT_TOL),
        ("Lemma-iter-rule1", nw,
         'Lemma "iter": "|(omega_+(p) - lambda_0)w(x)| <= omega_0^{-1}|(p^2+2p)w(x)|"', DEFAULT_TOL),
        ("Lemma-iter-rule2", nw,
         'Lemma "iter": "|(omega_-(p) - lambda_0)w(x)| <= omega_0^{-1}|(p^2-2p)w(x)|"', DEFAULT_TOL),
        ("Prop-f-decay", nw,
         'Prop "f decay": "|(sqrt((p+1)^2+m^2) - sqrt(1+m^2))f(x)|/f(x) = O(|x|^{-1})"', 0.0),
        ("Thm-massive-decay", nw, 'massive decay theorem: "V(x) = O(1/|x|)"', 0.0),
        ("Lemma-lubound-lower", mt, 'Lemma "lubound": "c_1 <x>^{-1} <= h~(x)", c_1 = 0.26',
         DEFAULT_TOL),
        ("Lemma-lubound-upper", mt, 'Lemma "lubound": "h~(x) <= c_2 <x>^{-1}", c_2 = 1.02',
         DEFAULT_TOL),
        ("Lemma-lubound-d1", mt, 'Lemma "lubound": "|h~^{(j)}(x)| <= c_3 <x>^{-2}", j = 1',
         DEFAULT_TOL),
        ("Lemma-lubound-d2", mt, 'Lemma "lubound": "|h~^{(j)}(x)| <= c_3 <x>^{-2}", j = 2',
         DEFAULT_TOL),
        ("Lemma-lubound-d3", mt, 'Lemma "lubound": "|h~^{(j)}(x)| <= c_3 <x>^{-2}", j = 3',
         DEFAULT_TOL),
        ("Lemma-lbMT", mt, 'Lemma "lbMT": "omega_0(p)^{-1} h~(x) >= c_1/(10m) <x>^{-1}"',
         DEFAULT_TOL),
        ("Lemma-ubMT", mt, 'Lemma "ubMT": "omega_0(p)^{-1} h~(x) <= c_2 (2/m + 1/m^2) <x>^{-1}"',
         DEFAULT_TOL),
        ("Lemma-ubppMT", mt,
         'Lemma "ubppMT": "|omega_0(p)^{-1} p^2 h~(x)| <= c_3 sqrt(2)/m (2 + 3/(4m^2)) <x>^{-2}"',
         DEFAULT_TOL),
        ("Lemma-lbMT2", mt, 'Lemma "lbMT2": "omega_0(p) h~(x) >= <x>^{-1}"', DEFAULT_TOL),
        ("Prop-lf-of-fMT", mt, 'Prop "lf of fMT": "f~(x) >= 2<x>^{-1}"', DEFAULT_TOL),
        ("Thm-MT-decay", mt, 'Moses-Tuan decay theorem: "V~(x) = O(1/|x|)"', 0.0),
        ("Thm-zero-energy-even-residual", ev,
         'even zero-energy theorem: "sqrt(-d^2/dx^2) u_nu + V_nu u_nu = 0"', 0.0),
        ("Thm-zero-energy-even-decay", ev, 'even zero-energy theorem: decay of V_nu by case', 0.0),
        ("Remark-zero-energy-even-classification", ev,
         'remark on the even family: "u_nu in L^2(R) only for nu > 1/4"', 0.0),
        ("Thm-zero-energy-odd-residual", od,
         'odd zero-energy theorem: "sqrt(-d^2/dx^2) v_nu + V~_nu v_nu = 0"', 0.0),
        ("Thm-zero-energy-odd-decay", od, 'odd zero-energy theorem: decay table "decs"', 0.0),
        ("Remark-zero-energy-odd-classification", od,
         'remark on the odd family: "zero eigenvalue if nu > 3/4"', 0.0),
        ("Classical-NW-identity", "classical-nw3d",
         'von Neumann-Wigner pair: "eigenvalue equal to 1"', 0.0),
        ("Classical-NW-asymptote", "classical-nw3d",
         '"V_NW(x) ~ -8 sin2|x|/|x| + O(1/|x|^2)"', 0.0),
        ("Classical-MT-identity", "classical-mt",
         'Moses-Tuan pair: "(-Delta+V_MT(x))u_MT(x) = u_MT(x) holds"', 0.0),
    ]
    return {r[0]: CatalogEntry(*r) for r in rows}


CHECK_CATALOG: dict[str, CatalogEntry] = _entries()


def catalog_ids(family: str) -> list[str]:
    return sorted(e.id for e in CHECK_CATALOG.values() if e.family == family)


@dataclass(frozen=True)
class BoundCheck:
    id: str
    anchor: str
    margin: float
    passed: bool
    tol_abs: float = DEFAULT_TOL
    domain: str = ""

    def to_dict(self) -> dict:
        return {"id": self.id, "anchor": self.anchor, "margin": _num(self.margin),
                "passed": self.passed}


def _check(check_id: str, margin: float, domain: str) -> BoundCheck:
    entry = CHECK_CATALOG[check_id]
    margin = float(margin)
    passed = bool(np.isfinite(margin) and margin >= -entry.tol_abs)
    return BoundCheck(check_id, entry.anchor, margin, passed, entry.tol_abs, domain)


def _margin(rhs, lhs, weight=1.0) -> float:
    return float(np.min((np.asarray(rhs) - np.asarray(lhs)) * weight))


# ---------------------------------------------------------------------------
# decay fits


@dataclass(frozen=True)
class DecayFit:
    window: tuple
    model: str
    exponent: float
    log_coeff: float | None
    residual: float
    points: int = 0

    def to_dict(self) -> dict:
        return {"window": [float(self.window[0]), float(self.window[1])], "model": self.model,
                "exponent": _num(self.exponent), "log_coeff": _num(self.log_coeff),
                "residual": _num(self.residual)}


def _xy(samples):
    if isinstance(samples, SampledFunction):
        return (np.asarray(samples.grid.nodes, dtype=float),
                np.asarray(np.real(samples.values), dtype=float), samples.grid)
    x, y = samples
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float), None


def _block_envelope(ax: np.ndarray, ay: np.ndarray, lo: float, hi: float, width: float):
    edges = np.arange(lo, hi + 1e-12, width)
    if edges[-1] < hi:
        edges = np.append(edges, hi)
    order = np.argsort(ax)
    ax, ay = ax[order], ay[order]
    idx = np.searchsorted(ax, edges)
    px, py = [], []
    for a, b in zip(idx[:-1], idx[1:]):
        if b > a:
            j = a + int(np.argmax(ay[a:b]))
            px.append(ax[j])
            py.append(ay[j])
    return np.array(px), np.array(py)


def decay_fit(samples, window=(50.0, 400.0), model: str = "power", envelope: bool = True,
              block: float = math.pi, guard_fraction: float = 0.8) -> DecayFit:
    """Least-squares fit of ``log|V|`` against ``log|x|`` (and ``log log|x|`` for ``power_log``).

    ``samples`` is a :class:`SampledFunction` or an ``(x, values)`` pair; both
    sides ``x < 0`` and ``x > 0`` enter through ``|x|``.  With ``envelope``
    the fit uses the maximum of ``|V|`` in each block of width ``block``,
    which is what an ``O(|x|^a)`` bound constrains for oscillating ``V``.
    Zeros are masked; more than half the window masked raises
    :class:`InsufficientData`.
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError(f"malformed window {window!r}")
    if lo < 20:
        raise ValueError("decay windows must start at |x| >= 20")
    if model not in ("power", "power_log"):
        raise ValueError("model must be 'power' or 'power_log'")
    x, y, grid = _xy(samples)
    if grid is not None and hi > guard_fraction * float(grid.L):
        raise ValueError(f"window end {hi} lies outside the guard region |x| <= "
                         f"{guard_fraction * float(grid.L):.6g}")
    ax = np.abs(x)
    inside = (ax >= lo) & (ax <= hi)
    ay = np.abs(y[inside])
    ax = ax[inside]
    if ax.size == 0:
        raise InsufficientData("no samples inside the window")
    keep = ay > 0
    if keep.mean() < 0.5:
        raise InsufficientData("more than half of the window is masked")
    ax, ay = ax[keep], ay[keep]
    if envelope:
        ax, ay = _block_envelope(ax, ay, lo, hi, block)
    if ax.size < 4:
        raise InsufficientData("too few points for a decay fit")
    cols = [np.ones_like(ax), np.log(ax)]
    if model == "power_log":
        cols.append(np.log(np.log(ax)))
    A = np.vstack(cols).T
    ly = np.log(ay)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - ly) ** 2)))
    return DecayFit((lo, hi), model, float(coef[1]),
                    float(coef[2]) if model == "power_log" else None, resid, int(ax.size))


def trend_slope(x, y, window=(50.0, 400.0), block: float = math.pi) -> float:
    """Log-log slope of the block maxima of ``|y|``; near zero means no growth."""
    ax, ay = np.abs(np.asarray(x, dtype=float)), np.abs(np.asarray(y, dtype=float))
    inside = (ax >= window[0]) & (ax <= window[1]) & (ay > 0)
    px, py = _block_envelope(ax[inside], ay[inside], window[0], window[1], block)
    return float(np.polyfit(np.log(px), np.log(py), 1)[0])


def plateau_fit(x, values, correction_exponent: float) -> tuple[float, float]:
    """Fit ``y = A + B x^correction_exponent``; ``A`` is the extrapolated plateau."""
    x = np.asarray(x, dtype=float)
    A = np.vstack([np.ones_like(x), x ** correction_exponent]).T
    coef, *_ = np.linalg.lstsq(A, np.asarray(values, dtype=float), rcond=None)
    return float(coef[0]), float(coef[1])


# ---------------------------------------------------------------------------
# residuals


def eigen_residual(model: _Potential, masked: bool = True, guard_fraction: float = 0.5) -> float:
    """Relative L2 norm of ``omega(p)u + V u - lambda u`` on the guard region.

    ``masked`` drops the nodes with ``|sin x| < eps_sin`` where formula B
    supplies ``V``.
    """
    wu = apply_multiplier(model.u, MultiplierSymbol("omega", model.m)).values
    u = model.u.values
    res = wu + (model.V.values - model.lam) * u
    sel = model.grid.guard_mask(guard_fraction)
    if masked:
        sel = sel & model.regular_mask()
    return float(np.linalg.norm(res[sel]) / np.linalg.norm(u[sel]))


# ---------------------------------------------------------------------------
# bounds suites


def _kernel_nodes(grid: GridSpec, n: int, lo: float = 1e-2, hi: float | None = None):
    hi = float(grid.L) / 2 if hi is None else hi
    pts = np.geomspace(lo, hi, n)
    idx = {grid.N // 2}
    for p in pts:
        idx.add(grid.index_of(p))
        idx.add(grid.index_of(-p))
    return np.array(sorted(idx))



def _massive_checks(model: MassiveModel, n_kernel: int) -> list[BoundCheck]:
    grid, m = model.grid, model.m
    x = grid.nodes
    X = 1 + x * x
    h = model.h.values
    checks = []
    full = "all grid nodes"
    checks.append(_check("Lemma-bh-h1-lower", _margin(h, 1 / (6 * X), X), full))
    checks.append(_check("Lemma-bh-h1-upper", _margin(1 / (x * x + 2 / 3.0), h, X), full))
    h32 = h ** 1.5
    d1 = derivative(model.h, 1).values
    checks.append(_check("Lemma-bh-h2", _margin(8 * h32, np.abs(d1)), full))
    del d1
    d2 = derivative(model.h, 2).values
    checks.append(_check("Lemma-bh-h3", _margin(120 * h32, np.abs(d2)), full))
    del d2

    z = np.geomspace(1e-2, 50, n_kernel)
    k0 = math.sqrt(2 / math.pi) * bessel_k(0, z)
    lower = math.sqrt(2 / math.pi) * (1 - math.exp(-1)) * np.exp(-z) / np.sqrt(1 + 2 * z)
    upper = np.exp(-z) / np.sqrt(z)
    ez = np.exp(z)
    dom = f"{n_kernel} log-spaced m|x| in [1e-2, 50]"
    checks.append(_check("Lemma-bome-lower", _margin(k0, lower, ez), dom))
    checks.append(_check("Lemma-bome-upper", _margin(upper, k0, ez), dom))

    idx = _kernel_nodes(grid, n_kernel)
    conv = inv_omega0_kernel_convolve(model.h, m).values[idx]
    Xi = np.asarray(X[idx], dtype=float)
    dom = f"{idx.size} nodes at log-spaced |x| in [1e-2, L/2] and x = 0"
    checks.append(_check("Lemma-lbomeh", _margin(conv, 1 / (25 * m * Xi), m * Xi), dom))
    checks.append(_check("Lemma-ubomeh",
                         _margin((3 + 4 * m * m) / (math.sqrt(2) * m ** 3) / Xi, conv, m * Xi), dom))

    p2 = apply_multiplier(model.h, lambda k: k * k / np.sqrt(k * k + k.dtype.type(m) ** 2))
    checks.append(_check("Lemma-ub-p2sqh",
                         _margin(700 / m * X ** -1.5, np.abs(p2.values.real), X ** 1.5), full))
    del p2
    w0h = apply_multiplier(model.h, MultiplierSymbol("omega0", m)).values.real
    checks.append(_check("Lemma-lb-of-ome-h", _margin(w0h, 1 / X, X), full))
    del w0h
    checks.append(_check("Prop-lb-of-f", _margin(model.f.values, 2 / X, X), full))

    xs = np.geomspace(1e-2, 50, n_kernel) / m
    kern = omega0_kernel(xs, m)
    weight = np.exp(m * xs)
    dom = f"{n_kernel} log-spaced m|x| in [1e-2, 50]"
    checks.append(_check("Prop-lb-of-f-kernel", _margin(0.0, kern, weight), dom))
    That = 2 * kern * (np.cos(xs) - 1)
    checks.append(_check("Prop-lb-of-f-T", _margin(That, 0.0, weight / xs ** 2), dom))

    for cid, name, sign in (("Lemma-iter-rule1", "omega_plus", 1), ("Lemma-iter-rule2", "omega_minus", -1)):
        def shifted(k, name=name):
            mm = k.dtype.type(m)
            lam0 = np.sqrt(1 + mm * mm)
            sym = MultiplierSymbol(name, m)
            return (sym(k) ** 2 - lam0 ** 2) / (sym(k) + lam0)
        lhs = np.abs(apply_multiplier(model.h, shifted).values)
        pw = np.abs(apply_multiplier(model.h, lambda k, s=sign: k * k + 2 * s * k).values)
        rhs = apply_multiplier(SampledFunction(grid, pw), MultiplierSymbol("inv_omega0", m)).values.real
        checks.append(_check(cid, _margin(rhs, lhs), full))
        del lhs, pw, rhs

    shift = np.abs(apply_multiplier(model.f, _shift_symbol(m)).values)
    ratio = np.abs(x) * shift / model.f.values
    slope = trend_slope(x, ratio)
    checks.append(_check("Prop-f-decay", 0.1 - slope,
                         "block maxima of |x||(omega_+ - lambda_0)f|/f on 50 <= |x| <= 400; "
                         "margin = 0.1 - trend slope"))
    fit = decay_fit(model.V)
    checks.append(_check("Thm-massive-decay", 0.1 - abs(fit.exponent + 1),
                         "envelope fit on 50 <= |x| <= 400; margin = 0.1 - |exponent + 1|"))
    return checks


def _mt_checks(model: MTModel, n_kernel: int) -> list[BoundCheck]:
    grid, m = model.grid, model.m
    c1, c2, c3 = MT_CONSTANTS["c1"], MT_CONSTANTS["c2"], MT_CONSTANTS["c3"]
    x = grid.nodes
    X = 1 + x * x
    R = np.sqrt(X)
    h = model.h.values
    full = "all grid nodes"
    checks = [
        _check("Lemma-lubound-lower", _margin(h, c1 / R, R), full),
        _check("Lemma-lubound-upper", _margin(c2 / R, h, R), full),
    ]
    _, q1, q2, q3 = eval_h_tilde_derivatives(x)
    for j, q in ((1, q1), (2, q2), (3, q3)):
        checks.append(_check(f"Lemma-lubound-d{j}", _margin(c3 / X, np.abs(q), X),
                             "all grid nodes, one-sided analytic derivatives at x = 0"))
    del q1, q3

    idx = _kernel_nodes(grid, n_kernel)
    conv = inv_omega0_kernel_convolve(model.h, m).values[idx]
    Ri = np.asarray(R[idx], dtype=float)
    dom = f"{idx.size} nodes at log-spaced |x| in [1e-2, L/2] and x = 0"
    checks.append(_check("Lemma-lbMT", _margin(conv, c1 / (10 * m) / Ri, m * Ri), dom))
    checks.append(_check("Lemma-ubMT", _margin(c2 * (2 / m + 1 / m ** 2) / Ri, conv, m * Ri), dom))

    p2h = SampledFunction(grid, -q2)
    del q2
    p2 = np.abs(apply_multiplier(p2h, MultiplierSymbol("inv_omega0", m)).values.real)
    bound = c3 * math.sqrt(2) / m * (2 + 3 / (4 * m * m))
    checks.append(_check("Lemma-ubppMT", _margin(bound / X, p2, X), full))
    del p2
    w0h = apply_multiplier(model.h, MultiplierSymbol("omega0", m)).values.real
    checks.append(_check("Lemma-lbMT2", _margin(w0h, 1 / R, R), full))
    del w0h
    checks.append(_check("Prop-lf-of-fMT", _margin(model.f.values, 2 / R, R), full))
    fit = decay_fit(model.V)
    checks.append(_check("Thm-MT-decay", 0.1 - abs(fit.exponent + 1),
                         "envelope fit on 50 <= |x| <= 400; margin = 0.1 - |exponent + 1|"))
    return checks


def bounds_suite(model: _Potential, n_kernel: int = 200) -> list[BoundCheck]:
    """One :class:`BoundCheck` per lemma or proposition inequality of the model's family."""
    if isinstance(model, MassiveModel):
        return _massive_checks(model, n_kernel)
    if isinstance(model, MTModel):
        return _mt_checks(model, n_kernel)
    raise TypeError(f"no bounds suite for {type(model).__name__}")


# ---------------------------------------------------------------------------
# reports


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


@dataclass(frozen=True)
class VerificationReport:
    model: dict
    checks: list
    residuals: dict
    decay: list
    diagnostics: dict
    verdict: str
    failing: list = field(default_factory=list)
    reason: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return _clean({
            "model": self.model,
            "checks": [c.to_dict() for c in self.checks],
            "residuals": self.residuals,
            "decay": [d.to_dict() for d in self.decay],
            "diagnostics": self.diagnostics,
            "verdict": {"status": self.verdict, "failing": list(self.failing), "reason": self.reason},
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"


def assemble_report(model: dict, checks, residuals=None, decay=None, diagnostics=None) -> VerificationReport:
    """Sort checks by id and compute the verdict (pass iff every check passed)."""
    checks = sorted(checks, key=lambda c: c.id)
    failing = [c.id for c in checks if not c.passed]
    if not checks:
        verdict, reason = "fail", "no checks"
    elif failing:
        verdict, reason = "fail", "failed checks: " + ", ".join(failing)
    else:
        verdict, reason = "pass", ""
    return VerificationReport(model=dict(model), checks=checks, residuals=dict(residuals or {}),
                              decay=list(decay or []), diagnostics=dict(diagnostics or {}),
                              verdict=verdict, failing=failing, reason=reason)


def _h_constants(model: _Potential) -> dict:
    x = model.grid.nodes
    w = (1 + x * x) ** 1.5
    out = {}
    for n in range(1, 5):
        d = derivative(model.h, n).values
        out[f"sup_h{n}_x3"] = float(np.max(np.abs(d) * w))
    return out


def verify_model(model: _Potential, n_kernel: int = 200, window=(50.0, 400.0)) -> VerificationReport:
    """Full report for a massive or Moses-Tuan model."""
    checks = bounds_suite(model, n_kernel)
    residuals = {
        "eigen_masked": eigen_residual(model, masked=True),
        "eigen_unmasked": eigen_residual(model, masked=False),
    }
    fit = decay_fit(model.V, window)
    sup = model.sup_V
    diag = {
        "sup_V": sup,
        "imag_max": model.imag_diagnostic,
        "imag_rel": model.imag_diagnostic / sup,
        "seam_max": model.seam_diagnostic,
        "seam_rel": model.seam_diagnostic / sup,
        "V_at_k_pi": {str(k): float(model.V.at(k * math.pi)) for k in (1, 2, 3)},
        "modulation_shift": modulation_shift_check(model.h, model.m),
    }
    if isinstance(model, MassiveModel):
        diag["h_derivative_constants"] = _h_constants(model)
        x = model.grid.nodes
        diag["f_times_x2_min"] = float(np.min(model.f.values * (1 + x * x)))
    else:
        x = model.grid.nodes
        diag["f_times_x_min"] = float(np.min(model.f.values * np.sqrt(1 + x * x)))
        _, q1, q2, q3 = eval_h_tilde_derivatives(x)
        X = 1 + x * x
        diag["lubound_c3_needed"] = {f"j{j}": float(np.max(np.abs(q) * X))
                                     for j, q in ((1, q1), (2, q2), (3, q3))}
    return assemble_report(model.describe(), checks, residuals, [fit], diag)


def verify_massless(parity: str, nu: float, grid: GridSpec | None = None,
                    window=(50.0, 400.0)) -> VerificationReport:
    fam = massless_family(parity, nu)
    grid = grid or default_grid()
    tag = "even" if parity == "even" else "odd"
    res = residual_even(nu, grid) if parity == "even" else residual_odd(nu, grid)
    checks = [_check(f"Thm-zero-energy-{tag}-residual", 1e-4 - res,
                     "relative L2 residual on |x| <= L/2; margin = 1e-4 - residual")]
    decay = []
    expected = expected_decay(parity, nu)
    xs = np.linspace(window[0], window[1], 20001)
    if expected is not None:
        model, alpha = expected
        fit = decay_fit((xs, fam.potential(xs)), window, model)
        decay.append(fit)
        checks.append(_check(f"Thm-zero-energy-{tag}-decay", 0.1 - abs(fit.exponent - alpha),
                             f"fit on {window}; margin = 0.1 - |exponent - ({alpha:.3g})|"))
    if parity == "even":
        agree = l2_classify(nu) == classify(parity, nu)
        checks.append(_check("Remark-zero-energy-even-classification", 0.0 if agree else -1.0,
                             "window-doubling growth of the L2 norm of u_nu"))
    else:
        # v_nu^2 ~ x^(2-4nu): square integrable iff nu > 3/4, seen through u_(nu-1/2)
        agree = l2_classify(nu - 0.5) == classify(parity, nu)
        checks.append(_check("Remark-zero-energy-odd-classification", 0.0 if agree else -1.0,
                             "window-doubling growth of the L2 norm of v_nu"))
    residuals = {"spectral": res}
    if nu == 1:
        residuals["analytic"] = analytic_residual(parity, np.linspace(-400, 400, 80001))
    diag = {"classification": fam.classification, "decay_class": fam.decay_class}
    if parity == "even" and nu != 1:
        diag["sign_structure"] = sign_structure(nu, "even")
    return assemble_report({**fam.describe(), "grid": grid.describe()}, checks, residuals, decay, diag)


def verify_classical(family: str) -> VerificationReport:
    from .limits import classical_mt_identity, classical_nw_identity, nw_asymptote_envelope, V_mt

    if family == "classical-nw3d":
        res = classical_nw_identity()
        env = nw_asymptote_envelope()
        slope = float(np.polyfit(np.log(np.arange(1, env.size + 1) * math.pi + 50), np.log(env), 1)[0])
        checks = [_check("Classical-NW-identity", 1e-5 - res, "radii 0.7, 1.9, 5.3, 12.1"),
                  _check("Classical-NW-asymptote", 0.1 - slope,
                         "block maxima of r|r V_NW + 8 sin 2r| on [50, 400]; margin = 0.1 - slope")]
        return assemble_report({"family": family}, checks, {"identity": res},
                               [], {"asymptote_envelope_max": float(env.max())})
    if family == "classical-mt":
        res = classical_mt_identity()
        xs = np.linspace(50, 400, 200001)
        fit = decay_fit((xs, V_mt(xs)))
        checks = [_check("Classical-MT-identity", 1e-5 - res, "radii 0.7, 1.9, 5.3")]
        return assemble_report({"family": family}, checks, {"identity": res}, [fit], {})
    raise ValueError(f"unknown classical family {family!r}")
