"""Command-line front end.

Subcommands: build, verify, limit-scan, decay-fit, coupling-scan, bounds.
Exit codes: 0 success or verdict pass, 1 verification fail, 2 usage or
configuration error, 3 certification error.  Options may also come from a
JSON config file (``--config``); explicit flags override it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from .errors import CertificationError, RNWError
from .massive import MASSIVE_THRESHOLD, MT_THRESHOLD, build_massive, build_moses_tuan
from .massless import coupling_scan, massless_family
from .spectral import default_grid, make_grid, make_pi_grid

FAMILIES = ("massive-nw", "moses-tuan", "massless-even", "massless-odd", "classical-nw3d",
            "classical-mt")
MASSIVE = {"massive-nw": MASSIVE_THRESHOLD, "moses-tuan": MT_THRESHOLD}
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CERT = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output helpers


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    return format(float(v), ".17g")


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename; ``-`` is stdout."""
    if path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".rnw-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def sidecar(path: str) -> str:
    root, _ = os.path.splitext(path)
    return root + ".json"


# ---------------------------------------------------------------------------
# config


def parse_window(text) -> tuple[float, float]:
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = str(text).split(":")
    try:
        lo, hi = (float(p) for p in parts)
    except (TypeError, ValueError):
        raise UsageError(f"malformed window {text!r}; expected MIN:MAX") from None
    if not (math.isfinite(lo) and math.isfinite(hi) and 20 <= lo < hi):
        raise UsageError(f"malformed window {text!r}; need 20 <= MIN < MAX")
    return lo, hi


def parse_floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"malformed number list {text!r}") from None


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Merge the JSON config file under the explicit flags."""
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in data.items():
            attr = key.replace("-", "_")
            if not hasattr(args, attr):
                raise UsageError(f"unknown config key {key!r}")
            if getattr(args, attr) is None:
                setattr(args, attr, value)
    for attr, default in DEFAULTS.items():
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, default)
    return args


DEFAULTS = {"eps_sin": 1e-3, "precision": "extended", "window": "50:400", "fit_model": "power",
            "output": "-", "allow_uncertified": False, "couplings": "0,0.5,1,1.5,2"}


def grid_from(args):
    if args.L is not None and args.pi_periods is not None:
        raise UsageError("give at most one of --L and --pi-periods")
    N = int(args.N) if args.N is not None else 2 ** 20
    if N < 16 or N & (N - 1):
        raise UsageError("--N must be a power of two >= 16")
    if args.L is not None:
        return make_grid(float(args.L), N, args.precision)
    if args.pi_periods is not None:
        return make_pi_grid(float(args.pi_periods), N, args.precision)
    if args.N is None and args.precision == "extended":
        return default_grid()
    return make_pi_grid(163, N, args.precision)


def need_family(args) -> str:
    if args.family not in FAMILIES:
        raise UsageError(f"--family must be one of {', '.join(FAMILIES)}")
    fam = args.family
    if fam in MASSIVE:
        if args.mass is None or args.nu is not None:
            raise UsageError(f"{fam} needs --mass and no --nu")
    elif fam.startswith("massless"):
        if args.nu is None or args.mass is not None:
            raise UsageError(f"{fam} needs --nu and no --mass")
    elif args.mass is not None or args.nu is not None:
        raise UsageError(f"{fam} takes neither --mass nor --nu")
    return fam


def massless_or_usage(parity: str, nu: float):
    try:
        return massless_family(parity, float(nu))
    except RNWError as exc:
        raise UsageError(str(exc)) from None


def build_model(args):
    fam = args.family
    m = float(args.mass)
    if not m > 0:
        raise UsageError("--mass must be positive")
    if not m >= MASSIVE[fam] and not args.allow_uncertified:
        raise CertificationError(f"m = {m} is below the certified threshold {MASSIVE[fam]} for {fam};"
                                 " pass --allow-uncertified to explore")
    build = build_massive if fam == "massive-nw" else build_moses_tuan
    return build(m, grid_from(args), float(args.eps_sin))


# ---------------------------------------------------------------------------
# subcommands


def cmd_build(args) -> int:
    fam = need_family(args)
    if fam in MASSIVE:
        model = build_model(args)
        cols = model.columns()
        header = ["x", "g", "h", "f", "u", "V", "imV"]
        rows = zip(*(np.asarray(cols[h], dtype=float) for h in header))
        meta = model.describe()
    elif fam.startswith("massless"):
        mf = massless_or_usage(fam.split("-")[1], args.nu)
        x = np.asarray(grid_from(args).nodes, dtype=float)
        header = ["x", "eig", "V"]
        rows = zip(x, mf.eigenfunction(x), mf.potential(x))
        meta = mf.describe()
    else:
        from .limits import V_mt, V_nw, u_mt, u_nw
        grid = grid_from(args)
        x = np.asarray(grid.nodes, dtype=float)
        r = x[x > 0]
        u, V = (u_nw, V_nw) if fam == "classical-nw3d" else (u_mt, V_mt)
        header = ["x", "eig", "V"]
        rows = zip(r, u(r), V(r))
        meta = {"family": fam}
    write_atomic(args.output, csv_text(header, rows))
    if args.output != "-":
        write_atomic(sidecar(args.output), json_text(meta))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import verify_classical, verify_massless, verify_model

    fam = need_family(args)
    window = parse_window(args.window)
    if fam in MASSIVE:
        report = verify_model(build_model(args), window=window)
    elif fam.startswith("massless"):
        parity = fam.split("-")[1]
        massless_or_usage(parity, args.nu)
        grid = grid_from(args) if (args.L or args.pi_periods or args.N) else None
        report = verify_massless(parity, float(args.nu), grid, window)
    else:
        report = verify_classical(fam)
    write_atomic(args.output, report.to_json())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_bounds(args) -> int:
    from .verify import bounds_suite

    fam = need_family(args)
    if fam not in MASSIVE:
        raise UsageError("bounds applies to massive-nw and moses-tuan")
    checks = sorted(bounds_suite(build_model(args)), key=lambda c: c.id)
    write_atomic(args.output, csv_text(["id", "margin", "passed"],
                                       ((c.id, c.margin, c.passed) for c in checks)))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def cmd_limit_scan(args) -> int:
    from .limits import limit_scan

    fam = args.family or "massive-nw"
    if fam not in MASSIVE:
        raise UsageError("limit-scan applies to massive-nw and moses-tuan")
    if args.mass is None:
        raise UsageError("limit-scan needs --mass")
    m = float(args.mass)
    c_values = parse_floats(args.c) if args.c is not None else None
    table = limit_scan(m, c_values, grid_from(args), fam)
    header = ["c", "e0", "e1", "e2", "lambda_err", "V_err"]
    rows = ((r.c, r.e0, r.e1, r.e2, r.lambda_err, r.V_err) for r in table.rows)
    write_atomic(args.output, csv_text(header, rows))
    summary = table.summary()
    summary["rate"] = summary["rate_exponent"]
    target = args.summary or (sidecar(args.output) if args.output != "-" else None)
    if target:
        write_atomic(target, json_text(summary))
    return EXIT_OK


def cmd_decay_fit(args) -> int:
    from .verify import decay_fit

    window = parse_window(args.window)
    if args.fit_model not in ("power", "power_log"):
        raise UsageError("--fit-model must be power or power_log")
    if args.input:
        try:
            data = np.genfromtxt(args.input, delimiter=",", names=True)
        except OSError as exc:
            raise UsageError(f"cannot read {args.input}: {exc}") from None
        if data.dtype.names is None or "x" not in data.dtype.names or "V" not in data.dtype.names:
            raise UsageError("input CSV needs x and V columns")
        samples = (data["x"], data["V"])
    else:
        fam = need_family(args)
        if fam in MASSIVE:
            samples = build_model(args).V
        elif fam.startswith("massless"):
            mf = massless_or_usage(fam.split("-")[1], args.nu)
            xs = np.linspace(window[0], window[1], 20001)
            samples = (xs, mf.potential(xs))
        else:
            raise UsageError("decay-fit needs --input or a massive or massless family")
    fit = decay_fit(samples, window, args.fit_model)
    header = ["window_min", "window_max", "model", "exponent", "log_coeff", "residual"]
    row = (fit.window[0], fit.window[1], fit.model, fit.exponent, fit.log_coeff, fit.residual)
    write_atomic(args.output, csv_text(header, [row]))
    return EXIT_OK


def cmd_coupling_scan(args) -> int:
    if args.nu is None:
        raise UsageError("coupling-scan needs --nu")
    massless_or_usage("even", args.nu)
    couplings = parse_floats(args.couplings)
    if not couplings:
        raise UsageError("empty coupling list")
    points, _ = coupling_scan(float(args.nu), couplings)
    write_atomic(args.output, csv_text(["lambda", "e0_estimate"],
                                       ((p.coupling, p.e0_estimate) for p in points)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option defaults")
    common.add_argument("--family", choices=FAMILIES)
    common.add_argument("--mass", type=float)
    common.add_argument("--nu", type=float)
    common.add_argument("--L", type=float, help="grid half width")
    common.add_argument("--pi-periods", type=float, help="grid half width in units of pi")
    common.add_argument("--N", type=int, help="number of grid points (power of two)")
    common.add_argument("--precision", choices=("extended", "double"))
    common.add_argument("--eps-sin", type=float)
    common.add_argument("--window", help="fit window MIN:MAX")
    common.add_argument("-o", "--output", help="output path, '-' for stdout")
    common.add_argument("--allow-uncertified", action="store_const", const=True,
                        help="run below the certified mass threshold")

    parser = argparse.ArgumentParser(prog="rnw", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, text in (
        ("build", cmd_build, "sample a model and write CSV"),
        ("verify", cmd_verify, "run the verification suite and write a JSON report"),
        ("bounds", cmd_bounds, "write the bound-check margins as CSV"),
        ("limit-scan", cmd_limit_scan, "non-relativistic limit table"),
        ("decay-fit", cmd_decay_fit, "fit the decay exponent of a potential"),
        ("coupling-scan", cmd_coupling_scan, "lowest eigenvalue against coupling"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.set_defaults(func=func)
        if name == "limit-scan":
            p.add_argument("--c", help="comma-separated speeds of light")
            p.add_argument("--summary", help="JSON summary path")
        if name == "decay-fit":
            p.add_argument("--input", help="CSV with x and V columns")
            p.add_argument("--fit-model", choices=("power", "power_log"))
        if name == "coupling-scan":
            p.add_argument("--couplings", help="comma-separated coupling values")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        args = resolve(args)
        return args.func(args)
    except UsageError as exc:
        print(f"rnw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CertificationError as exc:
        print(f"rnw: certification error: {exc}", file=sys.stderr)
        return EXIT_CERT
    except (RNWError, ValueError) as exc:
        print(f"rnw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
