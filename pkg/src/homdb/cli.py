"""Command-line front end.

Exit codes: 0 ok, 2 configuration error, 3 precondition violation,
4 tolerance breach, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import canonical, closedform, hamiltonian, measures, spaces
from .errors import NumericalError, PreconditionError, ToleranceBreach
from .recurrence import ParamPair

EXIT_OK, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_TOLERANCE, EXIT_NUMERICAL = 0, 2, 3, 4, 5
COMMANDS = ("eval", "kernel", "hamiltonian", "measure", "canonicalize", "weyl", "crosscheck")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    p: float | None = None
    P: tuple | None = None
    psi: float | None = None
    mu_plus: float | None = None
    mu_minus: float | None = None
    grid: str | None = None
    tol: float | None = None
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def params(self) -> ParamPair:
        if self.p is None or self.P is None or self.psi is None:
            raise ConfigError("parameters need p, P and psi")
        k1, k3, k2 = self.P
        return ParamPair(self.p, k1, k2, k3, self.psi)


def parse_matrix(text) -> tuple:
    """'k1,k3,k2' (or a JSON list) as a triple of floats."""
    items = text.split(",") if isinstance(text, str) else list(text)
    if len(items) != 3:
        raise ConfigError(f"P needs three entries k1,k3,k2, got {text!r}")
    try:
        return tuple(float(v) for v in items)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"P entries must be numbers: {text!r}") from exc


def _axis(text, name):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid {name} axis must be lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"grid {name} axis has a malformed entry: {text!r}") from exc
    if n < 1:
        raise ConfigError(f"grid {name} axis needs n >= 1")
    return np.linspace(lo, hi, n)


def parse_grid(text: str) -> np.ndarray:
    """'re0:re1:n x im0:im1:m' as a flat array of complex points, real part varying fastest."""
    halves = text.replace(" ", "").split("x")
    if len(halves) != 2:
        raise ConfigError(f"grid must look like re0:re1:nxim0:im1:m, got {text!r}")
    re, im = _axis(halves[0], "real"), _axis(halves[1], "imaginary")
    return (re[None, :] + 1j * im[:, None]).reshape(-1)


_FIELDS = {"p": float, "P": parse_matrix, "psi": float, "mu_plus": float, "mu_minus": float,
           "grid": str, "tol": float, "out": str}


def build_config(args: argparse.Namespace) -> RunConfig:
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{args.config}: top level must be an object")
    cfg = RunConfig(args.command)
    extra = {}
    for key, value in data.items():
        if key in _FIELDS:
            try:
                setattr(cfg, key, _FIELDS[key](value))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{args.config}: field {key!r}: {exc}") from exc
        else:
            extra[key] = value
    cfg.extra = extra
    for key in _FIELDS:
        value = getattr(args, key)
        if value is not None:
            try:
                setattr(cfg, key, _FIELDS[key](value))
            except ValueError as exc:
                raise ConfigError(f"flag --{key.replace('_', '-')}: {exc}") from exc
    return cfg


def _fmt(x) -> str:
    return "%.17g" % x


def _table(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, (float, int, np.floating)) else v for v in row])
    return buf.getvalue()


def _record(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _grid(cfg: RunConfig, default: str) -> np.ndarray:
    return parse_grid(cfg.grid or default)


def cmd_eval(cfg: RunConfig) -> str:
    params = cfg.params()
    z = _grid(cfg, "-2:2:5x0:0:1")
    A, B = spaces.xi_hat(params).ab(z)
    As, Bs = closedform.series_values(params, z)
    scale = np.maximum(1.0, np.abs(A) + np.abs(B))
    res = np.maximum(np.abs(A - As), np.abs(B - Bs)) / scale
    E = A - 1j * B
    rows = zip(z.real, z.imag, A.real, A.imag, B.real, B.imag, E.real, E.imag, res)
    return _table(["re_z", "im_z", "re_A", "im_A", "re_B", "im_B", "re_E", "im_E", "backend_residual"], rows)


def cmd_kernel(cfg: RunConfig) -> str:
    pair = spaces.xi_hat(cfg.params())
    z = _grid(cfg, "-2:2:5x0:1:3")
    w = complex(cfg.extra.get("w", 0.0))
    K = spaces.kernel_matrix(pair, z, [w])[:, 0]
    rows = ((zz.real, zz.imag, w.real, w.imag, k.real, k.imag) for zz, k in zip(z, K))
    return _table(["re_z", "im_z", "re_w", "im_w", "re_K", "im_K"], rows)


def cmd_hamiltonian(cfg: RunConfig) -> str:
    params = cfg.params()
    a = _grid(cfg, "0.5:4:8x0:0:1").real
    if np.any(a <= 0):
        raise PreconditionError("hamiltonian grid needs positive real parts")
    h11, h22, h12 = canonical.h_entries_array(params, a)
    rows = zip(a, h11, h12, h22, h11 + h22)
    return _table(["a", "h11", "h12", "h22", "trace"], rows)


def cmd_measure(cfg: RunConfig) -> str:
    if cfg.mu_plus is not None or cfg.mu_minus is not None:
        if cfg.p is None:
            raise ConfigError("inverse construction needs p")
        target = measures.PowerMeasure(cfg.mu_plus or 0.0, cfg.mu_minus or 0.0, 2.0 * cfg.p)
        pp = measures.params_of_measure(target)
        gen = measures.generator_params(target)
        return _record({
            "mu_plus": target.mu_plus, "mu_minus": target.mu_minus, "exponent": target.exponent,
            "params": {"p": pp.p, "P": [pp.kappa1, pp.kappa3, pp.kappa2], "psi": pp.psi},
            "generator": {"p": gen.p, "P": [gen.kappa1, gen.kappa3, gen.kappa2], "psi": gen.psi},
        })
    m = measures.measure_of(cfg.params())
    return _record({"mu_plus": m.mu_plus, "mu_minus": m.mu_minus, "exponent": m.exponent})


def _params_json(x: ParamPair) -> dict:
    return {"p": x.p, "P": [x.kappa1, x.kappa3, x.kappa2], "psi": x.psi}


def cmd_canonicalize(cfg: RunConfig) -> str:
    params = cfg.params()
    return _record({
        "input": _params_json(params),
        "approx": _params_json(hamiltonian.canonicalize_approx(params)),
        "simeq": _params_json(hamiltonian.canonicalize_simeq(params)),
    })


def cmd_weyl(cfg: RunConfig) -> str:
    params = cfg.params()
    z = _grid(cfg, "-2:2:5x1:1:1")
    if np.any(z.imag == 0):
        raise PreconditionError("weyl grid must avoid the real axis")
    tol = cfg.tol or 1e-8
    t_max = cfg.extra.get("t_max")
    pair = spaces.xi_hat(params)
    rows = []
    for zz in z:
        run = canonical.weyl_run(params, t_max, zz, tol)
        A, B = pair.ab(zz)
        tau = -1.0 / run.value
        qe = (A * tau + B) / (-B * tau + A)
        rows.append((zz.real, zz.imag, run.value.real, run.value.imag, qe.real, qe.imag, run.cauchy, run.t_end))
    return _table(["re_z", "im_z", "re_qH", "im_qH", "re_qEC", "im_qEC", "cauchy", "t_end"], rows)


def cmd_crosscheck(cfg: RunConfig) -> str:
    params = cfg.params()
    z = _grid(cfg, "-5:5:11x-5:5:11")
    tol = cfg.tol or 1e-8
    res = closedform.crosscheck(params, z)
    worst = float(np.max(res))
    summary = _record({"max_residual": worst, "points": int(z.size), "tol": tol, "pass": worst <= tol})
    if not worst <= tol:
        raise ToleranceBreach(summary)
    return summary


_DISPATCH = {
    "eval": cmd_eval, "kernel": cmd_kernel, "hamiltonian": cmd_hamiltonian, "measure": cmd_measure,
    "canonicalize": cmd_canonicalize, "weyl": cmd_weyl, "crosscheck": cmd_crosscheck,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homdb",
        description="Homogeneous de Branges spaces: evaluation, kernels, canonical systems and measures.",
        epilog="exit codes: 0 ok, 2 config error, 3 precondition violation, 4 tolerance breach, "
               "5 numerical failure",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON file with any of the flag fields; flags override it")
    parser.add_argument("--p", help="order p")
    parser.add_argument("--P", help="matrix entries k1,k3,k2")
    parser.add_argument("--psi", help="psi")
    parser.add_argument("--mu-plus", dest="mu_plus", help="mu_+ for the inverse construction")
    parser.add_argument("--mu-minus", dest="mu_minus", help="mu_- for the inverse construction")
    parser.add_argument("--grid", help="re0:re1:nxim0:im1:m")
    parser.add_argument("--tol", help="tolerance")
    parser.add_argument("--out", help="output file (default stdout)")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = build_config(args)
        text = _DISPATCH[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ToleranceBreach as exc:
        sys.stdout.write(str(exc))
        print("tolerance breach", file=sys.stderr)
        return EXIT_TOLERANCE
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
