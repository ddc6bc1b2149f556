"""Command-line front end.

Thin wrappers around the library: every number in the emitted CSV/JSON files
is produced by a module operation.  Outputs are deterministic for a fixed
config and seed; floats are printed with 17 significant digits and complex
numbers serialize as [re, im] pairs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path as FilePath

import numpy as np

from . import convergence, lagrangian, leibniz, solver, stencils
from .grid import Grid, Path

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2

OUTDIR_ENV = "SCALEVAR_OUTDIR"


class ConfigError(ValueError):
    pass


# -- serialization helpers -------------------------------------------------

def _fmt(x) -> str:
    return format(float(x), ".17g")


def _cnum(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _json_default(obj):
    if isinstance(obj, complex):
        return _cnum(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj)}")


def _sanitize(obj):
    """Recursively map complex values to [re, im] pairs."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _sanitize(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return _cnum(obj)
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _write_json(path: FilePath, payload: dict):
    text = json.dumps(_sanitize(payload), sort_keys=True, indent=2)
    path.write_text(text + "\n")
    print(text)


def _write_csv(path: FilePath, header: list, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


# -- argument parsing helpers ----------------------------------------------

def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ConfigError(f"cannot parse complex value {text!r}; expected 're' or 're,im'")


def _parse_vector(text: str) -> np.ndarray:
    return np.array([_parse_complex(p.replace(";", ",")) for p in text.split()], dtype=complex) \
        if " " in text else np.array([_parse_complex(text)], dtype=complex)


def _resolve_stencil(spec: str, eps: float) -> stencils.Stencil:
    spec = spec.strip()
    if spec.startswith("{"):
        return stencils.Stencil.from_json(json.loads(spec)).with_eps(eps)
    if spec.endswith(".json") and FilePath(spec).exists():
        return stencils.Stencil.from_json(json.loads(FilePath(spec).read_text())).with_eps(eps)
    try:
        return stencils.named_stencil(spec, eps)
    except KeyError as exc:
        raise ConfigError(str(exc)) from None


def _resolve_lagrangian(spec: str) -> lagrangian.QuadraticLagrangian:
    spec = spec.strip()
    if spec.startswith("{"):
        return lagrangian.lagrangian_from_json(json.loads(spec))
    if spec.endswith(".json") and FilePath(spec).exists():
        return lagrangian.lagrangian_from_json(json.loads(FilePath(spec).read_text()))
    try:
        return lagrangian.preset(spec)
    except KeyError as exc:
        raise ConfigError(str(exc)) from None


TEST_FUNCTIONS = {
    "sin": (np.sin, np.cos, lambda t: -np.sin(t)),
    "exp": (np.exp, np.exp, np.exp),
    "poly3": (lambda t: t ** 3 - t, lambda t: 3 * t ** 2 - 1, lambda t: 6 * t),
    "linear": (lambda t: t, lambda t: 1.0, lambda t: 0.0),
    "kink": (lambda t: t ** 3 + (max(t - 0.5, 0.0)) ** 3,
             lambda t: 3 * t ** 2 + 3 * max(t - 0.5, 0.0) ** 2,
             lambda t: 6 * t + 6 * max(t - 0.5, 0.0)),
}


def _resolve_fn(key: str):
    try:
        return TEST_FUNCTIONS[key]
    except KeyError:
        raise ConfigError(f"unknown test function {key!r}; known: {', '.join(TEST_FUNCTIONS)}") from None


def _outdir(args) -> FilePath:
    out = args.output_dir or os.environ.get(OUTDIR_ENV) or "."
    path = FilePath(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _parse_m_list(text: str) -> list:
    return [int(v) for v in text.split(",")]


# -- command implementations -----------------------------------------------

def _cmd_op_classify(args):
    s = _resolve_stencil(args.stencil, args.eps)
    res = stencils.classify(s, tol=args.tol)
    _write_json(_outdir(args) / "classify_summary.json",
                {"in_O_tilde": res.in_o_tilde, "defect": list(res.defect)})
    return EXIT_OK


def _cmd_op_decompose(args):
    s = _resolve_stencil(args.stencil, args.eps)
    res = stencils.decompose(s, tol=args.tol)
    _write_json(_outdir(args) / "decompose_summary.json",
                {"k": list(res.k), "residual": res.residual})
    return EXIT_OK


def _cmd_op_apply(args):
    grid = Grid(args.a, args.b, args.M)
    s = _resolve_stencil(args.stencil, grid.eps)
    fn, _, _ = _resolve_fn(args.fn)
    vals = np.array([fn(t) for t in grid.nodes], dtype=complex).reshape(-1, 1)
    direction = +1 if args.direction == "+" else -1
    out = stencils.apply(s, vals, direction=direction)[:, 0]
    outdir = _outdir(args)
    _write_csv(outdir / "apply.csv", ["k", "t", "re", "im"],
               [(k, t, v.real, v.imag) for k, (t, v) in enumerate(zip(grid.nodes, out))])
    _write_json(outdir / "apply_summary.json",
                {"stencil": s.to_json(), "fn": args.fn, "M": args.M, "direction": args.direction})
    return EXIT_OK


def _cmd_leibniz_check(args):
    r = _parse_complex(args.r)
    s = _parse_complex(args.s)
    grid = Grid(args.a, args.b, args.M)
    rng = np.random.default_rng(args.seed)
    f = Path(grid, rng.standard_normal(grid.M + 1)[:, None])
    g = Path(grid, rng.standard_normal(grid.M + 1)[:, None])
    residual = leibniz.leibniz_residual(r, s, f, g, conj_pair=True)
    co = leibniz.coefficients(r, s, np.conj(r), np.conj(s), grid.eps)
    _write_json(_outdir(args) / "leibniz_summary.json", {
        "residual": residual,
        "scale": leibniz.residual_scale(f, g),
        "coefficients": {"d1": co.d1, "d2": co.d2, "d3": co.d3, "d4": co.d4},
        "seed": args.seed,
    })
    return EXIT_OK


def _cmd_del_residual(args):
    grid = Grid(args.a, args.b, args.M)
    s = _resolve_stencil(args.stencil, grid.eps)
    L = _resolve_lagrangian(args.lagrangian)
    fn, _, _ = _resolve_fn(args.fn)
    x = Path.from_callable(grid, lambda t: np.full(L.d, fn(t)))
    theta = lagrangian.del_residual_quadratic(L, s, x)
    header = ["k", "t"] + [f"{part}{i}" for i in range(L.d) for part in ("re", "im")]
    rows = []
    for k, t in enumerate(grid.nodes):
        row = [k, t]
        for i in range(L.d):
            row += [theta[k, i].real, theta[k, i].imag]
        rows.append(row)
    _write_csv(_outdir(args) / "residual.csv", header, rows)
    _write_json(_outdir(args) / "residual_summary.json",
                {"max_abs_theta": float(np.max(np.abs(theta))), "fn": args.fn, "M": args.M})
    return EXIT_OK


def _cmd_del_solve(args):
    grid = Grid(args.a, args.b, args.M)
    s = _resolve_stencil(args.stencil, grid.eps)
    L = _resolve_lagrangian(args.lagrangian)
    alpha = _parse_vector(args.alpha)
    beta = _parse_vector(args.beta)
    if alpha.size != L.d or beta.size != L.d:
        raise ConfigError(f"boundary data must have dimension {L.d}")
    path = solver.solve_bvp(L, s, grid, alpha, beta)
    theta = lagrangian.del_residual_quadratic(L, s, path)
    outdir = _outdir(args)
    header = ["k", "t"]
    for i in range(L.d):
        header += [f"x{i}_re", f"x{i}_im"]
    for i in range(L.d):
        header += [f"theta{i}_re", f"theta{i}_im"]
    rows = []
    for k, t in enumerate(grid.nodes):
        row = [k, t]
        for i in range(L.d):
            row += [path.values[k, i].real, path.values[k, i].imag]
        for i in range(L.d):
            row += [theta[k, i].real, theta[k, i].imag]
        rows.append(row)
    _write_csv(outdir / "solve.csv", header, rows)
    _write_json(outdir / "solve_summary.json", {
        "max_interior_theta": float(np.max(np.abs(theta[1:-1]))),
        "M": args.M, "stencil": s.to_json(),
    })
    if args.plot:
        from .plots import plot_solution
        plot_solution(grid.nodes, path.values, theta, outdir / "solve.png")
    return EXIT_OK


def _cmd_oscillator_roots(args):
    s = _resolve_stencil(args.stencil, args.eps)
    cp = solver.oscillator_char_poly(s, args.p, args.q, args.eps)
    roots = solver.unit_modulus_roots(cp, tol=args.tol)
    verdict = solver.general_oscillation_test(*s.gamma)
    _write_json(_outdir(args) / "roots_summary.json", {
        "moduli": list(roots["moduli"]),
        "all_unit": roots["all_unit"],
        "oscillation_inequalities": verdict,
        "p": args.p, "q": args.q, "eps": args.eps,
    })
    return EXIT_OK


def _cmd_converge_sweep(args):
    M_list = _parse_m_list(args.M)
    fn, dfn, ddfn = _resolve_fn(args.fn)
    make_stencil = lambda eps: _resolve_stencil(args.stencil, eps)
    delta = args.delta if args.delta is not None else (args.b - args.a) / 10
    if args.lagrangian:
        L = _resolve_lagrangian(args.lagrangian)
        report = convergence.del_convergence_sweep(L, make_stencil, fn, dfn, ddfn,
                                                   args.a, args.b, M_list, delta)
    else:
        report = convergence.operator_consistency_sweep(make_stencil, fn, dfn,
                                                        args.a, args.b, M_list, delta)
    outdir = _outdir(args)
    _write_csv(outdir / "sweep.csv", ["eps", "error"], list(zip(report.eps, report.errors)))
    _write_json(outdir / "sweep_summary.json", {
        "order": report.order, "verdict": report.verdict,
        "delta": report.delta, "fn": args.fn,
    })
    if args.plot:
        from .plots import plot_sweep
        plot_sweep(report.eps, report.errors, report.order, outdir / "sweep.png")
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def _add_common(p):
    p.add_argument("--output-dir", default=None, help=f"output directory (default ${OUTDIR_ENV} or .)")
    p.add_argument("--config", default=None, help="JSON file supplying defaults for any flag")
    p.add_argument("--plot", action="store_true", help="also render figures next to the CSV output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scalevar",
                                     description="discrete variational calculus with scale-derivative operators")
    top = parser.add_subparsers(dest="group", required=True)

    op = top.add_parser("op", help="stencil operations").add_subparsers(dest="command", required=True)
    for name, fn in (("classify", _cmd_op_classify), ("decompose", _cmd_op_decompose)):
        p = op.add_parser(name)
        p.add_argument("--stencil", required=True)
        p.add_argument("--eps", type=float, default=0.1)
        p.add_argument("--tol", type=float, default=1e-9)
        _add_common(p)
        p.set_defaults(func=fn)
    p = op.add_parser("apply")
    p.add_argument("--stencil", required=True)
    p.add_argument("--fn", default="sin")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--M", type=int, default=100)
    p.add_argument("--direction", choices=["+", "-"], default="+")
    _add_common(p)
    p.set_defaults(func=_cmd_op_apply)

    lb = top.add_parser("leibniz").add_subparsers(dest="command", required=True)
    p = lb.add_parser("check")
    p.add_argument("--r", required=True, help="complex value as 're,im'")
    p.add_argument("--s", required=True)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--M", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=_cmd_leibniz_check)

    dl = top.add_parser("del").add_subparsers(dest="command", required=True)
    p = dl.add_parser("residual")
    p.add_argument("--lagrangian", required=True)
    p.add_argument("--stencil", required=True)
    p.add_argument("--fn", default="sin")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--M", type=int, default=100)
    _add_common(p)
    p.set_defaults(func=_cmd_del_residual)
    p = dl.add_parser("solve")
    p.add_argument("--lagrangian", required=True)
    p.add_argument("--stencil", required=True)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--M", type=int, default=100)
    p.add_argument("--alpha", required=True, help="boundary value(s), complex as 're;im', space-separated")
    p.add_argument("--beta", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_del_solve)

    osc = top.add_parser("oscillator").add_subparsers(dest="command", required=True)
    p = osc.add_parser("roots")
    p.add_argument("--stencil", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    _add_common(p)
    p.set_defaults(func=_cmd_oscillator_roots)

    cv = top.add_parser("converge").add_subparsers(dest="command", required=True)
    p = cv.add_parser("sweep")
    p.add_argument("--stencil", required=True)
    p.add_argument("--fn", default="sin")
    p.add_argument("--lagrangian", default=None)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--M", required=True, help="comma-separated subdivision counts")
    p.add_argument("--delta", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_converge_sweep)

    return parser


def _apply_config(parser, args, argv):
    if not args.config:
        return args
    try:
        config = json.loads(FilePath(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    passed = {tok.split("=")[0].lstrip("-").replace("-", "_") for tok in argv if tok.startswith("--")}
    for key, value in config.items():
        dest = key.replace("-", "_")
        if dest in passed or not hasattr(args, dest):
            continue
        setattr(args, dest, value)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args = _apply_config(parser, args, argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except solver.SingularSystemError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
