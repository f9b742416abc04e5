"""``ahg`` command line: model files in, JSON (or CSV) reports out.

A model file is a JSON object::

    {"A": [[1, 1, 1], [0, 1, 2]], "beta": [4, 3], "p": ["1", "1/3", "2"]}

``u`` may replace ``beta`` (then ``beta = A u``); ``lambda`` gives log-odds for
``ips``; ``fd`` holds ``{"a", "b", "c"}`` for the ``fd`` command. Rationals are
written as ``"num/den"`` strings and floats with 12 significant digits.
Exit status is 0 on success, 1 on domain errors and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .asymptotics import approx_log_Z
from .dist import ModelPoint, format_rational, parse_rational, summarize
from .errors import AHGError
from .fiber import enumerate_fiber
from .ips import ips_solve
from .lauricella import FDParams, fd_eval, fd_moment_map, fd_polytope_member
from .linalg import ConfigMatrix, gale_transform, smith_normal_form
from .mle import MLEProblem, invert_moment_map
from .polytope import newton_polytope, project_hull_2d, relint_member, transportation_relint


class UsageError(Exception):
    pass


@dataclass
class ModelFile:
    A: ConfigMatrix
    beta: tuple[int, ...] | None = None
    u: tuple[int, ...] | None = None
    p: list | None = None
    lam: list[float] | None = None
    eta: list | None = None
    extra: dict | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "ModelFile":
        if not isinstance(raw, dict):
            raise UsageError("model file must hold a JSON object")
        extra = {k: v for k, v in raw.items() if k not in {"A", "beta", "u", "p", "lambda", "eta"}}
        if "A" not in raw:
            if "fd" in raw:
                return cls(A=None, extra=extra)
            raise UsageError("model file needs a matrix 'A'")
        A = ConfigMatrix(raw["A"])
        beta = tuple(int(x) for x in raw["beta"]) if raw.get("beta") is not None else None
        u = tuple(int(x) for x in raw["u"]) if raw.get("u") is not None else None
        if beta is not None and u is not None:
            raise UsageError("give exactly one of 'beta' and 'u'")
        if u is not None:
            if len(u) != A.n:
                raise UsageError(f"u has length {len(u)}, expected {A.n}")
            beta = A.apply(u)
        if beta is not None and len(beta) != A.d:
            raise UsageError(f"beta has length {len(beta)}, expected {A.d}")
        p = raw.get("p")
        if p is not None and len(p) != A.n:
            raise UsageError(f"p has length {len(p)}, expected {A.n}")
        lam = raw.get("lambda")
        return cls(A=A, beta=beta, u=u, p=p, lam=lam, eta=raw.get("eta"), extra=extra)

    def need_beta(self) -> tuple[int, ...]:
        if self.beta is None:
            raise UsageError("this command needs 'beta' or 'u' in the model file")
        return self.beta

    def point(self, mode: str | None = None) -> ModelPoint:
        p = self.p if self.p is not None else [1] * self.A.n
        if mode == "float":
            return ModelPoint([float(parse_rational(x)) if isinstance(x, str) else float(x) for x in p], exact=False)
        return ModelPoint(p)


def load_model(path: str) -> ModelFile:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read model file {path}: {exc}") from exc
    try:
        return ModelFile.from_dict(raw)
    except AHGError:
        raise
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"malformed model file {path}: {exc}") from exc


# -- output ------------------------------------------------------------------


def _fmt_float(x: float):
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return float(f"{x:.12g}")


def to_jsonable(obj: Any):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def read_report(text: str):
    """Parse a JSON report, turning ``"num/den"`` strings back into Fractions."""

    def conv(v):
        if isinstance(v, str):
            try:
                return parse_rational(v)
            except (ValueError, ZeroDivisionError):
                return v
        if isinstance(v, list):
            return [conv(x) for x in v]
        if isinstance(v, dict):
            return {k: conv(x) for k, x in v.items()}
        return v

    return conv(json.loads(text))


def _flatten(prefix: str, v, out: list):
    if isinstance(v, list):
        for i, x in enumerate(v):
            _flatten(f"{prefix}[{i}]", x, out)
    elif isinstance(v, dict):
        for k, x in v.items():
            _flatten(f"{prefix}.{k}" if prefix else k, x, out)
    else:
        out.append((prefix, v))


def render(report: dict, fmt: str, table: list | None = None) -> str:
    data = to_jsonable(report)
    if fmt == "json":
        return json.dumps(data, indent=2)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if table is not None:
        for row in to_jsonable(table):
            w.writerow(row)
    else:
        rows: list = []
        _flatten("", data, rows)
        w.writerow(["key", "value"])
        w.writerows(rows)
    return buf.getvalue().rstrip("\n")


# -- commands ----------------------------------------------------------------


def _mode(args, model: ModelFile) -> str:
    if args.mode:
        return args.mode
    return "exact" if model.point().exact else "float"


def cmd_gale(args, model: ModelFile):
    A = model.A
    snf = smith_normal_form(A.entries)
    return {
        "d": A.d,
        "n": A.n,
        "rank": A.rank,
        "is_configuration": A.is_configuration,
        "snf_diagonal": list(snf.alphas),
        "gale": [list(r) for r in gale_transform(A).rows],
    }, None


def cmd_fiber(args, model: ModelFile):
    beta = model.need_beta()
    fib = enumerate_fiber(model.A, beta)
    pts = fib.points.tolist()
    return {"beta": beta, "size": len(pts), "points": pts}, pts


def cmd_z(args, model: ModelFile):
    mode = _mode(args, model)
    s = summarize(model.A, model.need_beta(), model.point(mode), mode, moments=False, threads=args.threads)
    rep = {"mode": mode, "fiber_size": s.fiber_size, "log_Z": s.log_Z}
    if s.Z is not None:
        rep["Z"] = s.Z
    return rep, None


def cmd_moments(args, model: ModelFile):
    mode = _mode(args, model)
    s = summarize(model.A, model.need_beta(), model.point(mode), mode, threads=args.threads)
    rep = {"mode": mode, "fiber_size": s.fiber_size, "log_Z": s.log_Z, "eta": list(s.eta) if s.exact else s.eta}
    rep["cov"] = [list(r) for r in s.cov] if s.exact else s.cov
    if s.Z is not None:
        rep["Z"] = s.Z
    return rep, None


def cmd_polytope(args, model: ModelFile):
    beta = model.need_beta()
    poly = newton_polytope(model.A, beta)
    rep: dict = {"dim": poly.dim, "support_size": len(poly.support), "affine_basis": [list(r) for r in poly.affine_basis]}
    eta = model.eta if model.eta is not None else (list(model.u) if model.u is not None else None)
    if eta is not None:
        eta = [parse_rational(x) for x in eta]
        rep["eta"] = eta
        rep["newton_relint"] = relint_member(poly, eta)
        try:
            rep["transportation_relint"] = transportation_relint(model.A, beta, eta)
        except AHGError as exc:
            rep["transportation_relint"] = None
            rep["transportation_note"] = str(exc)
    if args.coords:
        i, *rest = args.coords
        rep["hull"] = [list(v) for v in project_hull_2d(poly, i, rest[0] if rest else None)]
    return rep, None


def cmd_ips(args, model: ModelFile):
    beta = model.need_beta()
    Abar = gale_transform(model.A)
    if model.lam is not None:
        lam = [float(x) for x in model.lam]
    else:
        lam = model.point("float").log_odds(Abar)
    res = ips_solve(model.A, Abar, [float(b) for b in beta], lam, tol=args.tol, max_iter=args.max_iter)
    return {
        "m": res.m,
        "residual": res.residual,
        "odds_drift": res.odds_drift,
        "sweeps": res.sweeps,
        "converged": res.converged,
    }, None


def cmd_mle(args, model: ModelFile):
    if model.u is None:
        raise UsageError("mle needs observed data 'u' in the model file")
    prob = MLEProblem.from_data(model.A, model.u, tol=args.tol, max_iter=args.max_iter, mode=args.mode)
    p0 = [float(parse_rational(x)) for x in model.p] if model.p is not None else None
    fit = invert_moment_map(prob, p0=p0)
    rep = {
        "mode": args.mode,
        "p_hat": fit.p_hat,
        "lambda_hat": fit.lambda_hat,
        "eta_achieved": fit.eta_achieved,
        "loglik": fit.loglik,
        "iterations": fit.iterations,
        "residual": fit.residual,
        "converged": fit.converged,
    }
    if args.trace:
        rep["trace"] = [
            {k: v for k, v in t.items() if k in ("iteration", "eta", "step", "step_size", "residual", "objective")}
            for t in fit.trace
        ]
    return rep, None


def cmd_approx_z(args, model: ModelFile):
    k = args.k if args.k is not None else int((model.extra or {}).get("k", 1))
    rep = approx_log_Z(
        model.A, None, model.need_beta(), model.point(), k,
        exact="auto" if not args.no_exact else False, long=args.long, threads=args.threads,
    )
    return {
        "k": rep.k,
        "m": rep.m,
        "lambda": rep.lam,
        "approx_logZ": rep.approx_logZ,
        "exact_logZ": rep.exact_logZ,
        "error": rep.error,
        "det_term": rep.det_term,
        "window": rep.window,
        "fiber_size": rep.fiber_size,
    }, None


def cmd_fd(args, model: ModelFile):
    raw = (model.extra or {}).get("fd")
    if raw is None:
        raise UsageError("fd needs an 'fd' object with a, b, c")
    params = FDParams(int(raw["a"]), tuple(raw["b"]), int(raw["c"]))
    rep: dict = {"a": params.a, "b": list(params.b), "c": params.c}
    z = raw.get("z")
    if z is not None:
        rep["z"] = [parse_rational(x) for x in z]
        rep["F_D"] = fd_eval(params, z)
        if all(parse_rational(x) > 0 for x in z):
            rep["eta"] = list(fd_moment_map(params, z))
            rep["eta_member"] = fd_polytope_member(params, rep["eta"])
    if raw.get("eta") is not None:
        rep["member"] = fd_polytope_member(params, raw["eta"])
    return rep, None


COMMANDS = {
    "gale": cmd_gale,
    "fiber": cmd_fiber,
    "z": cmd_z,
    "moments": cmd_moments,
    "polytope": cmd_polytope,
    "ips": cmd_ips,
    "mle": cmd_mle,
    "approx-z": cmd_approx_z,
    "fd": cmd_fd,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="model JSON file")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--threads", type=int, default=1, help="processes for streamed fiber passes")

    ap = argparse.ArgumentParser(prog="ahg", description="A-hypergeometric distributions")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("gale", parents=[common], help="Smith form and Gale transform")
    sub.add_parser("fiber", parents=[common], help="list the fiber of beta")
    for name in ("z", "moments"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--mode", choices=("exact", "float"))
    sp = sub.add_parser("polytope", parents=[common], help="Newton polytope and membership")
    sp.add_argument("--coords", type=int, nargs="+", metavar="I", help="project the hull to 1 or 2 coordinates (0-based)")
    sp = sub.add_parser("ips", parents=[common])
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-iter", type=int, default=10_000)
    sp = sub.add_parser("mle", parents=[common], help="conditional MLE for data u")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=50)
    sp.add_argument("--mode", choices=("reduced", "pinned"), default="reduced")
    sp.add_argument("--trace", action="store_true")
    sp = sub.add_parser("approx-z", parents=[common], help="asymptotic log Z(k beta)")
    sp.add_argument("--k", type=int)
    sp.add_argument("--long", action="store_true", help="allow the exact pass to run past the fiber cap")
    sp.add_argument("--no-exact", action="store_true")
    sub.add_parser("fd", parents=[common], help="terminating Lauricella F_D")
    return ap


def _error(name: str, detail: str, out) -> None:
    print(json.dumps({"error": name, "detail": detail}), file=out)


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.threads < 1 or (args.command in ("ips", "mle") and args.max_iter < 1):
        _error("UsageError", "counts must be positive", out)
        return 2
    try:
        model = load_model(args.model)
        if model.A is None and args.command != "fd":
            raise UsageError("model file needs a matrix 'A'")
        report, table = COMMANDS[args.command](args, model)
    except UsageError as exc:
        _error("UsageError", str(exc), out)
        return 2
    except AHGError as exc:
        _error(type(exc).__name__, str(exc), out)
        return 1
    print(render(report, args.format, table), file=out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
