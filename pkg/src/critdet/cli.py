"""Command-line front end: ``critdet eval|verify|isolate-p0|scan|oracle|probe-mas``.

Exit codes: 0 success or PROVEN, 1 inconclusive, 2 usage or domain error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from . import lattice as L
from . import moduli as M
from . import verifier as V
from .errors import CritdetError, DomainError
from .interval import Interval

EXIT_OK, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    e1: float = 1e-12
    max_iter: int = 200
    depth_cap: int = 40
    margin: float = 1e-4
    workers: int = 1
    output_format: str = "csv"

    def __post_init__(self) -> None:
        for name in ("e1", "max_iter", "depth_cap", "margin", "workers"):
            v = getattr(self, name)
            if not v > 0 or (isinstance(v, float) and math.isnan(v)):
                raise DomainError(f"{name} must be positive, got {v!r}")
        if self.output_format not in ("csv", "json"):
            raise DomainError(f"output format must be csv or json, got {self.output_format!r}")

    @property
    def verifier(self) -> V.VerifierConfig:
        return V.VerifierConfig(e1=self.e1, max_iter=self.max_iter, depth_cap=self.depth_cap,
                                margin=self.margin, workers=self.workers)

    @property
    def moduli(self) -> M.ModuliConfig:
        return M.ModuliConfig(e1=self.e1, max_iter=self.max_iter)


_ENV = {"e1": ("CRITDET_E1", float), "max_iter": ("CRITDET_MAX_ITER", int),
        "depth_cap": ("CRITDET_DEPTH_CAP", int), "margin": ("CRITDET_MARGIN", float),
        "workers": ("CRITDET_WORKERS", int)}


def resolve_config(args: argparse.Namespace, env=None) -> RunConfig:
    """Explicit flags win over CRITDET_* variables, which win over defaults."""
    env = os.environ if env is None else env
    values = {"workers": V.default_workers()}
    for name, (var, conv) in _ENV.items():
        if var in env and env[var] != "":
            try:
                values[name] = conv(env[var])
            except ValueError:
                raise DomainError(f"{var}={env[var]!r} is not a valid {conv.__name__}") from None
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    fmt = getattr(args, "format", None)
    if fmt is not None:
        values["output_format"] = fmt
    return RunConfig(**values)


def _emit_rows(rows: list[dict], fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(rows) + "\n")
        return
    w = csv.DictWriter(out, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if v is None else (repr(v) if isinstance(v, float) else v))
                    for k, v in r.items()})


# --- commands ----------------------------------------------------------------------------------


def cmd_eval(args, cfg: RunConfig, out) -> int:
    p, s = args.p, args.sigma
    point = M.evaluate(p, s, cfg.moduli)
    box = M.evaluate(Interval(p), Interval(s), cfg.moduli)
    rows = []
    for name in ("tau", "delta", "delta0", "delta1", "l", "l0", "l1", "g", "h", "dh",
                 "d_sigma", "d_sigma2", "d_p", "d_sigma_p", "d_sigma2_p"):
        pv, bv = getattr(point, name), getattr(box, name)
        rows.append({"quantity": name, "point": pv,
                     "lo": None if bv is None else bv.lo, "hi": None if bv is None else bv.hi})
    _emit_rows(rows, cfg.output_format, out)
    return EXIT_OK


_CURVES = {"1": lambda: M.Const(1.0), "fifth": lambda: V.FIFTH, "root": lambda: V.ROOT,
           "sigma_p": lambda: M.SigmaP()}

# default strip of each single condition: (lower, upper, margin at lower, margin at upper)
_DEFAULT_STRIPS = {
    V.Condition.HNEG: ("1", "fifth", False, False),
    V.Condition.GNEG: ("fifth", "root", False, False),
    V.Condition.L1POS: ("root", "sigma_p", False, False),
    V.Condition.L0POS: ("1", "sigma_p", False, True),
    V.Condition.LPOS: ("1", "sigma_p", True, True),
}


def _curve(name: str) -> M.Curve:
    if name in _CURVES:
        return _CURVES[name]()
    try:
        return M.Const(float(name))
    except ValueError:
        raise DomainError(f"unknown curve {name!r}; use 1, fifth, root, sigma_p or a number") from None


def cmd_verify(args, cfg: RunConfig, out) -> int:
    P = Interval(args.p_min, args.p_max)
    vc = cfg.verifier
    name = args.condition.strip().lower()
    if name in ("compose-p-ge-6", "compose"):
        cert = V.compose_p_ge_6(P, vc)
    else:
        cond = V.Condition.parse(name)
        if cond is V.Condition.ANALYTIC:
            cert = V.verify_theorem_window(P, vc)
        else:
            lo, hi, ml, mu = _DEFAULT_STRIPS[cond]
            lo = args.lower or lo
            hi = args.upper or hi
            strip = V.StripSpec(P, _curve(lo), _curve(hi), "sigma",
                                cfg.margin if ml else 0.0, cfg.margin if mu else 0.0)
            cert = V.verify_strip(strip, cond, vc)
    path = args.out or f"certificate-{cert.condition}-{P.lo!r}-{P.hi!r}.json"
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(cert.to_json(indent=1) + "\n")
    out.write(cert.summary() + "\n")
    return EXIT_OK if cert.proven else EXIT_INCONCLUSIVE


def cmd_isolate_p0(args, cfg: RunConfig, out) -> int:
    if not args.tol > 0.0:
        raise DomainError(f"--tol must be positive, got {args.tol!r}")
    enc = V.isolate_p0(args.tol, cfg.verifier)
    E = enc.enclosure
    out.write(f"[{E.lo!r}, {E.hi!r}]\n")
    record = enc.to_dict()
    if args.tol <= 1e-3:
        record["within_2.57_2.58"] = 2.57 <= E.lo and E.hi <= 2.58
    out.write(json.dumps(record) + "\n")
    if enc.status is not V.Status.PROVEN:
        return EXIT_INCONCLUSIVE
    if args.tol <= 1e-3 and not record["within_2.57_2.58"]:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def scan_rows(p_min: float, p_max: float, steps: int, cfg: M.ModuliConfig) -> list[dict]:
    if steps < 2:
        raise DomainError("--steps must be at least 2")
    if not (p_min > 1.0 and p_max > p_min):
        raise DomainError("need 1 < p-min < p-max")
    rows = []
    for k in range(steps):
        p = p_min + (p_max - p_min) * k / (steps - 1)
        d0, d1 = M.delta0(p), M.delta1(p, cfg)
        crit = min(d0, d1)
        rows.append({
            "p": p, "sigma_p": M.sigma_p(p), "tau_p": M.tau_p_point(p, cfg), "delta0": d0,
            "delta1": d1, "critdet": crit, "kappa_p": L.kappa_p(p, crit),
            "gamma_bound": L.minkowski_gamma_bound(p),
        })
    return rows


def cmd_scan(args, cfg: RunConfig, out) -> int:
    _emit_rows(scan_rows(args.p_min, args.p_max, args.steps, cfg.moduli), cfg.output_format, out)
    return EXIT_OK


def cmd_oracle(args, cfg: RunConfig, out) -> int:
    p = args.p
    if not p > 1.0:
        raise DomainError(f"p must exceed 1, got {p!r}")
    bf = L.brute_force_critdet(p, args.resolution)
    mod = min(M.delta0(p), M.delta1(p, cfg.moduli))
    diff = abs(bf - mod)
    row = {"p": p, "resolution": args.resolution, "brute_force": bf, "moduli_min": mod,
           "difference": diff}
    _emit_rows([row], cfg.output_format, out)
    return EXIT_OK if diff <= args.threshold else EXIT_INCONCLUSIVE


def cmd_probe_mas(args, cfg: RunConfig, out) -> int:
    rep = V.probe_mas(Interval(args.p_min, args.p_max), args.grid, cfg.verifier)
    d = rep.to_dict()
    if not args.samples:
        d.pop("samples")
    out.write(json.dumps(d) + "\n")
    return EXIT_OK


# --- parser ---------------------------------------------------------------------------------------


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--e1", type=float, help="fixed-point stopping tolerance (default 1e-12)")
    sp.add_argument("--max-iter", type=int, dest="max_iter", help="iteration cap (default 200)")
    sp.add_argument("--depth-cap", type=int, dest="depth_cap", help="bisection depth cap (default 40)")
    sp.add_argument("--margin", type=float, help="edge margin for degenerate strip edges (default 1e-4)")
    sp.add_argument("--workers", type=int, help="worker processes (default: CPU count)")
    sp.add_argument("--format", choices=("csv", "json"), help="tabular output format (default csv)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="critdet", description="Validated numerics for the critical "
                                 "determinant of |x|^p + |y|^p < 1.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("eval", help="point values and enclosures of Delta and its family")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--sigma", type=float, required=True)
    _common(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("verify", help="prove a sign condition over a strip and write a certificate")
    sp.add_argument("--p-min", type=float, required=True, dest="p_min")
    sp.add_argument("--p-max", type=float, required=True, dest="p_max")
    sp.add_argument("--condition", required=True,
                    help="h-neg, g-neg, l-pos, l1-pos, l0-pos, analytic or compose-p-ge-6")
    sp.add_argument("--lower", help="lower strip curve: 1, fifth, root, sigma_p or a number")
    sp.add_argument("--upper", help="upper strip curve")
    sp.add_argument("--out", help="certificate path")
    _common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("isolate-p0", help="rigorous enclosure of the branch crossover p0")
    sp.add_argument("--tol", type=float, required=True)
    _common(sp)
    sp.set_defaults(func=cmd_isolate_p0)

    sp = sub.add_parser("scan", help="CSV of the critical determinant and constants over p")
    sp.add_argument("--p-min", type=float, required=True, dest="p_min")
    sp.add_argument("--p-max", type=float, required=True, dest="p_max")
    sp.add_argument("--steps", type=int, required=True)
    _common(sp)
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("oracle", help="brute-force lattice oracle against the moduli branches")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--resolution", type=int, default=1000)
    sp.add_argument("--threshold", type=float, default=5e-3)
    _common(sp)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("probe-mas", help="floating-point estimates of p1 and p2 (not verified)")
    sp.add_argument("--p-min", type=float, default=2.01, dest="p_min")
    sp.add_argument("--p-max", type=float, default=10.0, dest="p_max")
    sp.add_argument("--grid", type=int, default=200)
    sp.add_argument("--samples", action="store_true", help="include the sampled values")
    _common(sp)
    sp.set_defaults(func=cmd_probe_mas)
    return ap


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg, out)
    except (DomainError, ValueError) as exc:
        sys.stderr.write(f"critdet: {exc}\n")
        return EXIT_USAGE
    except CritdetError as exc:
        sys.stderr.write(f"critdet: {type(exc).__name__}: {exc}\n")
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
