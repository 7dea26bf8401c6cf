"""Compare the compiled and pure-Python jet backends.

Part one times single jet expressions in-process.  Part two runs one
enclosure workload and one verifier strip in a fresh interpreter per backend,
because the backend is chosen once at import.

    python3 benchmarks/bench_kernels.py [--repeat N] [--skip-strip]
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

from critdet import Interval
from critdet._pyjet import Jet as PyJet

try:
    from critdet._ckernel import IJet
except ImportError:  # extension not built
    IJet = None

EXPRS = {
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
    "pow": lambda a, b: a ** b,
    "log-exp": lambda a, b: (a * b).exp().log(),
    "mixed": lambda a, b: (a ** b).log() * a / b,
}

WORKLOAD = r"""
import json, time
from critdet import Interval, kernel
from critdet import moduli as M, verifier as V
t = time.perf_counter()
for k in range(40):
    P = Interval(3.0 + 0.01 * k, 3.005 + 0.01 * k)
    for name in ("delta", "g", "h", "dh"):
        M.enclose(name, P, Interval(1.3, 1.31))
enc = time.perf_counter() - t
strip = None
if {strip!r}:
    t = time.perf_counter()
    c = V.verify_strip(V.StripSpec(Interval(6.0, 6.25), M.Const(1.0), V.FIFTH), V.Condition.HNEG)
    strip = [time.perf_counter() - t, c.boxes_checked, c.status.value]
print(json.dumps({{"backend": kernel.BACKEND, "enclosures": enc, "strip": strip}}))
"""


def time_expr(J, fn, order: int, repeat: int) -> float:
    a = J.variable(Interval(1.2, 1.21), 0, order)
    b = J.variable(Interval(0.7, 0.71), 1, order)
    n = max(1, repeat)
    return min(timeit.repeat(lambda: fn(a, b), number=n, repeat=3)) / n


def run_workload(pure: bool, strip: bool) -> dict:
    env = dict(os.environ)
    if pure:
        env["CRITDET_PURE_PYTHON"] = "1"
    else:
        env.pop("CRITDET_PURE_PYTHON", None)
    out = subprocess.run([sys.executable, "-c", WORKLOAD.format(strip=strip)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--skip-strip", action="store_true")
    args = ap.parse_args()

    if IJet is None:
        print("compiled kernel not built; only the Python backend is available")
    print(f"{'expression':<10} {'order':>5} {'python us':>11} {'cython us':>11} {'speedup':>8}")
    for order in (2, 4):
        for name, fn in EXPRS.items():
            py = time_expr(PyJet, fn, order, args.repeat // 10 or 1) * 1e6
            if IJet is None:
                print(f"{name:<10} {order:>5} {py:>11.1f} {'-':>11} {'-':>8}")
                continue
            cy = time_expr(IJet, fn, order, args.repeat) * 1e6
            print(f"{name:<10} {order:>5} {py:>11.1f} {cy:>11.2f} {py / cy:>7.0f}x")

    print()
    strip = not args.skip_strip
    rows = [run_workload(True, strip)]
    if IJet is not None:
        rows.append(run_workload(False, strip))
    for r in rows:
        line = f"{r['backend']:<7} 160 enclosures {r['enclosures']:.2f}s"
        if r["strip"]:
            secs, boxes, status = r["strip"]
            line += f"; h-neg strip on [6, 6.25]: {secs:.2f}s, {boxes} boxes, {status}"
        print(line)


if __name__ == "__main__":
    main()
