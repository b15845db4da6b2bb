"""Compare the compiled and pure-Python polynomial kernels.

Run ``python3 benchmarks/bench_kernels.py``.  Micro benchmarks call each
kernel directly; the end-to-end rows time a fresh interpreter building Jack
bases and the verify-all suite with each backend selected via the
``INSTANTON_RMATRIX_PURE`` switch.
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import time
import timeit

from instanton_rmatrix import _kernels_py as pure

try:
    from instanton_rmatrix import _kernels as compiled
except ImportError:
    compiled = None

BITS = pure.FIELD_BITS


def random_poly(rng: random.Random, terms: int, nvars: int = 3, deg: int = 8) -> dict:
    out = {}
    for _ in range(terms):
        key = sum(rng.randint(0, deg) << (BITS * i) for i in range(nvars))
        out[key] = rng.randint(-(10**6), 10**6) or 1
    return out


def micro(repeat: int) -> list[tuple[str, float, float | None]]:
    rng = random.Random(0)
    a, b = random_poly(rng, 60), random_poly(rng, 60)
    prod = pure.p_mul(a, b)
    cases = {
        "p_add": lambda m: m.p_add(a, b),
        "p_mul": lambda m: m.p_mul(a, b),
        "p_divexact": lambda m: m.p_divexact(prod, b),
        "p_eval_var": lambda m: m.p_eval_var(prod, BITS, 7),
        "p_sym_split": lambda m: m.p_sym_split(prod, 10**9 + 7),
    }
    rows = []
    for name, fn in cases.items():
        tp = min(timeit.repeat(lambda: fn(pure), number=repeat, repeat=3)) / repeat
        tc = None
        if compiled is not None:
            tc = min(timeit.repeat(lambda: fn(compiled), number=repeat, repeat=3)) / repeat
        rows.append((name, tp, tc))
    return rows


SCRIPTS = {
    "jack bases, degree <= 6": "from instanton_rmatrix.jack import jack_basis\nfor n in range(7): jack_basis(n)",
    "verify-all --max-degree 4": "from instanton_rmatrix.cli import run\nimport io\nrun(['verify-all','--max-degree','4'], io.StringIO(), io.StringIO())",
}


def end_to_end(pure_backend: bool, script: str) -> float:
    env = dict(os.environ)
    env["INSTANTON_RMATRIX_PURE"] = "1" if pure_backend else "0"
    env.pop("INSTANTON_RMATRIX_CACHE", None)
    start = time.perf_counter()
    subprocess.run([sys.executable, "-c", script], env=env, check=True)
    return time.perf_counter() - start


def fmt(t: float | None) -> str:
    if t is None:
        return "n/a"
    return f"{t * 1e6:10.1f} us" if t < 0.1 else f"{t:10.2f} s "


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=200)
    parser.add_argument("--skip-end-to-end", action="store_true")
    a = parser.parse_args()
    print(f"{'workload':<28}{'python':>14}{'cython':>14}{'speedup':>10}")
    rows = micro(a.repeat)
    if not a.skip_end_to_end:
        for name, script in SCRIPTS.items():
            tc = end_to_end(False, script) if compiled is not None else None
            rows.append((name, end_to_end(True, script), tc))
    for name, tp, tc in rows:
        speed = f"{tp / tc:9.2f}x" if tc else "      n/a"
        print(f"{name:<28}{fmt(tp):>14}{fmt(tc):>14}{speed:>10}")


if __name__ == "__main__":
    main()
