"""Command-line interface: ``instanton-rmatrix <subcommand> [options]``.

Exit codes: 0 success, 1 a check failed (the residual is printed), 2 usage
error (bad flags or sizes beyond the configured budget).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import __version__
from .fock import lehn_operator, rank_operator
from .instanton import (
    contour_identities,
    h_matrices,
    product_series_check,
    r1,
    r2,
    recover_chern,
    truncated_product_r,
)
from .jack import CACHE_ENV, c1_eigenvalue, jack_basis, set_cache_dir, t_eigenvalue, t_eigenvalue_text
from .linalg import Matrix
from .partition import Partition, partitions_of
from .rmat import (
    DEFAULT_BUDGET,
    DEFAULT_MAX_DIM,
    BudgetExceeded,
    TensorOp,
    compare_fusion_with_wedge,
    fundamental_family,
    fundamental_r,
    fusion_factors_text,
    fusion_r,
    in_difference,
    r_from_stabs,
    residual_text,
    restriction_matrix,
    wedge_family,
    wedge_r,
    ybe_check,
)
from .verify import CHECKS, Bounds, run_check

FORMATS = ("json", "latex", "text")
MAX_DEGREE = 10
MAX_N = 6

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


class UsageError(ValueError):
    """Arguments are well formed but outside the supported sizes."""


@dataclass
class RunConfig:
    command: str
    fmt: str = "json"
    cache_dir: str | None = None
    jobs: int = 1
    bounds: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.fmt not in FORMATS:
            raise UsageError(f"format must be one of {FORMATS}")
        if self.jobs < 1:
            raise UsageError("--jobs must be positive")
        for name, value in self.bounds.items():
            if isinstance(value, int) and not isinstance(value, bool) and value < 0:
                raise UsageError(f"--{name} must be non-negative")


@dataclass
class Report:
    payload: dict
    text: str
    latex: str = ""
    ok: bool = True
    residual: str = "0"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.payload, indent=2, sort_keys=True)
        if fmt == "latex":
            return self.latex or self.text
        return self.text


def _bounded(value: int, name: str, limit: int, low: int = 0) -> int:
    if value < low or value > limit:
        raise UsageError(f"--{name} must lie in {low}..{limit}, got {value}")
    return value


def parse_partition(text: str) -> Partition:
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        lam = Partition(int(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"bad partition {text!r}: {exc}") from None
    _bounded(sum(lam), "partition size", MAX_DEGREE)
    return lam


def _matrix_text(m: Matrix) -> str:
    return "\n".join("[" + ", ".join(v.to_text() for v in row) + "]" for row in m.to_rows())


def _matrix_report(name: str, m: Matrix, labels=None) -> Report:
    payload = {"name": name, "matrix": m.to_json()}
    if labels is not None:
        payload["basis"] = [list(map(list, x)) if isinstance(x[0], tuple) else list(x) for x in labels]
    return Report(payload, _matrix_text(m), m.to_latex())


def _op_report(name: str, op: TensorOp, extra: dict | None = None) -> Report:
    payload = {"name": name, "operator": op.to_json()}
    payload.update(extra or {})
    latex = op.to_latex() if op.dim <= 16 else ""
    return Report(payload, _matrix_text(op.matrix), latex)


# ---------------------------------------------------------------------------
# handlers


def cmd_jack(a, cfg: RunConfig) -> Report:
    d = _bounded(a.degree, "degree", MAX_DEGREE)
    basis = jack_basis(d, cache=cfg.cache_dir)
    vecs = basis.vectors
    payload = {
        "degree": d,
        "normalization": basis.normalization,
        "vectors": [
            {"partition": list(lam), "p_coefficients": [[list(mu), c.to_text()] for mu, c in sorted(vecs[lam].coeffs.items())]}
            for lam in basis.partitions
        ],
    }
    lines = []
    for lam in basis.partitions:
        body = " + ".join(f"({c.to_text()}) p{list(mu)}" for mu, c in sorted(vecs[lam].coeffs.items()))
        lines.append(f"j{list(lam)} = {body}")
    return Report(payload, "\n".join(lines), basis.matrix().to_latex())


def _expr_report(name: str, e, weight: int, degree: int | None) -> Report:
    payload = {"name": name, "max_weight": weight, "terms": e.to_json(weight)}
    text = "\n".join(f"({t['coeff']}) a-{t['creation']} a+{t['annihilation']}" for t in payload["terms"])
    if degree is not None:
        m = e.matrix(degree)
        payload["degree"] = degree
        payload["matrix"] = m.to_json()
        text += "\n" + _matrix_text(m)
    return Report(payload, text, e.to_latex())


def cmd_lehn(a, cfg: RunConfig) -> Report:
    w = _bounded(a.max_weight, "max-weight", MAX_DEGREE)
    deg = None if a.degree is None else _bounded(a.degree, "degree", MAX_DEGREE)
    return _expr_report("lehn_c1", lehn_operator(), w, deg)


def cmd_rank(a, cfg: RunConfig) -> Report:
    w = _bounded(a.max_weight, "max-weight", MAX_DEGREE)
    deg = None if a.degree is None else _bounded(a.degree, "degree", MAX_DEGREE)
    return _expr_report("rank", rank_operator(), w, deg)


def cmd_chern(a, cfg: RunConfig) -> Report:
    d = _bounded(a.degree, "degree", MAX_DEGREE)
    values = [(lam, c1_eigenvalue(lam)) for lam in partitions_of(d)]
    payload = {"degree": d, "c1": [[list(lam), v.to_text()] for lam, v in values]}
    text = "\n".join(f"{list(lam)}: {v.to_text()}" for lam, v in values)
    empty = r"\emptyset"
    latex = r" \\ ".join(f"c_1({','.join(map(str, lam)) or empty}) = {v.to_latex()}" for lam, v in values)
    return Report(payload, text, latex)


def cmd_t_eigen(a, cfg: RunConfig) -> Report:
    lam = parse_partition(a.partition)
    v = t_eigenvalue(lam)
    text = t_eigenvalue_text(lam)
    return Report({"partition": list(lam), "factored": text, "value": v.to_text()}, text, v.to_latex())


def cmd_h_coeff(a, cfg: RunConfig) -> Report:
    n = _bounded(a.order, "order", 6, low=1)
    d = _bounded(a.degree, "degree", MAX_DEGREE)
    m = h_matrices(n, d, cache=cfg.cache_dir)
    return _matrix_report(f"H{n}", m, m.row_labels)


TARGETS = ("rank", "c1", "h1", "h2")


def cmd_recover(a, cfg: RunConfig) -> Report:
    d = _bounded(a.max_degree, "max-degree", 8, low=1)
    rec = recover_chern(d, cache=cfg.cache_dir)
    expr = getattr(rec, a.target.replace("-", ""))
    expected = {"rank": "rank_matches", "c1": "c1_matches_lehn"}.get(a.target)
    ok = rec.report[expected] if expected else True
    payload = {"target": a.target, "max_degree": d, "terms": expr.to_json(d), "report": rec.report}
    text = "\n".join(f"({t['coeff']}) a-{t['creation']} a+{t['annihilation']}" for t in payload["terms"])
    residual = "0" if ok else f"recovered {a.target} differs from the closed form"
    return Report(payload, text, expr.to_latex(d), ok, residual)


def cmd_rmatrix_fundamental(a, cfg: RunConfig) -> Report:
    N = _bounded(a.N, "N", MAX_N, low=2)
    return _op_report(f"R(u) N={N}", fundamental_r("u", N))


def cmd_rmatrix_wedge(a, cfg: RunConfig) -> Report:
    N = _bounded(a.N, "N", MAX_N, low=1)
    n1 = _bounded(a.n1, "n1", N)
    n2 = _bounded(a.n2, "n2", N)
    op = wedge_r("u", N, n1, n2, a.kmax)
    return _op_report(f"wedge R(u) N={N} n1={n1} n2={n2}", op)


def cmd_fusion(a, cfg: RunConfig) -> Report:
    N = _bounded(a.N, "N", MAX_N, low=2)
    fr = fusion_r("u", N, a.n1, a.n2, budget=a.budget, max_dim=a.max_dim, require_invariance=False)
    target = wedge_r("u", N, a.n1, a.n2)
    diff = fr.restriction - target
    ok = fr.preserves_wedge and diff.is_zero()
    extra = {
        "factors": fusion_factors_text(a.n1, a.n2),
        "preserves_wedge": fr.preserves_wedge,
        "wedge_invariant_on_left": fr.wedge_invariant_on_left,
        "equals_wedge_r": diff.is_zero(),
        "comparison": compare_fusion_with_wedge(N, a.n1, a.n2).to_json(),
    }
    rep = _op_report(f"fusion N={N} n1={a.n1} n2={a.n2}", fr.restriction, extra)
    rep.ok = ok
    rep.residual = "0" if ok else f"restriction - wedge_r: {residual_text(diff)}"
    return rep


def cmd_stab(a, cfg: RunConfig) -> Report:
    n = _bounded(a.n, "n", 9, low=1)
    m = restriction_matrix(n, a.chamber)
    if n == 1:
        m = in_difference(m)
    r = r_from_stabs(n).matrix
    payload = {"n": n, "chamber": a.chamber, "restriction": m.to_json(), "r_matrix": r.to_json()}
    text = "restriction:\n" + _matrix_text(m) + "\nR:\n" + _matrix_text(r)
    return Report(payload, text, m.to_latex() + "\n" + r.to_latex())


def cmd_ybe(a, cfg: RunConfig) -> Report:
    N = _bounded(a.N, "N", 4, low=2)
    if a.rep == "fundamental":
        res = ybe_check(fundamental_family(N), (N, N, N))
        dims = (N, N, N)
    else:
        degrees = tuple(int(x) for x in a.degrees.split(","))
        if len(degrees) != 3 or any(not 0 <= x <= N for x in degrees):
            raise UsageError("--degrees needs three wedge degrees in 0..N")
        from math import comb

        dims = tuple(comb(N, x) for x in degrees)
        if dims[0] * dims[1] * dims[2] > DEFAULT_MAX_DIM:
            raise UsageError("triple tensor product exceeds the dimension budget")
        res = ybe_check(wedge_family(N, degrees), dims)
    text = f"residual: {res.residual_text()}"
    payload = {"rep": a.rep, "N": N, "dims": list(dims), "ok": res.ok, "residual": res.residual_text()}
    return Report(payload, text, text, res.ok, res.residual_text())


def cmd_double(a, cfg: RunConfig) -> Report:
    d = _bounded(a.degree, "degree", 6)
    op = r1() if a.which == 1 else r2()
    m = op.matrix(d)
    vac = op.vacuum_block(d)
    h = h_matrices(a.which, d, cache=cfg.cache_dir)
    ok = vac == h
    payload = {
        "name": f"R{a.which}",
        "degree": d,
        "terms": op.to_json(d),
        "matrix": m.to_json(),
        "vacuum_block_equals_H": ok,
    }
    residual = "0" if ok else f"vacuum block - H{a.which}: {residual_text(TensorOp.from_matrix((vac.nrows,), vac - h))}"
    return Report(payload, _matrix_text(m), op.to_latex(d), ok, residual)


def cmd_contour(a, cfg: RunConfig) -> Report:
    d = _bounded(a.max_degree, "max-degree", 6)
    cc = contour_identities(d)
    payload = {"max_degree": d, "r1_ok": cc.r1_ok, "r2_ok": cc.r2_ok, "r1_residual": cc.r1_residual, "r2_residual": cc.r2_residual}
    text = f"R1: {cc.r1_residual}\nR2: {cc.r2_residual}"
    ok = cc.r1_ok and cc.r2_ok
    residual = "0" if ok else (f"R1 {cc.r1_residual}" if not cc.r1_ok else f"R2 {cc.r2_residual}")
    return Report(payload, text, text, ok, residual)


def cmd_product_check(a, cfg: RunConfig) -> Report:
    e = _bounded(a.energy, "energy", 4, low=1)
    m = _bounded(a.walls, "walls", 6, low=1)
    res = truncated_product_r("u", e, m)
    series = product_series_check(res, normalize=a.normalize)
    payload = {
        "energy": e,
        "walls": m,
        "normalize": a.normalize,
        "report": res.report,
        "series": {str(k): v for k, v in series.items()},
    }
    lines = [f"{k}: {v}" for k, v in sorted(res.report.items())]
    lines += [f"u^-{k}: {v}" for k, v in sorted(series.items())]
    # an unstable product is a documented finding, not a failure
    return Report(payload, "\n".join(lines), "\n".join(lines))


def _run_named(args) -> dict:
    name, bounds, timings, cache = args
    set_cache_dir(cache)
    try:
        return run_check(name, bounds).to_json(timings)
    finally:
        set_cache_dir(None)


def cmd_verify_all(a, cfg: RunConfig) -> Report:
    d = _bounded(a.max_degree, "max-degree", 6, low=1)
    bounds = Bounds().capped(d)
    names = [n for n, _ in CHECKS if not a.only or n in a.only]
    unknown = set(a.only or ()) - {n for n, _ in CHECKS}
    if unknown:
        raise UsageError(f"unknown checks: {sorted(unknown)}")
    jobs = [(n, bounds, a.timings, cfg.cache_dir) for n in names]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_named, jobs))
    else:
        results = [_run_named(j) for j in jobs]
    ok = all(r["status"] == "pass" for r in results)
    payload = {
        "version": __version__,
        "config": {"max_degree": d, "bounds": bounds.__dict__, "checks": names},
        "results": results,
    }
    lines = [f"{r['status'].upper()} {r['check']}: residual {r['residual']}" for r in results]
    failing = [r for r in results if r["status"] != "pass"]
    residual = "0" if ok else "; ".join(f"{r['check']}: {r['residual']}" for r in failing)
    return Report(payload, "\n".join(lines), "\n".join(lines), ok, residual)


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--cache-dir", default=None, help=f"Jack cache directory (default: ${CACHE_ENV})")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for independent checks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="instanton-rmatrix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.set_defaults(handler=fn)
        return p

    p = add("jack", cmd_jack, "Jack fixed-point classes in the power-sum basis")
    p.add_argument("--degree", type=int, required=True)
    for name, fn, help_ in (("lehn", cmd_lehn, "cut-and-join form of c1"), ("rank", cmd_rank, "the rank operator")):
        p = add(name, fn, help_)
        p.add_argument("--max-weight", type=int, default=4)
        p.add_argument("--degree", type=int, default=None)
    p = add("chern", cmd_chern, "c1 eigenvalues on fixed points")
    p.add_argument("--degree", type=int, required=True)
    p = add("t-eigen", cmd_t_eigen, "eigenvalue of T(u) on a fixed point")
    p.add_argument("--partition", required=True, help="parts separated by commas, e.g. 2,1")
    p = add("h-coeff", cmd_h_coeff, "matrix of H_n on a degree block")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--degree", type=int, required=True)
    p = add("recover", cmd_recover, "recover boson expressions from the H matrices")
    p.add_argument("--target", choices=TARGETS, required=True)
    p.add_argument("--max-degree", type=int, default=5)
    p = add("rmatrix-fundamental", cmd_rmatrix_fundamental, "fundamental rational R-matrix")
    p.add_argument("--N", type=int, required=True)
    p = add("rmatrix-wedge", cmd_rmatrix_wedge, "R-matrix on a pair of wedge powers")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--kmax", type=int, default=None)
    p = add("fusion", cmd_fusion, "fused R-matrix restricted to wedge powers")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM)
    p = add("stab", cmd_stab, "stable envelopes of T*P^n")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--chamber", choices=("fundamental", "opposite"), default="fundamental")
    p = add("ybe", cmd_ybe, "Yang-Baxter residual")
    p.add_argument("--rep", choices=("fundamental", "wedge"), default="fundamental")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--degrees", default="1,1,2", help="wedge degrees for --rep wedge")
    p = add("double", cmd_double, "doubled R_1 or R_2 on F x F")
    p.add_argument("--which", type=int, choices=(1, 2), required=True)
    p.add_argument("--degree", type=int, default=2)
    p = add("contour", cmd_contour, "contour-integral identities for R_1, R_2")
    p.add_argument("--max-degree", type=int, default=3)
    p = add("product-check", cmd_product_check, "ordered product over walls (experimental)")
    p.add_argument("--energy", type=int, default=2)
    p.add_argument("--walls", type=int, default=2)
    p.add_argument("--normalize", action="store_true")
    p = add("verify-all", cmd_verify_all, "run every acceptance check")
    p.add_argument("--max-degree", type=int, default=5)
    p.add_argument("--timings", action="store_true", help="record wall-clock runtimes (breaks byte identity)")
    p.add_argument("--only", nargs="*", default=None, help="restrict to the named checks")
    return parser


def run(argv: list[str] | None = None, out=None, err=None) -> int:
    """Parse ``argv``, run the subcommand and return the exit code."""
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = RunConfig(
            a.command,
            a.format,
            a.cache_dir or os.environ.get(CACHE_ENV),
            a.jobs,
            {k: v for k, v in vars(a).items() if k not in ("handler", "command", "format", "cache_dir", "jobs")},
        )
        report = a.handler(a, cfg)
    except (UsageError, BudgetExceeded) as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE
    print(report.render(cfg.fmt), file=out)
    if not report.ok:
        print(f"check failed: {report.residual}", file=err)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
