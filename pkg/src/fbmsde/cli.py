"""Command-line front end.

Exit codes: 0 success, 1 invalid configuration, 2 a study or audit FAILED,
64 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import fraccalc, verify
from .config import ConfigError, Scenario, load_scenario, validate_config
from .noise import make_noise
from .paths import SamplePath, TimeGrid
from .reports import dumps
from .sde import closed_form_oracle, euler_solve

EXIT_OK, EXIT_INVALID, EXIT_FAILED, EXIT_USAGE = 0, 1, 2, 64
OUTPUT_ENV = "FBMSDE_OUTPUT_ROOT"
SUBCOMMANDS = ("gen-noise", "solve", "audit", "converge", "uniqueness", "hoelder", "validate")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def write_atomic(path: Path, text: str):
    """Write through a temp file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _noise(sc: Scenario, grid: TimeGrid | None = None, path_index: int = 0):
    c = sc.problem.coeffs
    g = grid or sc.grid
    return make_noise(g, sc.problem.hurst, c.m, c.r, sc.seeds["noise"], path_index,
                      sc.raw.get("grid", {}).get("method", "auto"))


def _manifest(sc: Scenario, **extra) -> dict:
    out = {"scenario": sc.name, "seed": sc.seeds["noise"], "H": sc.problem.hurst, "n": sc.grid.n,
           "T": sc.problem.T, "coefficient_family": sc.problem.coeffs.family,
           "params": sc.problem.coeffs.params}
    out.update(extra)
    return out


# ---------------------------------------------------------------- subcommands

def cmd_gen_noise(sc: Scenario, out: Path):
    nb = _noise(sc)
    write_atomic(out / "fbm.csv", nb.fbm.to_csv())
    write_atomic(out / "bm.csv", nb.bm.to_csv())
    write_atomic(out / "manifest.json", dumps(_manifest(sc, artifact="noise")) + "\n")
    return EXIT_OK, f"{sc.name}: gen-noise n={sc.grid.n} m={nb.fbm.dim} r={nb.bm.dim} -> {out}"


def cmd_solve(sc: Scenario, out: Path):
    nb = _noise(sc)
    run = euler_solve(sc.problem, sc.grid, nb)
    write_atomic(out / "path.csv", run.to_csv())
    extra = {}
    kind = sc.problem.coeffs.oracle
    if kind is not None and sc.problem.coeffs.d == 1:
        ref = closed_form_oracle(kind, sc.problem, nb)
        write_atomic(out / "oracle.csv", ref.to_csv())
        extra["sup_error_vs_oracle"] = float(np.max(np.abs(run.path.values - ref.values)))
    write_atomic(out / "manifest.json", dumps({**run.manifest(), "scenario": sc.name, **extra}) + "\n")
    tail = f" sup|X-oracle|={extra['sup_error_vs_oracle']:.3e}" if extra else ""
    return EXIT_OK, f"{sc.name}: solve n={sc.grid.n} X(T)={run.path.values[-1].tolist()}{tail}"


def _named_path(name: str, grid: TimeGrid, sc: Scenario) -> SamplePath:
    if name == "fbm":
        return _noise(sc, grid).fbm.component(0)
    for key, p in verify.corpus_paths(grid, sc.seeds["noise"], sc.problem.hurst):
        if key == name:
            return p
    raise ConfigError([f"audit: unknown corpus function {name!r}"])


def cmd_audit(sc: Scenario, out: Path):
    a = sc.audit
    kind = a.get("kind", "estimates")
    alpha = sc.alpha
    if kind == "estimates":
        cal = a.get("calibration_seeds", [1, 2, 3])
        test = a.get("audit_seeds", [101, 102, 103])
        if set(cal) & set(test):
            raise ConfigError(["audit: calibration and audit seed sets must be disjoint"])
        opts = dict(alpha=alpha, H=sc.problem.hurst, n=sc.grid.n, n_ito=int(a.get("n_ito", 128)),
                    mc_budget=sc.mc_budget, family=sc.problem.coeffs.family,
                    params=sc.problem.coeffs.params, T=sc.problem.T)
        A = [r for s in cal for r in verify.run_estimate_audits(s, **opts)]
        caps = verify.calibrate_caps(A)
        B = verify.apply_caps([r for s in test for r in verify.run_estimate_audits(s, **opts)], caps)
        reports = B
        write_atomic(out / "caps.json", dumps(caps) + "\n")
    elif kind == "pair":
        est = a.get("estimate", "Fbfh")
        f = _named_path(a.get("f", "t"), sc.grid, sc)
        h = _named_path(a.get("h", a.get("f", "t")), sc.grid, sc)
        corpus = [(a.get("f", "t"), f), (a.get("h", a.get("f", "t")), h)]
        if est == "Fbfh":
            reports = [r for r in verify.audit_drift_estimates(corpus, alpha, sc.problem.coeffs)
                       if r.name == "Fbfh"][:1]
        elif est == "GHfh":
            bh = _noise(sc).fbm
            reports = [r for r in verify.audit_fbm_integral_estimates(corpus, bh, alpha, sc.problem.coeffs,
                                                                      sc.problem.hurst) if r.name == "GHfh"][:1]
        else:
            raise ConfigError([f"audit.estimate: pair audits support Fbfh or GHfh, got {est!r}"])
        cap = a.get("cap")
        for r in reports:
            if cap is not None:
                verify.apply_caps([r], {r.name: float(cap)}, 1.0)
    elif kind == "gfa1":
        f = _named_path(a.get("f", "one_plus_t"), sc.grid, sc)
        g = _named_path(a.get("g", "fbm"), sc.grid, sc)
        reports = [fraccalc.bound_check_gfa1(f, g, alpha if alpha is not None else 0.5)]
    elif kind == "moment":
        reports = [verify.moment_bound_audit(sc.problem, tuple(a.get("ns", (64, 128, 256))), int(a.get("N", 1)),
                                             sc.mc_budget, sc.seeds["noise"])]
    else:  # delta_lemma
        corpus = verify.corpus_paths(sc.grid, sc.seeds["noise"], sc.problem.hurst)
        reports = verify.audit_delta_lemma(corpus, alpha if alpha is not None else 0.3,
                                           float(a.get("delta", 1.0)), float(a.get("eta", 0.6)))
    write_atomic(out / "reports.jsonl", verify.reports_jsonl(reports))
    lines = ["name,lhs,rhs,implied_constant,cap,passed,flags"]
    for r in reports:
        lines.append(f"{r.name},{r.lhs!r},{r.rhs!r},{r.implied_constant!r},{r.cap!r},{r.passed},"
                     f"{'|'.join(r.flags)}")
    write_atomic(out / "summary.csv", "\n".join(lines) + "\n")
    failed = [r for r in reports if not r.passed]
    status = "FAILED" if failed else "passed"
    code = EXIT_FAILED if failed else EXIT_OK
    worst = max((r.implied_constant for r in reports), default=0.0)
    return code, f"{sc.name}: audit {kind} {len(reports)} reports, {len(failed)} failed, max implied {worst:.4g} [{status}]"


def _study_out(study, out: Path, sc: Scenario, label: str):
    write_atomic(out / f"{label}.json", study.to_json() + "\n")
    write_atomic(out / f"{label}.csv", study.to_csv())
    code = EXIT_OK if study.passed else EXIT_FAILED
    status = "passed" if study.passed else "FAILED"
    flags = f" flags={study.flags}" if study.flags else ""
    return code, (f"{sc.name}: {label} order={study.fitted_order:.4g} r2={study.r2:.4g} "
                  f"finest error={study.errors[-1]:.3e} [{status}]{flags}")


def cmd_converge(sc: Scenario, out: Path):
    ns = sc.study.get("ns", [16, 32, 64, 128, 256])
    study = verify.strong_convergence_study(sc.problem, ns, sc.mc_budget, sc.seeds["noise"])
    return _study_out(study, out, sc, "convergence")


def cmd_uniqueness(sc: Scenario, out: Path):
    st = sc.study
    study = verify.pathwise_uniqueness_harness(
        sc.problem, st.get("ns", [16, 32, 64, 128, 256, 512, 1024]),
        tuple(st.get("families", ["uniform", "geometric"])), sc.seeds["noise"],
        int(st.get("base_factor", 16)), int(st.get("replicas", 4)))
    return _study_out(study, out, sc, "uniqueness")


def cmd_hoelder(sc: Scenario, out: Path):
    cfg = sc.hoelder
    target = cfg.get("target", "fbm")
    n_paths = int(cfg.get("paths", 10))
    rows = ["path_index,exponent,r2"]
    vals = []
    for i in range(n_paths):
        nb = _noise(sc, path_index=i)
        path = nb.fbm.component(0) if target == "fbm" else euler_solve(sc.problem, sc.grid, nb).path
        fit = verify.hoelder_fit(path)
        vals.append(fit.exponent)
        rows.append(f"{i},{fit.exponent!r},{fit.r2!r}")
    write_atomic(out / "hoelder.csv", "\n".join(rows) + "\n")
    summary = {"target": target, "n": sc.grid.n, "paths": n_paths, "mean": float(np.mean(vals)),
               "std": float(np.std(vals)), "exponents": vals}
    write_atomic(out / "hoelder.json", dumps(summary) + "\n")
    return EXIT_OK, f"{sc.name}: hoelder {target} mean={summary['mean']:.4f} sd={summary['std']:.4f} over {n_paths} paths"


HANDLERS = {"gen-noise": cmd_gen_noise, "solve": cmd_solve, "audit": cmd_audit, "converge": cmd_converge,
            "uniqueness": cmd_uniqueness, "hoelder": cmd_hoelder}


# ---------------------------------------------------------------- driver

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fbmsde", description="Simulate and audit SDEs driven by fractional and standard Brownian motion.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("config", help="scenario YAML file, or a directory of them")
        if name != "validate":
            s.add_argument("--n", type=int, help="override grid.n")
            s.add_argument("--seed", type=int, help="override seeds.noise")
            s.add_argument("--alpha", type=float, help="override alpha")
            s.add_argument("--mc-budget", type=int, help="override mc_budget")
            s.add_argument("--out", help=f"output root (default ${OUTPUT_ENV} or ./fbmsde-out)")
    return p


def _configs(path: Path) -> list:
    if path.is_dir():
        return sorted(list(path.glob("*.yaml")) + list(path.glob("*.yml")))
    return [path]


def _run_one(args, cfg: Path) -> int:
    if args.command == "validate":
        try:
            diags = validate_config(cfg)
        except FileNotFoundError as exc:
            print(f"{cfg}: {exc}", file=sys.stderr)
            return EXIT_INVALID
        for d in diags:
            print(f"{cfg}: {d}")
        print(f"{cfg}: {'invalid' if diags else 'ok'} ({len(diags)} problems)")
        return EXIT_INVALID if diags else EXIT_OK
    try:
        sc = load_scenario(cfg, n=args.n, seed=args.seed, alpha=args.alpha, mc_budget=args.mc_budget)
    except FileNotFoundError as exc:
        print(f"{cfg}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"{cfg}: {d}", file=sys.stderr)
        return EXIT_INVALID
    root = Path(args.out or os.environ.get(OUTPUT_ENV) or "fbmsde-out")
    out = root / sc.name / args.command
    try:
        code, line = HANDLERS[args.command](sc, out)
    except ConfigError as exc:
        for d in exc.diagnostics:
            print(f"{cfg}: {d}", file=sys.stderr)
        return EXIT_INVALID
    print(line)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    target = Path(args.config)
    if not target.exists():
        print(f"{target}: no such file or directory", file=sys.stderr)
        return EXIT_INVALID
    files = _configs(target)
    if not files:
        print(f"{target}: no scenario files found", file=sys.stderr)
        return EXIT_INVALID
    codes = [_run_one(args, f) for f in files]
    # validation problems outrank study failures
    return EXIT_INVALID if EXIT_INVALID in codes else max(codes)


if __name__ == "__main__":
    sys.exit(main())
