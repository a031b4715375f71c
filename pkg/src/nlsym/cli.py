"""Command line front end: ``nlsym {assemble|lambda1|solve|sweep|verify} --config cfg.json``.

Exit codes: 0 success, 1 verdict or validation failure, 2 usage or config error.
Every output file carries the config hash and the package version; reruns of
the same config and seed reproduce the files byte for byte.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
import pydantic

from nlsym import __version__
from nlsym.assembly import assemble, export_triplets
from nlsym.audit import run_all
from nlsym.config import (
    build_kernel,
    build_mask,
    build_nonlinearity,
    canonical_json,
    config_hash,
    load_config,
)
from nlsym.errors import ConfigurationError, DomainError, NlsymError, SolutionRejectedError, UnsupportedError
from nlsym.semilinear import solve_semilinear
from nlsym.spectral import lambda1_discrete, small_volume_scan
from nlsym.symmetry import Tolerances, moving_plane_sweep

__all__ = ["main", "build_parser"]

log = logging.getLogger("nlsym")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="nlsym", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nlsym {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("assemble", "assemble the stiffness matrix and export it as triplets"),
        ("lambda1", "smallest eigenvalue, eigenvector and the small-volume scan"),
        ("solve", "solve the semilinear problem"),
        ("sweep", "solve, then run the moving-plane sweep"),
        ("verify", "run the property audits on the assembled matrix"),
    ]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", help="output directory (default: output.dir of the config)")
        p.add_argument("--threads", type=int, help="worker threads (default: $NLSYM_THREADS or 1)")
        p.add_argument("--seed", type=int, help="override the config seed")
    return parser


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _plain(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as null."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


class Writer:
    def __init__(self, out, prefix, chash):
        self.out = Path(out)
        self.prefix = prefix
        self.chash = chash
        self.written = []

    def _atomic(self, name, text):
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / f"{self.prefix}{name}"
        fd, tmp = tempfile.mkstemp(dir=self.out, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        self.written.append(str(path))
        return path

    def json(self, name, payload):
        doc = {"config_hash": self.chash, "version": __version__, **_plain(payload)}
        return self._atomic(name, canonical_json(doc))

    def csv(self, name, header, rows):
        buf = io.StringIO()
        buf.write(f"# config_hash={self.chash} version={__version__}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else _fmt(v) for v in row])
        return self._atomic(name, buf.getvalue())


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else ""
    return str(v)


def _threads(arg):
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("NLSYM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"NLSYM_THREADS must be an integer, got {env!r}") from None
    return 1


def _read_config(path, seed):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    try:
        cfg = load_config(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    except pydantic.ValidationError as exc:
        lines = []
        for e in exc.errors():
            loc = ".".join(str(p) for p in e["loc"]) or "<root>"
            lines.append(f"{path}: {loc}: {e['msg']}")
        raise UsageError("\n".join(lines)) from None
    if seed is not None:
        cfg = cfg.model_copy(update={"seed": seed})
    return cfg


# ---------------------------------------------------------------------------
# commands; each returns (exit code, summary dict)
# ---------------------------------------------------------------------------


def _form(cfg):
    return assemble(build_kernel(cfg), build_mask(cfg))


def cmd_assemble(cfg, wr, threads):
    F = _form(cfg)
    rows, header = export_triplets(F, {"config_hash": wr.chash, "version": __version__})
    wr.csv("matrix.csv", ["i", "j", "value"], rows)
    wr.json("matrix.json", json.loads(header))
    return EXIT_OK, {"n": F.n, "nonzeros": len(rows)}


def cmd_lambda1(cfg, wr, threads):
    kernel = build_kernel(cfg)
    F = assemble(kernel, build_mask(cfg))
    res = lambda1_discrete(F, tol=cfg.spectral.tol, max_iter=cfg.spectral.max_iter)
    scan = small_volume_scan(kernel, [build_mask(cfg, s) for s in cfg.spectral.scan_scales])
    wr.json("spectral.json", {
        "lambda1_h": res.lambda1_h,
        "analytic_bound": res.analytic_bound,
        "residual": res.residual,
        "iterations": res.iterations,
        "n": F.n,
        "volume": F.mask.volume,
    })
    wr.csv("eigvec.csv", [f"x{d + 1}" for d in range(F.dim)] + ["value"],
           [[*c, v] for c, v in zip(F.mask.centers.tolist(), res.eigvec.values.tolist())])
    wr.csv("scan.csv", ["volume", "lambda1_h", "bound", "ratio"], [list(r) for r in scan])
    ok = res.analytic_bound is None or res.lambda1_h >= res.analytic_bound * (1 - 1e-2)
    return (EXIT_OK if ok else EXIT_FAIL), {"lambda1_h": res.lambda1_h, "analytic_bound": res.analytic_bound}


def _solve(cfg):
    F = _form(cfg)
    f = build_nonlinearity(cfg)
    rep = solve_semilinear(F, f, tol=cfg.solver.tol, damping=cfg.solver.damping, max_iter=cfg.solver.max_iter)
    return F, f, rep


def _solution_rows(F, u):
    return [[*c, v] for c, v in zip(F.mask.centers.tolist(), u.values.tolist())]


def cmd_solve(cfg, wr, threads):
    F, f, rep = _solve(cfg)
    summary = {
        "converged": rep.converged,
        "residual": rep.residual,
        "iterations": rep.iterations,
        "nonneg": rep.nonneg,
        "method": rep.method,
        "u_min": float(rep.u.values.min()),
        "u_max": float(rep.u.values.max()),
        "n": F.n,
    }
    wr.json("solve.json", summary)
    wr.csv("solution.csv", [f"x{d + 1}" for d in range(F.dim)] + ["u"], _solution_rows(F, rep.u))
    return (EXIT_OK if rep.converged else EXIT_FAIL), summary


def cmd_sweep(cfg, wr, threads):
    F, f, rep = _solve(cfg)
    if not rep.converged:
        wr.json("sweep.json", {"error": "solver did not converge", "residual": rep.residual})
        return EXIT_FAIL, {"error": "solver did not converge"}
    s = cfg.sweep
    tol = Tolerances(zero=s.tol_zero, positive=s.tol_pos, margin=s.tol_margin, residual_gate=s.residual_gate)
    try:
        report = moving_plane_sweep(rep.u, F, f, tol=tol, threads=threads)
    except SolutionRejectedError as exc:
        wr.json("sweep.json", {"error": str(exc)})
        return EXIT_FAIL, {"error": str(exc)}
    doc = report.to_dict()
    wr.json("sweep.json", doc)
    rows = [[r.lam, r.min_v, r.certificate, r.S_lambda] for r in (*report.records, *report.mirrored)]
    wr.csv("sweep.csv", ["lambda", "min_v", "certificate", "S_lambda"], rows)
    ok = not report.violations and report.lambda0 in (0.0, None) and report.lambda0_mirror in (0.0, None)
    return (EXIT_OK if ok else EXIT_FAIL), {"lambda0": report.lambda0, "violations": len(report.violations)}


def cmd_verify(cfg, wr, threads):
    F = _form(cfg)
    checks = run_all(F, samples=cfg.verify.samples, seed=cfg.seed, oracle_cells=cfg.verify.oracle_cells)
    doc = {
        "passed": all(c.passed for c in checks),
        "checks": [{"name": c.name, "passed": c.passed, **c.detail} for c in checks],
        "n": F.n,
    }
    if F.n <= 16:
        doc["A"] = F.A
    wr.json("verify.json", doc)
    return (EXIT_OK if doc["passed"] else EXIT_FAIL), {"passed": doc["passed"]}


COMMANDS = {
    "assemble": cmd_assemble,
    "lambda1": cmd_lambda1,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        threads = _threads(args.threads)
        cfg = _read_config(args.config, args.seed)
    except UsageError as exc:
        print(f"nlsym: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    chash = config_hash(cfg)
    wr = Writer(args.out or cfg.output.dir, cfg.output.prefix, chash)
    try:
        wr.json("config.echo.json", cfg.model_dump(mode="json"))
        code, summary = COMMANDS[args.command](cfg, wr, threads)
    except (ConfigurationError, DomainError, UnsupportedError) as exc:
        # geometry or kernel parameters the schema cannot rule out
        print(f"nlsym: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NlsymError as exc:
        print(f"nlsym: failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(json.dumps({"command": args.command, "exit": code, "config_hash": chash,
                      **_plain(summary)}, sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
