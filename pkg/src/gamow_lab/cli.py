"""Command-line front end: pole tables, wavefunction snapshots, decay
curves, and regime reports, emitted as regression-diffable CSV/JSON.

Output conventions: CSV with a header row, 17 significant digits, '.'
decimal separator, LF line endings; JSON in UTF-8 with stable key order.
Every output embeds the resolved run configuration and package version.
Files are written atomically (temp file + rename).  Exit codes: 0 success,
1 usage error, 2 pole-audit failure, 3 quadrature failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .decay_analysis import geometric_times, nonescape_curve, regime_report
from .exceptions import CountMismatch, QuadratureNotConverged
from .gamow_expansion import crossover_time, evolve_rotated
from .potential_model import WellParameters, asymptotic_pole_seed
from .profiles import parse_profile
from .spectral_evolution import evolve_direct, resonances, well_grid

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_POLE_AUDIT = 2
EXIT_QUADRATURE = 3

_FMT = "%.17g"


@dataclass
class RunConfig:
    """Resolved run parameters, echoed into every output file."""

    command: str
    lam: float
    a: float
    profile: str | None = None
    times: str | None = None
    k_max: float = 40.0
    policy: str = "auto"
    out: str = "."
    format: str = "csv"
    threads: int = field(
        default_factory=lambda: int(os.environ.get("GAMOW_LAB_THREADS", "0")))
    version: str = __version__

    def as_dict(self) -> dict:
        return asdict(self)


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(config: RunConfig, header: list[str],
              rows: list[list]) -> str:
    lines = [f"# config: {json.dumps(config.as_dict(), sort_keys=True)}"]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(
            _FMT % v if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def _json_text(config: RunConfig, payload: dict) -> str:
    doc = {"config": config.as_dict(), **payload}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _emit(config: RunConfig, name: str, header: list[str],
          rows: list[list], payload_keys: list[str] | None = None) -> str:
    """Write a table under the configured directory in csv or json form."""
    os.makedirs(config.out, exist_ok=True)
    if config.format == "csv":
        path = os.path.join(config.out, name + ".csv")
        _atomic_write(path, _csv_text(config, header, rows))
    else:
        path = os.path.join(config.out, name + ".json")
        records = [dict(zip(header, row)) for row in rows]
        _atomic_write(path, _json_text(config, {"rows": records}))
    return path


def _parse_times(spec: str) -> np.ndarray:
    """'start:stop:points-per-decade' (geometric) or comma-separated values."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError("time spec must be start:stop:points-per-decade")
        start, stop, ppd = float(parts[0]), float(parts[1]), int(parts[2])
        return geometric_times(start, stop, ppd)
    vals = np.asarray([float(v) for v in spec.split(",")])
    if vals.size == 0:
        raise ValueError("empty time grid")
    return vals


def cmd_poles(config: RunConfig) -> int:
    w = WellParameters(lam=config.lam, a=config.a)
    try:
        poles = resonances(w, config.k_max)
    except CountMismatch as exc:
        print(f"pole audit failed: {exc}", file=sys.stderr)
        return EXIT_POLE_AUDIT
    rows = []
    for r in poles:
        try:
            seed_dev = abs(r.k - asymptotic_pole_seed(r.n, w)) * w.a
        except Exception:
            seed_dev = float("nan")
        rows.append([
            r.n, r.k.real * w.a, r.k.imag * w.a, r.E.real, r.gamma, r.tau,
            abs(r.residual), seed_dev,
            "" if w.metastable else "non-metastable",
        ])
    path = _emit(config, "poles",
                 ["n", "re_ka", "im_ka", "re_E", "gamma", "tau",
                  "residual", "seed_deviation", "warning"], rows)
    print(f"wrote {path} ({len(rows)} poles)")
    return EXIT_OK


def cmd_evolve(config: RunConfig) -> int:
    w = WellParameters(lam=config.lam, a=config.a)
    p = parse_profile(config.profile, a=config.a)
    times = _parse_times(config.times)
    if np.any(times < 0.0):
        print("snapshot times must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    grid = well_grid(w, 257)
    for t in times:
        rows = []
        states = {}
        try:
            if config.policy in ("direct", "both", "auto"):
                states["direct"] = evolve_direct(p, float(t), grid, w)
            if config.policy in ("rotated", "both") or (
                    config.policy == "auto" and False):
                states["rotated"] = evolve_rotated(p, float(t), grid, w).total
        except QuadratureNotConverged as exc:
            print(f"quadrature failure at t={t}: {exc}", file=sys.stderr)
            return EXIT_QUADRATURE
        except ValueError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_USAGE
        for method, ws in states.items():
            for x, v in zip(ws.x, ws.psi):
                rows.append([float(x), float(v.real), float(v.imag),
                             float(abs(v) ** 2), method])
        name = f"evolve_t{float(t):.6g}"
        path = _emit(config, name,
                     ["x", "re_psi", "im_psi", "abs2_psi", "method"], rows)
        msg = f"wrote {path}"
        if len(states) == 2:
            sup = float(np.max(np.abs(states["direct"].psi
                                      - states["rotated"].psi)))
            msg += f" (method discrepancy sup-norm {sup:.3e})"
        print(msg)
    return EXIT_OK


def cmd_survival(config: RunConfig) -> int:
    w = WellParameters(lam=config.lam, a=config.a)
    p = parse_profile(config.profile, a=config.a)
    try:
        times = _parse_times(config.times)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    try:
        curve = nonescape_curve(p, times, w, policy=config.policy)
    except QuadratureNotConverged as exc:
        print(f"quadrature failure: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    rows = [[float(t), float(P), m]
            for t, P, m in zip(curve.times, curve.P, curve.methods)]
    path = _emit(config, "survival", ["t", "P", "method"], rows)
    print(f"wrote {path}")

    rep = regime_report(p, w)
    report_path = os.path.join(config.out, "survival_report.json")
    _atomic_write(report_path, _json_text(config, {
        "gamma_fit": rep.gamma_fit,
        "gamma1_exact": rep.gamma1_exact,
        "s_fit": rep.s_fit,
        "t_star_measured": rep.t_star_measured,
        "crossover_estimate": rep.crossover_estimate,
    }))
    print(f"wrote {report_path}")
    return EXIT_OK


def cmd_report(config: RunConfig) -> int:
    w = WellParameters(lam=config.lam, a=config.a)
    p = parse_profile(config.profile, a=config.a)
    try:
        poles = resonances(w, config.k_max)
    except CountMismatch as exc:
        print(f"pole audit failed: {exc}", file=sys.stderr)
        return EXIT_POLE_AUDIT
    rep = regime_report(p, w)
    cross = crossover_time(p, w)
    payload = {
        "poles": [
            {"n": r.n, "re_ka": r.k.real * w.a, "im_ka": r.k.imag * w.a,
             "gamma": r.gamma, "tau": r.tau}
            for r in poles
        ],
        "regimes": rep.as_dict(),
        "crossover": cross,
        "summary": (
            f"lam={w.lam:g}, a={w.a:g}, profile={p.label}: "
            f"tau1={rep.tau1:.6g}, Gamma_fit/Gamma1="
            f"{rep.gamma_fit / rep.gamma1_exact:.6f}, tail exponent "
            f"{rep.s_fit:.4f}, crossover t*={rep.t_star_measured:.6g} "
            f"(estimate {rep.crossover_estimate:.6g}), "
            f"log10 P(t*)={rep.log10_P_at_t_star:.2f}"
        ),
    }
    os.makedirs(config.out, exist_ok=True)
    path = os.path.join(config.out, "report.json")
    _atomic_write(path, _json_text(config, payload))
    print(payload["summary"])
    print(f"wrote {path}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gamow-lab",
        description="Delta-shell well decay laboratory: resonance poles, "
                    "exact spectral evolution, Gamow expansion, and "
                    "nonescape-probability analysis.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, profile=False, times=False):
        sp.add_argument("--lambda", dest="lam", type=float, required=True,
                        help="dimensionless barrier strength")
        sp.add_argument("--width", type=float, default=1.0,
                        help="well width a (default 1)")
        sp.add_argument("--kmax", type=float, default=40.0,
                        help="spectral/pole cutoff in units of 1/a")
        sp.add_argument("--policy", default="auto",
                        choices=["direct", "rotated", "both", "auto"])
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--format", default="csv", choices=["csv", "json"])
        if profile:
            sp.add_argument("--profile", required=True,
                            help="box:n or gauss:center,width")
        if times:
            sp.add_argument("--times", required=True,
                            help="start:stop:points-per-decade (geometric) "
                                 "or comma-separated values")

    common(sub.add_parser("poles", help="resonance pole table"))
    common(sub.add_parser("evolve", help="wavefunction snapshots"),
           profile=True, times=True)
    common(sub.add_parser("survival", help="nonescape probability curve"),
           profile=True, times=True)
    common(sub.add_parser("report", help="aggregate regime report"),
           profile=True)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = _build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; remap to the documented code
        return EXIT_USAGE if exc.code not in (0, None) else 0
    config = RunConfig(
        command=ns.command, lam=ns.lam, a=ns.width,
        profile=getattr(ns, "profile", None),
        times=getattr(ns, "times", None),
        k_max=ns.kmax, policy=ns.policy, out=ns.out, format=ns.format)
    try:
        handler = {
            "poles": cmd_poles,
            "evolve": cmd_evolve,
            "survival": cmd_survival,
            "report": cmd_report,
        }[config.command]
        return handler(config)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
