"""Command-line front end: every library operation as a subcommand.

Subcommands: constants, potential, spectrum, nodes, meanfield, branches.
Each supports --format {csv,json} and --tol.  CSV bodies are
deterministic: fixed column order, 12 significant digits, '.' decimal
separator, '\\n' line endings, header row first.  Every run produces a
manifest (command, full parameter set, tolerances, unit system, tool
version, timestamp): embedded under the "manifest" key in JSON output,
written to <output>.manifest.json next to a --output CSV file, or sent
to stderr when CSV goes to stdout.

Exit codes: 0 success, 2 numerical or configuration failure,
3 physically forbidden request (e.g. a spectrum of the unregularized
inverse-square attraction).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from ._kernel import BACKEND as KERNEL_BACKEND
from .core import ConfigError, EfimovLabError, LogGrid, UnregularizedPotentialError, make_config
from .hyperangular import (
    Cap,
    HardWall,
    effective_potential,
    efimov_constants,
    solve_branches,
    tabulate_branch,
)
from .meanfield import (
    MatterModel,
    Stabilizer,
    Statistics,
    classify_stability,
    energy_density,
    energy_per_particle,
)
from .radial import (
    DEFAULT_DT,
    DEFAULT_TAIL_FACTOR,
    RadialSolution,
    collapse_probe,
    find_spectrum,
    node_analysis,
)

_SCHEMES = ("none", "hardwall", "cap")


def _fmt(value) -> str:
    """12-significant-digit CSV cell; ints stay integral."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.12g" % float(value)


def _csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    """Convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _make_scheme(name: str, R):
    if name == "none":
        return None
    if R is None:
        raise ConfigError(f"--regularization {name} requires --R")
    return HardWall(R) if name == "hardwall" else Cap(R)


def _manifest(ns: argparse.Namespace, tolerances: dict) -> dict:
    params = {k: v for k, v in sorted(vars(ns).items()) if k not in ("func", "command")}
    mu = params.get("mu")
    return {
        "command": ns.command,
        "version": __version__,
        "kernel_backend": KERNEL_BACKEND,
        "parameters": params,
        "tolerances": tolerances,
        "units": {
            "hbar": 1.0,
            "mass_scale": 1.0,
            "reduced_mass_mu": mu,
            "convention": "k cot(delta0) = +1/a; the pair binds for a < 0; "
                          "x = rho / (sqrt(mu) a)",
        },
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _emit(ns: argparse.Namespace, *, csv_body: str, json_payload: dict,
          manifest: dict, sidecar_extra: dict | None = None) -> None:
    """Write the chosen format; keep CSV bodies free of the manifest."""
    if ns.format == "json":
        doc = dict(json_payload)
        doc["manifest"] = manifest
        text = json.dumps(_jsonable(doc), indent=2, allow_nan=False) + "\n"
        if ns.output:
            with open(ns.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return

    side = dict(sidecar_extra or {})
    side["manifest"] = manifest
    side_text = json.dumps(_jsonable(side), indent=2, allow_nan=False) + "\n"
    if ns.output:
        with open(ns.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_body)
        with open(ns.output + ".manifest.json", "w", encoding="utf-8") as fh:
            fh.write(side_text)
    else:
        sys.stdout.write(csv_body)
        sys.stderr.write(side_text)


def _add_common(p: argparse.ArgumentParser, tol_default: float, tol_help: str) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="output format (default csv)")
    p.add_argument("--tol", type=float, default=tol_default, help=tol_help)
    p.add_argument("--output", default=None, metavar="PATH",
                   help="write to PATH instead of stdout (CSV gets a "
                        "PATH.manifest.json sidecar)")


def cmd_constants(ns: argparse.Namespace) -> int:
    c = efimov_constants(tol=ns.tol)
    manifest = _manifest(ns, {"root_tol": ns.tol})
    csv_body = _csv(["b", "C", "residual"], [[c.b, c.C, c.residual]])
    payload = {"b": c.b, "C": c.C, "residual": c.residual}
    _emit(ns, csv_body=csv_body, json_payload=payload, manifest=manifest)
    return 0


def cmd_potential(ns: argparse.Namespace) -> int:
    cfg = make_config(ns.a, mu=ns.mu)
    grid = LogGrid.make(ns.rho_min, ns.rho_max, ns.points)
    branch = tabulate_branch(cfg, grid, ns.branch, threads=ns.threads, tol=ns.tol)
    pot = effective_potential(branch, _make_scheme(ns.regularization, ns.R))
    tbl = pot.table()
    cols = ["rho", "x", "nu_squared", "lambda", "v_eff"]
    rows = zip(*(tbl[c] for c in cols))
    manifest = _manifest(ns, {"branch_tol": ns.tol})
    payload = {"table": {c: tbl[c] for c in cols}}
    _emit(ns, csv_body=_csv(cols, rows), json_payload=payload, manifest=manifest)
    return 0


def _spectrum_for(ns: argparse.Namespace):
    if ns.rho_max <= ns.R:
        raise ConfigError(f"--rho-max must exceed --R, got {ns.rho_max} <= {ns.R}")
    cfg = make_config(ns.a, mu=ns.mu)
    grid = LogGrid.make(ns.R, ns.rho_max, ns.grid_points)
    branch = tabulate_branch(cfg, grid, ns.branch, threads=ns.threads)
    pot = effective_potential(branch, _make_scheme(ns.regularization, ns.R))
    return find_spectrum(pot, ns.rho_max, max_levels=ns.levels, tol_E=ns.tol,
                         dt=ns.dt)


def cmd_spectrum(ns: argparse.Namespace) -> int:
    spec = _spectrum_for(ns)
    ratios = spec.energy_ratios()
    rows = []
    levels = []
    for k, s in enumerate(spec.states):
        ratio = float(ratios[k]) if k < len(ratios) else float("nan")
        rows.append([s.E, s.kappa, s.node_count, ratio, s.box_limited])
        levels.append({"E_n": s.E, "kappa_n": s.kappa, "node_count": s.node_count,
                       "ratio_to_next": ratio, "flag": bool(s.box_limited),
                       "mismatch": s.mismatch})
    manifest = _manifest(ns, {"tol_E": ns.tol, "dt": ns.dt})
    csv_body = _csv(["E_n", "kappa_n", "node_count", "ratio_to_next", "flag"], rows)
    payload = {"levels": levels, "rho_max": ns.rho_max,
               "total_nodes_at_edge": spec.total_nodes_at_edge}
    _emit(ns, csv_body=csv_body, json_payload=payload, manifest=manifest)
    return 0


def _analytic_solution(periods: int, dt: float) -> RadialSolution:
    """Closed-form f = sqrt(rho) sin(b ln rho) sampled like a real run."""
    b = efimov_constants().b
    T = periods * math.pi / b
    n = int(math.ceil(T / dt)) + 1
    t = np.linspace(0.0, T, n)
    rho = np.exp(t)
    f = np.sqrt(rho) * np.sin(b * t)
    kappa = 0.02 / rho[-1]  # window edge 0.2/kappa sits far outside the grid
    return RadialSolution(E=-0.5 * kappa * kappa, kappa=kappa, node_count=periods,
                          rho=rho, f=f, log_scale=np.zeros(n), R=1.0,
                          scheme_name="analytic", dt=t[1] - t[0])


def cmd_nodes(ns: argparse.Namespace) -> int:
    modes = [m for m, on in (("analytic", ns.analytic),
                             ("probe", ns.probe_E is not None)) if on]
    if len(modes) > 1:
        raise ConfigError("choose one of --analytic or --probe-E")
    mode = modes[0] if modes else "level"

    b = efimov_constants().b

    if mode == "probe":
        if ns.a is None:
            raise ConfigError("--probe-E mode requires --a")
        cfg = make_config(ns.a, mu=ns.mu)
        kappa = math.sqrt(-2.0 * ns.probe_E) if ns.probe_E < 0 else 0.0
        if kappa == 0.0:
            raise ConfigError(f"--probe-E must be negative, got {ns.probe_E}")
        rho_out = DEFAULT_TAIL_FACTOR / kappa
        smallest = ns.base_cutoff * 10.0 ** (-ns.decades)
        grid = LogGrid.make(smallest, rho_out * (1.0 + 1e-12), 400)
        branch = tabulate_branch(cfg, grid, ns.branch)
        pot = effective_potential(branch, None)
        probe = collapse_probe(pot, ns.probe_E, ns.base_cutoff, ns.decades,
                               ns.per_decade, dt=ns.dt)
        rows = [[k, c, int(cnt)]
                for k, (c, cnt) in enumerate(zip(probe.cutoffs, probe.counts))]
        summary = {"mode": mode,
                   "slope_per_decade": probe.slope_per_decade,
                   "reference_slope": probe.reference_slope,
                   "reference_formula": "b ln(10) / pi",
                   "E": probe.E, "rho_out": probe.rho_out}
        manifest = _manifest(ns, {"dt": ns.dt})
        csv_body = _csv(["k", "cutoff", "node_count"], rows)
        payload = {"sweep": [{"k": r[0], "cutoff": r[1], "node_count": r[2]}
                             for r in rows],
                   "summary": summary, "mode": mode}
        _emit(ns, csv_body=csv_body, json_payload=payload, manifest=manifest,
              sidecar_extra={"summary": summary})
        return 0

    if mode == "analytic":
        sol = _analytic_solution(ns.periods, ns.dt)
        level_info = {"E": sol.E, "level": None}
    else:
        if ns.a is None or ns.R is None or ns.rho_max is None:
            raise ConfigError("level mode requires --a, --R and --rho-max")
        if ns.regularization == "none":
            raise UnregularizedPotentialError(
                "node analysis of a bound level needs a regularized spectrum; "
                "the bare inverse-square attraction has none (use --probe-E "
                "to study the unregularized cutoff sweep)")
        spec = _spectrum_for(ns)
        pool = spec.interior_states() or list(spec.states)
        if not pool:
            raise ConfigError("no bound level found; enlarge --rho-max")
        if ns.level is None:
            sol = pool[-1]
            level = spec.states.index(sol)
        else:
            if not 0 <= ns.level < len(spec.states):
                raise ConfigError(
                    f"--level {ns.level} out of range: {len(spec.states)} "
                    f"level(s) found")
            level = ns.level
            sol = spec.states[level]
        level_info = {"E": sol.E, "level": level}

    report = node_analysis(sol, kappa_rho_max=ns.kappa_rho_max,
                           wall_factor=ns.wall_factor)
    rows = []
    for k, pos in enumerate(report.positions):
        ratio = report.positions[k] / report.positions[k - 1] if k else float("nan")
        rows.append([k, pos, ratio])
    summary = {"mode": mode,
               "fitted_ratio": report.geometric_ratio,
               "ratio_spread": report.ratio_spread,
               "reference_ratio": math.exp(math.pi / b),
               "reference_formula": "exp(pi / b)",
               "interior_count": int(len(report.interior_positions)),
               "kappa": report.kappa, **level_info}
    manifest = _manifest(ns, {"tol_E": ns.tol, "dt": ns.dt})
    csv_body = _csv(["k", "rho_k", "ratio"], rows)
    payload = {"nodes": [{"k": r[0], "rho_k": r[1], "ratio": r[2]} for r in rows],
               "summary": summary, "mode": mode}
    _emit(ns, csv_body=csv_body, json_payload=payload, manifest=manifest,
          sidecar_extra={"summary": summary})
    return 0


def cmd_meanfield(ns: argparse.Namespace) -> int:
    if ns.stabilizer == "none":
        stab = Stabilizer.none()
        if ns.t3:
            raise ConfigError("--t3 requires --stabilizer threebody or dd")
    elif ns.stabilizer == "threebody":
        stab = Stabilizer.three_body(ns.t3)
    else:
        if ns.alpha is None:
            raise ConfigError("--stabilizer dd requires --alpha")
        stab = Stabilizer.density_dependent(ns.t3, ns.alpha)
    model = MatterModel(Statistics(ns.statistics), ns.t0, stab, c3=ns.c3)
    report = classify_stability(model, tol=ns.tol)

    if not (0.0 < ns.n_min < ns.n_max):
        raise ConfigError(f"need 0 < --n-min < --n-max, got {ns.n_min}, {ns.n_max}")
    n = np.geomspace(ns.n_min, ns.n_max, ns.points)
    eps = energy_density(model, n)
    per = energy_per_particle(model, n)
    rows = zip(n, eps, per)
    manifest = _manifest(ns, {"stationarity_tol": ns.tol})
    rep = report.to_dict()
    payload = {"report": rep,
               "table": {"n": n, "epsilon": eps, "epsilon_per_particle": per}}
    csv_body = _csv(["n", "epsilon", "epsilon_per_particle"], rows)
    _emit(ns, csv_body=csv_body, json_payload=payload, manifest=manifest,
          sidecar_extra={"report": rep})
    return 0


def cmd_branches(ns: argparse.Namespace) -> int:
    roots = solve_branches(ns.x, ns.count, tol=ns.tol)
    rows = [[r.branch_index, r.value, r.lam, r.residual, r.near_pole]
            for r in roots]
    manifest = _manifest(ns, {"root_tol": ns.tol})
    csv_body = _csv(["branch", "nu_squared", "lambda", "residual", "near_pole"], rows)
    payload = {"x": ns.x,
               "branches": [{"branch": r.branch_index, "nu_squared": r.value,
                             "lambda": r.lam, "residual": r.residual,
                             "near_pole": bool(r.near_pole)} for r in roots]}
    _emit(ns, csv_body=csv_body, json_payload=payload, manifest=manifest)
    return 0


def _float_pair_help(default) -> str:
    return f"(default {default})"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="efimov-lab",
        description="Zero-range three-body collapse toolkit: hyperangular "
                    "eigenvalue branches, the attractive 1/rho^2 effective "
                    "potential, regularized geometric bound-state towers, and "
                    "mean-field stability of stabilized matter.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="transcendental constants b and C at unitarity")
    _add_common(p, 1e-10, "root tolerance for the b equation (default 1e-10)")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("potential", help="tabulate nu^2(rho) and the effective potential")
    p.add_argument("--a", type=float, required=True,
                   help="scattering length ('inf' for unitarity; a < 0 binds the pair)")
    p.add_argument("--mu", type=float, default=0.5, help="reduced mass (default 0.5)")
    p.add_argument("--rho-min", type=float, required=True)
    p.add_argument("--rho-max", type=float, required=True)
    p.add_argument("--points", type=int, default=200, help="grid points (default 200)")
    p.add_argument("--branch", type=int, default=0, help="branch index (default 0)")
    p.add_argument("--regularization", choices=_SCHEMES, default="none")
    p.add_argument("--R", type=float, default=None, help="regularization radius")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for branch tabulation (result independent of N)")
    _add_common(p, 1e-10, "eigenvalue root tolerance (default 1e-10)")
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("spectrum", help="bound levels of the regularized potential")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--R", type=float, required=True, help="regularization radius")
    p.add_argument("--rho-max", type=float, required=True, help="outer box radius")
    p.add_argument("--levels", type=int, default=8, help="maximum levels (default 8)")
    p.add_argument("--regularization", choices=_SCHEMES, default="hardwall")
    p.add_argument("--branch", type=int, default=0)
    p.add_argument("--dt", type=float, default=DEFAULT_DT,
                   help="log-grid step (default 1/512)")
    p.add_argument("--grid-points", type=int, default=512,
                   help="branch tabulation points (default 512)")
    p.add_argument("--threads", type=int, default=None)
    _add_common(p, 1e-8, "relative energy tolerance (default 1e-8)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("nodes", help="node geometry of a level, a cutoff sweep, "
                                     "or the closed-form self-test")
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--R", type=float, default=None)
    p.add_argument("--rho-max", type=float, default=None)
    p.add_argument("--level", type=int, default=None,
                   help="level index, 0 = most bound (default: shallowest clean level)")
    p.add_argument("--levels", type=int, default=8)
    p.add_argument("--regularization", choices=_SCHEMES, default="hardwall")
    p.add_argument("--branch", type=int, default=0)
    p.add_argument("--kappa-rho-max", type=float, default=0.2,
                   help="outer edge of the self-similar window (default 0.2)")
    p.add_argument("--wall-factor", type=float, default=2.0,
                   help="inner edge in units of R (default 2)")
    p.add_argument("--probe-E", type=float, default=None,
                   help="fixed negative energy: sweep the inner cutoff of the "
                        "unregularized potential instead of analysing a level")
    p.add_argument("--base-cutoff", type=float, default=1e-2)
    p.add_argument("--decades", type=int, default=4)
    p.add_argument("--per-decade", type=int, default=8)
    p.add_argument("--analytic", action="store_true",
                   help="self-test on f = sqrt(rho) sin(b ln rho)")
    p.add_argument("--periods", type=int, default=6,
                   help="half-periods in the analytic self-test (default 6)")
    p.add_argument("--dt", type=float, default=DEFAULT_DT)
    p.add_argument("--grid-points", type=int, default=512)
    p.add_argument("--threads", type=int, default=None)
    _add_common(p, 1e-8, "relative energy tolerance for the level search (default 1e-8)")
    p.set_defaults(func=cmd_nodes)

    p = sub.add_parser("meanfield", help="equation of state and stability class")
    p.add_argument("--statistics", choices=("bose", "fermi"), required=True)
    p.add_argument("--t0", type=float, required=True, help="two-body coupling")
    p.add_argument("--stabilizer", choices=("none", "threebody", "dd"), default="none")
    p.add_argument("--t3", type=float, default=0.0, help="stabilizer strength (>= 0)")
    p.add_argument("--alpha", type=float, default=None,
                   help="density exponent for --stabilizer dd (term ~ n^(alpha+2))")
    p.add_argument("--c3", type=float, default=None,
                   help="stabilizer prefactor (default: documented convention)")
    p.add_argument("--n-min", type=float, default=1e-4)
    p.add_argument("--n-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=100)
    _add_common(p, 1e-10, "relative stationarity tolerance (default 1e-10)")
    p.set_defaults(func=cmd_meanfield)

    p = sub.add_parser("branches", help="eigenvalue branches nu^2 at one x = rho/(sqrt(mu) a)")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--count", type=int, default=4, help="branches to solve (default 4)")
    _add_common(p, 1e-10, "eigenvalue root tolerance (default 1e-10)")
    p.set_defaults(func=cmd_branches)
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except UnregularizedPotentialError as exc:
        print(f"efimov-lab: forbidden: {exc}", file=sys.stderr)
        return 3
    except EfimovLabError as exc:
        print(f"efimov-lab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
