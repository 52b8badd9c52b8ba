"""Batch front-end: JSON config in, JSON/CSV results out.

Commands
--------
solve     solve one (system, eps) and write the response solution
diagnose  small-divisor profile and admissibility bounds for omega
sweep     trace zeta, norms, ratios and residuals over an eps grid
verify    cross-check the solver against its independent oracles

Exit codes: 0 success, 1 config/usage error, 2 divergence or failed
verification, 3 hypothesis failure, 4 resonance or enumeration guard.
Identical configs produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys as _sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import jsonschema

import qpresponse.trees as trees
from .bifurcation import solve_response
from .diophantine import (
    alpha_n,
    classify_eps_sequence,
    epsilon_n,
    estimate_epsilon_bar,
    min_small_divisor,
)
from .errors import (
    BifurcationSolveError,
    GuardExceededError,
    HypothesisError,
    LadderDivergenceError,
    QPResponseError,
    ResonanceError,
    StiffnessError,
    SymmetryError,
)
from .fourier import FourierSeries
from .ladder import build_ladder
from .systems import (
    GeneralSystem,
    SeparableSystem,
    certify_envelope,
    check_nonresonance,
    find_c0,
    recentre,
)
from .validation import (
    compare,
    direct_solve,
    response_state,
    write_trajectory_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2
EXIT_HYPOTHESIS = 3
EXIT_GUARD = 4

_OPTION_DEFAULTS = {
    "A_fraction": 0.5,
    "n_max": 8,
    "N_list": None,
    "alpha_guard": None,
    "zeta_bracket": None,
    "zeta_tol": None,
    "scan_points": 7,
    "picard_tol": 1e-12,
    "picard_max_iter": 10_000,
    "picard_damping": 1.0,
    "ode_tol": 1e-10,
    "T0": None,
    "T1": 50.0,
    "samples": 2001,
    "ics": None,
    "c0_hint": 0.0,
    "continuity_probe": True,
    "attraction_tol": 1e-5,
    "tree_order": 4,
    "tree_zeta": 0.02,
    "oracle_tol": 1e-12,
    "agreement_tol": 1e-10,
    "ode_check_tol": 1e-4,
}

_NUMBER = {"type": "number"}
_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["dimension", "omega", "theorem", "truncation", "xi", "rho"],
    "properties": {
        "dimension": {"type": "integer", "minimum": 1},
        "omega": {"type": "array", "items": _NUMBER, "minItems": 1},
        "theorem": {"enum": [1, 2]},
        "g": {
            "type": "object",
            "additionalProperties": False,
            "required": ["coeffs"],
            "properties": {
                "c_ref": _NUMBER,
                "coeffs": {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "prefixItems": [{"type": "integer", "minimum": 0}, _NUMBER],
                        "minItems": 2,
                        "maxItems": 2,
                    },
                },
            },
        },
        "h": {
            "type": "object",
            "additionalProperties": False,
            "required": ["grid"],
            "properties": {
                "c_ref": _NUMBER,
                "grid": {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "prefixItems": [
                            {"type": "array", "items": {"type": "integer"}},
                            {"type": "integer", "minimum": 0},
                            _NUMBER,
                            _NUMBER,
                        ],
                        "minItems": 3,
                        "maxItems": 4,
                    },
                },
            },
        },
        "f": {
            "type": "object",
            "additionalProperties": False,
            "required": ["d", "modes"],
            "properties": {
                "d": {"type": "integer", "minimum": 1},
                "modes": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["nu", "re"],
                        "properties": {
                            "nu": {"type": "array", "items": {"type": "integer"}},
                            "re": _NUMBER,
                            "im": _NUMBER,
                        },
                    },
                },
            },
        },
        "epsilon": _NUMBER,
        "epsilon_grid": {"type": "array", "items": _NUMBER},
        "truncation": {
            "type": "object",
            "additionalProperties": False,
            "required": ["K", "N"],
            "properties": {
                "K": {"type": "integer", "minimum": 1},
                "N": {"type": "integer", "minimum": 1},
            },
        },
        "xi": _NUMBER,
        "rho": _NUMBER,
        "search_interval": {
            "type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2,
        },
        "options": {
            "type": "object",
            "additionalProperties": False,
            "properties": {key: {} for key in _OPTION_DEFAULTS},
        },
    },
}


class ConfigError(Exception):
    pass


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(config, _SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from exc
    theorem = config["theorem"]
    if theorem == 1 and ("g" not in config or "f" not in config):
        raise ConfigError("theorem 1 configs need both 'g' and 'f'")
    if theorem == 2 and "h" not in config:
        raise ConfigError("theorem 2 configs need 'h'")
    if len(config["omega"]) != config["dimension"]:
        raise ConfigError("omega length must equal dimension")
    return config


def options_of(config: dict) -> dict:
    merged = dict(_OPTION_DEFAULTS)
    merged.update(config.get("options", {}))
    return merged


def build_system(config: dict):
    """Parse, certify the simple-zero hypothesis and recentre."""
    omega = tuple(config["omega"])
    opts = options_of(config)
    interval = config.get("search_interval", [-2.0, 2.0])
    if config["theorem"] == 1:
        forcing = FourierSeries.from_json_dict(config["f"], real_valued=True)
        g_spec = config["g"]
        coeffs = {int(p): float(c) for p, c in g_spec["coeffs"]}
        c_ref = float(g_spec.get("c_ref", 0.0))
        f0 = forcing.zero_mode().real
        roots = find_c0(coeffs, f0, interval, center=c_ref)
        raw = SeparableSystem(omega, forcing, coeffs, center=c_ref)
    else:
        h_spec = config["h"]
        grid = {}
        for entry in h_spec["grid"]:
            nu, p, re = entry[0], entry[1], entry[2]
            im = entry[3] if len(entry) > 3 else 0.0
            key = (tuple(int(x) for x in nu), int(p))
            grid[key] = grid.get(key, 0j) + complex(re, im)
        c_ref = float(h_spec.get("c_ref", 0.0))
        raw = GeneralSystem(omega, grid, center=c_ref)
        roots = find_c0(raw.averaged_taylor(), 0.0, interval, center=c_ref)
    simple = [r for r in roots if r.simple]
    if not simple:
        found = ", ".join(f"(c0={r.c0:.6g}, slope={r.slope:.3g})" for r in roots)
        raise HypothesisError(
            "no certified simple zero on the search interval"
            + (f"; flagged roots: {found}" if found else "")
        )
    hint = float(opts["c0_hint"])
    c0 = min(simple, key=lambda r: (abs(r.c0 - hint), r.c0)).c0
    sys_ = recentre(raw, c0)
    envelope = certify_envelope(sys_, xi=float(config["xi"]),
                                rho=float(config["rho"]))
    return sys_, envelope


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _solve_once(config: dict, eps: float, literal: bool, probe: bool):
    sys_, envelope = build_system(config)
    K = config["truncation"]["K"]
    N = config["truncation"]["N"]
    opts = options_of(config)
    report = check_nonresonance(sys_.omega, N)
    if report.resonant:
        raise ResonanceError(
            f"omega is resonant up to N={N}: omega . {report.argmin} = "
            f"{report.min_value:.3e}",
            nu=report.argmin, value=report.min_value,
        )
    bounds = None
    try:
        bounds = estimate_epsilon_bar(
            envelope, sys_.a, sys_.omega,
            A_fraction=float(opts["A_fraction"]),
            theorem=config["theorem"],
            guard=opts["alpha_guard"],
        )
    except GuardExceededError:
        pass  # bounds are advisory for solve
    bracket = opts["zeta_bracket"]
    solution = solve_response(
        eps, sys_, K, N,
        envelope=envelope,
        bounds=bounds,
        bracket=None if bracket is None else tuple(bracket),
        tol=opts["zeta_tol"],
        literal=literal,
        probe=probe,
        scan_points=int(opts["scan_points"]),
    )
    return sys_, envelope, bounds, solution


def cmd_solve(config: dict, out_dir: Path, literal: bool) -> int:
    opts = options_of(config)
    eps = float(config["epsilon"])
    sys_, envelope, bounds, solution = _solve_once(
        config, eps, literal, bool(opts["continuity_probe"])
    )
    _write_json(out_dir / "solution.json", solution.to_json_dict())
    ladder = build_ladder(sys_, eps, solution.zeta, solution.K, solution.N)
    _write_json(out_dir / "ladder.json", ladder.to_json_dict())
    print(f"c0 = {_fmt(solution.c0)}")
    print(f"zeta = {_fmt(solution.zeta)}")
    print(f"residual_range = {_fmt(solution.residual_range)}")
    print(f"residual_bifurcation = {_fmt(solution.residual_bifurcation)}")
    print(f"ratio_estimate = {_fmt(solution.ratio_estimate)}")
    if bounds is not None:
        print(f"eps_bar = {_fmt(bounds.eps_bar)}")
    print(f"wrote {out_dir / 'solution.json'}")
    return EXIT_OK


def cmd_diagnose(config: dict, out_dir: Path) -> int:
    sys_, envelope = build_system(config)
    opts = options_of(config)
    omega = sys_.omega
    n_max = 0 if len(omega) == 1 else int(opts["n_max"])
    guard = opts["alpha_guard"]
    rows = []
    running = 0.0
    failure = None
    for n in range(n_max + 1):
        try:
            a, _ = alpha_n(omega, n, guard=guard)
        except (ResonanceError, GuardExceededError) as exc:
            failure = exc
            break
        e = epsilon_n(a, n)
        running += e
        rows.append((n, a, e, running))
    csv_path = out_dir / "diagnose.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "alpha_n", "eps_n", "bryuno_partial"])
        for n, a, e, b in rows:
            writer.writerow([n, repr(a), repr(e), repr(b)])
    print(f"wrote {csv_path} ({len(rows)} rows)")
    if failure is not None:
        print(f"diagnose stopped early: {failure}", file=_sys.stderr)
        return EXIT_GUARD
    classification = classify_eps_sequence([r[2] for r in rows])
    print(f"classification = {classification}")
    bounds = estimate_epsilon_bar(
        envelope, sys_.a, omega,
        A_fraction=float(opts["A_fraction"]),
        theorem=config["theorem"],
        guard=guard,
    )
    payload = bounds.to_json_dict()
    payload["classification"] = classification
    N_list = opts["N_list"] or [config["truncation"]["N"]]
    payload["r_table"] = {
        str(N): min_small_divisor(omega, int(N))[0] for N in N_list
    }
    _write_json(out_dir / "epsilon_bounds.json", payload)
    print(f"eps_bar = {_fmt(bounds.eps_bar)} (n0 = {bounds.n0}, "
          f"guard_limited = {_fmt(bounds.guard_limited)})")
    return EXIT_OK


def _sweep_point(args):
    config, eps, literal = args
    try:
        _, _, _, solution = _solve_once(config, eps, literal, probe=False)
        return {
            "epsilon": eps,
            "zeta": solution.zeta,
            "u_norm": solution.u.without_zero_mode().weighted_norm(0.0),
            "ratio_estimate": solution.ratio_estimate,
            "residual_range": solution.residual_range,
            "residual_bifurcation": solution.residual_bifurcation,
            "converged": True,
        }
    except (LadderDivergenceError, BifurcationSolveError):
        return {
            "epsilon": eps,
            "zeta": math.nan,
            "u_norm": math.nan,
            "ratio_estimate": math.nan,
            "residual_range": math.nan,
            "residual_bifurcation": math.nan,
            "converged": False,
        }


_SWEEP_COLUMNS = ["epsilon", "zeta", "u_norm", "ratio_estimate",
                  "residual_range", "residual_bifurcation", "converged"]


def cmd_sweep(config: dict, out_dir: Path, literal: bool, parallel: int) -> int:
    grid = sorted(float(e) for e in config.get("epsilon_grid", []))
    jobs = [(config, eps, literal) for eps in grid]
    if parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            results = [_sweep_point(job) for job in jobs]
    results.sort(key=lambda row: row["epsilon"])
    csv_path = out_dir / "sweep.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_SWEEP_COLUMNS)
        for row in results:
            writer.writerow([_fmt(row[c]) for c in _SWEEP_COLUMNS])
    print(f"wrote {csv_path} ({len(results)} rows)")
    good = [(r["epsilon"], r["zeta"]) for r in results if r["converged"]]
    if len(good) >= 2:
        slopes = [
            abs(z2 - z1) / (e2 - e1)
            for (e1, z1), (e2, z2) in zip(good, good[1:]) if e2 > e1
        ]
        if slopes:
            # empirical finite differences only; nothing is claimed about
            # differentiability in the dissipation parameter
            print(f"max |d zeta / d eps| (finite differences) = "
                  f"{_fmt(max(slopes))}")
    return EXIT_OK


def cmd_verify(config: dict, out_dir: Path, literal: bool) -> int:
    opts = options_of(config)
    eps = float(config["epsilon"])
    checks: list[tuple[str, bool, str]] = []

    sys_, envelope, bounds, solution = _solve_once(config, eps, literal,
                                                   probe=False)
    K = config["truncation"]["K"]
    N = config["truncation"]["N"]
    theorem = config["theorem"]

    # 1. tree-oracle equivalence on low orders
    k_max = min(int(opts["tree_order"]), 4)
    zeta_probe = float(opts["tree_zeta"])
    ladder = build_ladder(sys_, eps, zeta_probe, k_max, N)
    ctx = trees.TreeValueContext(sys_, eps, zeta_probe)
    tol = float(opts["oracle_tol"])
    worst = 0.0
    worst_detail = ""
    for k in range(1, k_max + 1):
        order = ladder.order(k)
        scale = max([abs(c) for _, c in order.items_sorted()] or [1.0])
        for nu in order.support():
            if not any(nu):
                continue
            gap = abs(trees.sum_trees(k, nu, ctx) - order.coeff(nu))
            rel = gap / max(scale, 1e-16)
            if rel > worst:
                worst = rel
                worst_detail = f"k={k}, nu={nu}"
    ok = worst <= tol
    checks.append(("tree_oracle_equivalence", ok,
                   f"worst relative gap {worst:.2e} ({worst_detail})"))

    # 2. counting relations on every enumerated tree
    support = trees.TreeSupport.from_system(sys_)
    failed_counts = 0
    total_trees = 0
    for k in range(1, k_max + 1):
        for tree in trees.enumerate_all(k, support, theorem):
            total_trees += 1
            if not all(trees.verify_counting(tree, theorem).values()):
                failed_counts += 1
    checks.append(("tree_counting_relations", failed_counts == 0,
                   f"{total_trees} trees, {failed_counts} failures"))

    # 3. independent fixed-point solve
    fp = direct_solve(sys_, eps, N, seed=None, tol=float(opts["picard_tol"]),
                      max_iter=int(opts["picard_max_iter"]),
                      damping=float(opts["picard_damping"]))
    if fp.converged:
        gap = max(
            abs(solution.u.coeff(nu) - fp.u_direct.coeff(nu))
            for nu in set(solution.u.support()) | set(fp.u_direct.support())
        )
        ok = gap <= float(opts["agreement_tol"])
        checks.append(("direct_solve_agreement", ok, f"max gap {gap:.2e}"))
    else:
        checks.append(("direct_solve_agreement", False,
                       f"fixed point diverged (residual {fp.final_residual:.2e})"))

    # 4. trajectory comparison (attraction needs a > 0 and integrable eps)
    if sys_.a > 0 and eps >= 1e-3:
        x0, v0 = response_state(solution, sys_.omega, 0.0)
        ics = opts["ics"] or [(x0 + 0.05, v0), (x0 - 0.05, v0 + 0.05)]
        try:
            report = compare(
                solution, sys_, eps, [tuple(ic) for ic in ics],
                T0=opts["T0"], T1=float(opts["T1"]),
                tol=float(opts["ode_tol"]), samples=int(opts["samples"]),
                attraction_tol=float(opts["attraction_tol"]),
            )
            ok = report.sup_error <= float(opts["ode_check_tol"])
            checks.append(("trajectory_comparison", ok,
                           f"sup error {report.sup_error:.2e}, "
                           f"pairwise {report.pairwise_max:.2e}"))
            write_trajectory_csv(out_dir / "trajectory.csv",
                                 report.trajectories[0], solution, sys_.omega)
        except StiffnessError as exc:
            checks.append(("trajectory_comparison", False, str(exc)))
    else:
        print("trajectory_comparison: SKIPPED (needs a > 0 and eps >= 1e-3)")

    all_ok = True
    for name, ok, detail in checks:
        print(f"{name}: {'PASS' if ok else 'FAIL'} ({detail})")
        all_ok = all_ok and ok
    _write_json(out_dir / "verify.json", {
        "checks": [
            {"name": name, "passed": ok, "detail": detail}
            for name, ok, detail in checks
        ],
        "all_passed": all_ok,
    })
    return EXIT_OK if all_ok else EXIT_DIVERGED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpresponse",
        description="quasi-periodic response solver for strongly "
                    "dissipative forced systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("solve", "solve one (system, eps) and write the response"),
        ("diagnose", "small-divisor profile and admissibility bounds"),
        ("sweep", "solve over an eps grid and emit a CSV"),
        ("verify", "run the independent oracles against the solver"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON problem config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--parallel", type=int, default=1,
                       help="worker processes for sweep points")
        p.add_argument("--literal-3-1b", action="store_true",
                       dest="literal",
                       help="evaluate the zero-mode balance in its literal "
                            "scaled form (the linear angle-coupling average "
                            "enters undamped)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        config = load_config(args.config)
        if args.command == "solve":
            return cmd_solve(config, out_dir, args.literal)
        if args.command == "diagnose":
            return cmd_diagnose(config, out_dir)
        if args.command == "sweep":
            return cmd_sweep(config, out_dir, args.literal, args.parallel)
        return cmd_verify(config, out_dir, args.literal)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    except HypothesisError as exc:
        print(f"hypothesis failure: {exc}", file=_sys.stderr)
        return EXIT_HYPOTHESIS
    except (ResonanceError, GuardExceededError) as exc:
        print(f"resonance/guard: {exc}", file=_sys.stderr)
        return EXIT_GUARD
    except (LadderDivergenceError, BifurcationSolveError, StiffnessError,
            SymmetryError) as exc:
        print(f"solver failure: {exc}", file=_sys.stderr)
        return EXIT_DIVERGED
    except QPResponseError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG


def entry():
    raise SystemExit(main())
