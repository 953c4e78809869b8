from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from thetastrat import linalg
from thetastrat.config import (
    DEFAULT_PRECISION,
    DEFAULT_SEED,
    Command,
    IndexMode,
    RunConfig,
    apply_overrides,
    environment_default,
    load_run_config,
)
from thetastrat.errors import ConfigError, IntegerGateError, MathPreconditionError, error_kind, exit_code_for
from thetastrat.ggw import ABClass, recursive_ggw
from thetastrat.hnopt import hn_over_fan, numerical_invariant_functional
from thetastrat.oracles import (
    SuiteResult,
    abelian_suite,
    grid_suite,
    invariants_suite,
    lattice_suite,
    series_suite,
    verlinde_suite,
)
from thetastrat.quadforms import WeightedRep, default_norm
from thetastrat.reports import build_report, dumps, strata_csv, write_atomic, write_report
from thetastrat.rootdata import build_root_datum
from thetastrat.series import SeriesRing
from thetastrat.strata import (
    StrataProblem,
    central_character_obstruction,
    enumerate_chi_active,
    semistable_empty_bound,
    stratum_report,
    torus_semistability_bound,
)
from thetastrat.twindex import (
    LevelData,
    WeylSign,
    ab_class_reduce,
    adams_index_formula,
    basic_level,
    default_ring,
    full_index_formula,
    trivial_rep,
    tw_index,
)

logger = logging.getLogger("thetastrat.cli")

SUITES = ("abelian", "verlinde", "grid", "lattice", "series", "invariants")
DEFAULT_CHECK_GAMMA = Fraction(2)


@dataclass(frozen=True)
class RunOptions:
    suites: tuple[str, ...] = SUITES
    type_tag: str = "A1"
    genera: tuple[int, ...] | None = None
    seed: int = DEFAULT_SEED
    precision: int = DEFAULT_PRECISION
    timing: bool = False


def build_problem(config: RunConfig) -> StrataProblem:
    datum = config.datum()
    return StrataProblem(datum, config.v_rep(), config.x_rep(), config.norm(datum), config.chi_vector(datum.rank))


def _default_check_problem() -> StrataProblem:
    datum = build_root_datum("A1")
    fundamental = WeightedRep.from_weights([(1,), (-1,)])
    return StrataProblem(datum, fundamental, fundamental, default_norm(datum), linalg.zero_vector(datum.rank))


def _require(config: RunConfig | None, command: str) -> RunConfig:
    if config is None:
        raise ConfigError(f"The {command} command needs --config.")
    return config


def _gamma(config: RunConfig) -> Fraction:
    if config.gamma is None:
        raise ConfigError("gamma: required for strata enumeration.")
    return Fraction(config.gamma)


def _central_part(problem: StrataProblem, d: linalg.Vector) -> linalg.Vector:
    return linalg.matvec(problem.center_projector, d)


def _level(config: RunConfig) -> LevelData:
    datum = config.datum()
    classical = config.level_matrix() or basic_level(datum)
    classical = linalg.mat_scale(config.level_scale, classical)
    return LevelData(datum, classical, config.orientation, WeylSign(config.weyl_sign.value))


def run_strata(config: RunConfig) -> dict[str, Any]:
    problem = build_problem(config)
    d = config.degree_vector(problem.rank)
    items = enumerate_chi_active(problem, _central_part(problem, d), _gamma(config), config.d_ker_vector(),
                                 threads=config.threads)
    emptiness = semistable_empty_bound(problem, d)
    result: dict[str, Any] = {
        "count": len(items),
        "strata": [stratum_report(problem, item).to_json() for item in items],
        "semistableBound": {
            "verdict": emptiness.verdict,
            "branch": emptiness.branch,
            "dNormSquared": str(emptiness.d_norm_sq),
            "chiNormSquared": str(emptiness.chi_norm_sq),
        },
        "centralCharacterObstruction": central_character_obstruction(problem, d),
    }
    if not problem.datum.semisimple_rank:
        result["torusBoundHolds"] = torus_semistability_bound(problem, d)
    return result


def strata_rows(result: dict[str, Any]) -> list[dict[str, Any]]:
    return [
        {
            "d": item["d"],
            "lambda": item["lambda"],
            "muSquared": item["muSquared"],
            "muSquaredFloat": float(Fraction(item["muSquared"])),
            "coneId": item["coneId"],
            "label": item["label"],
        }
        for item in result["strata"]
    ]


def run_hn_opt(config: RunConfig) -> dict[str, Any]:
    problem = build_problem(config)
    hn = config.hn
    ell = numerical_invariant_functional(
        problem.f_v,
        config.degree_vector(problem.rank),
        delta_gen=Fraction(hn.delta_gen),
        sigma_gen=[linalg.vec(chi) for chi in hn.sigma_gen],
        delta_mrk=Fraction(hn.delta_mrk),
        sigma_mrk=[linalg.vec(chi) for chi in hn.sigma_mrk],
    )
    best = hn_over_fan([(cone, ell) for cone in problem.fan], problem.b)
    return {"optimum": best.to_json(), "certificateVerified": best.certificate.verify()}


def run_index(config: RunConfig) -> dict[str, Any]:
    level = _level(config)
    datum = level.datum
    truncation = config.truncation
    ring = default_ring(level, trunc_t=truncation.t, trunc_s=truncation.s, precision=config.precision)
    u = config.u_rep() or trivial_rep(datum.rank)
    u_prime = config.u_prime_rep() or trivial_rep(datum.rank)
    x = config.x_rep()
    mode = config.index_mode
    factor = config.point_class_factor
    if mode is IndexMode.TW:
        report = tw_index(level, config.genus, u_prime, ring=ring)
    elif mode is IndexMode.FULL:
        report = full_index_formula(level, config.genus, config.u_rep() or WeightedRep.empty(), u_prime, x, ring,
                                    point_class_factor=factor)
    elif mode is IndexMode.ADAMS:
        report = adams_index_formula(level, config.genus, config.u_rep() or WeightedRep.empty(), u_prime, x, ring,
                                     point_class_factor=factor)
    else:
        ab = config.ab_class
        degree = config.genus if ab.degree is None else ab.degree
        reduced = ab_class_reduce(level, config.genus, ab.rank, degree, u, x, ring, point_class_factor=factor)
        return {"mode": mode.value, "hPrime": _matrix_json(level.h_prime), **reduced.to_json()}
    d = config.degree_vector(datum.rank)
    return {
        "mode": mode.value,
        "hPrime": _matrix_json(level.h_prime),
        "degree": [str(entry) for entry in d],
        "value": report.value(d),
        **report.to_json(),
    }


def _matrix_json(matrix: linalg.Matrix) -> list[list[str]]:
    return [[str(x) for x in row] for row in matrix]


def run_ggw(config: RunConfig) -> dict[str, Any]:
    problem = build_problem(config)
    truncation = config.truncation
    level = config.level_matrix()
    if level is not None:
        level = linalg.mat_scale(config.level_scale, level)
    ab = config.ab_class
    result = recursive_ggw(
        problem,
        config.degree_vector(problem.rank),
        ABClass(ab.rank, ab.degree, config.u_rep()),
        genus=config.genus,
        power=config.power,
        level=level,
        ring=SeriesRing(("t", "s"), (truncation.t, truncation.s), 0, config.precision),
        depth_limit=config.depth_limit,
        q_margin=truncation.q_margin,
        orientation=config.orientation,
        weyl_sign=WeylSign(config.weyl_sign.value),
        point_class_factor=config.point_class_factor,
        threads=config.threads,
    )
    return result.to_json()


def run_check(config: RunConfig | None, options: RunOptions) -> tuple[dict[str, Any], dict[str, Any]]:
    if config is not None:
        problem = build_problem(config)
        central = _central_part(problem, config.degree_vector(problem.rank))
        gamma = Fraction(config.gamma) if config.gamma is not None else DEFAULT_CHECK_GAMMA
        d_ker = config.d_ker_vector()
    else:
        problem = _default_check_problem()
        central, gamma, d_ker = linalg.zero_vector(problem.rank), DEFAULT_CHECK_GAMMA, None
    genera = options.genera or (0, 1, 2)
    outcomes: list[SuiteResult] = []
    for suite in options.suites:
        logger.info("Running oracle suite %s", suite)
        if suite == "abelian":
            outcomes.append(abelian_suite(genera=options.genera or (0, 1, 2, 3), precision=options.precision))
        elif suite == "verlinde":
            outcomes.append(verlinde_suite(type_tag=options.type_tag, genera=genera, precision=options.precision))
        elif suite == "grid":
            outcomes.append(grid_suite(seed=options.seed))
        elif suite == "lattice":
            outcomes.append(lattice_suite(problem, central, gamma, d_ker))
        elif suite == "series":
            outcomes.append(series_suite(precision=options.precision, genus=genera[0]))
        elif suite == "invariants":
            outcomes.append(invariants_suite(problem, central, gamma, d_ker, seed=options.seed,
                                             precision=options.precision))
        else:
            raise ConfigError(f"Unknown oracle suite '{suite}'.")
    passed = all(outcome.passed for outcome in outcomes)
    oracle = {"suites": [outcome.to_json() for outcome in outcomes], "passed": passed}
    return {"passed": passed, "suites": [outcome.suite for outcome in outcomes]}, oracle


def run(config: RunConfig | None, command: Command | str, options: RunOptions | None = None) -> dict[str, Any]:
    """Run one command and return the v1 report."""
    command = Command(command)
    options = options or RunOptions()
    started = time.perf_counter()
    oracle = None
    if command is Command.CHECK:
        result, oracle = run_check(config, options)
    elif command is Command.STRATA:
        result = run_strata(_require(config, command.value))
    elif command is Command.HN_OPT:
        result = run_hn_opt(_require(config, command.value))
    elif command is Command.INDEX:
        result = run_index(_require(config, command.value))
    else:
        result = run_ggw(_require(config, command.value))
    elapsed = time.perf_counter() - started
    logger.info("%s finished in %.3f s", command.value, elapsed)
    timing = {"seconds": elapsed} if options.timing else None
    return build_report(command.value, config, result, oracle=oracle, timing=timing)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="TOML run configuration.")
    parser.add_argument("--out", type=Path, help="Write the JSON report here instead of stdout.")
    parser.add_argument("--threads", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--trunc-t", type=int, dest="trunc_t")
    parser.add_argument("--precision", type=int)
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--timing", action="store_true", help="Include wall-clock timing in the report.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thetastrat",
        description="Theta-stratifications and index formulas for gauged maps into linear representations.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command, help_text in (
        ("strata", "Enumerate chi-active strata."),
        ("hn-opt", "Maximize the numerical invariant over the fan."),
        ("index", "Evaluate the twisted index formula."),
        ("ggw", "Compute recursive gauged GW invariants."),
    ):
        sub = subparsers.add_parser(command, help=help_text)
        _add_common(sub)
        if command == "strata":
            sub.add_argument("--csv", type=Path, help="Also write the strata table as CSV.")
    check = subparsers.add_parser("check", help="Run oracle suites.")
    _add_common(check)
    check.add_argument("suite", nargs="*", help=f"Any of {', '.join(SUITES)}.")
    check.add_argument("--type", dest="type_tag", default="A1")
    check.add_argument("--g", type=int, action="append", dest="genera")
    serve = subparsers.add_parser("serve", help="Serve the HTTP API.")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return parser


def configure_logging(level: str) -> None:
    root = logging.getLogger("thetastrat")
    if not any(getattr(handler, "_thetastrat", False) for handler in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        handler._thetastrat = True  # type: ignore[attr-defined]
        root.addHandler(handler)
    root.setLevel(level)


def _serve(host: str, port: int) -> int:
    import uvicorn

    uvicorn.run("backend.main:app", host=host, port=port)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    if args.command == "serve":
        return _serve(args.host, args.port)
    try:
        config = load_run_config(args.config) if args.config else None
        if config is not None:
            config = apply_overrides(config, threads=args.threads, seed=args.seed, trunc_t=args.trunc_t,
                                     precision=args.precision)
        seed = args.seed if args.seed is not None else (
            config.seed if config is not None else environment_default("THETASTRAT_SEED", DEFAULT_SEED)
        )
        precision = args.precision if args.precision is not None else (
            config.precision if config is not None else environment_default("THETASTRAT_PRECISION", DEFAULT_PRECISION)
        )
        options = RunOptions(
            suites=tuple(getattr(args, "suite", None) or SUITES),
            type_tag=getattr(args, "type_tag", "A1"),
            genera=tuple(args.genera) if getattr(args, "genera", None) else None,
            seed=seed,
            precision=precision,
            timing=args.timing,
        )
        report = run(config, args.command, options)
        if args.out:
            write_report(args.out, report)
        else:
            sys.stdout.write(dumps(report))
        csv_path = getattr(args, "csv", None)
        if csv_path:
            write_atomic(csv_path, strata_csv(strata_rows(report["result"])))
    except (ConfigError, MathPreconditionError, IntegerGateError) as exc:
        logger.debug("Command failed", exc_info=True)
        print(f"thetastrat: {error_kind(exc)} error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    if args.command == "check" and not report["result"]["passed"]:
        print("thetastrat: at least one oracle suite failed", file=sys.stderr)
        return 1
    return 0


__all__ = [
    "RunOptions",
    "SUITES",
    "build_parser",
    "build_problem",
    "configure_logging",
    "main",
    "run",
    "strata_rows",
]
