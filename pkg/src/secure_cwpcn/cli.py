#!/usr/bin/env python3
"""
Command-line entry point for the secure-cwpcn engine.

Subcommands:
- run: execute an experiment sweep from a spec file
- solve-state: solve one fading state and print the allocation
- oracle-check: compare the solvers with their brute-force oracles
- feasibility: check whether a requested outage reduction is reachable

Exit codes: 0 on success, 1 on invalid configuration or a failed oracle
check, 2 when the secrecy constraint cannot be met.
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

import numpy as np

from .config.loader import ConfigLoader, config_loader
from .config.settings import NetworkConfig, RuntimeSettings
from .errors import ConfigurationError, InfeasibleProblemError
from .harness.experiment import run_experiment
from .model.channel import generate_ensemble
from .model.rates import SecrecyMode
from .oracles import run_oracle_suite
from .solvers.bcd import interchange_gap, solve_per_state
from .solvers.dual import check_feasibility, rate_scale
from .solvers.ensemble import estimate_eps_p

logger = logging.getLogger("secure-cwpcn")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


def _apply_overrides(config: NetworkConfig, args: argparse.Namespace) -> NetworkConfig:
    if getattr(args, "mode", None):
        config = config.with_mode(SecrecyMode(args.mode))
    if getattr(args, "worst_eavesdropper_rule", False):
        config = config.with_updates(solver={"worst_eavesdropper_rule": True})
    if getattr(args, "seed", None) is not None:
        config = config.with_updates(seed=args.seed)
    return config


def load_config(
    args: argparse.Namespace, settings: RuntimeSettings, loader: ConfigLoader
) -> NetworkConfig:
    """Load the network config named on the command line (or in the environment) and apply flags."""
    config = loader.load_network_config(args.config or settings.config)
    return _apply_overrides(config, args)


def cmd_run(
    args: argparse.Namespace, settings: RuntimeSettings, loader: ConfigLoader
) -> int:
    spec = loader.load_experiment_spec(args.spec)
    config = loader.load_network_config(args.config or spec.config or settings.config)
    overrides = loader.load_spec_network_overrides(args.spec)
    if overrides:
        config = config.with_updates(**overrides)
    config = _apply_overrides(config, args)

    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.states is not None:
        updates["states"] = args.states
    if updates:
        spec = spec.model_copy(update=updates)

    output_dir = args.out or spec.output or settings.output_dir
    logger.info(f"Running experiment '{spec.name}' over {spec.axis}={spec.values}")
    result = run_experiment(
        spec, config, workers=args.workers or settings.workers, output_dir=output_dir
    )

    print(result.frame.to_string(index=False))
    infeasible = result.frame[
        (result.frame["algorithm"] == "alg1") & (result.frame["status"] != "ok")
    ]
    if not infeasible.empty:
        logger.error(f"alg1 infeasible at {spec.axis}={infeasible['value'].tolist()}")
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_solve_state(
    args: argparse.Namespace, settings: RuntimeSettings, loader: ConfigLoader
) -> int:
    config = load_config(args, settings, loader)
    state = generate_ensemble(config, 1)[0]
    eta = args.eta
    if eta is None:
        eta = config.solver.eta0
        if config.solver.rate_scaled_eta:
            eta *= rate_scale([state], config)

    solution = solve_per_state(state, config, eta)
    alloc = solution.allocation
    report = {
        "seed": config.seed,
        "mode": config.secrecy_mode.value,
        "eta": eta,
        "tau0": alloc.tau0,
        "tau1": alloc.tau1,
        "p0": alloc.p0,
        "p1": alloc.p1,
        "scheduled": alloc.scheduled,
        "p_s": alloc.p_s.tolist(),
        "q_s": alloc.q_s.tolist(),
        "su_rate": solution.su_rate,
        "secrecy": solution.secrecy,
        "outage": solution.outage,
        "dual_value": solution.dual_value,
        "bcd_iterations": solution.bcd_iterations,
        "converged": solution.converged,
        "violations": alloc.violations(state, config),
    }
    if config.secrecy_mode is SecrecyMode.NONCOLLUSIVE:
        report["interchange_gap"] = interchange_gap(state, config, eta)

    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_oracle_check(
    args: argparse.Namespace, settings: RuntimeSettings, loader: ConfigLoader
) -> int:
    config = load_config(args, settings, loader)
    report = run_oracle_suite(
        config,
        instances=args.instances,
        grid_points=args.grid_points,
        rng=np.random.default_rng([config.seed, 2]),
        bcd_instances=args.bcd_instances,
    )
    print(json.dumps(report.to_dict(), indent=2))

    if not report.passed(args.min_share):
        logger.error(
            f"Oracle check failed: {report.violations} violations, "
            f"BCD within 2% on {report.bcd_within_share:.1%}"
        )
        return EXIT_ERROR
    return EXIT_OK


def cmd_feasibility(
    args: argparse.Namespace, settings: RuntimeSettings, loader: ConfigLoader
) -> int:
    config = load_config(args, settings, loader)
    states = generate_ensemble(config, args.states)

    eps_p = estimate_eps_p(states, config)
    eps_0 = eps_p - config.delta_eps
    if eps_0 < 0:
        print(f"infeasible: delta_eps={config.delta_eps} exceeds eps_p={eps_p:.4f}")
        return EXIT_INFEASIBLE

    min_eps = check_feasibility(states, config, args.workers or settings.workers)
    verdict = "feasible" if min_eps <= eps_0 else "infeasible"
    print(f"{verdict}: eps_p={eps_p:.4f} eps_0={eps_0:.4f} min_eps_ps={min_eps:.4f}")
    return EXIT_OK if verdict == "feasible" else EXIT_INFEASIBLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="secure-cwpcn",
        description="Secrecy resource allocation for cooperative cognitive wireless-powered networks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  secure-cwpcn run --spec delta_eps_sweep --out results/
  secure-cwpcn solve-state --seed 7 --mode collusive
  secure-cwpcn oracle-check --instances 200 --grid-points 2000
  secure-cwpcn feasibility --config full_scale --states 2000
        """,
    )
    parser.add_argument("--log-level", help="Logging level (default: CWPCN_LOG_LEVEL or INFO)")
    parser.add_argument("--workers", type=int, help="Worker processes for per-state solves")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Config name in configs/ or path to a TOML/YAML file")
    common.add_argument("--seed", type=int, help="Root seed of the fading ensemble")
    common.add_argument(
        "--mode", choices=[mode.value for mode in SecrecyMode], help="Eavesdropper model"
    )
    common.add_argument(
        "--worst-eavesdropper-rule",
        action="store_true",
        help="Use the per-eavesdropper selection rule instead of the candidate-set updates",
    )

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    run_parser = subparsers.add_parser("run", parents=[common], help="Run an experiment sweep")
    run_parser.add_argument("--spec", required=True, help="Experiment spec name or path")
    run_parser.add_argument("--states", type=int, help="Fading states per sweep point")
    run_parser.add_argument("--out", help="Output directory")

    solve_parser = subparsers.add_parser("solve-state", parents=[common], help="Solve one fading state")
    solve_parser.add_argument("--eta", type=float, help="Outage penalty (default: solver eta0, in peak-rate units when rate-scaled)")

    oracle_parser = subparsers.add_parser("oracle-check", parents=[common], help="Run the oracle suite")
    oracle_parser.add_argument("--instances", type=int, default=1000)
    oracle_parser.add_argument("--grid-points", type=int, default=10_000)
    oracle_parser.add_argument("--bcd-instances", type=int, default=200)
    oracle_parser.add_argument("--min-share", type=float, default=0.9)

    feasibility_parser = subparsers.add_parser(
        "feasibility", parents=[common], help="Check whether the outage target is reachable"
    )
    feasibility_parser.add_argument("--states", type=int, default=5000)

    return parser


COMMANDS = {
    "run": cmd_run,
    "solve-state": cmd_solve_state,
    "oracle-check": cmd_oracle_check,
    "feasibility": cmd_feasibility,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    settings = RuntimeSettings()
    logging.basicConfig(level=(args.log_level or settings.log_level).upper())

    if not args.command:
        parser.print_help()
        return EXIT_OK

    try:
        loader = config_loader
        if settings.configs_dir is not None:
            loader = ConfigLoader(settings.configs_dir)
        return COMMANDS[args.command](args, settings, loader)
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_ERROR
    except InfeasibleProblemError as e:
        logger.error(f"Infeasible: {e}")
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
