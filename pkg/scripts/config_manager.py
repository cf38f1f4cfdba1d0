#!/usr/bin/env python3
"""
Config Manager Utility

A command-line utility to manage network configs and experiment specs:
- List available configs and experiment specs
- Validate config files
- Show a config summary in physical units
- Print the canonical hash a run manifest would record
"""

import argparse
import sys
from pathlib import Path

# Add the src directory to the path so we can import our modules
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from secure_cwpcn.config.loader import ConfigLoader
from secure_cwpcn.errors import ConfigurationError
from secure_cwpcn.harness.experiment import config_hash


def list_configs(loader: ConfigLoader):
    """List all available network configs and experiment specs."""
    configs = loader.get_available_configs()
    experiments = loader.get_available_experiments()
    if not configs and not experiments:
        print("No config files found.")
        return

    print("Network configs:")
    for name in configs:
        try:
            metadata = loader.get_config_metadata(name)
            print(f"  • {name}")
            print(f"    Description: {metadata.description or '-'}")
        except ConfigurationError as e:
            print(f"  • {name} (Error loading: {e})")
    print()

    print("Experiment specs:")
    for name in experiments:
        try:
            spec = loader.load_experiment_spec(name)
            print(f"  • {name}: {', '.join(spec.algorithms)} over {spec.axis}={spec.values}")
        except ConfigurationError as e:
            print(f"  • {name} (Error loading: {e})")


def validate_config(loader: ConfigLoader, name: str) -> bool:
    """Validate a network config or an experiment spec."""
    document = loader.load_document(name)
    try:
        if "experiment" in document:
            spec = loader.load_experiment_spec(name)
            if spec.config:
                config = loader.load_network_config(spec.config)
            else:
                config = loader.load_network_config("default")
            overrides = loader.load_spec_network_overrides(name)
            if overrides:
                config = config.with_updates(**overrides)
            print(f"✅ Experiment spec '{name}' is valid!")
            print(f"   Sweep: {spec.axis} over {spec.values}")
        else:
            config = loader.load_network_config(name)
            print(f"✅ Config '{name}' is valid!")
    except (ConfigurationError, ValueError) as e:
        print(f"❌ '{name}' is invalid: {e}")
        return False

    warnings = []
    if config.collusive and config.solver.worst_eavesdropper_rule:
        warnings.append("worst_eavesdropper_rule only changes the non-collusive updates")
    if config.fixed_topology:
        warnings.append("fixed_topology holds positions for the whole ensemble")
    if config.solver.search_grid_points < 20:
        warnings.append("search_grid_points below 20 may miss collusive-mode optima")

    if warnings:
        print("\n⚠️  Warnings:")
        for warning in warnings:
            print(f"   {warning}")
    return True


def show_summary(loader: ConfigLoader, name: str):
    """Show a network config in physical units."""
    try:
        config = loader.load_network_config(name)
    except ConfigurationError as e:
        print(f"❌ Error loading '{name}': {e}")
        return

    metadata = loader.get_config_metadata(name)
    print(f"Config Summary: {metadata.name}")
    print(f"Description: {metadata.description or '-'}")
    print()

    print("Network:")
    print(f"  Secondary users (K): {config.num_sus}")
    print(f"  Eavesdroppers (N): {config.num_eavs}")
    print(f"  Eavesdropper model: {config.secrecy_mode.value}")
    print(f"  Target secrecy rate: {config.target_rate} bits/s/Hz")
    print(f"  Outage reduction: {config.delta_eps}")
    print()

    print("Powers:")
    print(f"  P_max: {config.p_max:.4g} W")
    print(f"  Access point: {config.chap_power:.4g} W")
    print(f"  Noise: {config.noise_power:.4g} W")
    print(f"  Harvest efficiency: {config.harvest_efficiency}")
    print()

    solver = config.solver
    print("Solver:")
    print(f"  eta0={solver.eta0}, theta0={solver.theta0}, dual_eps={solver.dual_eps}")
    print(f"  max_dual_iters={solver.max_dual_iters}, bcd_max_iters={solver.bcd_max_iters}")
    print(f"  check_feasibility={solver.check_feasibility}, rate_scaled_eta={solver.rate_scaled_eta}")


def show_hash(loader: ConfigLoader, name: str):
    """Print the canonical config hash."""
    try:
        print(config_hash(loader.load_network_config(name)))
    except ConfigurationError as e:
        print(f"❌ Error loading '{name}': {e}")


def main():
    parser = argparse.ArgumentParser(
        description="Manage secure-cwpcn configs and experiment specs",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python config_manager.py list
  python config_manager.py validate default
  python config_manager.py validate delta_eps_sweep
  python config_manager.py summary full_scale
  python config_manager.py hash collusive
        """
    )

    parser.add_argument(
        "--configs-dir",
        help="Directory containing config files (default: ../configs)"
    )

    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    subparsers.add_parser('list', help='List all available configs and specs')

    validate_parser = subparsers.add_parser('validate', help='Validate a config or spec')
    validate_parser.add_argument('name', help='Config or spec name, or a file path')

    summary_parser = subparsers.add_parser('summary', help='Show config summary')
    summary_parser.add_argument('name', help='Config name or file path')

    hash_parser = subparsers.add_parser('hash', help='Print the canonical config hash')
    hash_parser.add_argument('name', help='Config name or file path')

    args = parser.parse_args()

    if not args.command:
        parser.print_help()
        return 0

    configs_dir = args.configs_dir
    if configs_dir is None:
        configs_dir = Path(__file__).parent.parent / "configs"

    loader = ConfigLoader(str(configs_dir))

    try:
        if args.command == 'list':
            list_configs(loader)
        elif args.command == 'validate':
            return 0 if validate_config(loader, args.name) else 1
        elif args.command == 'summary':
            show_summary(loader, args.name)
        elif args.command == 'hash':
            show_hash(loader, args.name)
    except ConfigurationError as e:
        print(f"❌ {e}")
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
