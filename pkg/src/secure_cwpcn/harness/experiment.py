"""
Experiment orchestration: sweeps, aggregation and result files.

A sweep varies one field of the network configuration. At every sweep value
each replicate draws one fading ensemble and every requested algorithm runs
on that same ensemble, so comparisons between algorithms are paired.
"""

import hashlib
import json
import logging
import math
import platform
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import pydantic
import scipy
from jsonschema import validate

from .. import __version__
from ..config.settings import ExperimentSpec, NetworkConfig
from ..errors import InfeasibleProblemError
from ..model.channel import generate_ensemble
from ..model.rates import SecrecyMode
from ..solvers.dual import run_dual
from ..solvers.ensemble import EnsembleSolution
from ..solvers.variants import run_greedy, run_no_cooperation, run_unknown_csi

logger = logging.getLogger("secure-cwpcn.experiment")

RESULT_COLUMNS = [
    "algorithm",
    "mode",
    "axis",
    "value",
    "replicates",
    "states",
    "ergodic_rate",
    "ergodic_rate_se",
    "eps_p",
    "eps_ps",
    "eps_ps_se",
    "eps_0",
    "residual",
    "eta",
    "dual_iterations",
    "converged",
    "status",
    "config_hash",
    "seed",
    "wall_time",
]

RESULTS_FILE = "results.csv"
MANIFEST_FILE = "manifest.json"


@dataclass
class ReplicateRun:
    """What one algorithm achieved on one replicate ensemble."""

    status: str
    eps_p: float
    eps_0: float
    su_rates: List[float] = field(default_factory=list)
    eps_ps: float = math.nan
    eta: float = math.nan
    iterations: int = 0
    converged: bool = False


@dataclass
class ExperimentResult:
    """
    Aggregated rows, per-run dual logs and the run manifest.

    Attributes:
        frame: One row per (algorithm, mode, sweep value) with ``RESULT_COLUMNS``
        dual_logs: Dual iteration logs of alg1 runs, keyed by file name
        manifest: Everything needed to reproduce the run
    """

    frame: pd.DataFrame
    dual_logs: Dict[str, pd.DataFrame]
    manifest: Dict[str, Any]

    def write(self, output_dir: Path) -> Path:
        """Write the result CSV, the dual logs and the manifest; returns the CSV path."""
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)

        results_path = output_dir / RESULTS_FILE
        self.frame.to_csv(results_path, index=False, encoding="utf-8")
        for name, log in self.dual_logs.items():
            log.to_csv(output_dir / name, index=False, encoding="utf-8")

        with open(output_dir / MANIFEST_FILE, "w", encoding="utf-8") as f:
            json.dump(self.manifest, f, indent=2, sort_keys=True)

        logger.info(f"Wrote {len(self.frame)} result rows to {results_path}")
        return results_path


def config_hash(config: NetworkConfig) -> str:
    """sha256 of the canonical JSON form of a configuration."""
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_manifest_schema() -> Dict[str, Any]:
    """Read the packaged JSON schema of the run manifest."""
    text = resources.files("secure_cwpcn").joinpath("resources/run_manifest.schema.json").read_text(
        encoding="utf-8"
    )
    return json.loads(text)


def library_versions() -> Dict[str, str]:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
        "pydantic": pydantic.VERSION,
    }


def _run_algorithm(algorithm: str, states, config: NetworkConfig, workers: int) -> ReplicateRun:
    try:
        if algorithm == "greedy":
            solution = run_greedy(states, config, workers=workers)
        elif algorithm == "unknown_csi":
            solution = run_unknown_csi(states, config, workers=workers)
        elif algorithm == "no_coop_baseline":
            solution = run_no_cooperation(states, config)
        else:
            raise ValueError(f"Unknown algorithm: {algorithm}")
    except InfeasibleProblemError as e:
        logger.warning(f"{algorithm} infeasible: {e}")
        return ReplicateRun(status="infeasible", eps_p=e.eps_p, eps_0=e.eps_0)

    return _replicate_from_solution(solution, len(states))


def _replicate_from_solution(solution: EnsembleSolution, num_states: int) -> ReplicateRun:
    if solution.per_state:
        su_rates = [s.su_rate for s in solution.per_state]
    else:
        su_rates = [0.0] * num_states
    return ReplicateRun(
        status="ok",
        eps_p=solution.eps_p,
        eps_0=solution.eps_0,
        su_rates=su_rates,
        eps_ps=solution.eps_ps,
        eta=solution.eta,
        iterations=solution.trace.iterations,
        converged=solution.trace.converged,
    )


def _standard_error(values: List[float]) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(np.asarray(values), ddof=1) / math.sqrt(len(values)))


def _aggregate(runs: List[ReplicateRun]) -> Dict[str, Any]:
    feasible = [run for run in runs if run.status == "ok"]
    if len(feasible) == len(runs):
        status = "ok"
    elif feasible:
        status = "partial"
    else:
        status = "infeasible"

    eps_p = math.fsum(run.eps_p for run in runs) / len(runs)
    eps_0 = math.fsum(run.eps_0 for run in runs) / len(runs)
    row = {
        "eps_p": eps_p,
        "eps_0": eps_0,
        "status": status,
        "ergodic_rate": math.nan,
        "ergodic_rate_se": math.nan,
        "eps_ps": math.nan,
        "eps_ps_se": math.nan,
        "residual": math.nan,
        "eta": math.nan,
        "dual_iterations": 0,
        "converged": False,
    }
    if not feasible:
        return row

    rates = [rate for run in feasible for rate in run.su_rates]
    count = len(rates)
    eps_ps = math.fsum(run.eps_ps for run in feasible) / len(feasible)
    row.update(
        ergodic_rate=math.fsum(rates) / count,
        ergodic_rate_se=_standard_error(rates),
        eps_ps=eps_ps,
        eps_ps_se=math.sqrt(max(eps_ps * (1.0 - eps_ps), 0.0) / count),
        residual=eps_ps - math.fsum(run.eps_0 for run in feasible) / len(feasible),
        eta=math.fsum(run.eta for run in feasible) / len(feasible),
        dual_iterations=max(run.iterations for run in feasible),
        converged=all(run.converged for run in feasible),
    )
    return row


def _finite_or_none(value: float) -> Optional[float]:
    return None if value is None or not math.isfinite(value) else float(value)


def run_experiment(
    spec: ExperimentSpec,
    config: NetworkConfig,
    workers: int = 1,
    output_dir: Optional[Path] = None,
) -> ExperimentResult:
    """
    Run every algorithm of a spec at every sweep value.

    When the spec lists ``modes``, each algorithm also runs once per
    eavesdropper model on the same ensemble; otherwise the model of
    ``config`` is used.

    Args:
        spec: Sweep axis and values, algorithms, ensemble size, replicates, seed
        config: Base network configuration; the swept field is overridden
        workers: Worker processes for the per-state solves
        output_dir: Where to write results; nothing is written when None

    Returns:
        ExperimentResult with one row per (algorithm, mode, sweep value)
    """
    started = time.perf_counter()
    rows: List[Dict[str, Any]] = []
    manifest_rows: List[Dict[str, Any]] = []
    dual_logs: Dict[str, pd.DataFrame] = {}
    modes = spec.modes or [config.secrecy_mode]

    for value in spec.values:
        axis_value = spec.axis_value(value)
        point_config = config.with_updates(**{spec.axis: axis_value})
        mode_configs = {mode: point_config.with_mode(mode) for mode in modes}
        logger.info(f"Sweep point {spec.axis}={axis_value} ({len(spec.algorithms)} algorithms)")

        keys = [(mode, name) for mode in modes for name in spec.algorithms]
        runs: Dict[Tuple[SecrecyMode, str], List[ReplicateRun]] = {key: [] for key in keys}
        timings: Dict[Tuple[SecrecyMode, str], float] = {key: 0.0 for key in keys}
        for replicate in range(spec.replicates):
            # gains do not depend on the eavesdropper model, so every mode sees one ensemble
            states = generate_ensemble(point_config, spec.states, seed=spec.seed, replicate=replicate)
            for mode, algorithm in keys:
                mode_config = mode_configs[mode]
                tic = time.perf_counter()
                if algorithm == "alg1":
                    run, log = _run_dual_with_log(states, mode_config, workers)
                    if log is not None:
                        name = f"dual_{algorithm}_{mode.value}_{spec.axis}_{axis_value:g}_r{replicate}"
                        dual_logs[f"{name}.csv"] = log
                else:
                    run = _run_algorithm(algorithm, states, mode_config, workers)
                timings[(mode, algorithm)] += time.perf_counter() - tic
                runs[(mode, algorithm)].append(run)

        for mode, algorithm in keys:
            point_hash = config_hash(mode_configs[mode])
            row = {
                "algorithm": algorithm,
                "mode": mode.value,
                "axis": spec.axis,
                "value": float(value),
                "replicates": spec.replicates,
                "states": spec.states,
                **_aggregate(runs[(mode, algorithm)]),
                "config_hash": point_hash,
                "seed": spec.seed,
                "wall_time": timings[(mode, algorithm)],
            }
            rows.append(row)
            manifest_rows.append(
                {
                    "algorithm": algorithm,
                    "mode": mode.value,
                    "value": float(value),
                    "status": row["status"],
                    "config_hash": point_hash,
                    "residual": _finite_or_none(row["residual"]),
                    "wall_time": row["wall_time"],
                }
            )

    frame = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    manifest = {
        "package": "secure-cwpcn",
        "version": __version__,
        "seed": spec.seed,
        "spec": spec.model_dump(mode="json"),
        "config": config.model_dump(mode="json"),
        "config_hash": config_hash(config),
        "versions": library_versions(),
        "results_file": RESULTS_FILE,
        "dual_logs": sorted(dual_logs),
        "rows": manifest_rows,
        "wall_time": time.perf_counter() - started,
    }
    validate(instance=manifest, schema=load_manifest_schema())

    result = ExperimentResult(frame=frame, dual_logs=dual_logs, manifest=manifest)
    if output_dir is not None:
        result.write(Path(output_dir))
    return result


def _run_dual_with_log(states, config: NetworkConfig, workers: int):
    try:
        solution = run_dual(states, config, workers=workers)
    except InfeasibleProblemError as e:
        logger.warning(f"alg1 infeasible: {e}")
        return ReplicateRun(status="infeasible", eps_p=e.eps_p, eps_0=e.eps_0), None
    return _replicate_from_solution(solution, len(states)), solution.trace.to_frame()
