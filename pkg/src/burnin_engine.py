"""
Burn-in Engine: dataset -> certificates -> minorization -> start value ->
bound -> n*, for fixed parameters or a grid, plus the sweep, simulate and
validate drivers used by the command line.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from .bounds import GridResult, GridSpec, PointEvaluation, evaluate_point, grid_optimize
from .certificates import derive_block_drift, derive_gibbs_drift
from .config import DEFAULT_GRID, GridMode, SamplerKind, SuiteStatus, SweepParameter
from .core_model import (
    ChainState,
    Dataset,
    Hyperparameters,
    block_start_state,
    dataset_from_summaries,
    optimal_start_gibbs,
)
from .csv_adapter import read_raw_csv, sweep_frame
from .errors import AllPointsInfeasible, ConfigError
from .models.schema import GridRanges, RunConfig
from .samplers import Trace, run_chain
from .suites import SUITES, BlockPoint, GibbsPoint, SuiteContext, SuiteResult, default_points

logger = logging.getLogger("Burnin_Engine")


@dataclass
class StageTiming:
    """Timing information for a stage."""
    stage: str
    duration_ms: float
    status: str


@dataclass
class EngineResult:
    """Outcome of one burn-in run."""
    report: Dict[str, Any]
    evaluation: PointEvaluation
    grid: Optional[GridResult] = None
    stage_timings: List[StageTiming] = field(default_factory=list)

    @property
    def n_star(self) -> int:
        return self.evaluation.result.n_star


def load_dataset(config: RunConfig) -> Dataset:
    if config.data.path is not None:
        return read_raw_csv(config.data.path)
    s = config.data.summaries
    return dataset_from_summaries(s.m, s.ybar, s.sse, s.ybar_grand)


def build_grid_spec(ranges: GridRanges, target_tv: float) -> GridSpec:
    """Turn configured ranges into a GridSpec; missing axes take the default grid."""
    values: Dict[str, List[float]] = {}
    for name in ("gamma", "phi", "phi1", "phi2", "d", "r", "c3", "a"):
        configured = getattr(ranges, name)
        if configured is not None:
            values[name] = configured.to_values()
        elif name in DEFAULT_GRID:
            if ranges.mode is GridMode.ABSOLUTE and name in ("gamma", "d", "c3"):
                continue
            values[name] = list(DEFAULT_GRID[name])
    for name in ("gamma", "d"):
        if name not in values:
            raise ConfigError(f"grid.{name} is required in absolute mode", {"field": f"grid.{name}"})
    return GridSpec(
        gamma=values["gamma"],
        d=values["d"],
        phi=values.get("phi", []),
        phi1=values.get("phi1", []),
        phi2=values.get("phi2", []),
        r=values.get("r", []),
        c3=values.get("c3", []),
        a=values.get("a", [1.0]),
        target_tv=target_tv,
        mode=ranges.mode,
        rho1_slack=ranges.rho1_slack,
    )


class BurninEngine:
    """
    Burn-in bound engine.

    Orchestrates every stage of a run with logging and stage timings. Timings
    stay out of the report so identical runs give identical files.
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.stage_timings: List[StageTiming] = []
        self._dataset: Optional[Dataset] = None
        self._hyper: Optional[Hyperparameters] = None

    def _log_stage_start(self, stage: str) -> float:
        logger.info(f"[{stage}] Starting...")
        return time.time()

    def _log_stage_end(self, stage: str, start: float, status: str = "PASSED"):
        duration_ms = (time.time() - start) * 1000
        self.stage_timings.append(StageTiming(stage=stage, duration_ms=duration_ms, status=status))
        logger.info(f"[{stage}] Completed | Status: {status} | Duration: {duration_ms:.2f}ms")

    @property
    def dataset(self) -> Dataset:
        if self._dataset is None:
            start = self._log_stage_start("data")
            self._dataset = load_dataset(self.config)
            self._log_stage_end("data", start)
        return self._dataset

    @property
    def hyper(self) -> Hyperparameters:
        if self._hyper is None:
            self._hyper = self.config.hyperparameters.resolve(self.dataset)
        return self._hyper

    # ------------------------------------------------------------------
    # burnin
    # ------------------------------------------------------------------
    def run_burnin(self, hyper: Optional[Hyperparameters] = None) -> EngineResult:
        """Fixed parameters or grid search, then the full report."""
        config = self.config
        hyper = hyper or self.hyper
        dataset = self.dataset
        logger.info("=" * 60)
        logger.info(f"Burn-in run: sampler={config.sampler.value} theorem={config.theorem.value}")
        logger.info("=" * 60)

        grid_result = None
        if config.fixed is not None:
            start = self._log_stage_start("bound")
            params = config.fixed.model_dump(exclude_none=True, exclude={"beta"})
            evaluation = evaluate_point(
                dataset, hyper, config.sampler, config.theorem, params, config.target_tv,
                GridMode.ABSOLUTE, config.fixed.rho1_slack, config.fixed.beta, config.tolerances,
            )
            self._log_stage_end("bound", start)
        else:
            ranges = config.effective_grid()
            spec = build_grid_spec(ranges, config.target_tv)
            start = self._log_stage_start("grid")
            grid_result = grid_optimize(
                dataset, hyper, config.sampler, config.theorem, spec, ranges.max_workers, config.tolerances
            )
            evaluation = grid_result.best
            self._log_stage_end("grid", start)

        logger.info(f"n* = {evaluation.result.n_star_str} (bound {evaluation.result.bound_at_n_star:.6g})")
        report = self._burnin_report(evaluation, grid_result, hyper)
        return EngineResult(
            report=report, evaluation=evaluation, grid=grid_result, stage_timings=list(self.stage_timings)
        )

    def _burnin_report(
        self, evaluation: PointEvaluation, grid_result: Optional[GridResult], hyper: Hyperparameters
    ) -> Dict[str, Any]:
        result = evaluation.result
        constants = dict(result.constants)
        constants.update({f"factor_{k}": v for k, v in result.geometric_factors.items()})
        certificates = {"drift": evaluation.drift, "minorization": evaluation.minorization}
        if evaluation.conversion is not None:
            certificates["conversion"] = evaluation.conversion
        report = {
            "inputs": {
                "config": self.config.to_dict(),
                "defaults_applied": self.config.defaults_applied(),
                "dataset": self.dataset.to_dict(),
                "hyperparameters": hyper.to_dict(),
                "parameters": evaluation.parameters,
                "start": evaluation.start,
            },
            "constants": constants,
            "certificates": certificates,
            "result": result.to_dict(),
        }
        if grid_result is not None:
            report["grid"] = {
                "feasible": grid_result.feasible,
                "infeasible": grid_result.infeasible,
                "infeasible_reasons": dict(sorted(grid_result.infeasible_reasons.items())),
            }
        return report

    # ------------------------------------------------------------------
    # sweep
    # ------------------------------------------------------------------
    def run_sweep(self, vary: SweepParameter, values: List[float]) -> pd.DataFrame:
        """
        Vary a1=b1 or a2=b2 and re-optimize the grid at every value.
        Rows come out in the order of `values`.
        """
        config = self.config
        ranges = config.grid or GridRanges()
        spec = build_grid_spec(ranges, config.target_tv)
        base = self.hyper
        dataset = self.dataset

        def one(value: float) -> Dict[str, Any]:
            if vary is SweepParameter.A2B2:
                hyper = replace(base, a2=value, b2=value)
            else:
                hyper = replace(base, a1=value, b1=value)
            try:
                best = grid_optimize(
                    dataset, hyper, config.sampler, config.theorem, spec, ranges.max_workers, config.tolerances
                ).best
            except AllPointsInfeasible as exc:
                logger.warning(f"sweep {vary.value}={value:g}: {exc.message}")
                return {"param_value": value, "epsilon": float("nan"), "n_star": "NA", "bound_at_n_star": float("nan")}
            return {
                "param_value": value,
                "epsilon": best.minorization["epsilon"],
                "n_star": best.result.n_star_str,
                "bound_at_n_star": best.result.bound_at_n_star,
            }

        start = self._log_stage_start("sweep")
        if ranges.max_workers > 1:
            with ThreadPoolExecutor(max_workers=ranges.max_workers) as pool:
                rows = list(pool.map(one, values))
        else:
            rows = [one(v) for v in values]
        self._log_stage_end("sweep", start)
        return sweep_frame(rows)

    # ------------------------------------------------------------------
    # simulate
    # ------------------------------------------------------------------
    def start_state(self) -> ChainState:
        config, dataset, hyper = self.config, self.dataset, self.hyper
        if config.simulate.start == "ybar":
            return ChainState(
                theta=np.array(dataset.ybar_arr),
                mu=dataset.ybar_grand,
                lambda_theta=hyper.a1 / hyper.b1,
                lambda_e=hyper.a2 / hyper.b2,
            )
        block, gibbs = self.suite_points()
        if config.sampler is SamplerKind.BLOCK:
            cert = derive_block_drift(dataset, hyper, block.phi1, block.phi2, block.gamma)
            return block_start_state(cert.spec, dataset, hyper)
        if gibbs is None:
            raise ConfigError("no Gibbs drift is available for this prior and data; use start 'ybar'")
        cert = derive_gibbs_drift(dataset, hyper, gibbs.c3, gibbs.gamma, gibbs.rho1_slack)
        return optimal_start_gibbs(cert.spec, dataset, hyper, self.config.tolerances)

    def run_simulate(self, n: Optional[int] = None) -> Trace:
        n = self.config.simulate.iterations if n is None else n
        start = self._log_stage_start("simulate")
        trace = run_chain(self.config.sampler, self.start_state(), n, self.config.seed, self.dataset, self.hyper)
        self._log_stage_end("simulate", start)
        return trace

    # ------------------------------------------------------------------
    # validate
    # ------------------------------------------------------------------
    def suite_points(self):
        """Default points, replaced by the fixed parameters where they apply."""
        block, gibbs = default_points(self.dataset, self.hyper)
        fixed = self.config.fixed
        if fixed is not None and self.config.sampler is SamplerKind.BLOCK:
            phi1 = fixed.phi1 if fixed.phi1 is not None else fixed.phi
            phi2 = fixed.phi2 if fixed.phi2 is not None else 1.0 / float(np.mean(self.dataset.m))
            if phi1 is not None:
                block = BlockPoint(phi1=phi1, phi2=phi2, gamma=fixed.gamma, d=fixed.d)
        if fixed is not None and self.config.sampler is SamplerKind.GIBBS and fixed.c3 is not None:
            gibbs = GibbsPoint(c3=fixed.c3, gamma=fixed.gamma, d=fixed.d, rho1_slack=fixed.rho1_slack)
        return block, gibbs

    def run_validate(self, suite_name: Optional[str] = None, sizes: Optional[Dict[str, int]] = None) -> List[SuiteResult]:
        if suite_name is not None and suite_name not in SUITES:
            raise ConfigError(
                f"unknown suite '{suite_name}'; choose from {', '.join(sorted(SUITES))}",
                {"field": "suite"},
            )
        block, gibbs = self.suite_points()
        context = SuiteContext(
            dataset=self.dataset,
            hyper=self.hyper,
            seed=self.config.seed,
            tolerances=self.config.tolerances,
            sizes=sizes or {},
            block=block,
            gibbs=gibbs,
        )
        names = [suite_name] if suite_name else list(SUITES)
        results = []
        for name in names:
            start = self._log_stage_start(name)
            result = SUITES[name]().run(context)
            self._log_stage_end(name, start, result.status.value)
            results.append(result)
        failed = [r.suite_id for r in results if r.status is SuiteStatus.FAILED]
        if failed:
            logger.warning(f"failed suites: {', '.join(failed)}")
        return results

    def validate_report(self, results: List[SuiteResult]) -> Dict[str, Any]:
        return {
            "inputs": {
                "config": self.config.to_dict(),
                "dataset": self.dataset.to_dict(),
                "hyperparameters": self.hyper.to_dict(),
            },
            "suites": [r.to_dict(include_timing=False) for r in results],
        }
