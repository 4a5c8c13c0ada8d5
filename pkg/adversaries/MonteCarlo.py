import asyncio
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from adversaries.GradientDescentAdversary import GradientDescentAdversary
from adversaries.MarkovAdversary import MarkovAdversary
from numerics.NumericsError import ConfigError, UnidentError
from systems.SystemFamilies import random_lti
from systems.Trajectory import NoiseSpec, Trajectory

METHODS = ('markov', 'graddesc')
TABLE_COLUMNS = ['sample_size', 'metric', 'mean', 'std', 'runs']


@dataclass(frozen=True)
class MonteCarloPlan:
    family: str = 'first_row'
    p: int = 4
    l: int = 4
    m: int = 4
    input_rank: Optional[int] = None
    w_amp: float = 0.0
    v_amp: float = 0.0
    runs: int = 100
    sizes: Tuple[int, ...] = tuple(range(5, 105, 5))
    test: int = 50
    method: str = 'graddesc'
    lags: int = 10
    iters: int = 50
    damping: Optional[float] = 1e-8
    init_radius: Optional[float] = None

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError(f"Monte Carlo needs at least one run, got {self.runs}")
        if self.method not in METHODS:
            raise ConfigError(f"Unknown identification method {self.method!r}, expected one of {METHODS}")
        if not self.sizes or min(self.sizes) < 1:
            raise ConfigError("sample sizes must be positive")


class MonteCarlo:
    """
    Repeats identification over fresh random plants and noise. Run i draws
    everything from the stream seeded by (master seed, i), so results do not
    depend on how runs are scheduled across workers.
    """

    def __init__(self, plan, logger, seed=0, jobs=1):
        self.plan = plan
        self.logger = logger
        self.seed = seed
        self.jobs = max(1, jobs)

    def _adversary(self, system, run):
        if self.plan.method == 'markov':
            return MarkovAdversary(self.logger, lags=self.plan.lags)
        return GradientDescentAdversary(self.logger, system, iters=self.plan.iters, seed=run,
                                        damping=self.plan.damping, init_radius=self.plan.init_radius)

    def single_run(self, run):
        plan = self.plan
        rng = np.random.default_rng([self.seed, run])
        system = random_lti(plan.p, plan.l, plan.m, rng, plan.family)
        longest = max(plan.sizes)
        u = np.vstack([Trajectory.random_input(longest, plan.l, plan.input_rank, rng),
                       Trajectory.random_input(plan.test, plan.l, None, rng)])
        noise = NoiseSpec(plan.w_amp, plan.v_amp, int(rng.integers(2 ** 31)))
        traj = system.simulate(u, noise)
        adversary = self._adversary(system, run)

        rows = []
        for size in sorted(plan.sizes):
            result = adversary.identify(traj, train=size, test=plan.test, test_start=longest, truth=system)
            rows.extend({'run': run, 'sample_size': size, 'metric': metric, 'value': value}
                        for metric, value in result.metrics().items())
        return rows

    def _guarded_run(self, run):
        try:
            return run, self.single_run(run), None
        except UnidentError as e:
            return run, [], e

    async def _gather(self):
        semaphore = asyncio.Semaphore(self.jobs)

        async def bounded(run):
            async with semaphore:
                return await asyncio.to_thread(self._guarded_run, run)

        return await asyncio.gather(*(bounded(run) for run in range(self.plan.runs)))

    def run(self):
        if self.jobs == 1:
            outcomes = [self._guarded_run(run) for run in range(self.plan.runs)]
        else:
            outcomes = asyncio.run(self._gather())

        rows, failures = [], 0
        for run, run_rows, error in sorted(outcomes, key=lambda outcome: outcome[0]):
            if error is not None:
                failures += 1
                self.logger.warning(
                    "Monte Carlo run failed",
                    extra={
                        "json": {
                            "run": run,
                            "error_description": str(error)
                        }
                    })
            rows.extend(run_rows)

        self.logger.info(
            "Monte Carlo finished",
            extra={
                "json": {
                    "runs": self.plan.runs,
                    "failures": failures,
                    "method": self.plan.method,
                    "family": self.plan.family,
                    "input_rank": self.plan.input_rank
                }
            })
        return summarize(pd.DataFrame(rows, columns=['run', 'sample_size', 'metric', 'value']))

    def rank_sweep(self, ranks):
        tables = []
        for rank in ranks:
            table = MonteCarlo(replace(self.plan, input_rank=rank), self.logger, self.seed, self.jobs).run()
            table.insert(0, 'rank', rank)
            tables.append(table)
        return pd.concat(tables, ignore_index=True)


def summarize(frame):
    if frame.empty:
        return pd.DataFrame(columns=TABLE_COLUMNS)
    grouped = frame.groupby(['sample_size', 'metric'], sort=True)['value']
    table = grouped.agg(mean='mean', std=lambda values: float(np.std(values, ddof=0)), runs='count')
    return table.reset_index()[TABLE_COLUMNS]


def monte_carlo(plan, logger, seed=0, jobs=1):
    return MonteCarlo(plan, logger, seed, jobs).run()
