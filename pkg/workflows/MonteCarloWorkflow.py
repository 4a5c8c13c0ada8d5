from adversaries.MonteCarlo import MonteCarlo, MonteCarloPlan
from workflows.Workflow import Workflow


class MonteCarloWorkflow(Workflow):
    def plan(self):
        config = self.config
        p, l, m = config.dims
        fields = dict(family=config.family, p=p, l=l, m=m, input_rank=config.rank_input,
                      w_amp=config.w_amp, v_amp=config.v_amp, runs=config.runs, method=config.method)
        optional = dict(sizes=None if config.sizes is None else tuple(config.sizes), test=config.test,
                        lags=config.lags, iters=config.iters, damping=config.damping)
        fields.update({key: value for key, value in optional.items() if value is not None})
        return MonteCarloPlan(**fields)

    def run(self):
        config = self.config
        study = MonteCarlo(self.plan(), self.logger, seed=config.seed, jobs=config.jobs)
        table = study.rank_sweep(config.ranks) if config.ranks else study.run()
        return self.emit(table.to_csv(index=False, float_format='%.17g'))
