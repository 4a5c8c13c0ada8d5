from adversaries.GradientDescentAdversary import GradientDescentAdversary
from adversaries.MarkovAdversary import MarkovAdversary
from numerics.NumericsError import ConfigError
from systems.Trajectory import Trajectory
from workflows.Workflow import Workflow


class AttackWorkflow(Workflow):
    def adversary(self, system):
        config = self.config
        if config.method == 'markov':
            return MarkovAdversary(self.logger, lags=config.lags, ridge=config.ridge, tol=config.tolerances)
        if config.method == 'graddesc':
            if system is None:
                raise ConfigError("graddesc needs --system as the parameter template")
            return GradientDescentAdversary(self.logger, system, lr=config.lr, iters=config.iters,
                                            seed=config.seed, damping=config.damping)
        raise ConfigError(f"Unknown attack method {config.method!r}")

    def run(self):
        config = self.config
        if not config.trajectory:
            raise ConfigError("attack needs --trajectory")
        traj = Trajectory.from_csv(config.trajectory)
        system = self.load_system() if config.system else None
        test = config.test or 0
        result = self.adversary(system).identify(traj, train=config.train, test=test, truth=system)
        return self.emit_json(result.to_dict())
