import numpy as np

from identifiability.IdentifiabilityAnalyzer import IdentifiabilityAnalyzer
from numerics.NumericsError import ConfigError
from sensitivity.LtiSensitivity import build_bundle_lti
from systems.Trajectory import Trajectory
from workflows.Workflow import Workflow


class AnalyzeWorkflow(Workflow):
    def logged_input(self, sys):
        config = self.config
        if config.trajectory:
            u = Trajectory.from_csv(config.trajectory).u[:config.horizon]
            if u.shape[1] != sys.l:
                raise ConfigError(f"trajectory has {u.shape[1]} input channels, system has {sys.l}")
            return u
        if not config.random_input:
            raise ConfigError("analyze needs --trajectory or --random-input")
        rng = np.random.default_rng(config.seed)
        return Trajectory.random_input(config.horizon, sys.l, config.rank_input, rng)

    def run(self):
        config = self.config
        sys = self.load_system()
        u = self.logged_input(sys)
        if u.shape[0] * sys.m < sys.n_params:
            self.logger.warning(
                "Horizon too short for a full-rank sensitivity matrix",
                extra={
                    "json": {
                        "horizon": int(u.shape[0]),
                        "outputs": sys.m,
                        "n": sys.n_params
                    }
                })

        bundle = build_bundle_lti(sys, u)
        if config.export_bundle:
            bundle.export(config.export_bundle)

        analyzer = IdentifiabilityAnalyzer(self.logger, config.tolerances)
        report = analyzer.analyze(bundle)
        if config.rank_check:
            report.rank_constancy_ok = analyzer.rank_constancy_check(sys, u, seed=config.seed)
        payload = report.to_dict()
        payload['reparameterization_rank'] = analyzer.reparameterize(bundle).r
        return self.emit_json(payload)
