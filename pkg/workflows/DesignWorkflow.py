import numpy as np

from controllers.LowRankController import LowRankDesigner
from controllers.LqrController import LqrCost, LqrDesigner
from numerics.LinearAlgebra import svd_rank
from workflows.Workflow import Workflow


class DesignWorkflow(Workflow):
    def run(self):
        config = self.config
        sys = self.load_system()
        cost = LqrCost.from_weights(config.q, config.r, sys.m, sys.l)
        designer = LowRankDesigner(self.logger, config.tolerances)
        controller = designer.design_low_rank(
            sys, cost, r=config.rank, snapshot_runs=config.snapshot_runs,
            snapshot_window=config.snapshot_window, seed=config.seed, force_pod=config.force_pod,
            refine=config.refine)

        # averaged over the unit initial states
        basis = np.eye(sys.p)
        full = designer.lqr.lqr_infinite(sys, cost)
        payload = controller.to_dict()
        payload['gain_rank'] = svd_rank(controller.gain(), config.tolerances)
        payload['design_cost'] = LqrDesigner.analytic_cost(sys, cost, controller.gain(), basis)
        payload['lqr_cost'] = LqrDesigner.analytic_cost(sys, cost, full.L, basis)
        return self.emit_json(payload)
