from controllers.LqrController import LqrCost, LqrDesigner
from workflows.Workflow import Workflow


class LqrWorkflow(Workflow):
    def run(self):
        config = self.config
        sys = self.load_system()
        cost = LqrCost.from_weights(config.q, config.r, sys.m, sys.l, config.q_terminal, config.finite_horizon)
        designer = LqrDesigner(self.logger, config.tolerances)
        if config.finite_horizon:
            return self.emit_json(designer.lqr_finite(sys, cost).to_dict())

        controller = designer.lqr_infinite(sys, cost)
        payload = controller.to_dict()
        payload['P'] = controller.riccati.P.tolist()
        payload['closed_loop_radius'] = controller.riccati.closed_loop_radius
        payload['riccati_residual'] = controller.riccati.residual
        return self.emit_json(payload)
