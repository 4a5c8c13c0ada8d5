import json

import numpy as np

from controllers.LowRankController import LowRankController
from controllers.LqrController import FiniteHorizonController, LqrController
from numerics.NumericsError import ParseError
from systems.Trajectory import NoiseSpec, Trajectory
from workflows.Workflow import Workflow


def load_controller(path):
    """Rebuild a controller from the JSON written by the design or lqr commands."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ParseError(f"Unable to read controller JSON {path}: {e}") from e

    mode = data.get('mode')
    try:
        if mode == 'lqr':
            K = data.get('K')
            return LqrController(np.array(data['L'], dtype=float), None if K is None else np.array(K, dtype=float))
        if mode == 'finite_lqr':
            return FiniteHorizonController([np.array(g, dtype=float) for g in data['gains']], None)
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"Controller description is incomplete: {e}") from e
    return LowRankController.from_dict(data)


class SimulateWorkflow(Workflow):
    def run(self):
        config = self.config
        sys = self.load_system()
        noise = NoiseSpec(config.w_amp, config.v_amp, config.seed)

        if config.controller:
            controller = load_controller(config.controller)
            if not config.dither and noise.is_silent and sys.has_zero_initial_state:
                self.logger.warning(
                    "Closed loop starts at rest with no dither or noise; the trajectory is identically zero",
                    extra={
                        "json": {
                            "dither": config.dither,
                            "steps": config.steps
                        }
                    })
            traj = sys.simulate_closed_loop(controller, config.steps, noise=noise,
                                            dither=config.dither, seed=config.seed)
        else:
            rng = np.random.default_rng(config.seed)
            u = Trajectory.random_input(config.steps, sys.l, config.rank_input, rng)
            traj = sys.simulate(u, noise)

        self.logger.info(
            "Simulated trajectory",
            extra={
                "json": {
                    "steps": traj.horizon,
                    "closed_loop": bool(config.controller),
                    "max_abs_y": float(np.max(np.abs(traj.y))) if traj.y.size else 0.0
                }
            })
        if config.output:
            traj.to_csv(config.output)
            return ''
        return traj.to_frame().to_csv(index=False, float_format='%.17g')
