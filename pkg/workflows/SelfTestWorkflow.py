import numpy as np

from adversaries.MarkovAdversary import MarkovAdversary
from controllers.LowRankController import LowRankDesigner, input_rank, pod_basis
from controllers.LqrController import LqrCost, LqrDesigner
from identifiability.IdentifiabilityAnalyzer import IdentifiabilityAnalyzer
from numerics.LinearAlgebra import in_span, null_space_basis, spectral_radius, svd_rank
from numerics.RiccatiSolver import solve_dare
from sensitivity.FiniteDifferenceSensitivity import build_bundle_fd
from sensitivity.LtiSensitivity import build_bundle_lti, g_ijk
from systems.LtiSystem import LtiSystem
from systems.SystemFamilies import random_lti
from systems.Trajectory import Trajectory
from workflows.Workflow import Workflow


def _relative(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


class SelfTestWorkflow(Workflow):
    """
    Re-derives the closed-form and cross-oracle examples and prints one
    PASS/FAIL line per check. Any failure sets exit_code to 1.
    """

    def checks(self):
        return [
            ('svd_rank_identity_and_zero', self.check_rank_trivial),
            ('svd_rank_outer_product', self.check_rank_product),
            ('null_space_of_row', self.check_null_space),
            ('in_span_tolerance_boundary', self.check_in_span),
            ('spectral_radius_vs_eigvals', self.check_spectral_radius),
            ('scalar_dare_closed_form', self.check_scalar_dare),
            ('g_ijk_at_identity', self.check_g_at_identity),
            ('markov_convolution_vs_recursion', self.check_convolution),
            ('analytic_vs_finite_difference_bundle', self.check_fd_bundle),
            ('full_mask_rank3_input_unidentifiable', self.check_rank3_witness),
            ('finite_horizon_converges_to_dare', self.check_finite_horizon),
            ('pod_eckart_young', self.check_pod),
            ('input_rank_linear_combination', self.check_input_rank),
            ('markov_ls_exact_recovery', self.check_markov_recovery),
            ('design_cost_ordered_in_rank', self.check_design_cost_order),
        ]

    def rng(self, offset):
        return np.random.default_rng([self.config.seed, offset])

    def check_rank_trivial(self):
        tol = self.config.tolerances
        return svd_rank(np.eye(3), tol) == 3 and svd_rank(np.zeros((2, 2)), tol) == 0

    def check_rank_product(self):
        rng = self.rng(1)
        return svd_rank(rng.standard_normal((5, 2)) @ rng.standard_normal((2, 3)), self.config.tolerances) == 2

    def check_null_space(self):
        M = np.array([[1.0, 1.0, 0.0]])
        basis = null_space_basis(M, self.config.tolerances)
        return (basis.shape == (3, 2) and np.allclose(M @ basis, 0.0, atol=1e-12)
                and np.allclose(basis.T @ basis, np.eye(2), atol=1e-12))

    def check_in_span(self):
        rng = self.rng(2)
        w = rng.standard_normal((6, 1))
        return in_span(w[:, 0] + 1e-12 * rng.standard_normal(6), w, self.config.tolerances)

    def check_spectral_radius(self):
        M = self.rng(3).standard_normal((4, 4))
        return abs(spectral_radius(M) - np.max(np.abs(np.linalg.eigvals(M)))) <= 1e-8 * spectral_radius(M)

    def check_scalar_dare(self):
        solution = solve_dare([[0.5]], [[1.0]], [[1.0]], [[1.0]], self.config.tolerances)
        P = (0.25 + np.sqrt(0.25 ** 2 + 4.0)) / 2.0
        return abs(solution.P[0, 0] - P) <= 1e-9 and abs(solution.L[0, 0] - 0.5 * P / (1.0 + P)) <= 1e-9

    def check_g_at_identity(self):
        rng = self.rng(4)
        sys = LtiSystem(np.eye(3), rng.standard_normal((3, 2)), rng.standard_normal((2, 3)), (('A', 1, 2),))
        E = np.zeros((3, 3))
        E[1, 2] = 1.0
        return all(np.allclose(g_ijk(sys, 0, d), d * sys.C @ E @ sys.B, atol=1e-12) for d in range(5))

    def check_convolution(self):
        rng = self.rng(5)
        sys = random_lti(3, 3, 3, rng)
        u = Trajectory.random_input(40, 3, rng=rng)
        M = sys.markov_params(40)
        y = np.array([sum(M[k - j - 1] @ u[j] for j in range(k)) if k else np.zeros(3) for k in range(40)])
        return np.max(np.abs(y - sys.simulate(u).y)) <= 1e-10

    def check_fd_bundle(self):
        rng = self.rng(6)
        sys = random_lti(2, 2, 2, rng)
        u = Trajectory.random_input(8, 2, rng=rng)
        analytic = build_bundle_lti(sys, u)
        numeric = build_bundle_fd(sys, sys.parameters(), u)
        return (_relative(numeric.W, analytic.W) <= 1e-6 and _relative(numeric.Ja, analytic.Ja) <= 1e-6
                and _relative(numeric.H, analytic.H) <= 1e-4)

    def check_rank3_witness(self):
        rng = self.rng(7)
        sys = random_lti(4, 4, 4, rng)
        analyzer = IdentifiabilityAnalyzer(self.logger, self.config.tolerances)
        full = analyzer.analyze(build_bundle_lti(sys, Trajectory.random_input(50, 4, rng=rng)))
        bundle = build_bundle_lti(sys, Trajectory.random_input(50, 4, 3, rng))
        deficient = analyzer.analyze(bundle)
        if full.param_identifiable or not full.dynamic_identifiable or deficient.dynamic_identifiable:
            return False
        v = deficient.witness_v
        return (np.linalg.norm(bundle.W @ v) <= 1e-7 * np.linalg.norm(bundle.W) * np.linalg.norm(v)
                and np.linalg.norm(bundle.H @ v) >= 1e-4 * np.linalg.norm(bundle.H) * np.linalg.norm(v))

    def check_finite_horizon(self):
        rng = self.rng(8)
        sys = random_lti(3, 2, 2, rng)
        cost = LqrCost.from_weights(1.0, 1.0, sys.m, sys.l)
        designer = LqrDesigner(self.logger, self.config.tolerances)
        finite = designer.lqr_finite(sys, cost, horizon=500)
        return np.max(np.abs(finite.gain(0) - designer.lqr_infinite(sys, cost).L)) <= 1e-8

    def check_pod(self):
        X = self.rng(9).standard_normal((5, 12))
        V1, V2 = pod_basis(X, 2, self.config.tolerances)
        sigma = np.linalg.svd(X, compute_uv=False)
        return abs(np.linalg.norm(X - V2 @ V1.T @ X) - np.sqrt(np.sum(sigma[2:] ** 2))) <= 1e-10

    def check_input_rank(self):
        u = self.rng(10).uniform(-1.0, 1.0, size=(30, 4))
        u[:, 3] = u[:, 0] + u[:, 1]
        return input_rank(u, self.config.tolerances) == 3

    def check_markov_recovery(self):
        rng = self.rng(11)
        sys = random_lti(3, 2, 2, rng, radius=0.4)
        traj = sys.simulate(Trajectory.random_input(200, 2, rng=rng))
        result = MarkovAdversary(self.logger, lags=30, tol=self.config.tolerances).identify(traj, truth=sys)
        return result.markov_error <= 1e-8

    def check_design_cost_order(self):
        rng = self.rng(12)
        sys = random_lti(4, 4, 4, rng)
        cost = LqrCost.from_weights(1.0, 1.0, sys.m, sys.l)
        designer = LowRankDesigner(self.logger, self.config.tolerances)
        gains = [designer.lqr.lqr_infinite(sys, cost).L]
        gains += [designer.design_low_rank(sys, cost, r=r, seed=self.config.seed).gain() for r in (3, 2, 1)]
        costs = [LqrDesigner.analytic_cost(sys, cost, L, np.eye(sys.p)) for L in gains]
        return all(worse >= better * (1.0 - 1e-9) for better, worse in zip(costs, costs[1:]))

    def run(self):
        lines, failures = [], 0
        for name, check in self.checks():
            try:
                passed = bool(check())
                detail = ''
            except Exception as e:
                passed, detail = False, f' ({type(e).__name__}: {e})'
            failures += not passed
            lines.append(f"{'PASS' if passed else 'FAIL'} {name}{detail}")

        self.logger.info(
            "Self-test finished",
            extra={
                "json": {
                    "checks": len(lines),
                    "failures": failures
                }
            })
        self.exit_code = 1 if failures else 0
        lines.append(f"{len(lines) - failures}/{len(lines)} passed")
        return self.emit('\n'.join(lines) + '\n')
