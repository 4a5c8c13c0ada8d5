import numpy as np
import scipy.linalg as la

from identifiability.IdentifiabilityReport import IdentifiabilityReport, ParamVerdict, Reparameterization
from numerics.LinearAlgebra import in_span, normalize_column_signs, null_space_basis, svd_rank
from numerics.NumericsError import ConfigError, ShapeError
from numerics.Tolerances import DEFAULT_TOLERANCES
from sensitivity.LtiSensitivity import sensitivity_matrix

CONFIG = {
    'jitter': 1e-4,
    'samples': 8,
}


class IdentifiabilityAnalyzer:
    """
    Rank and null-space tests on a sensitivity bundle.

    A parameter is unidentifiable when its sensitivity column lies in the span
    of the others. The dynamics are unidentifiable when some direction v has
    W v = 0 but H v != 0: the logged data cannot see it, yet it changes the
    input-output map.
    """

    def __init__(self, logger, tol=DEFAULT_TOLERANCES):
        self.logger = logger
        self.tol = tol

    def param_identifiable(self, bundle, i):
        W = bundle.W
        if not 0 <= i < W.shape[1]:
            raise ShapeError(f"parameter index {i} out of range for {W.shape[1]} parameters")
        return not in_span(W[:, i], np.delete(W, i, axis=1), self.tol)

    def dynamic_witness(self, bundle):
        """
        Null basis of W plus the basis vector with the largest ||H b||, or
        None when every null direction leaves H unchanged.
        """
        basis = null_space_basis(bundle.W, self.tol)
        H_norm = np.linalg.norm(bundle.H)
        if basis.shape[1] == 0 or H_norm == 0.0:
            return basis, None, 0.0
        Hb = np.linalg.norm(bundle.H @ basis, axis=0)
        best = int(np.argmax(Hb))
        if Hb[best] <= self.tol.residual_eps * H_norm:
            return basis, None, float(Hb[best] / H_norm)
        return basis, basis[:, best].copy(), float(Hb[best] / H_norm)

    def fisher_rank(self, bundle):
        # rank(W'W) = rank(W); W keeps the condition number unsquared
        return svd_rank(bundle.W, self.tol)

    def analyze(self, bundle):
        rank_F = self.fisher_rank(bundle)
        per_param = [ParamVerdict(i, self.param_identifiable(bundle, i)) for i in range(bundle.n)]
        basis, witness, Hv_rel = self.dynamic_witness(bundle)

        report = IdentifiabilityReport(
            n=bundle.n,
            horizon=bundle.horizon,
            rank_F=rank_F,
            per_param=per_param,
            param_identifiable=rank_F == bundle.n,
            dynamic_identifiable=witness is None,
            witness_v=witness,
            null_basis=basis,
            residual_Wv=None if witness is None else float(np.linalg.norm(bundle.W @ witness)),
            residual_Hv_rel=None if witness is None else Hv_rel)

        self.logger.info(
            "Identifiability analysis",
            extra={
                "json": {
                    "n": bundle.n,
                    "horizon": bundle.horizon,
                    "rank_F": rank_F,
                    "null_dim": int(basis.shape[1]),
                    "param_identifiable": report.param_identifiable,
                    "dynamic_identifiable": report.dynamic_identifiable,
                    "max_Hb_rel": Hv_rel
                }
            })
        return report

    def reparameterize(self, bundle):
        """
        Orthogonal P whose first r columns span range(F) and whose last n - r
        columns span N(F), so that F P [0; I] = 0.
        """
        r = self.fisher_rank(bundle)
        n = bundle.n
        if bundle.W.shape[0] == 0:
            return Reparameterization(P=np.eye(n), r=0)
        _, _, Vh = la.svd(bundle.W, full_matrices=True)
        V = Vh.T
        P = np.hstack([normalize_column_signs(V[:, :r]), normalize_column_signs(V[:, r:])])
        return Reparameterization(P=P, r=r)

    def rank_constancy_check(self, sys, u, jitter=None, samples=None, seed=0):
        """
        True when rank(F) at theta* matches rank(F) at `samples` random
        points within a relative radius `jitter` of theta*.
        """
        jitter = CONFIG['jitter'] if jitter is None else jitter
        samples = CONFIG['samples'] if samples is None else samples
        if jitter <= 0 or samples < 1:
            raise ConfigError("rank constancy check needs jitter > 0 and samples >= 1",
                              jitter=jitter, samples=samples)

        rng = np.random.default_rng(seed)
        theta = sys.parameters()
        ranks = [self._fisher_rank(sys, u)]
        for _ in range(samples):
            step = jitter * (1.0 + np.abs(theta)) * rng.uniform(-1.0, 1.0, size=theta.shape)
            ranks.append(self._fisher_rank(sys.apply_params(theta + step), u))

        constant = len(set(ranks)) == 1
        self.logger.info(
            "Rank constancy check",
            extra={
                "json": {
                    "ranks": ranks,
                    "jitter": jitter,
                    "constant": constant
                }
            })
        return constant

    def _fisher_rank(self, sys, u):
        return svd_rank(sensitivity_matrix(sys, u), self.tol)
