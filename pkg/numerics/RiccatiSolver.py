import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from numerics.LinearAlgebra import as_matrix, spectral_radius
from numerics.NumericsError import NotStabilizable, ShapeError, SingularGain
from numerics.Tolerances import DEFAULT_TOLERANCES

logger = logging.getLogger(__name__)

# Condition number above which R + B'PB is treated as singular.
SINGULAR_COND = 1e13
# Riccati residual accepted relative to 1 + ||P||_F.
RESIDUAL_BOUND = 1e-8


@dataclass(frozen=True)
class RiccatiSolution:
    P: np.ndarray
    L: np.ndarray
    iterations: int
    residual: float
    closed_loop_radius: float


def riccati_gain(A, B, R, P):
    """Discrete LQR gain (R + B'PB)^-1 B'PA for a given cost-to-go P."""
    S = R + B.T @ P @ B
    if S.size and np.linalg.cond(S) > SINGULAR_COND:
        raise SingularGain("R + B'PB is singular", cond=float(np.linalg.cond(S)))
    return la.solve(S, B.T @ P @ A, assume_a='sym') if S.size else np.zeros((0, A.shape[0]))


def riccati_step(A, B, Qx, R, P):
    L = riccati_gain(A, B, R, P)
    P_next = Qx + A.T @ P @ A - A.T @ P @ B @ L
    return 0.5 * (P_next + P_next.T), L


def riccati_residual(A, B, Qx, R, P):
    L = riccati_gain(A, B, R, P)
    residual = A.T @ P @ A - A.T @ P @ B @ L - P + Qx
    return float(np.linalg.norm(residual, 'fro'))


def solve_dare(A, B, Qx, R, tol=DEFAULT_TOLERANCES):
    """
    Stabilizing solution of the discrete algebraic Riccati equation by value iteration.

    Iterates P <- Qx + A'PA - A'PB (R + B'PB)^-1 B'PA from P = Qx until the
    Frobenius step falls below dare_eps * (1 + ||P||_F).
    """
    A, B, Qx, R = as_matrix(A, 'A'), as_matrix(B, 'B'), as_matrix(Qx, 'Qx'), as_matrix(R, 'R')
    p, l = B.shape
    if A.shape != (p, p) or Qx.shape != (p, p) or R.shape != (l, l):
        raise ShapeError(f"DARE shapes do not agree: A{A.shape} B{B.shape} Qx{Qx.shape} R{R.shape}")

    P = 0.5 * (Qx + Qx.T)
    for iteration in range(1, tol.dare_max_iter + 1):
        P_next, _ = riccati_step(A, B, Qx, R, P)
        if not np.all(np.isfinite(P_next)):
            raise NotStabilizable("Riccati iteration diverged", iteration=iteration)
        step = np.linalg.norm(P_next - P, 'fro')
        converged = step <= tol.dare_eps * (1.0 + np.linalg.norm(P, 'fro'))
        P = P_next
        if converged:
            break
    else:
        raise NotStabilizable(
            f"Riccati iteration did not converge within {tol.dare_max_iter} iterations",
            last_step=float(step))

    L = riccati_gain(A, B, R, P)
    residual = riccati_residual(A, B, Qx, R, P)
    radius = spectral_radius(A - B @ L)
    logger.debug(
        "Solved DARE",
        extra={
            "json": {
                "iterations": iteration,
                "residual": residual,
                "closed_loop_radius": radius
            }
        })
    if residual > RESIDUAL_BOUND * (1.0 + np.linalg.norm(P, 'fro')):
        raise NotStabilizable(f"Riccati residual {residual:.3e} exceeds the accepted bound",
                              iterations=iteration, residual=residual)
    if radius >= 1.0:
        raise NotStabilizable(f"Riccati gain leaves the closed loop unstable (spectral radius {radius:.4f})",
                              closed_loop_radius=radius)
    return RiccatiSolution(P=P, L=L, iterations=iteration, residual=residual, closed_loop_radius=radius)
