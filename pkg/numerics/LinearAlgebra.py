import numpy as np
import scipy.linalg as la

from numerics.NumericsError import InvalidMatrix, ShapeError
from numerics.Tolerances import DEFAULT_TOLERANCES


def as_matrix(M, name='M'):
    """Coerce to a finite 2-D float array; 1-D input is read as a column."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    if M.ndim != 2:
        raise ShapeError(f"{name} must be two-dimensional, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidMatrix(f"{name} contains non-finite entries")
    return M

def singular_values(M):
    M = as_matrix(M)
    if M.size == 0:
        return np.zeros(0)
    return la.svd(M, compute_uv=False)

def rank_cutoff(sigma, shape, tol=DEFAULT_TOLERANCES):
    if sigma.size == 0:
        return 0.0
    return tol.rank_eps * sigma[0] * max(shape)

def svd_rank(M, tol=DEFAULT_TOLERANCES):
    M = as_matrix(M)
    sigma = singular_values(M)
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    return int(np.sum(sigma > rank_cutoff(sigma, M.shape, tol)))

def null_space_basis(M, tol=DEFAULT_TOLERANCES):
    """
    Orthonormal basis of N(M) as the columns of a cols(M) x (cols(M) - rank) matrix.
    """
    M = as_matrix(M)
    rows, cols = M.shape
    if rows == 0 or cols == 0:
        return np.eye(cols)
    _, sigma, Vh = la.svd(M, full_matrices=True)
    rank = 0 if sigma[0] == 0.0 else int(np.sum(sigma > rank_cutoff(sigma, M.shape, tol)))
    return Vh[rank:].T.copy()

def range_basis(M, tol=DEFAULT_TOLERANCES):
    """Orthonormal basis of range(M), one column per retained singular value."""
    M = as_matrix(M)
    if M.size == 0:
        return np.zeros((M.shape[0], 0))
    U, sigma, _ = la.svd(M, full_matrices=False)
    rank = 0 if sigma[0] == 0.0 else int(np.sum(sigma > rank_cutoff(sigma, M.shape, tol)))
    return U[:, :rank].copy()

def in_span(target, others, tol=DEFAULT_TOLERANCES):
    target = as_matrix(target, 'target')
    others = as_matrix(others, 'others')
    if target.shape[1] != 1:
        raise ShapeError(f"target must be a single column, got shape {target.shape}")
    if others.shape[0] != target.shape[0]:
        raise ShapeError(f"target has {target.shape[0]} rows but others has {others.shape[0]}")
    if others.shape[1] == 0:
        return svd_rank(target, tol) == 0
    return svd_rank(np.hstack([others, target]), tol) == svd_rank(others, tol)

def spectral_radius(M):
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ShapeError(f"spectral radius needs a square matrix, got shape {M.shape}")
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(la.eigvals(M))))

def normalize_column_signs(V, *coupled_rows):
    """
    Flip columns of V so the largest-magnitude entry of each is positive.

    Any matrix in coupled_rows has the matching row flipped too, so products
    V @ M stay unchanged.
    """
    V = np.array(V, dtype=float)
    coupled = [np.array(M, dtype=float) for M in coupled_rows]
    for j in range(V.shape[1]):
        pivot = V[np.argmax(np.abs(V[:, j])), j]
        if pivot < 0:
            V[:, j] = -V[:, j]
            for M in coupled:
                M[j, :] = -M[j, :]
    return (V, *coupled) if coupled else V

def controllability_matrix(A, B):
    A, B = as_matrix(A, 'A'), as_matrix(B, 'B')
    blocks = [B]
    for _ in range(A.shape[0] - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks)

def observability_matrix(A, C):
    A, C = as_matrix(A, 'A'), as_matrix(C, 'C')
    blocks = [C]
    for _ in range(A.shape[0] - 1):
        blocks.append(blocks[-1] @ A)
    return np.vstack(blocks)

def is_psd(M, floor=-1e-10):
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        return False
    if not np.allclose(M, M.T, atol=1e-12 * (1.0 + np.abs(M).max(initial=0.0))):
        return False
    return M.size == 0 or float(np.min(la.eigvalsh(M))) >= floor
