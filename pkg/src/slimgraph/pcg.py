"""Sparsifier quality evaluation: preconditioned CG and a dense kappa probe.

The sparsifier Laplacian, grounded at one vertex, is factorized once and
applied as the preconditioner. Convergence checks use the true residual
||L_G x - b|| recomputed every iteration, never the recurrence residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import warnings

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import CapabilityError, FactorizationError

__all__ = [
    "Preconditioner",
    "SolveReport",
    "build_preconditioner",
    "pcg_solve",
    "make_rhs",
    "relative_condition_number",
    "generalized_eigenvalues",
]

_DENSE_LIMIT = 2000


@dataclass
class Preconditioner:
    """Direct solver for the grounded sparsifier Laplacian.

    apply() maps a zero-sum vector to a zero-sum vector: the grounded system
    is solved, the ground entry is zero, and the mean is subtracted.
    """

    ground: int
    n: int
    _lu: spla.SuperLU = field(repr=False)
    _keep: np.ndarray = field(repr=False)

    def apply(self, r: np.ndarray) -> np.ndarray:
        z = np.zeros(self.n)
        z[self._keep] = self._lu.solve(r[self._keep])
        z -= z.mean()
        return z


def build_preconditioner(lap_p: sp.spmatrix, ground: int) -> Preconditioner:
    """Factorize the sparsifier Laplacian with row/col `ground` removed.

    The grounded matrix of a connected graph is symmetric positive definite;
    a singular factorization therefore signals a disconnected sparsifier.
    """
    n = lap_p.shape[0]
    keep = np.arange(n) != ground
    grounded = lap_p.tocsr()[keep][:, keep].tocsc()
    try:
        lu = spla.splu(grounded)  # COLAMD ordering keeps the fill tolerable
    except RuntimeError as exc:
        raise FactorizationError(
            f"grounded Laplacian is singular ({exc}); is the sparsifier connected?"
        ) from exc
    if not np.all(np.isfinite(lu.solve(np.ones(n - 1)))):
        raise FactorizationError(
            "grounded Laplacian factorization produced non-finite solves; "
            "is the sparsifier connected?"
        )
    return Preconditioner(ground=int(ground), n=int(n), _lu=lu, _keep=np.flatnonzero(keep))


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    converged: bool
    final_relative_residual: float
    residual_history: list

    def __post_init__(self):
        assert self.iterations == len(self.residual_history)


def pcg_solve(
    lap_g: sp.spmatrix,
    b: np.ndarray,
    precond: Preconditioner,
    tol: float = 1e-3,
    max_iter: int = 10_000,
) -> tuple[np.ndarray, SolveReport]:
    """Preconditioned conjugate gradient for L_G x = b on the zero-sum space.

    Stops as soon as ||L_G x - b|| <= tol * ||b|| holds for the recomputed
    residual. Hitting max_iter yields converged=False, not an exception.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    b = np.asarray(b, dtype=np.float64)
    total = float(b.sum())
    norm_b = float(np.linalg.norm(b))
    if norm_b > 0 and abs(total) > 1e-10 * norm_b:
        warnings.warn("right-hand side does not sum to zero; projecting")
        b = b - total / b.size
        norm_b = float(np.linalg.norm(b))
    x = np.zeros_like(b)
    if norm_b == 0.0:
        return x, SolveReport(0, True, 0.0, [])
    if float(np.linalg.norm(b - lap_g @ x)) <= tol * norm_b:
        return x, SolveReport(0, True, float(np.linalg.norm(b) / norm_b), [])

    r = b.copy()
    z = precond.apply(r)
    p = z.copy()
    rz = float(r @ z)
    history: list[float] = []
    converged = False
    rel = 1.0
    for _ in range(max_iter):
        ap = lap_g @ p
        alpha = rz / float(p @ ap)
        x += alpha * p
        r -= alpha * ap
        rel = float(np.linalg.norm(b - lap_g @ x)) / norm_b  # true residual
        history.append(rel)
        if rel <= tol:
            converged = True
            break
        z = precond.apply(r)
        rz_next = float(r @ z)
        p = z + (rz_next / rz) * p
        rz = rz_next
    return x, SolveReport(len(history), converged, rel, history)


def make_rhs(n: int, seed: int) -> np.ndarray:
    """Deterministic zero-sum unit-norm right-hand side."""
    if n < 2:
        raise ValueError("need at least two vertices")
    rng = np.random.default_rng(seed)
    b = rng.standard_normal(n)
    b -= b.mean()
    return b / np.linalg.norm(b)


def _zero_sum_basis(n: int) -> np.ndarray:
    return scipy.linalg.null_space(np.ones((1, n)))


def generalized_eigenvalues(lap_g: sp.spmatrix, lap_p: sp.spmatrix) -> np.ndarray:
    """Eigenvalues of (L_G, L_P) restricted to the zero-sum subspace, ascending.

    Dense computation, so both graphs must be connected and small.
    """
    n = lap_g.shape[0]
    if n != lap_p.shape[0]:
        raise ValueError("Laplacian sizes differ")
    if n > _DENSE_LIMIT:
        raise CapabilityError(
            f"dense eigenvalue probe limited to n <= {_DENSE_LIMIT}, got {n}"
        )
    q = _zero_sum_basis(n)
    a = q.T @ (lap_g @ q)
    m = q.T @ (lap_p @ q)
    return scipy.linalg.eigh(a, m, eigvals_only=True)


def relative_condition_number(lap_g: sp.spmatrix, lap_p: sp.spmatrix) -> float:
    """Ratio of extreme nonzero generalized eigenvalues of the pair."""
    eigs = generalized_eigenvalues(lap_g, lap_p)
    lam_min, lam_max = float(eigs[0]), float(eigs[-1])
    if lam_min <= 0:
        raise FactorizationError(
            "non-positive generalized eigenvalue; is either graph disconnected?"
        )
    return lam_max / lam_min
