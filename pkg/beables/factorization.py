# ================================
# PRODUCT-FORM FIT
# ================================
# M(a,b,c) ~ Abar(a,c) Bbar(b,c) with both factors in [-1, 1], fitted per c-slice:
# clamped ALS from an SVD start and random starts, then a bounded Powell polish.

import logging
from typing import List, Optional

import numpy as np
from scipy.optimize import minimize

from models.errors import ContextualityError
from models.models import CorrelatorTable, ProductFormFit

logger = logging.getLogger(__name__)

ALS_ITERATIONS = 500
ALS_STEP_TOLERANCE = 1e-15


def _residual(matrix: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    return float(np.abs(matrix - np.outer(u, v)).max())


def _clamped_als(matrix: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Alternate exact box-constrained least-squares updates of v then u"""
    v = np.zeros(matrix.shape[1])
    for _ in range(ALS_ITERATIONS):
        norm_u = float(u @ u)
        v_new = np.clip(matrix.T @ u / norm_u, -1.0, 1.0) if norm_u > 0 else np.zeros_like(v)
        norm_v = float(v_new @ v_new)
        u_new = np.clip(matrix @ v_new / norm_v, -1.0, 1.0) if norm_v > 0 else np.zeros_like(u)
        step = max(np.abs(u_new - u).max(initial=0.0), np.abs(v_new - v).max(initial=0.0))
        u, v = u_new, v_new
        if step < ALS_STEP_TOLERANCE:
            break
    return np.concatenate([u, v])


def _svd_start(matrix: np.ndarray) -> np.ndarray:
    left, singular, right = np.linalg.svd(matrix)
    u = np.sqrt(singular[0]) * left[:, 0]
    scale = np.abs(u).max()
    return u / scale if scale > 0 else np.ones(matrix.shape[0])


def fit_slice(matrix: np.ndarray, c: str, rng: np.random.Generator,
              restarts: int = 10, tolerance: float = 1e-12) -> ProductFormFit:
    n_a = matrix.shape[0]
    starts = [_svd_start(matrix)] + [rng.uniform(-1.0, 1.0, n_a) for _ in range(restarts)]

    best: Optional[np.ndarray] = None
    best_residual = np.inf
    for start in starts:
        candidate = _clamped_als(matrix, start)
        residual = _residual(matrix, candidate[:n_a], candidate[n_a:])
        if residual < best_residual:
            best, best_residual = candidate, residual
        if best_residual <= tolerance:
            break

    if best_residual > tolerance:
        polished = minimize(
            lambda x: _residual(matrix, x[:n_a], x[n_a:]),
            best,
            method="Powell",
            bounds=[(-1.0, 1.0)] * best.size,
        )
        if polished.fun < best_residual:
            best = np.clip(polished.x, -1.0, 1.0)
            best_residual = _residual(matrix, best[:n_a], best[n_a:])

    return ProductFormFit(
        c=c,
        a_factor=tuple(float(x) for x in best[:n_a]),
        b_factor=tuple(float(x) for x in best[n_a:]),
        residual=best_residual,
    )


def fit_product_form(table: CorrelatorTable, restarts: int = 10, seed: int = 0,
                     tolerance: float = 1e-12) -> List[ProductFormFit]:
    if table.coupled:
        raise ContextualityError((), "Product-form fitting needs a table over the full setting product")
    rng = np.random.default_rng(seed)
    fits = [fit_slice(table.c_slice(c), c, rng, restarts, tolerance) for c in table.c_labels]
    for fit in fits:
        logger.debug("c=%s rank-one residual %.3g", fit.c, fit.residual)
    return fits


def product_form_deviation(table: CorrelatorTable, tolerance: float = 1e-12,
                           restarts: int = 10, seed: int = 0) -> float:
    """
    Largest absolute residual of the best per-slice fit
    M(a,b,c) ~ Abar(a,c) Bbar(b,c) with factors in [-1, 1].

    Args:
        table: correlator table over a full (uncoupled) setting product
        tolerance: residual at which a slice counts as exactly factorized
        restarts: random ALS restarts per slice, besides the SVD start

    Raises:
        ContextualityError: for coupled tables
    """
    return max(fit.residual for fit in fit_product_form(table, restarts, seed, tolerance))
