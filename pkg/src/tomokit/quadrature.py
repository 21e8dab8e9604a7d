"""Quadrature rules and deterministic block-parallel evaluation.

Gauss-Legendre and Gauss-Hermite nodes are found by Newton iteration on the
three-term recurrences, so the rules depend only on IEEE arithmetic and not on
the LAPACK build. Rules are cached and returned as read-only arrays.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import NonConvergenceError

__all__ = [
    "QuadratureRule",
    "gauss_legendre",
    "gauss_hermite",
    "tensor_rule",
    "integrate_adaptive",
    "thread_count",
    "evaluate_blocks",
]

_NEWTON_MAX_ITER = 100
_NEWTON_TOL = 1e-15


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights of a one-dimensional rule.

    ``domain`` is ``(a, b)`` for a finite interval, or ``("-inf", "inf")``
    for Gauss-Hermite rules whose weight function is ``exp(-x**2)``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    domain: tuple

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float | complex:
        return np.sum(self.weights * f(self.nodes))

    def __len__(self) -> int:
        return self.nodes.size


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


def _legendre_pair(x: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """``(P_n(x), P_{n-1}(x))`` by the Bonnet recurrence."""
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    return p1, p0


@lru_cache(maxsize=None)
def _legendre_reference(n: int) -> tuple[np.ndarray, np.ndarray]:
    # Roots of P_n on [-1, 1]; only the non-negative half is iterated.
    m = (n + 1) // 2
    i = np.arange(1, m + 1, dtype=float)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(_NEWTON_MAX_ITER):
        pn, pm = _legendre_pair(x, n)
        dx = pn / (n * (x * pn - pm) / (x * x - 1.0))
        x = x - dx
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    if n % 2 == 1:
        x[-1] = 0.0
    pn, pm = _legendre_pair(x, n)
    dp = n * (x * pn - pm) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    nodes = np.concatenate([-x, x[::-1][n % 2:]])
    weights = np.concatenate([w, w[::-1][n % 2:]])
    return _freeze(nodes), _freeze(weights)


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    """Gauss-Legendre rule with ``n`` nodes on ``[a, b]``.

    Exact for polynomials of degree ``2n - 1`` or less.
    """
    if n < 1:
        raise ValueError(f"need at least one node, got n={n}")
    if not a < b:
        raise ValueError(f"degenerate interval [{a}, {b}]")
    x, w = _legendre_reference(int(n))
    half = 0.5 * (b - a)
    return QuadratureRule(_freeze(half * x + 0.5 * (a + b)), _freeze(half * w), (a, b))


@lru_cache(maxsize=None)
def _hermite_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    # Newton on the orthonormal Hermite recurrence; initial guesses follow the
    # classical asymptotic seeding for the largest roots.
    m = (n + 1) // 2
    roots = np.zeros(m)
    weights = np.zeros(m)
    pim4 = math.pi ** -0.25
    z = 0.0
    for i in range(m):
        if i == 0:
            z = math.sqrt(2 * n + 1) - 1.85575 * (2 * n + 1) ** (-1.0 / 6.0)
        elif i == 1:
            z -= 1.14 * n ** 0.426 / z
        elif i == 2:
            z = 1.86 * z - 0.86 * roots[0]
        elif i == 3:
            z = 1.91 * z - 0.91 * roots[1]
        else:
            z = 2.0 * z - roots[i - 2]
        pp = 1.0
        for _ in range(_NEWTON_MAX_ITER):
            p1, p2 = pim4, 0.0
            for j in range(1, n + 1):
                p1, p2 = z * math.sqrt(2.0 / j) * p1 - math.sqrt((j - 1) / j) * p2, p1
            pp = math.sqrt(2.0 * n) * p2
            dz = p1 / pp
            z -= dz
            if abs(dz) < _NEWTON_TOL:
                break
        p1, p2 = pim4, 0.0
        for j in range(1, n + 1):
            p1, p2 = z * math.sqrt(2.0 / j) * p1 - math.sqrt((j - 1) / j) * p2, p1
        pp = math.sqrt(2.0 * n) * p2
        roots[i] = z
        weights[i] = 2.0 / (pp * pp)
    if n % 2 == 1:
        roots[-1] = 0.0
    nodes = np.concatenate([-roots, roots[::-1][n % 2:]])
    w = np.concatenate([weights, weights[::-1][n % 2:]])
    return _freeze(nodes), _freeze(w)


def gauss_hermite(n: int) -> QuadratureRule:
    """Gauss-Hermite rule for the weight ``exp(-x**2)`` on the real line."""
    if n < 1:
        raise ValueError(f"need at least one node, got n={n}")
    x, w = _hermite_rule(int(n))
    return QuadratureRule(x, w, ("-inf", "inf"))


def tensor_rule(rules: list[QuadratureRule]) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product nodes ``(G, d)`` and weights ``(G,)``, C order (last axis fastest)."""
    if not rules:
        return np.zeros((1, 0)), np.ones(1)
    grids = np.meshgrid(*[r.nodes for r in rules], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    wgrids = np.meshgrid(*[r.weights for r in rules], indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return nodes, weights


# Gauss-Kronrod 7/15 abscissae and weights (non-negative half).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_K15_X = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_K15_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss-7 nodes are the odd-indexed Kronrod nodes of the half rule.
_G7_W = np.zeros(15)
_G7_W[[1, 3, 5]] = _WG[:3]
_G7_W[[9, 11, 13]] = _WG[2::-1]
_G7_W[7] = _WG[3]


def _kronrod_panel(f, a: float, b: float):
    half = 0.5 * (b - a)
    fx = np.asarray(f(0.5 * (a + b) + half * _K15_X))
    k15 = half * np.dot(_K15_W, fx)
    g7 = half * np.dot(_G7_W, fx)
    return k15, abs(k15 - g7), half * np.dot(_K15_W, np.abs(fx))


def integrate_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 30,
) -> tuple[float | complex, float]:
    """Adaptive Gauss-Kronrod 7/15 integration with bisection.

    ``f`` must accept a 1-D array of abscissae (real or complex values are
    both fine). Returns ``(value, error_estimate)``. Raises
    :class:`NonConvergenceError` when a panel still misses its share of the
    tolerance after ``max_depth`` bisections.
    """
    if not a < b:
        raise ValueError(f"degenerate interval [{a}, {b}]")
    eps = np.finfo(float).eps
    accepted: list[float | complex] = []
    error = 0.0
    stack = [(float(a), float(b), 0, float(tol))]
    while stack:
        lo, hi, depth, local_tol = stack.pop()
        value, err, scale = _kronrod_panel(f, lo, hi)
        if not np.isfinite(value):
            raise NonConvergenceError(f"integrand not finite on [{lo}, {hi}]")
        if err <= max(local_tol, 50.0 * eps * scale):
            accepted.append(value)
            error += err
            continue
        if depth >= max_depth:
            raise NonConvergenceError(
                f"adaptive quadrature exceeded depth {max_depth} near [{lo}, {hi}] "
                f"(panel error {err:.3e} > {local_tol:.3e})"
            )
        mid = 0.5 * (lo + hi)
        # Right half pushed first so panels are accepted left to right.
        stack.append((mid, hi, depth + 1, 0.5 * local_tol))
        stack.append((lo, mid, depth + 1, 0.5 * local_tol))
    vals = np.asarray(accepted)
    if np.iscomplexobj(vals):
        total: float | complex = complex(math.fsum(vals.real), math.fsum(vals.imag))
    else:
        total = math.fsum(vals)
    return total, error


def thread_count() -> int:
    """Worker cap from ``TOMOKIT_THREADS`` (0 or unset means one per CPU)."""
    raw = os.environ.get("TOMOKIT_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"TOMOKIT_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("TOMOKIT_THREADS must be non-negative")
    return n if n > 0 else (os.cpu_count() or 1)


def evaluate_blocks(
    fn: Callable[[int, int], np.ndarray],
    n_items: int,
    block: int,
    workers: int | None = None,
) -> np.ndarray:
    """Evaluate ``fn(start, stop)`` over fixed-size blocks and concatenate.

    Block boundaries depend only on ``n_items`` and ``block``, never on the
    worker count, so the result is bitwise identical for any ``workers``.
    """
    if n_items == 0:
        return fn(0, 0)
    bounds = [(s, min(s + block, n_items)) for s in range(0, n_items, block)]
    workers = thread_count() if workers is None else workers
    if workers <= 1 or len(bounds) == 1:
        parts = [fn(s, e) for s, e in bounds]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(bounds))) as pool:
            parts = list(pool.map(lambda se: fn(*se), bounds))
    return np.concatenate(parts, axis=0)
