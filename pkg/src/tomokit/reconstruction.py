"""Single-mode density-matrix reconstruction from a symplectic tomogram.

The route goes through the characteristic function
``chi(mu, nu) = int w(X | mu, nu) e^{iX} dX = Tr(rho e^{i(mu q + nu p)})``
and the Weyl inversion

    rho_mn = (1 / 2 pi) int chi(mu, nu) <m| e^{-i(mu q + nu p)} |n> dmu dnu,

integrated in polar coordinates (radial Gauss-Legendre, angular trapezoid).
"""

from __future__ import annotations

import csv
import math
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import DimensionError, NonConvergenceError
from .quadrature import gauss_legendre, integrate_adaptive
from .states import DensityMatrix

__all__ = [
    "CharacteristicSample",
    "characteristic_function",
    "displacement_matrix_element",
    "displacement_matrix",
    "reconstruct_single_mode",
    "reconstruct_from_samples",
    "read_samples_csv",
    "project_psd",
    "fidelity",
]

Tomogram = Callable[[np.ndarray, float, float], np.ndarray]

_TAIL_TOL = 1e-10


@dataclass(frozen=True)
class CharacteristicSample:
    mu: float
    nu: float
    value: complex


def characteristic_function(
    tomogram: Tomogram,
    mu: float,
    nu: float,
    nodes: int = 257,
    method: str = "legendre",
) -> complex:
    """``int w(X | mu, nu) e^{iX} dX`` over ``|X| <= 8 sqrt(mu^2 + nu^2)``.

    ``method="adaptive"`` uses Gauss-Kronrod bisection instead of the fixed
    rule. Raises :class:`NonConvergenceError` when the window misses more
    than ``1e-10`` of the probability mass.
    """
    sigma = mu * mu + nu * nu
    if sigma == 0.0:
        return 1.0 + 0j
    half = 8.0 * math.sqrt(sigma)
    if method == "legendre":
        rule = gauss_legendre(nodes, -half, half)
        w = np.asarray(tomogram(rule.nodes, mu, nu), dtype=float)
        mass = float(np.dot(rule.weights, w))
        value = complex(np.dot(rule.weights, w * np.exp(1j * rule.nodes)))
    elif method == "adaptive":
        mass, _ = integrate_adaptive(lambda x: tomogram(x, mu, nu), -half, half, tol=1e-12)
        value, _ = integrate_adaptive(
            lambda x: np.asarray(tomogram(x, mu, nu)) * np.exp(1j * x), -half, half, tol=1e-12
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    if abs(mass - 1.0) > _TAIL_TOL:
        raise NonConvergenceError(
            f"tomogram mass {mass!r} at (mu, nu) = ({mu}, {nu}) misses the window tolerance"
        )
    return value


def displacement_matrix_element(m: int, n: int, mu, nu):
    """``<m| exp(-i(mu q + nu p)) |n>``.

    The operator is the displacement ``D(alpha)`` with
    ``alpha = (nu - i mu) / sqrt(2)``; for ``m >= n``
    ``<m|D|n> = sqrt(n!/m!) alpha^(m-n) e^{-|alpha|^2/2} L_n^(m-n)(|alpha|^2)``,
    and ``<m|D|n> = conj(<n|D(-alpha)|m>)`` otherwise.
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    alpha = (nu - 1j * mu) / math.sqrt(2.0)
    if m < n:
        m, n = n, m
        alpha = -np.conj(alpha)
    a2 = np.abs(alpha) ** 2
    pref = np.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)))
    out = pref * alpha ** (m - n) * np.exp(-0.5 * a2) * eval_genlaguerre(n, m - n, a2)
    return complex(out) if out.ndim == 0 else out


def displacement_matrix(dim: int, mu, nu) -> np.ndarray:
    """Stack of ``<m|D|n>`` for ``m, n < dim``; shape ``mu.shape + (dim, dim)``."""
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    out = np.empty(np.broadcast(mu, nu).shape + (dim, dim), dtype=complex)
    for m in range(dim):
        for n in range(dim):
            out[..., m, n] = displacement_matrix_element(m, n, mu, nu)
    return out


def _finish(rho: np.ndarray, symmetrize: bool, psd: bool) -> DensityMatrix:
    tr = np.trace(rho).real
    if abs(tr - 1.0) > 1e-2:
        raise NonConvergenceError(f"reconstructed trace {tr:.6f}; cutoff too low or input truncated")
    if symmetrize or psd:
        rho = 0.5 * (rho + rho.conj().T)
    out = DensityMatrix((rho.shape[0],), rho)
    return project_psd(out) if psd else out


def reconstruct_single_mode(
    tomogram: Tomogram,
    cutoff: int,
    psd: bool = False,
    symmetrize: bool = True,
    radius: float = 8.0,
    radial_nodes: int = 96,
    angular_nodes: int = 64,
    x_nodes: int = 257,
) -> DensityMatrix:
    """Density matrix on ``|0>..|cutoff>`` from a callable ``w(X, mu, nu)``.

    ``symmetrize=False`` returns the raw quadrature output for error
    analysis; ``psd=True`` clips negative eigenvalues and renormalizes.
    """
    dim = cutoff + 1
    r = gauss_legendre(radial_nodes, 0.0, radius)
    phi = 2.0 * np.pi * np.arange(angular_nodes) / angular_nodes
    dphi = 2.0 * np.pi / angular_nodes
    rr, pp = np.meshgrid(r.nodes, phi, indexing="ij")
    mu = rr * np.cos(pp)
    nu = rr * np.sin(pp)
    chi = np.empty(mu.shape, dtype=complex)
    for idx in np.ndindex(mu.shape):
        chi[idx] = characteristic_function(tomogram, float(mu[idx]), float(nu[idx]), nodes=x_nodes)
    weight = (r.weights * r.nodes)[:, None] * dphi / (2.0 * np.pi)
    dmat = displacement_matrix(dim, mu, nu)
    rho = np.einsum("ij,ijmn->mn", weight * chi, dmat)
    return _finish(rho, symmetrize, psd)


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    if x.size < 2:
        raise DimensionError("need at least two grid points per axis")
    d = np.diff(x)
    if np.any(d <= 0):
        raise DimensionError("grid axes must be strictly increasing")
    w = np.zeros_like(x)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def reconstruct_from_samples(
    mu: np.ndarray,
    nu: np.ndarray,
    x: np.ndarray,
    w: np.ndarray,
    cutoff: int,
    psd: bool = False,
    symmetrize: bool = True,
) -> DensityMatrix:
    """Reconstruction from tomogram samples ``w[i, j, k] = w(x_k | mu_i, nu_j)``.

    The characteristic function at each frame is the trapezoid integral of
    the samples against ``e^{iX}``, divided by the sampled mass so that
    frames whose tomogram is narrower than the X spacing still give
    ``|chi| <= 1``. The (mu, nu) integral is a 2-D trapezoid over the
    product grid. The frame ``(0, 0)`` is assigned ``chi = 1``.
    """
    mu, nu, x = (np.asarray(a, dtype=float) for a in (mu, nu, x))
    w = np.asarray(w, dtype=float)
    if w.shape != (mu.size, nu.size, x.size):
        raise DimensionError(f"samples shape {w.shape} does not match grid ({mu.size}, {nu.size}, {x.size})")
    wx = _trapezoid_weights(x)
    mass = w @ wx
    chi = (w * np.exp(1j * x)) @ wx
    origin = (mu[:, None] == 0.0) & (nu[None, :] == 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        chi = np.where(mass > 0, chi / np.where(mass > 0, mass, 1.0), 0.0)
    chi = np.where(origin, 1.0 + 0j, chi)
    if np.any((mass <= 0) & ~origin):
        raise NonConvergenceError("tomogram samples have zero mass at some frame")
    weight = np.outer(_trapezoid_weights(mu), _trapezoid_weights(nu)) / (2.0 * np.pi)
    mm, nn = np.meshgrid(mu, nu, indexing="ij")
    dmat = displacement_matrix(cutoff + 1, mm, nn)
    rho = np.einsum("ij,ijmn->mn", weight * chi, dmat)
    return _finish(rho, symmetrize, psd)


def read_samples_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Parse a ``mu,nu,X,w`` CSV on a product grid into axes and a sample cube."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["mu", "nu", "X", "w"]:
            raise ValueError(f"{path}: header must be exactly 'mu,nu,X,w', got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value in {row}") from None
    if not rows:
        raise ValueError(f"{path}: no samples")
    data = np.array(rows)
    axes = [np.unique(data[:, c]) for c in range(3)]
    shape = tuple(a.size for a in axes)
    if data.shape[0] != math.prod(shape):
        raise ValueError(f"{path}: {data.shape[0]} rows do not form a full {shape} product grid")
    idx = tuple(np.searchsorted(a, data[:, c]) for c, a in enumerate(axes))
    cube = np.full(shape, np.nan)
    cube[idx] = data[:, 3]
    if np.isnan(cube).any():
        raise ValueError(f"{path}: duplicate or missing grid points")
    return axes[0], axes[1], axes[2], cube


def project_psd(rho: DensityMatrix) -> DensityMatrix:
    """Clip negative eigenvalues to zero and renormalize the trace."""
    h = 0.5 * (rho.entries + rho.entries.conj().T)
    vals, vecs = np.linalg.eigh(h)
    vals = np.clip(vals, 0.0, None)
    if vals.sum() <= 0:
        raise NonConvergenceError("no positive spectrum to project onto")
    vals = vals / vals.sum()
    return DensityMatrix(rho.mode_dims, (vecs * vals) @ vecs.conj().T)


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``; matrices are zero-padded to a common size."""
    if rho.num_modes != sigma.num_modes:
        raise DimensionError("fidelity needs matrices over the same modes")
    dims = tuple(max(a, b) for a, b in zip(rho.mode_dims, sigma.mode_dims))
    a = rho.embed(dims).entries
    b = sigma.embed(dims).entries
    vals, vecs = np.linalg.eigh(0.5 * (a + a.conj().T))
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T
    inner = root @ b @ root
    ev = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    return float(np.sum(np.sqrt(np.clip(ev, 0.0, None))) ** 2)
