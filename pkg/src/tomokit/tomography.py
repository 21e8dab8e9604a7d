"""Symplectic, center-of-mass, marginal and cluster tomograms of Fock superpositions.

Every tomogram here is built from the per-mode amplitudes
``a_n(Y | mu, nu) = <Y; mu, nu | n>``, the overlap of ``|n>`` with the
eigenvector of ``mu q + nu p`` at eigenvalue ``Y``. Completing the square in
the Gaussian-Hermite integral gives

    a_n(Y | mu, nu) = sigma^(-1/4) exp(-i mu Y^2 / (2 nu sigma)) exp(-i n theta) psi_n(Y / sqrt(sigma))

with ``sigma = mu^2 + nu^2`` and ``theta = atan2(nu, mu)``. The chirp factor is
common to all ``n`` of one mode and drops out of every tomogram, so the
kernels work with the "reduced" amplitude without it.

Center-of-mass and cluster tomograms integrate the symplectic tomogram over
the hyperplane ``sum_{j in cluster} X_j = X``. The integrand has the Gaussian
envelope ``exp(-sum_j X_j^2 / sigma_j)`` times a polynomial; the integration
variables are whitened against that envelope (Cholesky factor of its
quadratic form restricted to the hyperplane) and integrated with tensor
Gauss-Legendre panels on ``[-8, 8]`` per free direction.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFrameError, DimensionError, NegativeProbabilityError
from .frames import TomographyFrame
from .quadrature import evaluate_blocks, gauss_legendre, tensor_rule
from .states import DensityMatrix, FockSuperposition, fock_wavefunctions

__all__ = [
    "CLIP_THRESHOLD",
    "WHITENED_HALF_WIDTH",
    "default_nodes",
    "tomographic_amplitude",
    "symplectic_tomogram",
    "cm_tomogram",
    "subsystem_tomogram",
    "cluster_tomogram",
    "clustered_tomogram",
    "tomogram_from_density_matrix",
    "TomogramGrid",
    "cm_grid",
    "symplectic_grid",
    "cluster_grid",
    "marginal_grid",
]

CLIP_THRESHOLD = 1e-12
WHITENED_HALF_WIDTH = 8.0
_BLOCK_ELEMENTS = 1 << 17


def default_nodes(free_dims: int) -> int:
    """Gauss-Legendre nodes per whitened direction for a given number of free variables."""
    if free_dims <= 1:
        return 257
    if free_dims == 2:
        return 129
    return 65


def _reduced_amplitudes(n_max: int, y: np.ndarray, mu: float, nu: float) -> np.ndarray:
    """``sigma^(-1/4) e^{-i n theta} psi_n(y / sqrt(sigma))`` for ``n = 0..n_max``."""
    sigma = mu * mu + nu * nu
    if sigma == 0.0:
        raise DegenerateFrameError("(mu, nu) = (0, 0)")
    psi = fock_wavefunctions(n_max, y / math.sqrt(sigma)) * sigma ** -0.25
    theta = math.atan2(nu, mu)
    phases = np.exp(-1j * theta * np.arange(n_max + 1))
    return psi * phases.reshape((n_max + 1,) + (1,) * y.ndim)


def tomographic_amplitude(n: int, Y, mu: float, nu: float):
    """Per-mode amplitude ``(2 pi |nu|)^(-1/2) int psi_n(q) exp(i mu q^2/(2 nu) - i Y q / nu) dq``.

    The global phase is fixed so that ``a_0(0 | mu, nu)`` is real and
    positive. At ``nu = 0`` the position-representation limit
    ``|mu|^(-1/2) psi_n(Y / mu)`` is returned.
    """
    if n < 0:
        raise ValueError("Fock index must be non-negative")
    y = np.asarray(Y, dtype=float)
    amp = _reduced_amplitudes(n, y, float(mu), float(nu))[n]
    if nu != 0.0:
        sigma = mu * mu + nu * nu
        amp = amp * np.exp(-1j * mu * y * y / (2.0 * nu * sigma))
    return complex(amp) if amp.ndim == 0 else amp


def _hermite_polys(n_max: int, y: np.ndarray) -> np.ndarray:
    """``psi_n(y) pi^(1/4) e^(y^2/2)`` for ``n = 0..n_max`` (normalized Hermite polynomials)."""
    out = np.empty((n_max + 1,) + y.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * y
    for n in range(1, n_max):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * y * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


class _ReducedKernel:
    """``Tr`` over unmeasured modes of ``|psi><psi|`` projected on quadrature eigenvectors.

    Terms are grouped by the occupations of the traced modes; the Fock basis
    of those modes being orthonormal, the reduced tomogram is the sum over
    groups of ``|sum_k c_k prod_j a_{n_kj}(X_j)|^2``. Each reduced amplitude
    factors as ``(pi sigma_j)^(-1/4) exp(-X_j^2 / (2 sigma_j))`` times
    ``exp(-i n theta_j) h_n(X_j / sqrt(sigma_j))``, so the Gaussian envelope
    is handled separately from the polynomial part.
    """

    def __init__(self, state: FockSuperposition, measured: Sequence[int]):
        self.measured = tuple(measured)
        traced = [j for j in range(state.num_modes) if j not in self.measured]
        occ = state.occupation_matrix
        amps = state.amplitudes
        groups: dict[tuple[int, ...], list[int]] = {}
        for k, row in enumerate(occ):
            groups.setdefault(tuple(row[traced]), []).append(k)
        self.groups = [(amps[idx], occ[np.ix_(idx, self.measured)]) for idx in groups.values()]
        self.n_max = [int(occ[:, j].max()) for j in self.measured]

    def prefactor(self, frame: TomographyFrame) -> float:
        sig = frame.mode_sigmas[list(self.measured)]
        return float(np.prod(1.0 / np.sqrt(math.pi * sig)))

    def polynomial(self, frame: TomographyFrame, coords: np.ndarray) -> np.ndarray:
        """``sum_groups |sum_k c_k prod_j e^{-i n theta_j} h_n(X_j / sqrt(sigma_j))|^2``."""
        sig = frame.mode_sigmas[list(self.measured)]
        theta = np.array([math.atan2(frame.nu[j], frame.mu[j]) for j in self.measured])
        polys = [
            _hermite_polys(self.n_max[i], coords[..., i] / math.sqrt(sig[i]))
            for i in range(len(self.measured))
        ]
        shape = coords.shape[:-1]
        total = np.zeros(shape)
        for coeffs, occ in self.groups:
            phased = coeffs * np.exp(-1j * (occ * theta).sum(axis=1))
            if np.all(phased.imag == 0.0):
                amp = np.zeros(shape)
                phased = phased.real
            else:
                amp = np.zeros(shape, dtype=complex)
            for c, row in zip(phased, occ):
                prod = polys[0][row[0]] * c
                for i in range(1, len(row)):
                    prod = prod * polys[i][row[i]]
                amp += prod
            total += amp.real ** 2 + amp.imag ** 2 if np.iscomplexobj(amp) else amp * amp
        return total

    def __call__(self, frame: TomographyFrame, coords: np.ndarray) -> np.ndarray:
        sig = frame.mode_sigmas[list(self.measured)]
        envelope = np.exp(-np.sum(coords * coords / sig, axis=-1))
        return self.prefactor(frame) * envelope * self.polynomial(frame, coords)


def _nonnegative(values: np.ndarray) -> np.ndarray:
    lo = float(np.min(values)) if values.size else 0.0
    if lo < -CLIP_THRESHOLD:
        raise NegativeProbabilityError(f"tomogram value {lo:.3e} below -{CLIP_THRESHOLD}")
    return np.maximum(values, 0.0)


def _check_state_frame(state: FockSuperposition, frame: TomographyFrame) -> None:
    if frame.num_modes != state.num_modes:
        raise DimensionError(f"frame has {frame.num_modes} modes, state has {state.num_modes}")


def symplectic_tomogram(state: FockSuperposition, X, frame: TomographyFrame):
    """Joint distribution of ``X_j = mu_j q_j + nu_j p_j``; ``X`` has trailing axis ``num_modes``."""
    _check_state_frame(state, frame)
    frame.require_nondegenerate()
    x = np.asarray(X, dtype=float)
    if x.shape[-1:] != (state.num_modes,):
        raise DimensionError(f"expected {state.num_modes} coordinates, got shape {x.shape}")
    kernel = _ReducedKernel(state, range(state.num_modes))
    out = _nonnegative(kernel(frame, x))
    return float(out) if out.ndim == 0 else out


@dataclass
class _ClusterPlan:
    active: tuple[int, ...]
    sigmas: np.ndarray
    offsets: np.ndarray  # (G_c, m - 1) whitened-node displacements from the envelope center
    weights: np.ndarray
    envelope: np.ndarray  # exp(-|u|^2) at the whitened nodes
    jacobian: float


def _plan_cluster(frame: TomographyFrame, cluster: Sequence[int], n_nodes: int) -> _ClusterPlan:
    active = frame.active_modes(cluster)
    if not active:
        raise DegenerateFrameError(f"cluster {tuple(cluster)} has (mu, nu) = (0, 0) on every mode")
    sig = frame.mode_sigmas[list(active)]
    free = len(active) - 1
    if free == 0:
        return _ClusterPlan(active, sig, np.zeros((1, 0)), np.ones(1), np.ones(1), 1.0)
    quad = np.diag(1.0 / sig[:-1]) + 1.0 / sig[-1]
    chol = np.linalg.cholesky(quad)
    u, w = tensor_rule([gauss_legendre(n_nodes, -WHITENED_HALF_WIDTH, WHITENED_HALF_WIDTH)] * free)
    # x - center = L^{-T} u, so row vectors transform by L^{-1} on the right.
    offsets = np.linalg.solve(chol.T, u.T).T
    envelope = np.exp(-np.sum(u * u, axis=-1))
    return _ClusterPlan(active, sig, offsets, w, envelope, 1.0 / float(np.prod(np.diag(chol))))


def _validate_partition(partition: Sequence[Sequence[int]], num_modes: int) -> tuple[tuple[int, ...], ...]:
    parts = tuple(tuple(int(j) for j in c) for c in partition)
    flat = [j for c in parts for j in c]
    if not parts or any(not c for c in parts):
        raise DimensionError("partition clusters must be non-empty")
    if len(set(flat)) != len(flat) or min(flat) < 0 or max(flat) >= num_modes:
        raise DimensionError(f"partition {parts} is not a set of disjoint modes of 0..{num_modes - 1}")
    return parts


def clustered_tomogram(
    state: FockSuperposition,
    coords,
    frame: TomographyFrame,
    partition: Sequence[Sequence[int]],
    nodes: int | None = None,
    workers: int | None = None,
):
    """Joint distribution of one center-of-mass variable per cluster of modes.

    ``coords`` has trailing axis ``len(partition)``: value ``X_c`` for the
    variable ``sum_{j in c} (mu_j q_j + nu_j p_j)``. Modes in no cluster and
    modes with ``(mu_j, nu_j) = (0, 0)`` are traced out.
    """
    _check_state_frame(state, frame)
    parts = _validate_partition(partition, state.num_modes)
    pts = np.asarray(coords, dtype=float)
    if pts.shape[-1:] != (len(parts),):
        raise DimensionError(f"expected {len(parts)} coordinates per point, got shape {pts.shape}")
    free_total = sum(len(frame.active_modes(c)) - 1 for c in parts if frame.active_modes(c))
    n_nodes = default_nodes(free_total) if nodes is None else int(nodes)
    plans = [_plan_cluster(frame, c, n_nodes) for c in parts]
    measured = [j for p in plans for j in p.active]
    kernel = _ReducedKernel(state, measured)

    # Tensor the per-cluster node sets. On the hyperplane the envelope is
    # exp(-|u|^2 - sum_c X_c^2 / sigma_c), so exp(-|u|^2) joins the weights.
    sizes = [p.weights.size for p in plans]
    grids = np.meshgrid(*[np.arange(s) for s in sizes], indexing="ij")
    index = [g.ravel() for g in grids]
    weights = np.ones(index[0].size)
    for p, idx in zip(plans, index):
        weights = weights * p.weights[idx] * p.envelope[idx]
    offsets = [p.offsets[idx] for p, idx in zip(plans, index)]
    scale = math.prod(p.jacobian for p in plans) * kernel.prefactor(frame)
    cluster_sigma = np.array([float(np.sum(p.sigmas)) for p in plans])
    n_grid = weights.size

    flat = pts.reshape(-1, len(parts))

    def block(start: int, stop: int) -> np.ndarray:
        xc = flat[start:stop]
        cols = []
        for c, (p, off) in enumerate(zip(plans, offsets)):
            x = xc[:, c][:, None]
            centers = x[:, :, None] * (p.sigmas[:-1] / cluster_sigma[c])
            free = centers + off[None, :, :]
            last = x - free.sum(axis=-1)
            cols.append(free)
            cols.append(last[:, :, None])
        full = np.concatenate(cols, axis=-1)
        poly = kernel.polynomial(frame, full)
        outer = np.exp(-np.sum(xc * xc / cluster_sigma, axis=-1))
        return (poly * weights).sum(axis=-1) * outer * scale

    per_block = max(1, _BLOCK_ELEMENTS // n_grid)
    out = evaluate_blocks(block, flat.shape[0], per_block, workers=workers)
    out = _nonnegative(out).reshape(pts.shape[:-1])
    return float(out) if out.ndim == 0 else out


def cm_tomogram(
    state: FockSuperposition,
    X,
    frame: TomographyFrame,
    nodes: int | None = None,
    workers: int | None = None,
):
    """Center-of-mass tomogram ``w(X | mu, nu)`` of all modes together."""
    x = np.asarray(X, dtype=float)
    return clustered_tomogram(
        state, x[..., None], frame, [tuple(range(state.num_modes))], nodes=nodes, workers=workers
    )


def subsystem_tomogram(state: FockSuperposition, mode: int, X1, mu1: float, nu1: float):
    """Tomogram of the reduced state of one mode (all other modes traced out)."""
    if not 0 <= mode < state.num_modes:
        raise DimensionError(f"mode {mode} out of range for {state.num_modes}-mode state")
    if mu1 == 0.0 and nu1 == 0.0:
        raise DegenerateFrameError("(mu, nu) = (0, 0)")
    mu = [0.0] * state.num_modes
    nu = [0.0] * state.num_modes
    mu[mode], nu[mode] = mu1, nu1
    frame = TomographyFrame(tuple(mu), tuple(nu))
    x = np.asarray(X1, dtype=float)
    out = _nonnegative(_ReducedKernel(state, [mode])(frame, x[..., None]))
    return float(out) if out.ndim == 0 else out


def cluster_tomogram(
    state: FockSuperposition,
    X,
    X3,
    frame: TomographyFrame,
    partition: Sequence[Sequence[int]] = ((0, 1), (2,)),
    nodes: int | None = None,
):
    """Two-variable cluster tomogram: ``X`` for the first cluster, ``X3`` for the second."""
    parts = _validate_partition(partition, state.num_modes)
    if len(parts) != 2:
        raise DimensionError("cluster_tomogram takes exactly two clusters; use clustered_tomogram")
    if sorted(j for c in parts for j in c) != list(range(state.num_modes)):
        raise DimensionError(f"partition {parts} must cover all {state.num_modes} modes")
    for c in parts:
        frame.require_nondegenerate(c)
    x, x3 = np.broadcast_arrays(np.asarray(X, dtype=float), np.asarray(X3, dtype=float))
    return clustered_tomogram(state, np.stack([x, x3], axis=-1), frame, parts, nodes=nodes)


def tomogram_from_density_matrix(rho: DensityMatrix, X, mu: float, nu: float):
    """Single-mode ``Tr(rho delta(X - mu q - nu p)) = sum_mn rho_mn a_m(X) conj(a_n(X))``."""
    if rho.num_modes != 1:
        raise DimensionError("tomogram_from_density_matrix expects a single-mode matrix")
    x = np.asarray(X, dtype=float)
    a = _reduced_amplitudes(rho.mode_dims[0] - 1, x, float(mu), float(nu))
    flat = a.reshape(a.shape[0], -1)
    vals = np.einsum("mn,mk,nk->k", rho.entries, flat, flat.conj()).real.reshape(x.shape)
    out = _nonnegative(vals)
    return float(out) if out.ndim == 0 else out


@dataclass
class TomogramGrid:
    """Tomogram samples on a rectilinear grid, with the frame that produced them."""

    axes: dict[str, np.ndarray]
    values: np.ndarray
    frame: TomographyFrame
    kind: str
    meta: dict = field(default_factory=dict)

    KINDS = ("center_of_mass", "symplectic", "cluster", "marginal")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown tomogram kind {self.kind!r}")
        shape = tuple(a.size for a in self.axes.values())
        if self.values.shape != shape:
            raise DimensionError(f"values shape {self.values.shape} does not match axes {shape}")

    def mass(self) -> float:
        """Trapezoid integral over all axes."""
        v = self.values
        for ax in reversed(list(self.axes.values())):
            v = np.trapezoid(v, ax, axis=-1)
        return float(v)

    def rows(self):
        """Yield ``(coord_1, ..., coord_d, w)`` tuples in C order (last axis fastest)."""
        grids = np.meshgrid(*self.axes.values(), indexing="ij")
        cols = [g.ravel() for g in grids] + [self.values.ravel()]
        yield from zip(*cols)


def _grid_points(*axes: np.ndarray) -> np.ndarray:
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack(grids, axis=-1)


def cm_grid(state: FockSuperposition, frame: TomographyFrame, xs) -> TomogramGrid:
    xs = np.asarray(xs, dtype=float)
    return TomogramGrid({"X": xs}, np.asarray(cm_tomogram(state, xs, frame)), frame, "center_of_mass")


def symplectic_grid(state: FockSuperposition, frame: TomographyFrame, axes: Sequence) -> TomogramGrid:
    axes = [np.asarray(a, dtype=float) for a in axes]
    if len(axes) != state.num_modes:
        raise DimensionError(f"need {state.num_modes} axes, got {len(axes)}")
    vals = np.asarray(symplectic_tomogram(state, _grid_points(*axes), frame))
    names = {f"X{j + 1}": a for j, a in enumerate(axes)}
    return TomogramGrid(names, vals, frame, "symplectic")


def cluster_grid(
    state: FockSuperposition,
    frame: TomographyFrame,
    axes: Sequence,
    partition: Sequence[Sequence[int]],
) -> TomogramGrid:
    parts = _validate_partition(partition, state.num_modes)
    axes = [np.asarray(a, dtype=float) for a in axes]
    if len(axes) != len(parts):
        raise DimensionError(f"need {len(parts)} axes, got {len(axes)}")
    vals = np.asarray(clustered_tomogram(state, _grid_points(*axes), frame, parts))
    multi = [c for c in parts if len(c) > 1]
    names = {}
    for c, a in zip(parts, axes):
        if len(c) == 1:
            names[f"X{c[0] + 1}"] = a
        elif len(multi) == 1:
            names["X"] = a
        else:
            names["X" + "".join(str(j + 1) for j in c)] = a
    return TomogramGrid(names, vals, frame, "cluster", {"partition": [list(c) for c in parts]})


def marginal_grid(state: FockSuperposition, mode: int, mu: float, nu: float, xs) -> TomogramGrid:
    xs = np.asarray(xs, dtype=float)
    vals = np.asarray(subsystem_tomogram(state, mode, xs, mu, nu))
    mus = [0.0] * state.num_modes
    nus = [0.0] * state.num_modes
    mus[mode], nus[mode] = mu, nu
    return TomogramGrid({"X": xs}, vals, TomographyFrame(tuple(mus), tuple(nus)), "marginal", {"mode": mode})
