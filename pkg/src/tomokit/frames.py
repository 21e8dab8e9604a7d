"""Tomographic reference frames and their Heisenberg-picture time maps."""

from __future__ import annotations

import enum
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrameError, DimensionError

__all__ = ["TomographyFrame", "EvolutionKind", "evolve_frame", "scale_frame", "parse_frame"]


@dataclass(frozen=True)
class TomographyFrame:
    """Per-mode parameters of the measured quadrature ``sum_j mu_j q_j + nu_j p_j``."""

    mu: tuple[float, ...]
    nu: tuple[float, ...]

    def __post_init__(self):
        mu = tuple(float(v) for v in np.atleast_1d(self.mu))
        nu = tuple(float(v) for v in np.atleast_1d(self.nu))
        if len(mu) != len(nu):
            raise DimensionError(f"mu has {len(mu)} entries but nu has {len(nu)}")
        if not mu:
            raise DimensionError("a frame needs at least one mode")
        if not all(math.isfinite(v) for v in mu + nu):
            raise ValueError("frame parameters must be finite")
        if all(v == 0.0 for v in mu + nu):
            raise DegenerateFrameError("all frame parameters are zero")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu)

    @property
    def num_modes(self) -> int:
        return len(self.mu)

    @property
    def mode_sigmas(self) -> np.ndarray:
        """``mu_j**2 + nu_j**2`` per mode."""
        return np.array(self.mu) ** 2 + np.array(self.nu) ** 2

    @property
    def sigma(self) -> float:
        return float(np.sum(self.mode_sigmas))

    def active_modes(self, modes: Iterable[int] | None = None) -> tuple[int, ...]:
        """Modes whose pair ``(mu_j, nu_j)`` is not ``(0, 0)``."""
        modes = range(self.num_modes) if modes is None else modes
        return tuple(j for j in modes if self.mu[j] != 0.0 or self.nu[j] != 0.0)

    def require_nondegenerate(self, modes: Iterable[int] | None = None) -> None:
        modes = tuple(range(self.num_modes) if modes is None else modes)
        bad = [j for j in modes if j not in self.active_modes(modes)]
        if bad:
            raise DegenerateFrameError(f"(mu, nu) = (0, 0) for mode(s) {bad}")

    def subframe(self, modes: Sequence[int]) -> TomographyFrame:
        return TomographyFrame(tuple(self.mu[j] for j in modes), tuple(self.nu[j] for j in modes))

    def pair(self, mode: int) -> tuple[float, float]:
        return self.mu[mode], self.nu[mode]


class EvolutionKind(str, enum.Enum):
    HARMONIC = "harmonic"  # H = sum_j (p_j^2 + q_j^2) / 2
    INVERTED = "inverted"  # H = sum_j (p_j^2 - q_j^2) / 2


def evolve_frame(
    frame: TomographyFrame,
    kind: EvolutionKind | str,
    t: float,
    literal: bool = False,
) -> TomographyFrame:
    """Frame whose time-0 tomogram equals the tomogram of the state evolved to ``t``.

    Harmonic dynamics rotates each ``(mu_j, nu_j)`` by angle ``t``:
    ``mu' = mu cos t - nu sin t``, ``nu' = mu sin t + nu cos t``.
    Inverted dynamics applies the hyperbolic rotation
    ``mu' = mu cosh t + nu sinh t``, ``nu' = mu sinh t + nu cosh t``.

    ``literal=True`` (inverted only) replaces the second mode's map by
    ``mu_2' = mu_2 cosh t + nu_2 cosh t``. That variant is not a hyperbolic
    rotation, does not compose as a one-parameter group and at ``t = 0`` gives
    ``mu_2 + nu_2``; it exists only for side-by-side comparison.
    """
    kind = EvolutionKind(kind)
    mu = np.array(frame.mu)
    nu = np.array(frame.nu)
    if kind is EvolutionKind.HARMONIC:
        c, s = math.cos(t), math.sin(t)
        new_mu = mu * c - nu * s
        new_nu = mu * s + nu * c
    else:
        c, s = math.cosh(t), math.sinh(t)
        new_mu = mu * c + nu * s
        new_nu = mu * s + nu * c
        if literal and frame.num_modes >= 2:
            new_mu[1] = mu[1] * c + nu[1] * c
    return TomographyFrame(tuple(new_mu), tuple(new_nu))


def scale_frame(frame: TomographyFrame, lam: float) -> TomographyFrame:
    """Multiply every parameter by ``lam``; tomograms obey ``w(lam X | lam f) = w(X | f) / |lam|``."""
    if lam == 0:
        raise ValueError("scale factor must be non-zero")
    return TomographyFrame(tuple(lam * v for v in frame.mu), tuple(lam * v for v in frame.nu))


def parse_frame(mu: str, nu: str) -> TomographyFrame:
    """Frame from comma-separated strings such as ``"1,0"``."""
    try:
        mus = tuple(float(v) for v in mu.split(","))
        nus = tuple(float(v) for v in nu.split(","))
    except ValueError as exc:
        raise ValueError(f"cannot parse frame lists {mu!r} / {nu!r}: {exc}") from None
    return TomographyFrame(mus, nus)
