"""Analytic tomograms of the catalog states, used as reference oracles.

Catalog (modes 0-based, two-mode states on modes 0 and 1):

* ``ground``: ``|0, ..., 0>``
* ``sep``: ``|0> (x) |1>``
* ``ent``: ``(|0,1> + |1,0>) / sqrt(2)``
* ``W``: ``(|0,0,1> + |0,1,0> + |1,0,0>) / sqrt(3)``

Every oracle takes a full frame and rejects a vanishing ``sigma`` instead of
returning a distributional limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrameError, DimensionError
from .frames import EvolutionKind, TomographyFrame, evolve_frame
from .states import FockSuperposition

__all__ = [
    "CATALOG",
    "SigmaParams",
    "make_state",
    "cm_ent",
    "cm_sep",
    "marg_sep",
    "marg_ent",
    "sympl_sep",
    "sympl_ent",
    "cm_ent_evolved",
    "cluster_W",
]

CATALOG = ("ground", "sep", "ent", "W")


def make_state(name: str, num_modes: int | None = None) -> FockSuperposition:
    """Catalog state by name; ``num_modes`` only applies to ``ground`` (default 2)."""
    if name == "ground":
        return FockSuperposition.basis((0,) * (num_modes or 2))
    if name == "sep":
        return FockSuperposition.basis((0, 1))
    if name == "ent":
        c = 1.0 / math.sqrt(2.0)
        return FockSuperposition.from_amplitudes({(0, 1): c, (1, 0): c})
    if name == "W":
        c = 1.0 / math.sqrt(3.0)
        return FockSuperposition.from_amplitudes({(0, 0, 1): c, (0, 1, 0): c, (1, 0, 0): c})
    raise KeyError(f"unknown catalog state {name!r}; choose from {CATALOG}")


@dataclass(frozen=True)
class SigmaParams:
    """Frame invariants appearing in the closed forms."""

    sigma: float
    cross: float
    sigma3: float = float("nan")
    sigma12: float = float("nan")

    @classmethod
    def from_frame(cls, frame: TomographyFrame) -> SigmaParams:
        mu, nu = np.array(frame.mu), np.array(frame.nu)
        sigma = float(np.sum(mu * mu + nu * nu))
        if sigma <= 0:
            raise DegenerateFrameError("sigma = 0")
        cross = float(mu[0] * mu[1] + nu[0] * nu[1]) if frame.num_modes >= 2 else 0.0
        if frame.num_modes == 3:
            s3 = float(mu[2] ** 2 + nu[2] ** 2)
            s12 = float(mu[0] ** 2 + nu[0] ** 2 + mu[1] ** 2 + nu[1] ** 2)
            return cls(sigma, cross, s3, s12)
        return cls(sigma, cross)


def _two_mode(frame: TomographyFrame) -> SigmaParams:
    if frame.num_modes != 2:
        raise DimensionError("expected a two-mode frame")
    return SigmaParams.from_frame(frame)


def cm_ent(X, frame: TomographyFrame):
    """Center-of-mass tomogram of ``ent``."""
    p = _two_mode(frame)
    x2 = np.asarray(X, dtype=float) ** 2
    s, c = p.sigma, p.cross
    return np.exp(-x2 / s) / np.sqrt(np.pi * s) * (0.5 - c / s + x2 / s * (1.0 + 2.0 * c / s))


def cm_sep(X, frame: TomographyFrame):
    """Center-of-mass tomogram of ``sep``."""
    p = _two_mode(frame)
    x2 = np.asarray(X, dtype=float) ** 2
    s = p.sigma
    s1 = frame.mu[0] ** 2 + frame.nu[0] ** 2
    s2 = frame.mu[1] ** 2 + frame.nu[1] ** 2
    return np.exp(-x2 / s) / np.sqrt(np.pi * s ** 3) * (s1 + 2.0 * x2 / s * s2)


def _mode_sigma(mu: float, nu: float) -> float:
    s = mu * mu + nu * nu
    if s <= 0:
        raise DegenerateFrameError("(mu, nu) = (0, 0)")
    return s


def marg_sep(X1, mu1: float, nu1: float):
    """Mode-0 marginal of ``sep`` (the vacuum tomogram)."""
    s = _mode_sigma(mu1, nu1)
    x = np.asarray(X1, dtype=float)
    return np.exp(-x * x / s) / np.sqrt(np.pi * s)


def marg_ent(X1, mu1: float, nu1: float):
    """Mode-0 marginal of ``ent``, the tomogram of ``diag(1/2, 1/2)``."""
    s = _mode_sigma(mu1, nu1)
    x = np.asarray(X1, dtype=float)
    return np.exp(-x * x / s) / np.sqrt(np.pi * s) * (0.5 + x * x / s)


def _per_mode_sigmas(frame: TomographyFrame) -> tuple[float, float]:
    if frame.num_modes != 2:
        raise DimensionError("expected a two-mode frame")
    return _mode_sigma(*frame.pair(0)), _mode_sigma(*frame.pair(1))


def sympl_sep(X1, X2, frame: TomographyFrame):
    s1, s2 = _per_mode_sigmas(frame)
    x1 = np.asarray(X1, dtype=float)
    x2 = np.asarray(X2, dtype=float)
    return 2.0 * x2 ** 2 / (np.pi * s1 ** 0.5 * s2 ** 1.5) * np.exp(-x1 ** 2 / s1 - x2 ** 2 / s2)


def sympl_ent(X1, X2, frame: TomographyFrame):
    s1, s2 = _per_mode_sigmas(frame)
    c = frame.mu[0] * frame.mu[1] + frame.nu[0] * frame.nu[1]
    x1 = np.asarray(X1, dtype=float)
    x2 = np.asarray(X2, dtype=float)
    bracket = x1 ** 2 / s1 + x2 ** 2 / s2 + 2.0 * x1 * x2 * c / (s1 * s2)
    return bracket * np.exp(-x1 ** 2 / s1 - x2 ** 2 / s2) / (np.pi * math.sqrt(s1 * s2))


def cm_ent_evolved(X, frame: TomographyFrame, kind: EvolutionKind | str, t: float, literal: bool = False):
    """``cm_ent`` with ``sigma`` and the cross term taken from the time-mapped frame."""
    return cm_ent(X, evolve_frame(frame, kind, t, literal=literal))


def cluster_W(X, X3, frame: TomographyFrame):
    """Cluster tomogram of ``W`` for the split {modes 0, 1} | {mode 2}."""
    if frame.num_modes != 3:
        raise DimensionError("expected a three-mode frame")
    mu, nu = frame.mu, frame.nu
    s3 = mu[2] ** 2 + nu[2] ** 2
    s12 = mu[0] ** 2 + nu[0] ** 2 + mu[1] ** 2 + nu[1] ** 2
    if s3 <= 0 or s12 <= 0:
        raise DegenerateFrameError("sigma3 and sigma12 must be positive")
    x = np.asarray(X, dtype=float)
    x3 = np.asarray(X3, dtype=float)
    plus = (mu[0] + mu[1]) ** 2 + (nu[0] + nu[1]) ** 2
    minus = (mu[0] - mu[1]) ** 2 + (nu[0] - nu[1]) ** 2
    mix = mu[0] * mu[2] + nu[0] * nu[2] + mu[1] * mu[2] + nu[1] * nu[2]
    bracket = (
        x3 ** 2 / s3
        + x ** 2 * plus / s12 ** 2
        + 2.0 * x * x3 * mix / (s3 * s12)
        + minus / (2.0 * s12)
    )
    return 2.0 / (3.0 * np.pi) * np.exp(-x3 ** 2 / s3 - x ** 2 / s12) / np.sqrt(s3 * s12) * bracket
