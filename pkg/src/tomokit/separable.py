"""Tomograms of separable states from convex decompositions.

A decomposition ``rho = sum_k p_k rho1_k (x) rho2_k`` with pure parts gives a
symplectic tomogram that is the convex sum of products of subsystem
symplectic tomograms, and a center-of-mass tomogram that is the convex sum of
convolutions of subsystem center-of-mass tomograms. Entanglement of a given
pure state is certified separately through the negativity of its density
matrix; no search over decompositions is attempted.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrameError, DimensionError, InvalidStateError
from .frames import TomographyFrame
from .quadrature import gauss_legendre
from .states import FockSuperposition, density_matrix, negativity
from .tomography import WHITENED_HALF_WIDTH, cm_tomogram, default_nodes, symplectic_tomogram

__all__ = [
    "SeparableDecomposition",
    "separable_symplectic",
    "separable_cm",
    "entanglement_witness_gap",
]


@dataclass(frozen=True)
class SeparableDecomposition:
    """Convex mixture of product states ``part1_k (x) part2_k`` with weights ``p_k``."""

    weights: tuple[float, ...]
    parts: tuple[tuple[FockSuperposition, FockSuperposition], ...]

    def __post_init__(self):
        w = tuple(float(p) for p in self.weights)
        parts = tuple((a, b) for a, b in self.parts)
        if len(w) != len(parts) or not w:
            raise InvalidStateError("need one weight per part and at least one part")
        if any(p < 0 for p in w) or abs(math.fsum(w) - 1.0) > 1e-12:
            raise InvalidStateError(f"weights {w} are not a probability vector")
        if len({a.num_modes for a, _ in parts}) != 1 or len({b.num_modes for _, b in parts}) != 1:
            raise InvalidStateError("all parts must share the same subsystem mode counts")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "parts", parts)

    @property
    def n1(self) -> int:
        return self.parts[0][0].num_modes

    @property
    def n2(self) -> int:
        return self.parts[0][1].num_modes

    @property
    def num_modes(self) -> int:
        return self.n1 + self.n2

    def split_frame(self, frame: TomographyFrame) -> tuple[TomographyFrame | None, TomographyFrame | None]:
        if frame.num_modes != self.num_modes:
            raise DimensionError(f"frame has {frame.num_modes} modes, decomposition has {self.num_modes}")
        return _maybe_subframe(frame, range(self.n1)), _maybe_subframe(frame, range(self.n1, self.num_modes))

    def to_json_dict(self) -> dict:
        return {
            "weights": list(self.weights),
            "parts": [[a.to_json_dict(), b.to_json_dict()] for a, b in self.parts],
        }

    @classmethod
    def from_json_dict(cls, data) -> SeparableDecomposition:
        try:
            weights = tuple(float(p) for p in data["weights"])
            parts = tuple(
                (FockSuperposition.from_json_dict(a), FockSuperposition.from_json_dict(b))
                for a, b in data["parts"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidStateError):
                raise
            raise InvalidStateError(f"malformed decomposition JSON: {exc}") from exc
        return cls(weights, parts)

    @classmethod
    def loads(cls, text: str) -> SeparableDecomposition:
        try:
            return cls.from_json_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InvalidStateError(f"decomposition file is not valid JSON: {exc}") from exc


def _maybe_subframe(frame: TomographyFrame, modes: Iterable[int]) -> TomographyFrame | None:
    modes = list(modes)
    if not frame.active_modes(modes):
        return None
    return frame.subframe(modes)


def separable_symplectic(decomp: SeparableDecomposition, X, frame: TomographyFrame):
    """``sum_k p_k w1_k(X_1 | frame_1) w2_k(X_2 | frame_2)``; ``X`` has trailing axis ``N1 + N2``."""
    f1, f2 = decomp.split_frame(frame)
    frame.require_nondegenerate()
    x = np.asarray(X, dtype=float)
    if x.shape[-1:] != (decomp.num_modes,):
        raise DimensionError(f"expected {decomp.num_modes} coordinates, got shape {x.shape}")
    total = np.zeros(x.shape[:-1])
    for p, (a, b) in zip(decomp.weights, decomp.parts):
        total = total + p * symplectic_tomogram(a, x[..., : decomp.n1], f1) * symplectic_tomogram(
            b, x[..., decomp.n1:], f2
        )
    return float(total) if total.ndim == 0 else total


def _convolution_rule(f1: TomographyFrame, f2: TomographyFrame, n_nodes: int):
    # Envelopes exp(-Z^2/s1) and exp(-(X - Z)^2/s2): center X s1/(s1+s2), width sqrt(s1 s2/(s1+s2)).
    s1, s2 = f1.sigma, f2.sigma
    rule = gauss_legendre(n_nodes, -WHITENED_HALF_WIDTH, WHITENED_HALF_WIDTH)
    width = math.sqrt(s1 * s2 / (s1 + s2))
    return s1 / (s1 + s2), width * rule.nodes, width * rule.weights


def separable_cm(
    decomp: SeparableDecomposition,
    X,
    frame: TomographyFrame,
    nodes: int | None = None,
):
    """``sum_k p_k int w1_k(Z | frame_1) w2_k(X - Z | frame_2) dZ``.

    Subsystem tomograms are center-of-mass tomograms of the ``N1``- and
    ``N2``-mode parts. A subsystem whose frame is entirely zero contributes a
    delta at the origin, which reduces the convolution to the other factor.
    """
    f1, f2 = decomp.split_frame(frame)
    if f1 is None and f2 is None:
        raise DegenerateFrameError("all frame parameters are zero")
    x = np.asarray(X, dtype=float)
    n_nodes = default_nodes(1) if nodes is None else int(nodes)
    total = np.zeros(x.shape)
    if f1 is not None and f2 is not None:
        ratio, offsets, weights = _convolution_rule(f1, f2, n_nodes)
        z = ratio * x[..., None] + offsets
    for p, (a, b) in zip(decomp.weights, decomp.parts):
        if f1 is None:
            term = cm_tomogram(b, x, f2)
        elif f2 is None:
            term = cm_tomogram(a, x, f1)
        else:
            w1 = cm_tomogram(a, z, f1)
            w2 = cm_tomogram(b, x[..., None] - z, f2)
            term = np.sum(w1 * w2 * weights, axis=-1)
        total = total + p * term
    return float(total) if total.ndim == 0 else total


def entanglement_witness_gap(state: FockSuperposition, subsystem: Sequence[int] = (0,)) -> float:
    """Negativity of ``|psi><psi|`` across ``subsystem | rest``.

    A positive value certifies that no convex decomposition into product
    states exists, hence the state's tomograms are not of separable form.
    Zero is returned for product states (and would be for PPT-entangled
    mixtures, which pure states cannot be).
    """
    if state.num_modes < 2:
        raise DimensionError("need at least two modes")
    return negativity(density_matrix(state), subsystem)
