"""Pure multimode oscillator states in the Fock basis.

Units are hbar = m = omega = 1. Modes are indexed from 0 in the library; the
CLI and CSV headers use 1-based mode numbers.
"""

from __future__ import annotations

import itertools
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InvalidStateError

__all__ = [
    "N_MAX_DEFAULT",
    "FockTerm",
    "FockSuperposition",
    "DensityMatrix",
    "hermite",
    "fock_wavefunction",
    "fock_wavefunctions",
    "wavefunction_value",
    "density_matrix",
    "partial_trace",
    "partial_transpose",
    "negativity",
    "purity",
]

N_MAX_DEFAULT = 8
_NORM_TOL = 1e-12


def hermite(n: int, x):
    """Physicists' Hermite polynomial ``H_n(x)`` by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    if n < 0:
        raise ValueError("Hermite index must be non-negative")
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * x
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h if h.ndim else float(h)


def fock_wavefunctions(n_max: int, q) -> np.ndarray:
    """Position wavefunctions ``psi_0 .. psi_{n_max}`` stacked on a new leading axis.

    Uses the normalized recurrence
    ``psi_{n+1} = sqrt(2/(n+1)) q psi_n - sqrt(n/(n+1)) psi_{n-1}``,
    which stays finite where raw Hermite values would overflow.
    """
    q = np.asarray(q, dtype=float)
    out = np.empty((n_max + 1,) + q.shape)
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * q * q)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * q * out[0]
    for n in range(1, n_max):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * q * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def fock_wavefunction(n: int, q):
    """Hermite-Gaussian ``psi_n(q) = pi^(-1/4) (2^n n!)^(-1/2) H_n(q) exp(-q^2/2)``."""
    if n < 0:
        raise ValueError("Fock index must be non-negative")
    v = fock_wavefunctions(n, q)[n]
    return v if v.ndim else float(v)


@dataclass(frozen=True)
class FockTerm:
    amplitude: complex
    occupations: tuple[int, ...]

    def __post_init__(self):
        occ = tuple(int(n) for n in self.occupations)
        if any(n < 0 for n in occ):
            raise InvalidStateError(f"negative occupation in {occ}")
        object.__setattr__(self, "occupations", occ)
        object.__setattr__(self, "amplitude", complex(self.amplitude))


@dataclass(frozen=True)
class FockSuperposition:
    """Normalized pure state ``sum_k c_k |n_k1, ..., n_kN>``.

    Terms are sorted by occupation vector. Duplicate occupation vectors are
    merged by adding amplitudes; a merge that changes the norm is rejected
    rather than silently renormalized.
    """

    num_modes: int
    terms: tuple[FockTerm, ...]
    n_max: int = N_MAX_DEFAULT

    def __post_init__(self):
        if self.num_modes < 1:
            raise InvalidStateError("a state needs at least one mode")
        terms = tuple(self.terms)
        if not terms:
            raise InvalidStateError("a state needs at least one term")
        for t in terms:
            if len(t.occupations) != self.num_modes:
                raise InvalidStateError(
                    f"occupation vector {t.occupations} does not have {self.num_modes} entries"
                )
            if max(t.occupations) > self.n_max:
                raise InvalidStateError(
                    f"occupation vector {t.occupations} exceeds the Fock cutoff n_max={self.n_max}"
                )
        raw_norm = math.fsum(abs(t.amplitude) ** 2 for t in terms)
        merged: dict[tuple[int, ...], complex] = {}
        for t in terms:
            merged[t.occupations] = merged.get(t.occupations, 0j) + t.amplitude
        canon = tuple(FockTerm(merged[k], k) for k in sorted(merged) if merged[k] != 0)
        norm = math.fsum(abs(t.amplitude) ** 2 for t in canon)
        if len(canon) != len(terms) and abs(norm - raw_norm) > _NORM_TOL:
            raise InvalidStateError(
                f"merging duplicate occupations changes the norm from {raw_norm} to {norm}"
            )
        if abs(norm - 1.0) > _NORM_TOL:
            raise InvalidStateError(f"state norm is {norm!r}, expected 1 within {_NORM_TOL}")
        object.__setattr__(self, "terms", canon)

    @classmethod
    def from_amplitudes(
        cls,
        amplitudes: Mapping[Sequence[int], complex],
        normalize: bool = False,
        n_max: int = N_MAX_DEFAULT,
    ) -> FockSuperposition:
        """Build from ``{occupations: amplitude}``; optionally rescale to unit norm."""
        items = [(tuple(k), complex(v)) for k, v in amplitudes.items()]
        if not items:
            raise InvalidStateError("no amplitudes given")
        modes = {len(k) for k, _ in items}
        if len(modes) != 1:
            raise InvalidStateError("occupation vectors have different lengths")
        if normalize:
            norm = math.sqrt(math.fsum(abs(v) ** 2 for _, v in items))
            if norm == 0:
                raise InvalidStateError("all amplitudes are zero")
            items = [(k, v / norm) for k, v in items]
        return cls(modes.pop(), tuple(FockTerm(v, k) for k, v in items), n_max=n_max)

    @classmethod
    def basis(cls, occupations: Sequence[int], n_max: int = N_MAX_DEFAULT) -> FockSuperposition:
        return cls(len(occupations), (FockTerm(1.0, tuple(occupations)),), n_max=n_max)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([t.amplitude for t in self.terms], dtype=complex)

    @property
    def occupation_matrix(self) -> np.ndarray:
        """Integer array of shape ``(num_terms, num_modes)``."""
        return np.array([t.occupations for t in self.terms], dtype=int).reshape(-1, self.num_modes)

    def max_occupation(self, mode: int) -> int:
        return max(t.occupations[mode] for t in self.terms)

    def mode_dims(self) -> tuple[int, ...]:
        return tuple(self.max_occupation(j) + 1 for j in range(self.num_modes))

    def tensor(self, other: FockSuperposition) -> FockSuperposition:
        """Product state ``self (x) other`` with the modes of ``other`` appended."""
        amps = {}
        for a, b in itertools.product(self.terms, other.terms):
            amps[a.occupations + b.occupations] = a.amplitude * b.amplitude
        return FockSuperposition.from_amplitudes(amps, n_max=max(self.n_max, other.n_max))

    def to_json_dict(self) -> dict:
        return {
            "modes": self.num_modes,
            "terms": [
                {"re": t.amplitude.real, "im": t.amplitude.imag, "occ": list(t.occupations)}
                for t in self.terms
            ],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping, n_max: int = N_MAX_DEFAULT) -> FockSuperposition:
        try:
            modes = int(data["modes"])
            raw_terms = data["terms"]
            terms = tuple(
                FockTerm(complex(float(t.get("re", 0.0)), float(t.get("im", 0.0))), tuple(t["occ"]))
                for t in raw_terms
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidStateError(f"malformed state JSON: {exc}") from exc
        return cls(modes, terms, n_max=n_max)

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def loads(cls, text: str, n_max: int = N_MAX_DEFAULT) -> FockSuperposition:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidStateError(f"state file is not valid JSON: {exc}") from exc
        return cls.from_json_dict(data, n_max=n_max)


def wavefunction_value(state: FockSuperposition, q) -> complex | np.ndarray:
    """``psi(q_1, ..., q_N)``; ``q`` has trailing axis of length ``num_modes``."""
    q = np.asarray(q, dtype=float)
    if q.shape[-1:] != (state.num_modes,):
        raise DimensionError(f"expected {state.num_modes} coordinates, got shape {q.shape}")
    occ = state.occupation_matrix
    per_mode = [fock_wavefunctions(state.max_occupation(j), q[..., j]) for j in range(state.num_modes)]
    total = np.zeros(q.shape[:-1], dtype=complex)
    for c, row in zip(state.amplitudes, occ):
        prod = np.full(q.shape[:-1], c, dtype=complex)
        for j, n in enumerate(row):
            prod = prod * per_mode[j][n]
        total += prod
    return complex(total) if total.ndim == 0 else total


@dataclass(frozen=True)
class DensityMatrix:
    """Operator on the truncated product Fock basis ``|n_1> (x) ... (x) |n_N>``.

    Basis order is C order over ``mode_dims`` (last mode fastest). The
    constructor checks only shapes; :meth:`validate` checks the physical
    invariants.
    """

    mode_dims: tuple[int, ...]
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.mode_dims)
        if not dims or min(dims) < 1:
            raise DimensionError(f"invalid mode dimensions {self.mode_dims}")
        m = np.array(self.entries, dtype=complex)
        size = math.prod(dims)
        if m.shape != (size, size):
            raise DimensionError(f"matrix shape {m.shape} does not match mode dims {dims}")
        m.flags.writeable = False
        object.__setattr__(self, "mode_dims", dims)
        object.__setattr__(self, "entries", m)

    @property
    def num_modes(self) -> int:
        return len(self.mode_dims)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.entries + self.entries.conj().T))

    def validate(self, herm_tol: float = 1e-12, trace_tol: float = 1e-10, eig_tol: float = 1e-10) -> None:
        if self.hermiticity_error() > herm_tol:
            raise InvalidStateError(f"density matrix not Hermitian ({self.hermiticity_error():.2e})")
        if abs(self.trace() - 1.0) > trace_tol:
            raise InvalidStateError(f"density matrix trace is {self.trace()}")
        lo = float(self.eigenvalues().min())
        if lo < -eig_tol:
            raise InvalidStateError(f"density matrix has eigenvalue {lo:.3e}")

    def embed(self, mode_dims: Sequence[int]) -> DensityMatrix:
        """Zero-pad every mode to the (larger or equal) dimensions ``mode_dims``."""
        new = tuple(int(d) for d in mode_dims)
        if len(new) != self.num_modes or any(n < o for n, o in zip(new, self.mode_dims)):
            raise DimensionError(f"cannot embed dims {self.mode_dims} into {new}")
        t = self.entries.reshape(self.mode_dims * 2)
        out = np.zeros(new * 2, dtype=complex)
        out[tuple(slice(0, d) for d in self.mode_dims * 2)] = t
        size = math.prod(new)
        return DensityMatrix(new, out.reshape(size, size))

    @classmethod
    def from_diagonal(cls, probs: Sequence[float]) -> DensityMatrix:
        p = np.asarray(probs, dtype=float)
        return cls((p.size,), np.diag(p))


def density_matrix(state: FockSuperposition, mode_dims: Sequence[int] | None = None) -> DensityMatrix:
    """``|psi><psi|`` on the smallest product basis holding the state, or on ``mode_dims``."""
    dims = state.mode_dims() if mode_dims is None else tuple(int(d) for d in mode_dims)
    if len(dims) != state.num_modes:
        raise DimensionError(f"need {state.num_modes} mode dimensions, got {dims}")
    if any(state.max_occupation(j) >= dims[j] for j in range(state.num_modes)):
        raise DimensionError(f"mode dims {dims} too small for state")
    vec = np.zeros(math.prod(dims), dtype=complex)
    for t in state.terms:
        vec[np.ravel_multi_index(t.occupations, dims)] = t.amplitude
    return DensityMatrix(dims, np.outer(vec, vec.conj()))


def _check_subset(modes: Iterable[int], num_modes: int) -> tuple[int, ...]:
    sel = tuple(sorted(set(int(m) for m in modes)))
    if not sel or len(sel) >= num_modes or sel[0] < 0 or sel[-1] >= num_modes:
        raise DimensionError(f"{sel} is not a non-empty proper subset of modes 0..{num_modes - 1}")
    return sel


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every mode not listed in ``keep`` (0-based)."""
    keep = _check_subset(keep, rho.num_modes)
    n = rho.num_modes
    t = rho.entries.reshape(rho.mode_dims * 2)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for j in range(n):
        if j not in keep:
            col[j] = row[j]
    out = "".join(row[j] for j in keep) + "".join(col[j] for j in keep)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    dims = tuple(rho.mode_dims[j] for j in keep)
    size = math.prod(dims)
    return DensityMatrix(dims, reduced.reshape(size, size))


def partial_transpose(rho: DensityMatrix, modes: Iterable[int]) -> DensityMatrix:
    """Transpose the row/column indices of ``modes`` only."""
    modes = _check_subset(modes, rho.num_modes)
    n = rho.num_modes
    t = rho.entries.reshape(rho.mode_dims * 2)
    axes = list(range(2 * n))
    for j in modes:
        axes[j], axes[j + n] = axes[j + n], axes[j]
    size = math.prod(rho.mode_dims)
    return DensityMatrix(rho.mode_dims, t.transpose(axes).reshape(size, size))


def negativity(rho: DensityMatrix, subsystem: Iterable[int] = (0,)) -> float:
    """``(||rho^{T_B}||_1 - 1) / 2`` for the split ``subsystem | rest``.

    The partial transpose is taken on the complement of ``subsystem``; the
    value is the same either way.
    """
    subsystem = _check_subset(subsystem, rho.num_modes)
    rest = [j for j in range(rho.num_modes) if j not in subsystem]
    pt = partial_transpose(rho, rest).entries
    eig = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return max(0.0, 0.5 * (float(np.sum(np.abs(eig))) - 1.0))


def purity(rho: DensityMatrix) -> float:
    return float(np.real(np.trace(rho.entries @ rho.entries)))
