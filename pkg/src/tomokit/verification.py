"""Self-verification suites run by ``tomokit verify`` and the acceptance tests.

Each suite compares the numerical engine against an independent reference
(closed forms, exact linear algebra, algebraic identities) at a fixed
tolerance and returns a :class:`SuiteResult`. Frames are drawn from a seeded
generator so a report is reproducible from its seed.
"""

from __future__ import annotations

import math
import time
from collections.abc import Callable
from dataclasses import asdict, dataclass, field

import numpy as np

from . import closed_forms as cf
from .frames import EvolutionKind, TomographyFrame, evolve_frame, scale_frame
from .reconstruction import fidelity, reconstruct_single_mode
from .separable import SeparableDecomposition, separable_cm
from .states import DensityMatrix, FockSuperposition, density_matrix, negativity
from .tomography import (
    cluster_tomogram,
    cm_tomogram,
    subsystem_tomogram,
    symplectic_tomogram,
)

__all__ = ["SuiteResult", "SUITES", "random_frame", "run_suite", "run_all"]


@dataclass
class SuiteResult:
    criterion: int
    name: str
    passed: bool
    max_error: float
    tolerance: float
    seconds: float
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] criterion {self.criterion:>2} {self.name}: "
            f"max error {self.max_error:.3e} (tol {self.tolerance:.0e}), {self.seconds:.2f} s"
        )

    def to_dict(self) -> dict:
        return asdict(self)


def random_frame(
    rng: np.random.Generator,
    num_modes: int,
    low: float = -2.0,
    high: float = 2.0,
    min_sigma: float = 0.0,
    min_mode_sigma: float = 0.0,
) -> TomographyFrame:
    """Uniform frame entries, redrawn until the sigma constraints hold."""
    while True:
        v = rng.uniform(low, high, size=2 * num_modes)
        mu, nu = v[:num_modes], v[num_modes:]
        ms = mu * mu + nu * nu
        if ms.sum() >= min_sigma and ms.min() >= min_mode_sigma and ms.sum() > 0:
            return TomographyFrame(tuple(mu), tuple(nu))


def _sup(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def suite_cm_oracle(rng: np.random.Generator) -> SuiteResult:
    ent, sep = cf.make_state("ent"), cf.make_state("sep")
    xs = np.linspace(-5.0, 5.0, 51)
    err = {"ent": 0.0, "sep": 0.0}
    t0 = time.perf_counter()
    for _ in range(20):
        f = random_frame(rng, 2, min_sigma=0.1)
        err["ent"] = max(err["ent"], _sup(cm_tomogram(ent, xs, f), cf.cm_ent(xs, f)))
        err["sep"] = max(err["sep"], _sup(cm_tomogram(sep, xs, f), cf.cm_sep(xs, f)))
    dt = time.perf_counter() - t0
    worst = max(err.values())
    return SuiteResult(1, "center-of-mass oracle equivalence", worst < 1e-8 and dt < 10.0, worst, 1e-8, dt,
                       {"per_state": err, "runtime_limit_s": 10.0})


def suite_symplectic_oracle(rng: np.random.Generator) -> SuiteResult:
    ent, sep = cf.make_state("ent"), cf.make_state("sep")
    axis = np.linspace(-4.0, 4.0, 21)
    x1, x2 = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([x1, x2], axis=-1)
    err = {"ent": 0.0, "sep": 0.0}
    t0 = time.perf_counter()
    for _ in range(10):
        f = random_frame(rng, 2, min_mode_sigma=0.1)
        err["ent"] = max(err["ent"], _sup(symplectic_tomogram(ent, pts, f), cf.sympl_ent(x1, x2, f)))
        err["sep"] = max(err["sep"], _sup(symplectic_tomogram(sep, pts, f), cf.sympl_sep(x1, x2, f)))
    worst = max(err.values())
    return SuiteResult(2, "symplectic oracle equivalence", worst < 1e-10, worst, 1e-10,
                       time.perf_counter() - t0, {"per_state": err})


def suite_marginals(rng: np.random.Generator) -> SuiteResult:
    ent, sep = cf.make_state("ent"), cf.make_state("sep")
    xs = np.linspace(-5.0, 5.0, 51)
    oracle_err = 0.0
    cm_err = 0.0
    t0 = time.perf_counter()
    for _ in range(10):
        mu, nu = random_frame(rng, 1, min_sigma=0.1).pair(0)
        zeroed = TomographyFrame((mu, 0.0), (nu, 0.0))
        for state, oracle in ((sep, cf.marg_sep), (ent, cf.marg_ent)):
            w = subsystem_tomogram(state, 0, xs, mu, nu)
            oracle_err = max(oracle_err, _sup(w, oracle(xs, mu, nu)))
            cm_err = max(cm_err, _sup(w, cm_tomogram(state, xs, zeroed)))
    passed = oracle_err < 1e-10 and cm_err < 1e-8
    return SuiteResult(3, "subsystem marginals", passed, max(oracle_err, cm_err), 1e-10,
                       time.perf_counter() - t0,
                       {"oracle_error": oracle_err, "oracle_tol": 1e-10, "cm_error": cm_err, "cm_tol": 1e-8})


def suite_normalization(rng: np.random.Generator, frames: int = 200, points: int = 49) -> SuiteResult:
    catalog = [(name, cf.make_state(name)) for name in cf.CATALOG]
    err: dict[str, float] = {}
    t0 = time.perf_counter()
    for name, state in catalog:
        worst = 0.0
        for _ in range(frames):
            f = random_frame(rng, state.num_modes)
            half = 8.0 * math.sqrt(f.sigma / 2.0)
            xs = np.linspace(-half, half, points)
            worst = max(worst, abs(float(np.trapezoid(cm_tomogram(state, xs, f), xs)) - 1.0))
        err[name] = worst
    w_state = cf.make_state("W")
    cluster_worst = 0.0
    for _ in range(5):
        f = random_frame(rng, 3, min_mode_sigma=0.05)
        s12 = f.mode_sigmas[:2].sum()
        s3 = f.mode_sigmas[2]
        a = np.linspace(-8 * math.sqrt(s12 / 2), 8 * math.sqrt(s12 / 2), 41)
        b = np.linspace(-8 * math.sqrt(s3 / 2), 8 * math.sqrt(s3 / 2), 41)
        xx, x3 = np.meshgrid(a, b, indexing="ij")
        vals = cluster_tomogram(w_state, xx, x3, f)
        mass = np.trapezoid(np.trapezoid(vals, b, axis=1), a)
        cluster_worst = max(cluster_worst, abs(float(mass) - 1.0))
    err["W_cluster"] = cluster_worst
    worst = max(err.values())
    return SuiteResult(4, "normalization", worst < 5e-4, worst, 5e-4, time.perf_counter() - t0,
                       {"per_state": err, "frames_per_state": frames})


def suite_homogeneity(rng: np.random.Generator) -> SuiteResult:
    xs = np.linspace(-4.0, 4.0, 21)
    worst = 0.0
    t0 = time.perf_counter()
    for name in cf.CATALOG:
        state = cf.make_state(name)
        for _ in range(3):
            f = random_frame(rng, state.num_modes, min_sigma=0.1)
            base = cm_tomogram(state, xs, f)
            for lam in (-2.0, 0.5, 3.0):
                scaled = abs(lam) * cm_tomogram(state, lam * xs, scale_frame(f, lam))
                worst = max(worst, _sup(scaled, base))
    return SuiteResult(5, "homogeneity", worst < 1e-8, worst, 1e-8, time.perf_counter() - t0)


def suite_dynamics(rng: np.random.Generator) -> SuiteResult:
    ent = cf.make_state("ent")
    xs = np.linspace(-5.0, 5.0, 51)
    oracle_err = 0.0
    stationary_err = 0.0
    group_err = 0.0
    t0 = time.perf_counter()
    for _ in range(4):
        f = random_frame(rng, 2, min_sigma=0.1)
        base = cm_tomogram(ent, xs, f)
        for kind in EvolutionKind:
            for t in (0.3, 1.0, 2.0):
                mapped = evolve_frame(f, kind, t)
                w = cm_tomogram(ent, xs, mapped)
                oracle_err = max(oracle_err, _sup(w, cf.cm_ent_evolved(xs, f, kind, t)))
                if kind is EvolutionKind.HARMONIC:
                    stationary_err = max(stationary_err, _sup(w, base))
                for s in (0.3, 1.0, 2.0):
                    two_step = evolve_frame(evolve_frame(f, kind, s), kind, t)
                    one_step = evolve_frame(f, kind, s + t)
                    group_err = max(group_err, _sup(two_step.mu + two_step.nu, one_step.mu + one_step.nu))
    passed = oracle_err < 1e-10 and stationary_err < 1e-10 and group_err < 1e-12
    return SuiteResult(6, "dynamics", passed, max(oracle_err, stationary_err), 1e-10,
                       time.perf_counter() - t0,
                       {"oracle_error": oracle_err, "stationary_error": stationary_err,
                        "group_error": group_err, "group_tol": 1e-12})


def suite_cluster(rng: np.random.Generator) -> SuiteResult:
    w_state = cf.make_state("W")
    axis = np.linspace(-4.0, 4.0, 21)
    xx, x3 = np.meshgrid(axis, axis, indexing="ij")
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(5):
        f = random_frame(rng, 3, min_mode_sigma=0.1)
        worst = max(worst, _sup(cluster_tomogram(w_state, xx, x3, f), cf.cluster_W(xx, x3, f)))
    return SuiteResult(7, "cluster tomogram of W", worst < 1e-7, worst, 1e-7, time.perf_counter() - t0)


def suite_separable(rng: np.random.Generator) -> SuiteResult:
    xs = np.linspace(-5.0, 5.0, 51)
    vac, one = FockSuperposition.basis((0,)), FockSuperposition.basis((1,))
    cases = [
        ("vac x vac", vac, vac),
        ("vac x one", vac, one),
        ("one x one", one, one),
        ("ent x one (2+1 modes)", cf.make_state("ent"), one),
    ]
    err: dict[str, float] = {}
    t0 = time.perf_counter()
    for label, a, b in cases:
        decomp = SeparableDecomposition((1.0,), ((a, b),))
        product = a.tensor(b)
        worst = 0.0
        for _ in range(3):
            f = random_frame(rng, product.num_modes, min_sigma=0.1)
            worst = max(worst, _sup(separable_cm(decomp, xs, f), cm_tomogram(product, xs, f)))
        err[label] = worst
    worst = max(err.values())
    return SuiteResult(8, "separable composition", worst < 1e-6, worst, 1e-6, time.perf_counter() - t0,
                       {"per_case": err})


def suite_negativity(rng: np.random.Generator) -> SuiteResult:
    t0 = time.perf_counter()
    n_ent = negativity(density_matrix(cf.make_state("ent")), (0,))
    n_sep = negativity(density_matrix(cf.make_state("sep")), (0,))
    worst = max(abs(n_ent - 0.5), abs(n_sep))
    return SuiteResult(9, "entanglement certification", worst < 1e-10, worst, 1e-10,
                       time.perf_counter() - t0, {"negativity_ent": n_ent, "negativity_sep": n_sep})


def suite_reconstruction(rng: np.random.Generator, cutoff: int = 6) -> SuiteResult:
    vac, one = FockSuperposition.basis((0,)), FockSuperposition.basis((1,))
    targets: list[tuple[str, Callable, DensityMatrix]] = [
        ("|0>", lambda x, m, n: subsystem_tomogram(vac, 0, x, m, n), density_matrix(vac)),
        ("|1>", lambda x, m, n: subsystem_tomogram(one, 0, x, m, n), density_matrix(one)),
        ("diag(1/2,1/2)", cf.marg_ent, DensityMatrix.from_diagonal([0.5, 0.5])),
    ]
    detail: dict[str, dict] = {}
    t0 = time.perf_counter()
    passed = True
    worst = 0.0
    for label, w, truth in targets:
        rho = reconstruct_single_mode(w, cutoff)
        fid = fidelity(rho, truth)
        tr_err = abs(rho.trace() - 1.0)
        detail[label] = {"fidelity": fid, "trace_error": tr_err}
        passed &= fid >= 0.999 and tr_err < 1e-3
        worst = max(worst, 1.0 - min(fid, 1.0), tr_err)
    dt = time.perf_counter() - t0
    passed &= dt < 30.0
    detail["runtime_limit_s"] = 30.0
    return SuiteResult(10, "reconstruction round trip", bool(passed), worst, 1e-3, dt, detail)


SUITES: dict[int, Callable[[np.random.Generator], SuiteResult]] = {
    1: suite_cm_oracle,
    2: suite_symplectic_oracle,
    3: suite_marginals,
    4: suite_normalization,
    5: suite_homogeneity,
    6: suite_dynamics,
    7: suite_cluster,
    8: suite_separable,
    9: suite_negativity,
    10: suite_reconstruction,
}


def run_suite(criterion: int, seed: int = 42) -> SuiteResult:
    rng = np.random.default_rng([seed, criterion])
    return SUITES[criterion](rng)


def run_all(seed: int = 42) -> list[SuiteResult]:
    return [run_suite(c, seed) for c in sorted(SUITES)]
