"""Command-line interface: ``tomokit <command> [options]``.

Commands evaluate tomograms on grids (``eval-cm``, ``eval-symplectic``,
``eval-cluster``, ``marginal``), map frames through free evolution before
evaluating (``evolve``), reconstruct single-mode density matrices
(``reconstruct``) and run the self-verification suites (``verify``).

Modes are numbered from 1 on the command line. Errors are reported on stderr
as one JSON object. Exit codes: 0 success, 2 bad input, 3 numerical
non-convergence, 4 a verification suite failed.
"""

from __future__ import annotations

import argparse
import io
import json
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NonConvergenceError, TomokitError
from .frames import EvolutionKind, TomographyFrame, evolve_frame, parse_frame
from .reconstruction import read_samples_csv, reconstruct_from_samples, reconstruct_single_mode
from .separable import SeparableDecomposition, separable_cm, separable_symplectic
from .states import DensityMatrix, FockSuperposition
from .tomography import (
    TomogramGrid,
    cluster_grid,
    cm_grid,
    marginal_grid,
    subsystem_tomogram,
    symplectic_grid,
)

__all__ = ["RunConfig", "GridSpec", "CliError", "build_parser", "parse_grid", "parse_clusters", "run", "main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NONCONVERGENCE = 3
EXIT_VERIFY = 4

GRID_MIN_COUNT = 2
GRID_MAX_COUNT = 100_000

COMMANDS = ("eval-cm", "eval-symplectic", "eval-cluster", "marginal", "evolve", "reconstruct", "verify")

# Options whose value may legitimately start with '-' (e.g. "--grid -5:5:101").
_VALUE_FLAGS = {"--mu", "--nu", "--grid", "--mu-grid", "--nu-grid", "--t"}
_NEGATIVE_VALUE = re.compile(r"^-[\d.]")


class CliError(Exception):
    """Bad command-line input; reported with exit status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


@dataclass(frozen=True)
class GridSpec:
    lo: float
    hi: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


def parse_grid(text: str) -> GridSpec:
    """``"min:max:count"`` with ``min < max`` and ``2 <= count <= 100000``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise CliError(f"grid {text!r} must have the form min:max:count")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        count = int(parts[2])
    except ValueError:
        raise CliError(f"grid {text!r} has a non-numeric field") from None
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
        raise CliError(f"grid {text!r} needs finite min < max")
    if not GRID_MIN_COUNT <= count <= GRID_MAX_COUNT:
        raise CliError(f"grid count {count} outside [{GRID_MIN_COUNT}, {GRID_MAX_COUNT}]")
    return GridSpec(lo, hi, count)


def parse_clusters(text: str) -> tuple[tuple[int, ...], ...]:
    """``"1,2|3"`` (1-based) to ``((0, 1), (2,))``."""
    try:
        parts = tuple(tuple(int(v) - 1 for v in chunk.split(",")) for chunk in text.split("|"))
    except ValueError:
        raise CliError(f"clusters {text!r} must look like 1,2|3") from None
    if any(j < 0 for c in parts for j in c):
        raise CliError("cluster modes are numbered from 1")
    return parts


@dataclass
class RunConfig:
    command: str
    state_path: Path | None = None
    decomposition_path: Path | None = None
    mu: str | None = None
    nu: str | None = None
    grids: list[GridSpec] = field(default_factory=list)
    clusters: tuple[tuple[int, ...], ...] | None = None
    mode: int | None = None
    kind: str | None = None
    t: float = 0.0
    literal: bool = False
    target: str = "cm"
    mu_grid: GridSpec | None = None
    nu_grid: GridSpec | None = None
    samples_path: Path | None = None
    cutoff: int = 6
    psd: bool = False
    seed: int = 42
    criteria: tuple[int, ...] | None = None
    out: Path | None = None
    fmt: str = "csv"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise CliError(f"unknown command {self.command!r}")
        for p in (self.state_path, self.decomposition_path, self.samples_path):
            if p is not None and not Path(p).is_file():
                raise CliError(f"file not found: {p}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tomokit", description="Tomograms of multimode oscillator states.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def output(p):
        p.add_argument("--out", type=Path, help="output file (default: stdout)")
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")

    def frame(p):
        p.add_argument("--mu", required=True, help="comma-separated per-mode mu values")
        p.add_argument("--nu", required=True, help="comma-separated per-mode nu values")

    def source(p, decomposition=True):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--state", dest="state_path", type=Path, help="state JSON")
        if decomposition:
            g.add_argument("--decomposition", dest="decomposition_path", type=Path,
                           help="separable decomposition JSON")

    def grid(p, help_text):
        p.add_argument("--grid", dest="grids", action="append", type=parse_grid, required=True,
                       metavar="MIN:MAX:COUNT", help=help_text)

    p = sub.add_parser("eval-cm", help="center-of-mass tomogram w(X | mu, nu)")
    source(p)
    frame(p)
    grid(p, "X grid")
    output(p)

    p = sub.add_parser("eval-symplectic", help="joint symplectic tomogram w(X1, ..., XN | mu, nu)")
    source(p)
    frame(p)
    grid(p, "one grid per mode, or one shared by all")
    output(p)

    p = sub.add_parser("eval-cluster", help="cluster tomogram, one variable per cluster")
    source(p, decomposition=False)
    frame(p)
    p.add_argument("--clusters", type=parse_clusters, default=None, help='e.g. "1,2|3" (default)')
    grid(p, "one grid per cluster, or one shared by all")
    output(p)

    p = sub.add_parser("marginal", help="one-mode marginal, or (mu, nu, X, w) samples for reconstruction")
    source(p, decomposition=False)
    p.add_argument("--mode", type=int, required=True, help="mode number (from 1)")
    p.add_argument("--mu", help="mu of the measured mode")
    p.add_argument("--nu", help="nu of the measured mode")
    p.add_argument("--mu-grid", type=parse_grid, help="with --nu-grid: emit a mu,nu,X,w sample table")
    p.add_argument("--nu-grid", type=parse_grid)
    grid(p, "X grid")
    output(p)

    p = sub.add_parser("evolve", help="map the frame through free evolution, then evaluate")
    source(p)
    frame(p)
    p.add_argument("--kind", choices=[k.value for k in EvolutionKind], required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--literal", action="store_true", help="inverted map with the cosh-cosh mode-2 row")
    p.add_argument("--target", choices=("cm", "symplectic", "cluster"), default="cm")
    p.add_argument("--clusters", type=parse_clusters, default=None)
    grid(p, "grid(s) for the chosen target")
    output(p)

    p = sub.add_parser("reconstruct", help="single-mode density matrix (JSON)")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--samples", dest="samples_path", type=Path, help="CSV with columns mu,nu,X,w")
    g.add_argument("--state", dest="state_path", type=Path, help="state JSON; reconstructs one mode")
    p.add_argument("--mode", type=int, default=1, help="mode of --state to reconstruct (from 1)")
    p.add_argument("--cutoff", type=int, default=6, help="highest Fock number")
    p.add_argument("--psd", action="store_true", help="project onto density matrices")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("verify", help="run the verification suites (JSON report)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--criteria", default=None, help="comma-separated subset, e.g. 1,2,9")
    p.add_argument("--out", type=Path)
    return parser


def _join_negative_values(argv: list[str]) -> list[str]:
    out: list[str] = []
    it = iter(range(len(argv)))
    for i in it:
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and _NEGATIVE_VALUE.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            next(it, None)
        else:
            out.append(tok)
    return out


def config_from_args(argv: list[str]) -> RunConfig:
    ns = build_parser().parse_args(_join_negative_values(list(argv)))
    kwargs = {k: v for k, v in vars(ns).items() if v is not None and k in RunConfig.__dataclass_fields__}
    if "criteria" in kwargs:
        try:
            kwargs["criteria"] = tuple(int(c) for c in kwargs["criteria"].split(","))
        except ValueError:
            raise CliError(f"criteria {kwargs['criteria']!r} must be comma-separated integers") from None
    return RunConfig(**kwargs)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def grid_to_csv(grid: TomogramGrid) -> str:
    buf = io.StringIO()
    buf.write(",".join(list(grid.axes) + ["w"]) + "\n")
    for row in grid.rows():
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def grid_to_json(grid: TomogramGrid) -> str:
    doc = {
        "kind": grid.kind,
        "frame": {"mu": list(grid.frame.mu), "nu": list(grid.frame.nu)},
        "axes": {k: v.tolist() for k, v in grid.axes.items()},
        "values": grid.values.tolist(),
        "meta": grid.meta,
    }
    return json.dumps(doc, indent=2) + "\n"


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _load_state(path: Path) -> FockSuperposition:
    return FockSuperposition.loads(Path(path).read_text(encoding="utf-8"))


def _load_decomposition(path: Path) -> SeparableDecomposition:
    return SeparableDecomposition.loads(Path(path).read_text(encoding="utf-8"))


def _frame(cfg: RunConfig) -> TomographyFrame:
    if cfg.mu is None or cfg.nu is None:
        raise CliError("--mu and --nu are required")
    return parse_frame(cfg.mu, cfg.nu)


def _axes(cfg: RunConfig, count: int) -> list[np.ndarray]:
    if len(cfg.grids) == 1:
        return [cfg.grids[0].values()] * count
    if len(cfg.grids) != count:
        raise CliError(f"need 1 or {count} --grid options, got {len(cfg.grids)}")
    return [g.values() for g in cfg.grids]


def _single_axis(cfg: RunConfig) -> np.ndarray:
    if len(cfg.grids) != 1:
        raise CliError("exactly one --grid is expected")
    return cfg.grids[0].values()


def _evaluate(cfg: RunConfig, target: str, frame: TomographyFrame) -> TomogramGrid:
    if cfg.decomposition_path is not None:
        decomp = _load_decomposition(cfg.decomposition_path)
        if target == "cm":
            xs = _single_axis(cfg)
            return TomogramGrid({"X": xs}, np.asarray(separable_cm(decomp, xs, frame)), frame,
                                "center_of_mass", {"source": "decomposition"})
        if target == "symplectic":
            axes = _axes(cfg, decomp.num_modes)
            pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
            names = {f"X{j + 1}": a for j, a in enumerate(axes)}
            return TomogramGrid(names, np.asarray(separable_symplectic(decomp, pts, frame)), frame,
                                "symplectic", {"source": "decomposition"})
        raise CliError("cluster tomograms need --state")
    state = _load_state(cfg.state_path)
    if target == "cm":
        return cm_grid(state, frame, _single_axis(cfg))
    if target == "symplectic":
        return symplectic_grid(state, frame, _axes(cfg, state.num_modes))
    clusters = cfg.clusters
    if clusters is None:
        if state.num_modes < 2:
            raise CliError("cluster tomograms need at least two modes")
        clusters = (tuple(range(state.num_modes - 1)), (state.num_modes - 1,))
    return cluster_grid(state, frame, _axes(cfg, len(clusters)), clusters)


def _marginal(cfg: RunConfig) -> str:
    state = _load_state(cfg.state_path)
    mode = _zero_based_mode(cfg.mode, state.num_modes)
    xs = _single_axis(cfg)
    if cfg.mu_grid is not None or cfg.nu_grid is not None:
        if cfg.mu_grid is None or cfg.nu_grid is None:
            raise CliError("--mu-grid and --nu-grid go together")
        buf = io.StringIO()
        buf.write("mu,nu,X,w\n")
        for mu in cfg.mu_grid.values():
            for nu in cfg.nu_grid.values():
                if mu == 0.0 and nu == 0.0:
                    # Delta at X = 0, placed at the grid point nearest 0; its exact
                    # characteristic value 1 is restored on reconstruction.
                    w = np.zeros_like(xs)
                    k = int(np.argmin(np.abs(xs)))
                    w[k] = 1.0
                else:
                    w = subsystem_tomogram(state, mode, xs, float(mu), float(nu))
                for x, v in zip(xs, np.atleast_1d(w)):
                    buf.write(f"{_fmt(mu)},{_fmt(nu)},{_fmt(x)},{_fmt(v)}\n")
        return buf.getvalue()
    if cfg.mu is None or cfg.nu is None:
        raise CliError("marginal needs --mu/--nu or --mu-grid/--nu-grid")
    try:
        mu, nu = float(cfg.mu), float(cfg.nu)
    except ValueError:
        raise CliError("marginal --mu and --nu take single numbers") from None
    grid = marginal_grid(state, mode, mu, nu, xs)
    return grid_to_json(grid) if cfg.fmt == "json" else grid_to_csv(grid)


def _zero_based_mode(mode: int | None, num_modes: int) -> int:
    if mode is None or not 1 <= mode <= num_modes:
        raise CliError(f"--mode must be between 1 and {num_modes}")
    return mode - 1


def _density_json(rho: DensityMatrix, cutoff: int, psd: bool) -> str:
    doc = {
        "cutoff": cutoff,
        "psd": psd,
        "trace": rho.trace().real,
        "hermiticity_error": rho.hermiticity_error(),
        "eigenvalues": rho.eigenvalues().tolist(),
        "re": rho.entries.real.tolist(),
        "im": rho.entries.imag.tolist(),
    }
    return json.dumps(doc, indent=2) + "\n"


def _reconstruct(cfg: RunConfig) -> str:
    if cfg.cutoff < 0:
        raise CliError("--cutoff must be non-negative")
    if cfg.samples_path is not None:
        try:
            mu, nu, x, w = read_samples_csv(cfg.samples_path)
        except ValueError as exc:
            raise CliError(str(exc)) from None
        rho = reconstruct_from_samples(mu, nu, x, w, cfg.cutoff, psd=cfg.psd)
    else:
        state = _load_state(cfg.state_path)
        mode = _zero_based_mode(cfg.mode, state.num_modes)
        rho = reconstruct_single_mode(
            lambda xs, m, n: subsystem_tomogram(state, mode, xs, m, n), cfg.cutoff, psd=cfg.psd
        )
    return _density_json(rho, cfg.cutoff, cfg.psd)


def _verify(cfg: RunConfig) -> int:
    from .verification import SUITES, run_suite

    criteria = cfg.criteria or tuple(sorted(SUITES))
    unknown = [c for c in criteria if c not in SUITES]
    if unknown:
        raise CliError(f"unknown criteria {unknown}; available {sorted(SUITES)}")
    results = [run_suite(c, cfg.seed) for c in criteria]
    for r in results:
        print(r.line(), file=sys.stderr)
    passed = all(r.passed for r in results)
    report = {"seed": cfg.seed, "passed": passed, "suites": [r.to_dict() for r in results]}
    _emit(json.dumps(report, indent=2) + "\n", cfg.out)
    return EXIT_OK if passed else EXIT_VERIFY


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the exit status (errors propagate as exceptions)."""
    if cfg.command == "verify":
        return _verify(cfg)
    if cfg.command == "reconstruct":
        _emit(_reconstruct(cfg), cfg.out)
        return EXIT_OK
    if cfg.command == "marginal":
        _emit(_marginal(cfg), cfg.out)
        return EXIT_OK
    frame = _frame(cfg)
    if cfg.command == "evolve":
        frame = evolve_frame(frame, cfg.kind, cfg.t, literal=cfg.literal)
        target = cfg.target
    else:
        target = {"eval-cm": "cm", "eval-symplectic": "symplectic", "eval-cluster": "cluster"}[cfg.command]
    grid = _evaluate(cfg, target, frame)
    if cfg.command == "evolve":
        grid.meta.update({"evolution": cfg.kind, "t": cfg.t, "literal": cfg.literal})
    _emit(grid_to_json(grid) if cfg.fmt == "json" else grid_to_csv(grid), cfg.out)
    return EXIT_OK


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(config_from_args(argv))
    except CliError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except NonConvergenceError as exc:
        return _fail("non_convergence", str(exc), EXIT_NONCONVERGENCE)
    except (TomokitError, ValueError, KeyError, OSError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_USAGE)


if __name__ == "__main__":
    raise SystemExit(main())
