"""Command-line front end: sweep studies written as CSV tables.

Five study commands plus a registry listing:

    expand    remainder of the averaged-derivative expansion over m
    interp1d  classical vs refined 1D interpolation bounds over beta
    simplex   mesh interpolation error vs bounds over subdivisions
    fem       Galerkin L2 error vs the a-priori chains over subdivisions
    savings   tolerance-driven mesh-size arithmetic over eps
    registry  list the named test fields, optionally self-test them

Every study writes one CSV (12 significant digits, scientific notation,
header row, rows sorted by the first column) and a key=value manifest next
to it echoing the configuration, the seed and the wall time.  Given the same
configuration and seed the CSV bytes are identical run to run; the manifest
is not, since it carries the wall time.  Flags may come from a flat
key=value config file via --config, with explicit flags winning.

While building rows, entries with analytic derivative norms are checked
against their bounds; a violation aborts the run with exit code 2.  Exit
codes: 0 success, 1 usage, 2 numeric failure, 3 I/O failure.
"""

import argparse
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .expansion import estimate_segment_bounds, refined_expansion, taylor_first_order
from .fem import SolverError, estimate_report, mesh_savings, sine_problem
from .fields import sampled_derivative_norms
from .interp1d import (
    ClassPParams,
    Interval,
    class_p_field,
    class_p_sup_norms,
    compare_bounds,
    rate_for_beta,
)
from .registry import UnknownFieldError, lookup, registry, registry_selftest
from .simplex import global_interp, interp_error_bounds, uniform_mesh

__all__ = [
    "StudyConfig",
    "UsageError",
    "NumericFailure",
    "run",
    "run_main",
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_NUMERIC",
    "EXIT_IO",
]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_IO = 3

SINE_D1 = math.pi     # sup |grad| of the manufactured product-of-sines solution
SINE_D2 = math.pi**2  # sup |D2|, both dims

# slack applied when enforcing measured <= bound on analytic entries
_ENFORCE_REL = 1e-9
_ENFORCE_ABS = 1e-15

_SELFTEST_TOL = 1e-6


class UsageError(Exception):
    """Bad flags, config keys or argument values."""


class NumericFailure(RuntimeError):
    """A measured value escaped its bound, or a table cell went non-finite."""


@dataclass
class StudyConfig:
    """One study run: the command plus every knob any command reads."""

    command: str
    function: str | None = None
    m_values: list = field(default_factory=lambda: [1, 2, 4, 8])
    kind: str = "closed"
    samples: int = 201
    beta_values: list = field(default_factory=lambda: [0.6, 0.75, 0.9, 1.0])
    forcing: float = 1.0
    slope: float = 0.0
    interval: tuple = (0.0, 1.0)
    grid: int = 1001
    subdivisions: list = field(default_factory=lambda: [1, 2, 4, 8])
    points: int = 200
    dim: int = 1
    space: str = "P1"
    diffusion: float = 1.0
    reaction: float = 0.0
    eps_values: list = field(default_factory=lambda: [1e-4])
    d2_inf: float = 1.0
    big_c: float = 1.0
    alpha: float = 1.0
    output_path: str = "study.csv"
    seed: int = 0
    selftest: bool = False

    def validate(self):
        if self.command not in ("expand", "interp1d", "simplex", "fem", "savings", "registry"):
            raise UsageError(f"unknown command {self.command!r}")
        if self.seed < 0:
            raise UsageError("seed must be nonnegative")
        if self.command == "expand":
            self._require_function()
            self._require_list("m", self.m_values, minimum=1)
            if self.kind not in ("closed", "open"):
                raise UsageError(f"kind must be 'closed' or 'open', got {self.kind!r}")
            if self.samples < 2:
                raise UsageError("samples must be at least 2")
        elif self.command == "interp1d":
            self._require_list("beta", self.beta_values)
            if min(self.beta_values) <= 0.5:
                raise UsageError("beta values must exceed 0.5")
            if self.forcing <= 0:
                raise UsageError("forcing must be positive")
            if self.grid < 3:
                raise UsageError("grid must be at least 3")
            if self.interval[0] >= self.interval[1]:
                raise UsageError("interval must satisfy a < b")
        elif self.command == "simplex":
            self._require_function()
            self._require_list("subdivisions", self.subdivisions, minimum=1)
            if self.points < 1:
                raise UsageError("points must be at least 1")
        elif self.command == "fem":
            if self.dim not in (1, 2):
                raise UsageError(f"fem dim must be 1 or 2, got {self.dim}")
            self._require_list("subdivisions", self.subdivisions, minimum=1)
            if self.space not in ("P1", "P2"):
                raise UsageError(f"space must be P1 or P2, got {self.space!r}")
            if self.diffusion <= 0:
                raise UsageError("diffusion must be positive")
            if self.reaction < 0:
                raise UsageError("reaction must be nonnegative")
        elif self.command == "savings":
            self._require_list("eps", self.eps_values)
            if min(self.eps_values) <= 0:
                raise UsageError("eps values must be positive")
            if self.dim not in (1, 2, 3):
                raise UsageError(f"savings dim must be 1, 2 or 3, got {self.dim}")
            if self.d2_inf <= 0 or self.big_c <= 0 or self.alpha <= 0:
                raise UsageError("d2, C and alpha must be positive")

    def _require_function(self):
        if not self.function:
            raise UsageError(f"{self.command} needs --function")

    def _require_list(self, label, values, minimum=None):
        if not values:
            raise UsageError(f"--{label} list must be nonempty")
        if minimum is not None and min(values) < minimum:
            raise UsageError(f"--{label} values must be >= {minimum}")


# -------------------------------------------------------------- helpers


def _thread_cap(n_items):
    raw = os.environ.get("REFTAYLOR_THREADS")
    if raw is None:
        cap = os.cpu_count() or 1
    else:
        try:
            cap = int(raw)
        except ValueError:
            raise UsageError(f"REFTAYLOR_THREADS must be an integer, got {raw!r}") from None
        if cap < 1:
            raise UsageError("REFTAYLOR_THREADS must be at least 1")
    return max(1, min(cap, n_items))


def _map_ordered(fn, items):
    """fn over items, possibly in parallel; results keep the item order."""
    workers = _thread_cap(len(items))
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _enforce(measured, bound, context):
    if measured > bound * (1.0 + _ENFORCE_REL) + _ENFORCE_ABS:
        raise NumericFailure(f"{context}: measured {measured:.6e} exceeds bound {bound:.6e}")


def _grid_points(box):
    """Deterministic probe grid for sampled derivative norms."""
    box = np.asarray(box, dtype=float)
    per_axis = {1: 201, 2: 41, 3: 17}[len(box)]
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


# --------------------------------------------------------- row builders


def _expand_rows(cfg):
    entry = lookup(cfg.function)
    f = entry.field()
    a, h = entry.segment
    if entry.analytic:
        seg = entry.segment_bounds
    else:
        seg = estimate_segment_bounds(f, a, h, samples=cfg.samples)
    base = taylor_first_order(f, a, h, bounds=seg)
    classical = max(abs(base.bound_lo), abs(base.bound_hi))

    def one(m):
        rep = refined_expansion(f, a, h, m, kind=cfg.kind, bounds=seg)
        if entry.analytic:
            if not (rep.bound_lo - _ENFORCE_ABS <= rep.remainder_eps <= rep.bound_hi + _ENFORCE_ABS):
                raise NumericFailure(
                    f"{entry.name} m={m}: remainder {rep.remainder_eps:.6e} escapes "
                    f"[{rep.bound_lo:.6e}, {rep.bound_hi:.6e}]"
                )
        measured = abs(rep.remainder_eps)
        magnitude = max(abs(rep.bound_lo), abs(rep.bound_hi))
        width = rep.bound_hi - rep.bound_lo
        ratio = measured / magnitude if magnitude > 0 else 0.0
        return (float(m), measured, classical, magnitude, width, ratio)

    header = ["m", "measured_abs_eps", "bound_classical", "bound_refined", "bound_width", "ratio"]
    return header, _map_ordered(one, sorted(set(cfg.m_values)))


def _interp1d_rows(cfg):
    iv = Interval(*cfg.interval)

    def one(beta):
        try:
            params = ClassPParams(
                rate=rate_for_beta(beta, iv), forcing=cfg.forcing, slope_at_a=cfg.slope
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        fld = class_p_field(params, iv)
        f1, f2 = class_p_sup_norms(params, iv)
        comp = compare_bounds(fld, iv, f1, f2, grid=cfg.grid)
        _enforce(comp.measured_sup_error, min(comp.classical, comp.refined), f"beta={beta:g}")
        return (
            beta,
            comp.measured_sup_error,
            comp.classical,
            comp.refined,
            0.5 * comp.classical,
            comp.refined / comp.classical,
        )

    header = ["beta", "measured_sup_error", "bound_classical", "bound_refined", "bound_floor", "ratio"]
    return header, _map_ordered(one, sorted(set(cfg.beta_values)))


def _simplex_rows(cfg):
    entry = lookup(cfg.function)
    f = entry.field()
    box = np.asarray(entry.box, dtype=float)
    if entry.analytic:
        d1, d2 = entry.d1_inf, entry.d2_inf
    else:
        d1, d2 = sampled_derivative_norms(f, _grid_points(box))
    lo, span = box[:, 0], box[:, 1] - box[:, 0]

    def one(k):
        mesh = uniform_mesh(entry.box, entry.dim, k)
        bounds = interp_error_bounds(mesh.simplices[0], d1, d2)
        plain = global_interp(mesh, f)
        star = global_interp(mesh, f, corrected=True)
        rng = np.random.default_rng([cfg.seed, k])
        pts = lo + rng.random((cfg.points, entry.dim)) * span
        vals = f.value_at(pts)
        err = max(abs(plain(p) - v) for p, v in zip(pts, vals))
        err_star = max(abs(star(p) - v) for p, v in zip(pts, vals))
        if entry.analytic:
            _enforce(err, bounds.combined, f"{entry.name} k={k} plain")
            _enforce(err_star, bounds.corrected, f"{entry.name} k={k} corrected")
        ratio = err / bounds.combined if bounds.combined > 0 else 0.0
        return (mesh.mesh_size, err, bounds.classical, bounds.refined, bounds.corrected, ratio)

    header = ["h", "measured_sup_error", "bound_classical", "bound_refined", "bound_corrected", "ratio"]
    return header, _map_ordered(one, sorted(set(cfg.subdivisions)))


def _fem_rows(cfg):
    problem = sine_problem(cfg.dim, diffusion=cfg.diffusion, reaction=cfg.reaction)
    factor = problem.stability_factor

    def one(k):
        mesh = uniform_mesh([(0.0, 1.0)] * cfg.dim, cfg.dim, k)
        rep = estimate_report(problem, mesh, cfg.space, SINE_D1, SINE_D2)
        if cfg.space == "P1":
            applicable = min(rep.cea_rhs_classical, rep.cea_rhs_refined)
        else:
            applicable = rep.cea_rhs_corrected
        _enforce(rep.measured_interp_error, applicable / factor, f"k={k} interpolation")
        _enforce(rep.measured_solution_error, applicable, f"k={k} solution")
        return (
            rep.h,
            rep.measured_solution_error,
            rep.cea_rhs_classical,
            rep.cea_rhs_refined,
            rep.cea_rhs_corrected,
            rep.measured_solution_error / applicable,
        )

    header = ["h", "measured_l2_error", "bound_classical", "bound_refined", "bound_corrected", "ratio"]
    return header, _map_ordered(one, sorted(set(cfg.subdivisions)))


def _savings_rows(cfg):
    def one(eps):
        s = mesh_savings(eps, cfg.d2_inf, cfg.big_c, cfg.alpha, cfg.dim)
        return (
            eps,
            s["h_classical"],
            s["h_corrected"],
            s["h_corrected"] / s["h_classical"],
            s["node_factor"],
        )

    header = ["eps", "h_classical", "h_corrected", "ratio", "node_factor"]
    return header, _map_ordered(one, sorted(set(cfg.eps_values)))


_BUILDERS = {
    "expand": _expand_rows,
    "interp1d": _interp1d_rows,
    "simplex": _simplex_rows,
    "fem": _fem_rows,
    "savings": _savings_rows,
}


# --------------------------------------------------------------- output


def _format_cell(value):
    value = float(value)
    if not math.isfinite(value):
        raise NumericFailure("non-finite value in output table")
    return f"{value:.11e}"


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_format_cell(cell) for cell in row) for row in rows)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


_RELEVANT_KEYS = {
    "expand": ("function", "m_values", "kind", "samples"),
    "interp1d": ("beta_values", "forcing", "slope", "interval", "grid"),
    "simplex": ("function", "subdivisions", "points"),
    "fem": ("dim", "space", "subdivisions", "diffusion", "reaction"),
    "savings": ("eps_values", "dim", "d2_inf", "big_c", "alpha"),
}


def _config_echo(cfg):
    keys = ("command",) + _RELEVANT_KEYS[cfg.command] + ("output_path", "seed")
    values = asdict(cfg)
    echo = {}
    for key in keys:
        value = values[key]
        if isinstance(value, (list, tuple)):
            echo[key] = ",".join(f"{v:g}" if isinstance(v, float) else str(v) for v in value)
        else:
            echo[key] = str(value)
    return echo


def _write_manifest(path, cfg, n_rows, wall_time):
    lines = [f"{key} = {value}" for key, value in sorted(_config_echo(cfg).items())]
    lines.append(f"rows = {n_rows}")
    lines.append(f"wall_time_s = {wall_time:.6f}")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _run_registry(cfg, out):
    print("name,dim,analytic", file=out)
    for entry in registry():
        print(f"{entry.name},{entry.dim},{str(entry.analytic).lower()}", file=out)
    if not cfg.selftest:
        return
    report = registry_selftest(seed=cfg.seed)
    failures = []
    for name, worst in sorted(report.items()):
        verdict = "PASS" if worst <= _SELFTEST_TOL else "FAIL"
        print(f"selftest {name}: max gradient error {worst:.3e} {verdict}", file=out)
        if worst > _SELFTEST_TOL:
            failures.append(name)
    if failures:
        raise NumericFailure(f"registry selftest failed for: {', '.join(failures)}")


def run(cfg, out=None):
    """Execute one study; returns EXIT_OK or raises a mapped exception."""
    out = sys.stdout if out is None else out
    cfg.validate()
    if cfg.command == "registry":
        _run_registry(cfg, out)
        return EXIT_OK
    start = time.perf_counter()
    header, rows = _BUILDERS[cfg.command](cfg)
    rows = sorted(rows, key=lambda row: row[0])
    _write_csv(cfg.output_path, header, rows)
    _write_manifest(cfg.output_path + ".manifest", cfg, len(rows), time.perf_counter() - start)
    print(f"wrote {len(rows)} rows to {cfg.output_path}", file=out)
    return EXIT_OK


# ------------------------------------------------------------- the parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text):
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    return values


def _float_list(text):
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}")
    return values


def _pair(text):
    values = _float_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated reals, got {text!r}")
    return tuple(values)


def _build_parser():
    parser = _Parser(prog="reftaylor", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sub, default_output):
        sub.add_argument("--output", default=default_output, help="CSV output path")
        sub.add_argument("--seed", type=int, default=0, help="seed for sampled suites")
        sub.add_argument("--config", default=None, help="flat key=value config file")

    sub = subs.add_parser("expand", help="m-point expansion remainder sweep")
    sub.add_argument("--function", default=None, help="registry field name")
    sub.add_argument("--m", type=_int_list, default=[1, 2, 4, 8], help="comma list of point counts")
    sub.add_argument("--kind", default="closed", help="weight family: closed or open")
    sub.add_argument("--samples", type=int, default=201, help="samples for non-analytic bounds")
    common(sub, "expand.csv")

    sub = subs.add_parser("interp1d", help="1D interpolation bound sweep over beta")
    sub.add_argument("--beta", type=_float_list, default=[0.6, 0.75, 0.9, 1.0])
    sub.add_argument("--forcing", type=float, default=1.0)
    sub.add_argument("--slope", type=float, default=0.0)
    sub.add_argument("--interval", type=_pair, default=(0.0, 1.0), help="a,b with a < b")
    sub.add_argument("--grid", type=int, default=1001, help="sup-error sample grid")
    common(sub, "interp1d.csv")

    sub = subs.add_parser("simplex", help="mesh interpolation error sweep")
    sub.add_argument("--function", default=None, help="registry field name")
    sub.add_argument("--subdivisions", type=_int_list, default=[1, 2, 4, 8])
    sub.add_argument("--points", type=int, default=200, help="sample points per mesh")
    common(sub, "simplex.csv")

    sub = subs.add_parser("fem", help="FEM convergence sweep on the sine problem")
    sub.add_argument("--dim", type=int, default=1)
    sub.add_argument("--space", default="P1", help="P1 or P2")
    sub.add_argument("--subdivisions", type=_int_list, default=[8, 16, 32, 64])
    sub.add_argument("--diffusion", type=float, default=1.0)
    sub.add_argument("--reaction", type=float, default=0.0)
    common(sub, "fem.csv")

    sub = subs.add_parser("savings", help="mesh coarsening arithmetic")
    sub.add_argument("--eps", type=_float_list, default=[1e-4], help="target tolerances")
    sub.add_argument("--dim", type=int, default=3)
    sub.add_argument("--d2", type=float, default=1.0, help="sup |D2 u|")
    sub.add_argument("--C", type=float, default=1.0, help="continuity constant")
    sub.add_argument("--alpha", type=float, default=1.0, help="ellipticity constant")
    common(sub, "savings.csv")

    sub = subs.add_parser("registry", help="list named test fields")
    sub.add_argument("--selftest", action="store_true", help="finite-difference check of every entry")
    common(sub, "registry.csv")

    return parser


def _read_config_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    mapping = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        mapping[key.strip()] = value.strip()
    return mapping


def _argv_with_config(argv):
    """Splice config-file values in as flags ahead of the explicit ones."""
    if not argv or argv[0].startswith("-"):
        return argv
    command = argv[0]
    path = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif token.startswith("--config="):
            path = token.split("=", 1)[1]
    if path is None:
        return argv
    mapping = _read_config_file(path)
    file_command = mapping.pop("command", None)
    if file_command is not None and file_command != command:
        raise UsageError(
            f"config file names command {file_command!r} but {command!r} was invoked"
        )
    spliced = [command]
    for key, value in mapping.items():
        spliced.extend([f"--{key.replace('_', '-')}", value])
    spliced.extend(argv[1:])
    return spliced


_NS_TO_CONFIG = {
    "expand": lambda ns: StudyConfig(
        command="expand", function=ns.function, m_values=ns.m, kind=ns.kind,
        samples=ns.samples, output_path=ns.output, seed=ns.seed,
    ),
    "interp1d": lambda ns: StudyConfig(
        command="interp1d", beta_values=ns.beta, forcing=ns.forcing, slope=ns.slope,
        interval=ns.interval, grid=ns.grid, output_path=ns.output, seed=ns.seed,
    ),
    "simplex": lambda ns: StudyConfig(
        command="simplex", function=ns.function, subdivisions=ns.subdivisions,
        points=ns.points, output_path=ns.output, seed=ns.seed,
    ),
    "fem": lambda ns: StudyConfig(
        command="fem", dim=ns.dim, space=ns.space, subdivisions=ns.subdivisions,
        diffusion=ns.diffusion, reaction=ns.reaction, output_path=ns.output, seed=ns.seed,
    ),
    "savings": lambda ns: StudyConfig(
        command="savings", eps_values=ns.eps, dim=ns.dim, d2_inf=ns.d2,
        big_c=ns.C, alpha=ns.alpha, output_path=ns.output, seed=ns.seed,
    ),
    "registry": lambda ns: StudyConfig(
        command="registry", selftest=ns.selftest, output_path=ns.output, seed=ns.seed,
    ),
}


def parse_argv(argv):
    argv = _argv_with_config(list(argv))
    ns = _build_parser().parse_args(argv)
    return _NS_TO_CONFIG[ns.command](ns)


def run_main(argv=None):
    """Console entry point; maps failures onto the documented exit codes."""
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        return run(parse_argv(argv))
    except (UsageError, UnknownFieldError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericFailure, SolverError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(run_main())
