"""
Command-line front end.

Every subcommand computes its full result before writing anything, so a failing run leaves no
partial output. Exit codes: 0 success, 2 input/schema error, 3 numerical failure, 4 a
membership check failed.
"""

from __future__ import annotations

import argparse
import io
import itertools
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import pandas as pd

from src.cli.spec_file import SpecDocument, load_spec_file, parse_dimension, parse_group
from src.domain.errors import ConvergenceError, DomainError, SpecError
from src.domain.models import Configuration, PsdReport
from src.groups.models import CYCLIC, REAL_VECTOR, GroupModel
from src.kernels.evaluator import kernel_eval
from src.kernels.spec import KernelSpec
from src.schoenberg.extraction import extract, synthesize
from src.schoenberg.infinity import monomial_coefficients, project_from_infty
from src.schoenberg.product_sphere import product_sphere_extract
from src.schoenberg.recurrences import step_up
from src.schoenberg.sequence import NumericProfile, SchoenbergSequence, dimension_label
from src.utils.config_loader import numeric_settings
from src.verify.pd_check import find_witness, gaussian_sample, membership_test, sample_sphere

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_FAIL = 4

FLOAT_FORMAT = "%.17g"
# Imaginary parts below this are reported as real.
IMAG_RESIDUE = 1e-12
GRID_HELP = "real:LO:HI:STEP | int:LO:HI | cyclic | vector:LO:HI:STEP | points:<JSON>"


def _fmt(v: float) -> str:
    return FLOAT_FORMAT % float(v)


# ---------------------------------------------------------------------------
# Grids and element parsing
# ---------------------------------------------------------------------------


def _steps(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0 or hi < lo:
        raise DomainError(f"grid needs LO <= HI and STEP > 0; got {lo}:{hi}:{step}")
    count = int(round((hi - lo) / step)) + 1
    return [round(lo + i * step, 12) + 0.0 for i in range(count)]


def parse_grid(text: str, group: GroupModel) -> list[Any]:
    """Group elements from a --grid flag: real:LO:HI:STEP, int:LO:HI, cyclic, vector:LO:HI:STEP, points:<JSON>."""
    kind, _, rest = text.partition(":")
    try:
        if kind == "real":
            lo, hi, step = (float(v) for v in rest.split(":"))
            values: list[Any] = _steps(lo, hi, step)
        elif kind == "int":
            lo, hi = (int(v) for v in rest.split(":"))
            values = list(range(lo, hi + 1))
        elif kind == "cyclic":
            if group.kind != CYCLIC:
                raise DomainError(f"'cyclic' grid needs a cyclic group; spec uses {group.label}")
            values = list(range(int(group.m)))
        elif kind == "vector":
            if group.kind != REAL_VECTOR:
                raise DomainError(f"'vector' grid needs a real_vector group; spec uses {group.label}")
            lo, hi, step = (float(v) for v in rest.split(":"))
            axis = _steps(lo, hi, step)
            values = [tuple(p) for p in itertools.product(axis, repeat=int(group.k))]
        elif kind == "points":
            values = json.loads(rest)
            if not isinstance(values, list):
                raise DomainError("points grid must be a JSON array")
        else:
            raise DomainError(f"unknown grid kind {kind!r}")
    except (ValueError, json.JSONDecodeError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed grid {text!r}: {exc}") from exc
    return [group.coerce(u) for u in values]


def parse_element(text: str, group: GroupModel) -> Any:
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"group element must be JSON (a number or an array); got {text!r}") from exc
    return group.coerce(value)


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------


def sequence_frame(seq: SchoenbergSequence, grid: Sequence[Any]) -> pd.DataFrame:
    group = seq.group
    arr = group.as_array(list(grid))
    u_text = [json.dumps(group.to_json(u)) for u in grid]
    rows = []
    for n, fn in enumerate(seq.coefficients):
        values = np.asarray(fn.values(arr), dtype=complex)
        rows.extend({"n": n, "u": u, "re": v.real, "im": v.imag} for u, v in zip(u_text, values))
    return pd.DataFrame(rows, columns=["n", "u", "re", "im"])


def sequence_csv(seq: SchoenbergSequence, grid: Sequence[Any]) -> str:
    buf = io.StringIO()
    sequence_frame(seq, grid).to_csv(buf, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    lines = [
        f"#meta,d={dimension_label(seq.d)},n_max={seq.n_max}",
        f"#group,{json.dumps(seq.group.to_dict(), sort_keys=True)}",
    ]
    identity = seq.identity_values().real
    lines += [f"#identity,{n},{_fmt(v)}" for n, v in enumerate(identity)]
    lines.append(f"#tail_mass,{_fmt(seq.tail_mass_at_identity)}")
    lines.append(f"#tail_bound,{_fmt(seq.truncation_bound())}")
    lines += [f"#DIAGNOSTIC:{diag.kind},{diag.degree},{_fmt(diag.value)}" for diag in seq.diagnostics()]
    return buf.getvalue() + "\n".join(lines) + "\n"


def read_sequence_csv(path: str | Path) -> SchoenbergSequence:
    """Rebuild a sampled sequence from the table written by `extract`."""
    text = Path(path).read_text(encoding="utf-8")
    footers: dict[str, str] = {}
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(",")
            footers.setdefault(key, value)
    if "meta" not in footers or "group" not in footers:
        raise SpecError("coefficient table lacks #meta/#group footers", "$")
    try:
        meta = dict(part.split("=", 1) for part in footers["meta"].split(","))
        d = parse_dimension(meta["d"] if meta["d"] == "infinity" else int(meta["d"]), "$.meta.d")
        n_max = int(meta["n_max"])
    except SpecError:
        raise
    except (KeyError, ValueError) as exc:
        raise SpecError(f"malformed #meta footer ({exc})", "$.meta") from exc
    try:
        group = parse_group(json.loads(footers["group"]))
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON in #group footer ({exc})", "$.group") from exc

    try:
        frame = pd.read_csv(io.StringIO(text), comment="#", dtype={"u": str})
        coefficients = []
        for n in range(n_max + 1):
            rows = frame[frame["n"] == n]
            grid = tuple(group.from_json(json.loads(u)) for u in rows["u"])
            samples = rows["re"].to_numpy(dtype=float) + 1j * rows["im"].to_numpy(dtype=float)
            coefficients.append(NumericProfile(group=group, grid=grid, samples=samples))
        tail = float(footers["tail_bound"]) if "tail_bound" in footers else None
    except DomainError:
        raise
    except (KeyError, ValueError, TypeError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise SpecError(f"malformed coefficient rows ({exc!r})", "$.rows") from exc
    return SchoenbergSequence(d=d, group=group, coefficients=tuple(coefficients), tail_bound=tail)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_json(payload: dict[str, Any], out: str | None) -> None:
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", out)


def _format_value(value: complex) -> str:
    if abs(value.imag) <= IMAG_RESIDUE:
        return _fmt(value.real)
    return f"{_fmt(value.real)}\nimag {_fmt(value.imag)}"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _kernel(doc: SpecDocument) -> KernelSpec:
    if doc.kernel is None:
        raise SpecError("this command needs a 'kernel' entry", "$.kernel")
    return doc.kernel


def cmd_eval(args: argparse.Namespace) -> int:
    spec = _kernel(load_spec_file(args.spec))
    value = kernel_eval(spec, args.x, parse_element(args.u, spec.group))
    _emit(_format_value(value) + "\n", args.out)
    return EXIT_OK


def cmd_extract(args: argparse.Namespace) -> int:
    spec = _kernel(load_spec_file(args.spec))
    grid = parse_grid(args.grid, spec.group)
    seq = extract(spec, _finite(args.d), args.n_max, grid, q=args.q)
    _emit(sequence_csv(seq, grid), args.out)
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    seq = read_sequence_csv(args.csv)
    result = synthesize(seq, args.x, parse_element(args.u, seq.group))
    _emit(f"{_format_value(result.value)}\ntruncation_bound {_fmt(result.truncation_bound)}\n", args.out)
    return EXIT_OK


def _verdict_exit(report: PsdReport, out: str | None) -> int:
    _emit_json(report.to_dict(), out)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_check(args: argparse.Namespace) -> int:
    spec = _kernel(load_spec_file(args.spec))
    report = membership_test(spec, _finite(args.d), trials=args.trials, n_points=args.points, seed=args.seed)
    return _verdict_exit(report, args.out)


def cmd_witness(args: argparse.Namespace) -> int:
    spec = _kernel(load_spec_file(args.spec))
    report = find_witness(spec, _finite(args.d), trials=args.trials, seed=args.seed)
    return _verdict_exit(report, args.out)


def cmd_stepup(args: argparse.Namespace) -> int:
    spec = _kernel(load_spec_file(args.spec))
    grid = parse_grid(args.grid, spec.group)
    stepped = step_up(extract(spec, _finite(args.d), args.n_max, grid, q=args.q))
    _emit(sequence_csv(stepped, grid), args.out)
    return EXIT_OK


def cmd_project(args: argparse.Namespace) -> int:
    spec = _kernel(load_spec_file(args.spec))
    grid = parse_grid(args.grid, spec.group)
    projected = project_from_infty(monomial_coefficients(spec), _dimension_arg(args.d, "--d"))
    _emit(sequence_csv(projected, grid), args.out)
    return EXIT_OK


def cmd_product(args: argparse.Namespace) -> int:
    doc = load_spec_file(args.spec)
    if doc.bivariate is None:
        raise SpecError("this command needs a 'bivariate' entry", "$.bivariate")
    coeffs = product_sphere_extract(
        doc.bivariate,
        _dimension_arg(args.d, "--d"),
        _dimension_arg(args.d_prime, "--d-prime"),
        args.n_max,
        args.m_max,
        q=args.q,
    )
    rows = [{"n": n, "m": m, "value": float(v)} for (n, m), v in np.ndenumerate(coeffs.matrix)]
    buf = io.StringIO()
    pd.DataFrame(rows, columns=["n", "m", "value"]).to_csv(
        buf, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    footer = [
        f"#meta,d={dimension_label(coeffs.d)},d_prime={coeffs.d_prime},n_max={coeffs.n_max},m_max={coeffs.m_max}",
        f"#total_mass,{_fmt(coeffs.total_mass)}",
        f"#tail_bound,{_fmt(coeffs.tail_bound or 0.0)}",
    ]
    footer += [
        f"#DIAGNOSTIC:{diag.kind},{diag.degree},{diag.second_degree},{_fmt(diag.value)}"
        for diag in coeffs.diagnostics
    ]
    _emit(buf.getvalue() + "\n".join(footer) + "\n", args.out)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = _kernel(load_spec_file(args.spec))
    d = _finite(args.d)
    seeds = np.random.SeedSequence(args.seed).spawn(3)
    vectors = sample_sphere(d, args.points, seeds[0])
    elements = tuple(spec.group.sample(np.random.default_rng(seeds[1]), args.points))
    config = Configuration(d=d, vectors=vectors, elements=elements, group=spec.group, seed=args.seed)
    draws = gaussian_sample(spec, config, args.samples, int(seeds[2].generate_state(1)[0]), jitter=args.jitter)

    buf = io.StringIO()
    frame = pd.DataFrame(draws, columns=[f"p{i}" for i in range(args.points)])
    frame.to_csv(buf, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    footer = [
        f"#point,{i},{json.dumps([float(v) for v in xi])},{json.dumps(spec.group.to_json(u))}"
        for i, (xi, u) in enumerate(zip(vectors, elements))
    ]
    _emit(buf.getvalue() + "\n".join(footer) + "\n", args.out)
    return EXIT_OK


def _dimension_arg(text: str, flag: str) -> int | float:
    try:
        value: Any = int(text)
    except ValueError:
        value = text
    return parse_dimension(value, flag)


def _finite(d: str) -> int:
    value = _dimension_arg(d, "--d")
    if not isinstance(value, int):
        raise DomainError("this command needs a finite sphere dimension")
    return value


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphere-kernels",
        description="Positive definite kernels on spheres times groups: evaluate, expand, verify, simulate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, handler, help_text: str, *, spec: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        if spec:
            p.add_argument("--spec", required=True, help="Kernel spec JSON file.")
        p.add_argument("--out", default=None, help="Write the result here instead of stdout.")
        p.set_defaults(handler=handler)
        return p

    p = command("eval", cmd_eval, "Evaluate f(x, u).")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--u", required=True, help="Group element as JSON, e.g. 2 or [0.5, 1].")

    for name, handler, help_text in (
        ("extract", cmd_extract, "Tabulate phi_{n,d} on a grid of group elements."),
        ("stepup", cmd_stepup, "Extract at d and step the coefficients up to d + 2."),
    ):
        p = command(name, handler, help_text)
        p.add_argument("--d", required=True)
        p.add_argument("--n-max", dest="n_max", type=int, required=True)
        p.add_argument("--grid", required=True, help=GRID_HELP)
        p.add_argument("--q", type=int, default=None, help="Quadrature nodes (default: n_max + extra_nodes).")

    p = command("synth", cmd_synth, "Re-evaluate a truncated expansion from an extract table.", spec=False)
    p.add_argument("--csv", required=True, help="Table written by 'extract'.")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--u", required=True)

    p = command("check", cmd_check, "Random-configuration PSD test (exit 4 on FAIL).")
    p.add_argument("--d", required=True)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)

    p = command("witness", cmd_witness, "Search for a non-PSD configuration (exit 4 when found).")
    p.add_argument("--d", required=True)
    p.add_argument("--trials", type=int, default=None, help="Default: pd_check.witness_trials.")
    p.add_argument("--seed", type=int, default=0)

    p = command("project", cmd_project, "Project monomial coefficients from S^infinity to S^d.")
    p.add_argument("--d", required=True)
    p.add_argument("--grid", required=True, help=GRID_HELP)

    p = command("product", cmd_product, "Coefficients f_{n,m} of a kernel on S^d x S^d'.")
    p.add_argument("--d", required=True)
    p.add_argument("--d-prime", dest="d_prime", required=True)
    p.add_argument("--n-max", dest="n_max", type=int, required=True)
    p.add_argument("--m-max", dest="m_max", type=int, required=True)
    p.add_argument("--q", type=int, default=None)

    p = command("simulate", cmd_simulate, "Gaussian draws at a random configuration.")
    p.add_argument("--d", required=True)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jitter", type=float, default=None, help="Default: jitter_scale * trace / n.")

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, numeric_settings().log_level, logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )

    try:
        return int(args.handler(args))
    except (DomainError, OSError) as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        logger.error("%s", exc)
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
