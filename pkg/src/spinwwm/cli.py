"""Spin phase-space symbols, Wigner functions and kernels from the shell.

\b
    spinwwm coeffs     --j 3/2 --max-l 3
    spinwwm symbol     --j 2 --op "Jx*Jz" --kind W --grid 6x10
    spinwwm wigner     --j 2 --state coherent:0.3,1.1
    spinwwm moyal-scan --opA "Jx^2" --opB "Jy*Jz" --j-list 4,8,16,32
    spinwwm kernel     --j 1/2 --dir 0,0

Exit codes: 0 success, 2 usage or parse error, 3 numerical precondition
failure (for example a grid too coarse for the requested quadrature).
Without --out, output goes to $OUTPUT_DIR/<command>.<ext> when
OUTPUT_DIR is set, otherwise to stdout.
"""
from __future__ import annotations

import csv
import functools
import io
import json
import math
import os
import shlex
import sys

import click
import numpy as np

from . import __version__
from .expr import ParseError, StateSpecError, eval_operator, parse_operator, parse_state, pretty
from .moyal import bracket_scan, sw_kernel
from .sphere import GridDegreeError, SymbolField, integrate, product_grid
from .spin import Direction, Spin
from .symbols import SymbolKind, coeff_a, coeff_K, eval_on_grid, symbol_of

EXPR_HELP = """Operator expression over I, Jx, Jy, Jz, Jp, Jm with + - * and
integer powers ^ (0..16); precedence ^ > unary minus > * > + -.  Complex
literals: 2, 0.5, 3i, 1+2i.  No implicit multiplication."""

STATE_HELP = """mixed | ket:<m> | coherent:<theta>,<phi> | random_pure:<seed> |
random_density:<seed>"""


class NumericalError(Exception):
    """Numerical precondition failed; exit code 3."""


def _command_line(ctx: click.Context) -> str:
    parts = [ctx.command_path]
    for param in ctx.command.params:
        value = ctx.params.get(param.name)
        if value is None or value is False:
            continue
        flag = param.opts[0]
        parts.append(flag if value is True else f"{flag} {shlex.quote(str(value))}")
    return " ".join(parts)


def _meta(ctx, **extra) -> dict:
    return {"version": __version__, "command": _command_line(ctx), **extra}


def _handled(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (ParseError, StateSpecError, ValueError) as exc:
            if isinstance(exc, GridDegreeError):
                click.echo(f"error: {exc}", err=True)
                sys.exit(3)
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except NumericalError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)

    return wrapper


def _emit(text: str, out: str | None, default_name: str):
    if out is None and os.environ.get("OUTPUT_DIR"):
        out = os.path.join(os.environ["OUTPUT_DIR"], default_name)
    if out is None:
        click.echo(text, nl=False)
        return
    with open(out, "w", newline="") as fh:
        fh.write(text)


def _spin(text: str) -> Spin:
    try:
        return Spin.parse(text)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--j") from None


def _grid(text: str | None, spin: Spin):
    if text is None:
        return product_grid(spin.two_j + 2, 2 * spin.two_j + 2)
    try:
        n_theta, n_phi = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise click.BadParameter(f"expected NTHETAxNPHI, got {text!r}", param_hint="--grid") from None
    if n_theta < 1 or n_phi < 1:
        raise click.BadParameter("grid sizes must be positive", param_hint="--grid")
    return product_grid(n_theta, n_phi)


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _field_output(meta: dict, field: SymbolField, fmt: str) -> str:
    g = field.grid
    if fmt == "json":
        rows = [
            [float(t), float(p), float(v.real), float(v.imag)]
            for t, p, v in zip(g.theta, g.phi, field.values)
        ]
        return json.dumps({"meta": meta, "columns": ["theta", "phi", "re", "im"], "rows": rows}, indent=1) + "\n"
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["theta", "phi", "re", "im"])
    for t, p, v in zip(g.theta, g.phi, field.values):
        writer.writerow([_g17(t), _g17(p), _g17(v.real), _g17(v.imag)])
    return buf.getvalue()


@click.group(help=__doc__)
@click.version_option(__version__, prog_name="spinwwm")
def cli():
    pass


@cli.command("coeffs")
@click.option("--j", "j", required=True, help="Spin as 'n' or 'n/2'.")
@click.option("--max-l", type=int, required=True, help="Largest degree l to tabulate.")
@click.option("--allow-truncated", is_flag=True, help="Permit l > 2j (aQ = aW = 0 there, K undefined).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@_handled
def cmd_coeffs(ctx, j, max_l, allow_truncated, fmt, out):
    """Tabulate the symbol coefficients aP, aQ, aW and the kernel coefficient K."""
    spin = _spin(j)
    if max_l < 0:
        raise click.BadParameter("must be nonnegative", param_hint="--max-l")
    if max_l > spin.two_j and not allow_truncated:
        raise click.BadParameter(
            f"l={max_l} exceeds 2j={spin.two_j}; pass --allow-truncated", param_hint="--max-l"
        )
    rows = []
    for l in range(max_l + 1):
        rows.append(
            {
                "l": l,
                "aP": coeff_a(SymbolKind.P, spin, l),
                "aQ": coeff_a(SymbolKind.Q, spin, l),
                "aW": coeff_a(SymbolKind.W, spin, l),
                "K": coeff_K(spin, l) if l <= spin.two_j else None,
            }
        )
    meta = _meta(ctx, j=str(spin), grid_degree=None)
    if fmt == "json":
        text = json.dumps({"meta": meta, "rows": rows}, indent=1) + "\n"
    else:
        buf = io.StringIO()
        for key, value in meta.items():
            buf.write(f"# {key}: {'none' if value is None else value}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["l", "aP", "aQ", "aW", "K"])
        for r in rows:
            writer.writerow([r["l"]] + ["" if r[k] is None else _g17(r[k]) for k in ("aP", "aQ", "aW", "K")])
        text = buf.getvalue()
    _emit(text, out, f"coeffs.{fmt}")


@cli.command("symbol", epilog=EXPR_HELP)
@click.option("--j", "j", required=True, help="Spin as 'n' or 'n/2'.")
@click.option("--op", "op", required=True, help="Operator expression (see below).")
@click.option("--kind", type=click.Choice(["P", "Q", "W"], case_sensitive=False), default="W", show_default=True)
@click.option("--grid", "grid_spec", default=None, help="NTHETAxNPHI; default (2j+2)x(4j+2).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@_handled
def cmd_symbol(ctx, j, op, kind, grid_spec, fmt, out):
    """Sample the P, Q or Weyl symbol of an operator on a sphere grid."""
    spin = _spin(j)
    grid = _grid(grid_spec, spin)
    tree = parse_operator(op)
    A = eval_operator(tree, spin)
    s = symbol_of(A, kind.upper())
    field = eval_on_grid(s, grid)
    meta = _meta(ctx, j=str(spin), kind=kind.upper(), expression=pretty(tree), grid_degree=grid.exact_degree)
    _emit(_field_output(meta, field, fmt), out, f"symbol.{fmt}")


@cli.command("wigner", epilog=STATE_HELP)
@click.option("--j", "j", required=True, help="Spin as 'n' or 'n/2'.")
@click.option("--state", required=True, help="State spec (see below).")
@click.option("--grid", "grid_spec", default=None, help="NTHETAxNPHI; default (2j+2)x(4j+2).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@_handled
def cmd_wigner(ctx, j, state, grid_spec, fmt, out):
    """Sample the spin Wigner function of a state; the header reports its sphere mean."""
    spin = _spin(j)
    grid = _grid(grid_spec, spin)
    rho = parse_state(state, spin)
    grid.require(spin.two_j, "the Wigner normalization integral")
    field = eval_on_grid(symbol_of(rho, SymbolKind.W), grid)
    mean = integrate(field).real / (4 * math.pi)
    vmin = float(field.values.real.min())
    meta = _meta(
        ctx,
        j=str(spin),
        state=state,
        grid_degree=grid.exact_degree,
        sphere_mean=_g17(mean),
        expected_mean=_g17(1 / spin.dim),
        min_value=_g17(vmin),
        negative_values=bool(vmin < 0),
    )
    _emit(_field_output(meta, field, fmt), out, f"wigner.{fmt}")


@cli.command("moyal-scan", epilog=EXPR_HELP)
@click.option("--opA", "op_a", required=True, help="First operator expression.")
@click.option("--opB", "op_b", required=True, help="Second operator expression.")
@click.option("--j-list", required=True, help="Comma-separated spins, e.g. 4,8,16,32.")
@click.option("--grid-degree", type=int, default=24, show_default=True, help="Sampling grid for sup-norms.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@_handled
def cmd_moyal_scan(ctx, op_a, op_b, j_list, grid_degree, out):
    """Classical-limit residuals of commutator and anticommutator symbols.

    Every spin component is normalized as J/j_c with j_c = sqrt(j(j+1)), so
    the operators have finite classical limits.  Reports, per j, the grid
    sup-norms of Phi[A,B] - i{Phi_A, Phi_B} and Phi{A,B} - 2 Phi_A Phi_B and
    their fitted log-log slopes.
    """
    try:
        spins = [Spin.parse(p) for p in j_list.split(",") if p.strip()]
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--j-list") from None
    if len(spins) < 3:
        raise click.BadParameter("need >=3 points", param_hint="--j-list")
    if grid_degree < 0:
        raise click.BadParameter("must be nonnegative", param_hint="--grid-degree")
    study = bracket_scan(op_a, op_b, spins, grid_degree=grid_degree)
    payload = {"meta": _meta(ctx, grid_degree=study.grid_degree), "study": study.to_dict()}
    _emit(json.dumps(payload, indent=1) + "\n", out, "moyal_scan.json")


@cli.command("kernel")
@click.option("--j", "j", required=True, help="Spin as 'n' or 'n/2'.")
@click.option("--dir", "direction", required=True, help="theta,phi in radians.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@_handled
def cmd_kernel(ctx, j, direction, out):
    """Print the Stratonovich-Weyl kernel matrix at one direction."""
    spin = _spin(j)
    try:
        theta, phi = (float(p) for p in direction.split(","))
        n = Direction(theta, phi)
    except ValueError as exc:
        raise click.BadParameter(f"bad direction {direction!r}: {exc}", param_hint="--dir") from None
    delta = sw_kernel(spin, n)
    herm_err = float(np.max(np.abs(delta - delta.conj().T)))
    if herm_err > 1e-10:
        raise NumericalError(f"kernel is not Hermitian (max deviation {herm_err:.3g})")
    meta = _meta(ctx, j=str(spin), grid_degree=None, theta=n.theta, phi=n.phi, trace=float(np.trace(delta).real), hermitian=True)
    matrix = [[{"re": float(v.real), "im": float(v.imag)} for v in row] for row in delta]
    _emit(json.dumps({"meta": meta, "matrix": matrix}, indent=1) + "\n", out, "kernel.json")


def main(argv=None):
    cli.main(args=argv, prog_name="spinwwm")


if __name__ == "__main__":
    main()
