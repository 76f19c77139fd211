import csv
import io
import json
import sys
import time
from typing import Any, Optional, Tuple

import click
from pydantic import ValidationError
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from models.mini import RankOneMiniData, TwistForm
from pipelines.verify_pipeline import EXIT_CODES, INVARIANT_FAILED, PASS, exit_code, run_verify
from services.difference_modules import check_stability, module_summary, summand_candidates, verdict_summary
from services.mini_holomorphic import degree_comparison, ks_degree, upsilon_summary, upsilon_with_closure
from services.monopole_lab import MonopoleLab, field_rows, solution_summary
from services.run_recorder import RunRecorder
from services.serialization import (
    basis_of,
    flatten,
    load_candidates,
    load_module,
    load_problem,
    module_to_json,
    singular_points_of,
    twist_of,
    validation_message,
)
from services.torus_geometry import derive_geometry, geometry_summary, project_singular_set
from utils.config import load_config
from utils.errors import MonodromeError, ResolutionError, SolvabilityError
from utils.logger import get_logger, set_level

console = Console(stderr=True)
logger = get_logger(__name__)

NUMERIC_ERRORS = (SolvabilityError, ResolutionError)

input_option = click.option('--input', '-i', 'input_path', required=True, type=click.Path(exists=True, dir_okay=False),
                            help='Problem JSON file')
output_option = click.option('--output', '-o', 'output_path', type=click.Path(dir_okay=False),
                             help='Write the result here instead of stdout')
format_option = click.option('--format', 'fmt', type=click.Choice(['json', 'csv']), default='json',
                             show_default=True, help='Output format')
resolution_option = click.option('--resolution', '-n', help='Grid samples: N or N1,N2,N3')


@click.group()
@click.pass_context
def cli(ctx):
    """monodrome: difference modules, Dirac monopoles and their degree comparison"""

    config = load_config()
    set_level(config.get('logging', {}).get('level', 'INFO'))
    ctx.obj = config


@cli.command()
@input_option
@output_option
@format_option
@click.pass_obj
def geometry(config, input_path, output_path, fmt):
    """Derive gamma, frak_t, frak_a and the puncture tables"""

    def compute():
        problem = load_problem(input_path)
        geom = derive_geometry(basis_of(problem))
        tolerance = float(config.get('geometry', {}).get('collision_tolerance', 1e-9))
        return geometry_summary(geom, project_singular_set(geom, singular_points_of(problem), tolerance))

    emit(_guarded(compute), output_path, fmt)


@cli.command()
@input_option
@output_option
@format_option
@click.option('--module-json', is_flag=True, help='Emit the module in the module schema (reusable with --module)')
def upsilon(input_path, output_path, fmt, module_json):
    """Build the rank-one parabolic difference module of a problem"""

    def compute():
        problem = load_problem(input_path)
        geom = derive_geometry(basis_of(problem))
        result = upsilon_with_closure(RankOneMiniData(
            geometry=geom,
            singularities=tuple(singular_points_of(problem)),
            rho=twist_of(problem, geom),
            base_degree=problem.base_degree,
        ))
        return module_to_json(result.module) if module_json else upsilon_summary(result)

    emit(_guarded(compute), output_path, fmt)


@cli.command()
@click.option('--module', '-m', 'module_path', required=True, type=click.Path(exists=True, dir_okay=False))
@output_option
@format_option
def degree(module_path, output_path, fmt):
    """Parabolic degree and slope of a module"""

    emit(_guarded(lambda: module_summary(load_module(module_path))), output_path, fmt)


@cli.command()
@click.option('--module', '-m', 'module_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--candidates', '-c', 'candidates_path', type=click.Path(exists=True, dir_okay=False),
              help='Candidate submodules; defaults to the recorded direct summands')
@output_option
@format_option
def stability(module_path, candidates_path, output_path, fmt):
    """Stability verdict relative to a candidate family"""

    def compute():
        V = load_module(module_path)
        family = load_candidates(candidates_path) if candidates_path else summand_candidates(V)
        summary = verdict_summary(check_stability(V, family))
        summary['degree'] = module_summary(V)['degree']
        return summary

    result = _guarded(compute)
    _print_verdict(result)
    emit(result, output_path, fmt)


@cli.command('ks-degree')
@click.option('--deg-an', required=True, type=float, help='Analytic degree')
@click.option('--rank', required=True, type=int)
@click.option('--rho0', default='0,0', show_default=True, help='Twist constant as re,im')
@click.option('--volume', default=1.0, show_default=True, type=float, help='Torus volume, to integrate rho0')
@output_option
@format_option
def ks_degree_command(deg_an, rank, rho0, volume, output_path, fmt):
    """Degree vector (c_t, c_w, c_wbar)"""

    def compute():
        re_part, im_part = (float(v) for v in rho0.split(','))
        z = complex(re_part, im_part)
        vector = ks_degree(deg_an, rank, TwistForm(rho0=z, integral_rho0=z * volume))
        return {
            'c_t': vector.c_t,
            'c_w': [vector.c_w.real, vector.c_w.imag],
            'c_wbar': [vector.c_wbar.real, vector.c_wbar.imag],
            'pure_t': vector.is_pure_t,
        }

    emit(_guarded(compute), output_path, fmt)


@cli.command()
@input_option
@resolution_option
@output_option
@format_option
@click.option('--emit-fields', type=click.Path(dir_okay=False), help='CSV dump of x1,x2,x3,chi,G per grid point')
@click.pass_obj
def monopole(config, input_path, resolution, output_path, fmt, emit_fields):
    """Solve the rank-one monopole and integrate its analytic degree"""

    def compute():
        problem = load_problem(input_path)
        geom = derive_geometry(basis_of(problem))
        rho = twist_of(problem, geom)
        upsilon_result = upsilon_with_closure(RankOneMiniData(
            geometry=geom, singularities=tuple(singular_points_of(problem)), rho=rho, base_degree=problem.base_degree,
        ))
        points = singular_points_of(problem)
        if upsilon_result.closure is not None:
            points.append(upsilon_result.closure.point)

        grid = parse_resolution(resolution) or problem.resolution
        with console.status("Solving monopole..."):
            solution = MonopoleLab(config).solve(geom, points, rho, None, problem.base_degree, grid)

        predicted = degree_comparison(upsilon_result.module, geom, rho)
        summary = solution_summary(solution)
        summary['predicted_mu_an'] = predicted
        summary['discrepancy'] = abs(solution.deg_an - predicted)

        if emit_fields:
            with open(emit_fields, 'w', newline='') as f:
                writer = csv.writer(f)
                writer.writerow(['x1', 'x2', 'x3', 'chi', 'G'])
                writer.writerows(field_rows(solution))
            console.print(f"[green]Fields written to {emit_fields}[/green]")
        return summary

    emit(_guarded(compute), output_path, fmt)


@cli.command()
@input_option
@resolution_option
@click.option('--tolerance', '-t', type=float, help='Relative tolerance for the degree comparison')
@click.option('--refine', is_flag=True, help='Also run at doubled resolution and require convergence')
@click.option('--no-record', is_flag=True, help='Do not write a run record')
@output_option
@format_option
@click.pass_obj
def verify(config, input_path, resolution, tolerance, refine, no_record, output_path, fmt):
    """Run the full geometry -> module -> monopole -> comparison pipeline"""

    try:
        problem = load_problem(input_path)
    except ValidationError as e:
        console.print(f"[red]{validation_message(e)}[/red]")
        sys.exit(EXIT_CODES[INVARIANT_FAILED])

    start = time.time()
    with console.status("Running verify pipeline..."):
        report = run_verify(problem, config, parse_resolution(resolution), tolerance, refine)
    duration = time.time() - start

    if not no_record:
        run_id = RunRecorder(config).record(problem.model_dump(mode='json'), report, duration)
        if run_id:
            console.print(f"[cyan]Run recorded:[/cyan] {run_id}")

    _print_report(report)
    emit(report, output_path, fmt)
    sys.exit(exit_code(report))


@cli.command()
@click.option('--limit', '-l', default=10, help='Number of runs to show')
@click.pass_obj
def history(config, limit):
    """List recorded verify runs"""

    runs = RunRecorder(config).get_recent_runs(limit=limit)
    if not runs:
        console.print("[yellow]No recorded runs found[/yellow]")
        return

    table = Table(title="Recent Verify Runs")
    table.add_column("Run ID", style="cyan")
    table.add_column("Problem", style="white")
    table.add_column("Status", style="magenta")
    table.add_column("Resolution", style="blue")
    table.add_column("Duration", style="green")

    for run in runs:
        report = run.get('report', {})
        table.add_row(
            run['run_id'][:8],
            report.get('problem') or '-',
            report.get('status', 'UNKNOWN'),
            'x'.join(str(n) for n in report.get('resolution', [])),
            f"{run.get('duration_seconds', 0):.2f}s",
        )
    console.print(table)


@cli.command()
@click.argument('run_id')
@click.pass_obj
def show(config, run_id):
    """Print one recorded run (full id or unique prefix)"""

    run = RunRecorder(config).get_run(run_id)
    if not run:
        console.print(f"[red]Run {run_id} not found[/red]")
        sys.exit(1)
    click.echo(json.dumps(run, indent=2))


def parse_resolution(value: Optional[str]) -> Optional[Tuple[int, int, int]]:
    if not value:
        return None
    parts = [int(v) for v in value.split(',')]
    if len(parts) == 1:
        parts = parts * 3
    if len(parts) != 3:
        raise click.BadParameter(f"expected N or N1,N2,N3, got {value!r}", param_hint='--resolution')
    return tuple(parts)


def emit(payload: Any, output_path: Optional[str], fmt: str):
    """Write JSON or dotted key,value CSV to a file or stdout"""

    if fmt == 'csv':
        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(['key', 'value'])
        writer.writerows(flatten(payload))
        text = buffer.getvalue()
    else:
        text = json.dumps(payload, indent=2) + '\n'

    if output_path:
        with open(output_path, 'w', newline='') as f:
            f.write(text)
        console.print(f"[green]Written to {output_path}[/green]")
    else:
        click.echo(text, nl=False)


def _guarded(compute):
    try:
        return compute()
    except ValidationError as e:
        console.print(f"[red]{validation_message(e)}[/red]")
        sys.exit(EXIT_CODES[INVARIANT_FAILED])
    except NUMERIC_ERRORS as e:
        console.print(f"[red]{type(e).__name__}: {e}[/red]")
        sys.exit(2)
    except (MonodromeError, ValueError) as e:
        console.print(f"[red]{type(e).__name__}: {e}[/red]")
        sys.exit(EXIT_CODES[INVARIANT_FAILED])


def _print_verdict(result):
    style = {'stable': 'green', 'polystable': 'green', 'semistable': 'yellow'}.get(result['verdict'], 'red')
    console.print(Panel.fit(f"Verdict: {result['verdict']}", style=f"bold {style}"))


def _print_report(report):
    if report['status'] == PASS:
        console.print(Panel("PASS", style="bold green"))
    else:
        console.print(Panel(f"Status: {report['status']}", style="bold red"))
        if report.get('failure'):
            failure = report['failure']
            console.print(f"Stage: {failure['stage']}\n{failure['error']}: {failure['message']}")

    comparison = report['stages'].get('comparison')
    if comparison:
        table = Table(title="Degree comparison")
        table.add_column("Quantity", style="cyan")
        table.add_column("Value", style="magenta")
        table.add_row("deg_an", f"{comparison['deg_an']:.10f}")
        table.add_row("predicted", f"{comparison['predicted_mu_an']:.10f}")
        table.add_row("relative error", f"{comparison['relative_error']:.3e}")
        console.print(table)


if __name__ == '__main__':
    cli()
