import functools
import logging
import math
import sys

import click
from dotenv import load_dotenv

from assumptions.assumption_checks import full_report
from beables.beables_operations import (
    all_chsh,
    chsh,
    correlator_table,
    describe_model,
    max_chsh,
    validate,
)
from beables.factorization import product_form_deviation
from models.errors import BeablesError
from models.models import (
    AnalysisConfig,
    AssumptionSet,
    OptimizationProblem,
    QUANTUM_BOUND,
    QuantumScenario,
    SignChoice,
)
from model_files.model_document import (
    parse_model,
    parse_observed,
    parse_settings_prior,
    parse_table,
    write_model,
)
from optimizer.completion import hidden_completion, observed_marginal
from optimizer.optimizer_operations import bound_ladder, optimize
from optimizer.polytope import decide_local_realizability
from quantum.quantum_reference import quantum_table, tsirelson_gap_scan
from reports.report_rendering import (
    VALUE_FORMAT,
    render_assumption_report,
    render_chsh,
    render_chsh_list,
    render_ladder,
    render_optimization,
    render_product_form,
    render_realizability,
    render_table,
    render_validation,
    report_document,
    write_report,
)

load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

OPTIMAL_ANGLES = (0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4)

json_option = click.option("--json", "json_path", type=click.Path(dir_okay=False), default=None,
                           help="Also write a machine-readable report to this path.")


def handle_errors(command):
    """Library and file errors become a message on stderr and exit code 2"""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (BeablesError, OSError) as e:
            logger.debug("Command failed", exc_info=True)
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_USAGE)
    return wrapper


def load_valid_model(path):
    model = parse_model(path)
    report = validate(model)
    if not report.ok:
        click.echo(render_validation(report), err=True)
        sys.exit(EXIT_USAGE)
    return model


def product_form_residual(table, config):
    if table.coupled:
        return None
    return product_form_deviation(table, restarts=config.factorization_restarts, seed=config.seed)


@click.group()
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for debug output.")
@click.pass_context
def cli(ctx, verbose):
    """Finite beables models for Bell experiments: assumption checks, CHSH bounds and optimizers."""
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    ctx.obj = AnalysisConfig.from_env()


@cli.command("validate")
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@json_option
@handle_errors
def validate_command(model_file, json_path):
    """Check a model file against every model invariant."""
    model = parse_model(model_file)
    report = validate(model)
    click.echo(f"{model.name or model_file}: {describe_model(model)}")
    click.echo(render_validation(report))
    write_report(report_document("validate", validation=report), json_path)
    sys.exit(EXIT_OK if report.ok else EXIT_USAGE)


@cli.command("check")
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--tolerance", type=float, default=None, help="Deviation above which an assumption fails.")
@click.option("--prior", default="uniform", show_default=True,
              help="'uniform', 'model' (the prior stored in the file) or a settings-prior file.")
@json_option
@click.pass_obj
@handle_errors
def check_command(config, model_file, tolerance, prior, json_path):
    """Run every assumption checker and report the CHSH bound they support."""
    model = load_valid_model(model_file)
    tolerance = config.tolerance if tolerance is None else tolerance
    if prior == "model":
        settings_prior = None
    elif prior == "uniform":
        settings_prior = "uniform"
    else:
        settings_prior = parse_settings_prior(prior)

    report = full_report(model, settings_prior, tolerance)
    table = correlator_table(model)
    best = max_chsh(table) if len(model.labels("a")) > 1 and len(model.labels("b")) > 1 else None
    residual = product_form_residual(table, config)
    click.echo(render_assumption_report(report))
    if best is not None:
        click.echo(f"model max CHSH: {VALUE_FORMAT.format(best.value)}")
    if residual is not None:
        click.echo(render_product_form(residual))
    write_report(report_document("check", assumptions=report, correlators=table, max_chsh=best,
                                 product_form_residual=residual), json_path)
    sys.exit(EXIT_OK if report.passed else EXIT_CHECK_FAILED)


@cli.command("chsh")
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--all", "show_all", is_flag=True, help="List every CHSH combination.")
@click.option("--quad", nargs=5, type=str, default=None, metavar="A A' B B' C",
              help="One combination; C may be '-' on coupled models.")
@click.option("--sign", type=click.Choice([s.value for s in SignChoice]), default=SignChoice.MINUS_PLUS.value,
              show_default=True, help="Sign choice for --quad.")
@json_option
@click.pass_obj
@handle_errors
def chsh_command(config, model_file, show_all, quad, sign, json_path):
    """Correlator table and CHSH values of a model."""
    model = load_valid_model(model_file)
    table = correlator_table(model)
    click.echo(render_table(table))
    if quad:
        a, a_prime, b, b_prime, c = quad
        results = [chsh(table, a, a_prime, b, b_prime, None if c == "-" else c, sign)]
        click.echo(render_chsh(results[0]))
    elif show_all:
        results = all_chsh(table)
        click.echo(render_chsh_list(results))
    else:
        results = [max_chsh(table)]
        click.echo("max " + render_chsh(results[0]))
    residual = product_form_residual(table, config)
    if residual is not None:
        click.echo(render_product_form(residual))
    write_report(report_document("chsh", correlators=table, chsh=results, product_form_residual=residual), json_path)


@cli.command("optimize")
@click.option("--flags", default="all", show_default=True,
              help="Assumption set, e.g. 'all' or 'all,-no_conspiracy'.")
@click.option("--cards", default="binary", show_default=True,
              help="'binary' or role=N pairs, e.g. 'a=2,b=2,c=1,lambda=2,mu=2,nu=4'.")
@click.option("--enumerate", "strategy", flag_value="enumerate", help="Exact deterministic enumeration.")
@click.option("--ascend", "strategy", flag_value="ascend", help="Coordinate ascent with restarts.")
@click.option("--seed", type=int, default=None)
@click.option("--restarts", type=int, default=None)
@click.option("--cap", type=int, default=None, help="Enumeration cap on hidden strategies.")
@click.option("--ladder", is_flag=True, help="Also relax each assumption in turn.")
@json_option
@click.pass_obj
@handle_errors
def optimize_command(config, flags, cards, strategy, seed, restarts, cap, ladder, json_path):
    """Maximize CHSH over beables models allowed by an assumption set."""
    problem = OptimizationProblem.from_cards_spec(
        cards,
        AssumptionSet.parse(flags),
        seed=config.seed if seed is None else seed,
        restarts=config.restarts if restarts is None else restarts,
        max_sweeps=config.max_sweeps,
        enumeration_cap=config.enumeration_cap if cap is None else cap,
        seed_cardinality=config.seed_cardinality,
    )
    strategy = strategy or "auto"
    if ladder:
        rows = bound_ladder(problem, strategy)
        click.echo(render_ladder(rows))
        write_report(report_document("optimize", ladder={label: result for label, result in rows}), json_path)
        return
    result = optimize(problem, strategy)
    click.echo(render_optimization(result))
    click.echo(render_chsh(result.chsh))
    write_report(report_document("optimize", optimization=result), json_path)


@cli.command("quantum")
@click.option("--angles", nargs=4, type=float, default=None, metavar="A A' B B'",
              help="Measurement angles in radians (default: the optimal ones).")
@click.option("--scan", "resolution", type=int, default=None, help="Also scan a grid of this many angles.")
@json_option
@handle_errors
def quantum_command(angles, resolution, json_path):
    """Singlet correlators and their CHSH value."""
    angles = angles or OPTIMAL_ANGLES
    table = quantum_table(QuantumScenario.from_angles(angles[:2], angles[2:]))
    best = max_chsh(table)
    click.echo(render_table(table))
    click.echo(f"max CHSH = {VALUE_FORMAT.format(best.value)} (quantum reference {VALUE_FORMAT.format(QUANTUM_BOUND)})")
    scan = None
    if resolution is not None:
        scan = {"resolution": resolution, "value": tsirelson_gap_scan(resolution)}
        click.echo(f"grid scan ({resolution} angles): {VALUE_FORMAT.format(scan['value'])}, "
                   f"gap {QUANTUM_BOUND - scan['value']:.3e}")
    write_report(report_document("quantum", angles=list(angles), correlators=table, max_chsh=best, scan=scan),
                 json_path)


@cli.command("complete")
@click.argument("observed_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--common-past", is_flag=True, help="Also record the outcome pair in nu.")
@click.option("--tolerance", type=float, default=None)
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="Write the completed model here.")
@json_option
@click.pass_obj
@handle_errors
def complete_command(config, observed_file, common_past, tolerance, output, json_path):
    """Build a hidden-beable model reproducing observed statistics and check it."""
    observed = parse_observed(observed_file)
    model = hidden_completion(observed, common_past=common_past)
    reproduction = float(abs(observed_marginal(model).weights - observed.distribution.weights).max())
    report = full_report(model, None, config.tolerance if tolerance is None else tolerance)
    click.echo(f"completion reproduces the observed joint to {reproduction:.3e}")
    click.echo(render_assumption_report(report))
    best = None
    if len(model.labels("a")) > 1 and len(model.labels("b")) > 1:
        best = max_chsh(correlator_table(model))
        click.echo(f"model max CHSH: {VALUE_FORMAT.format(best.value)}")
    if output:
        write_model(model, output)
    write_report(report_document("complete", reproduction_error=reproduction, assumptions=report, max_chsh=best),
                 json_path)


@cli.command("polytope")
@click.argument("table_file", type=click.Path(exists=True, dir_okay=False))
@json_option
@handle_errors
def polytope_command(table_file, json_path):
    """Decide whether a 2x2 correlator table has a local hidden-variable model."""
    table = parse_table(table_file)
    result = decide_local_realizability(table)
    click.echo(render_table(table))
    click.echo(render_realizability(result))
    write_report(report_document("polytope", correlators=table, realizability=result), json_path)
    sys.exit(EXIT_OK if result.realizable else EXIT_CHECK_FAILED)


if __name__ == "__main__":
    cli()
