"""Command-line front end: select, regression-bench, doa-bench and replay."""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import click
from dotenv import load_dotenv

from .cnum import ConstantColumnError, DimensionMismatchError, NotPositiveDefiniteError
from .complex_csv import (
    ComplexTableError,
    parse_complex_csv,
    read_result_document,
    render_result_document,
    write_result_document,
)
from .selector import TRexConfig, select
from .simulation import (
    DoaScenario,
    InvalidGridError,
    OffGridSourceError,
    RegressionScenario,
    grid_index,
    grid_size,
    run_monte_carlo,
)

load_dotenv()

REGRESSION_SNRS = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
DOA_SNRS_DB = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0)
DOA_PRESETS = {
    'homogeneous': (1.0, 1.0, 1.0),
    'heterogeneous': (0.3, 1.0, 0.04),
}


class InputError(click.ClickException):
    """Bad input file, option value or scenario; exits with status 2."""
    exit_code = 2


class NumericalFailure(click.ClickException):
    """Numerical breakdown inside the selector; exits with status 1."""
    exit_code = 1


@dataclass
class RunConfig:
    """
    Everything one CLI run depends on.

    ``to_document`` is the part embedded in every result document; threads,
    output path and format are left out since they do not change results.
    """
    command: str
    alpha: float = 0.1
    seed: int = 0
    trials: Optional[int] = None
    overrides: Dict = field(default_factory=dict)
    inputs: Dict = field(default_factory=dict)
    scenario: Dict = field(default_factory=dict)
    timing: bool = False
    out: Optional[str] = None
    fmt: Optional[str] = None
    threads: int = 1
    verbose: bool = False

    def to_document(self) -> Dict:
        return {
            'command': self.command,
            'alpha': self.alpha,
            'seed': self.seed,
            'trials': self.trials,
            'overrides': self.overrides,
            'inputs': self.inputs,
            'scenario': self.scenario,
            'timing': self.timing,
        }

    @classmethod
    def from_document(cls, document: Dict, **runtime) -> "RunConfig":
        known = ('command', 'alpha', 'seed', 'trials', 'overrides', 'inputs', 'scenario', 'timing')
        missing = [key for key in known if key not in document]
        if missing:
            raise InputError(f"Result document config is missing: {', '.join(missing)}")
        return cls(**{key: document[key] for key in known}, **runtime)

    @property
    def output_format(self) -> str:
        if self.fmt:
            return self.fmt
        if self.out and Path(self.out).suffix.lower() == ".csv":
            return "csv"
        return "json"


def _float_list(ctx, param, value) -> Optional[Tuple[float, ...]]:
    if value is None:
        return None
    try:
        return tuple(float(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got '{value}'")


def _dummy_count(ctx, param, value) -> Optional[int]:
    if value is None or value == "auto":
        return None
    try:
        count = int(value)
    except ValueError:
        raise click.BadParameter(f"expected a positive integer or 'auto', got '{value}'")
    if count < 1:
        raise click.BadParameter("must be at least 1")
    return count


def _selector_options(func):
    """Options shared by every command that runs the selector."""
    options = [
        click.option('--alpha', type=click.FloatRange(0.0, 1.0), default=0.1, show_default=True,
                     help='Target false discovery rate.'),
        click.option('--k', 'k', type=click.IntRange(min=2), default=None,
                     help='Random experiments (default 20).'),
        click.option('--l', 'l', default=None, callback=_dummy_count,
                     help="Dummies per experiment, or 'auto' to start at p and calibrate up to 10p."),
        click.option('--t-max', 't_max', type=click.IntRange(min=1), default=None,
                     help='Largest dummy budget (default min(L, ceil(n/2))).'),
        click.option('--v-grid', default=None, callback=_float_list,
                     help='Comma-separated voting levels in [0.5, 1).'),
        click.option('--dummies', type=click.Choice(['gaussian', 'phase']), default='gaussian',
                     show_default=True, help='Dummy distribution.'),
        click.option('--seed', type=int, default=0, show_default=True, help='Master seed.'),
        click.option('--out', type=click.Path(dir_okay=False), default=None,
                     help='Output file (stdout when omitted).'),
        click.option('--format', 'fmt', type=click.Choice(['json', 'csv']), default=None,
                     help='Output format (inferred from --out, default json).'),
        click.option('--threads', type=click.IntRange(min=1), default=1, envvar='CTREX_THREADS',
                     show_envvar=True, help='Worker threads; results do not depend on it.'),
        click.option('--verbose', is_flag=True, help='Stream the structured log to stderr.'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _overrides(k, l, t_max, v_grid, dummies) -> Dict:
    values = {'K': k, 'L': l, 'T_max': t_max, 'v_grid': list(v_grid) if v_grid else None}
    values = {key: value for key, value in values.items() if value is not None}
    values['dummy_distribution'] = dummies
    return values


def _materialize(n: int, p: int, alpha: float, seed: int, overrides: Dict) -> Dict:
    """Resolve every selector default for an n x p problem."""
    try:
        config = TRexConfig.defaults(n, p, alpha, master_seed=seed, **overrides)
    except (TypeError, ValueError) as e:
        raise InputError(f"Invalid selector configuration: {e}")
    resolved = config.to_dict()
    for key in ('alpha', 'master_seed', 'intercept'):
        resolved.pop(key)
    return resolved


def _emit(run: RunConfig, document: Dict, summary: str) -> None:
    if run.out:
        written = write_result_document(run.out, document, run.output_format)
        click.echo(f"{summary} Output saved to {', '.join(str(p) for p in written)}.")
    else:
        click.echo(render_result_document(document, run.output_format), nl=False)


def _load_inputs(run: RunConfig):
    matrices = {}
    for role in ('x', 'y'):
        path = run.inputs.get(role)
        try:
            matrices[role] = parse_complex_csv(path)
        except FileNotFoundError:
            raise InputError(f"{path}: file not found")
        except ComplexTableError as e:
            raise InputError(f"{path}: {e}")
    X, y = matrices['x'], matrices['y']
    if y.shape[1] != 1:
        raise InputError(f"{run.inputs['y']}: expected one complex column, found {y.shape[1]}")
    if X.shape[0] != y.shape[0]:
        raise InputError(
            f"{run.inputs['x']} has {X.shape[0]} rows but {run.inputs['y']} has {y.shape[0]}"
        )
    return X, y[:, 0]


def run_select(run: RunConfig) -> None:
    X, y = _load_inputs(run)
    overrides = dict(run.overrides)
    try:
        result = select(X, y, run.alpha, master_seed=run.seed, n_jobs=run.threads, **overrides)
    except (ConstantColumnError, DimensionMismatchError) as e:
        raise InputError(f"{run.inputs['x']}: {e}")
    except (TypeError, ValueError) as e:
        raise InputError(f"Invalid selector configuration: {e}")
    except (NotPositiveDefiniteError, FloatingPointError) as e:
        raise NumericalFailure(f"Numerical failure: {e}")

    if run.verbose:
        for entry in result.log:
            click.echo(json.dumps(entry), err=True)

    resolved = result.config.to_dict()
    materialized = {key: resolved[key] for key in
                    ('K', 'L', 'L_max', 'T_max', 'v_grid', 'dummy_distribution', 'intercept')}
    run.overrides = materialized
    document = {
        'config': run.to_document(),
        'selected': list(result.active_set),
        'v_star': result.v_star,
        'T_star': result.T_star,
        'fdp_hat': result.fdp_hat,
        'phi': result.occurrences.phi[result.T_star].tolist(),
    }
    summary = (f"Selected {len(result.active_set)} of {X.shape[1]} variables "
               f"(v*={result.v_star}, T*={result.T_star}, FDP estimate={result.fdp_hat:.3f}).")
    _emit(run, document, summary)


def _run_bench(run: RunConfig, scenarios: List[Tuple[float, object]], n: int, p: int) -> None:
    run.overrides = _materialize(n, p, run.alpha, run.seed, run.overrides)
    rows = []
    for snr, scenario in scenarios:
        try:
            report = run_monte_carlo(scenario, run.trials, run.alpha, run.seed,
                                     selector_options=run.overrides, n_jobs=run.threads)
        except (NotPositiveDefiniteError, FloatingPointError) as e:
            raise NumericalFailure(f"Numerical failure at SNR {snr}: {e}")
        row = report.to_row(float(snr), timing=run.timing)
        if run.verbose:
            click.echo(json.dumps({'step': 'snr_level', **row}), err=True)
        rows.append(row)
    summary = f"Benchmark finished: {len(rows)} SNR level(s), {run.trials} trial(s) each."
    _emit(run, {'config': run.to_document(), 'rows': rows}, summary)


def run_regression_bench(run: RunConfig) -> None:
    sc = run.scenario
    try:
        scenarios = [
            (snr, RegressionScenario(p=sc['p'], n=sc['n'], s=sc['s'], snr=snr))
            for snr in sc['snr']
        ]
    except ValueError as e:
        raise InputError(f"Invalid regression scenario: {e}")
    if not scenarios:
        raise InputError("No SNR levels given")
    _run_bench(run, scenarios, n=sc['n'], p=sc['p'])


def run_doa_bench(run: RunConfig) -> None:
    sc = run.scenario
    try:
        G = grid_size(sc['resolution'])
        for angle in sc['angles']:
            grid_index(angle, sc['resolution'])
        scenarios = [
            (snr_db, DoaScenario(M=sc['M'], grid_resolution=sc['resolution'],
                                 source_angles=tuple(sc['angles']),
                                 source_powers=tuple(sc['powers']), snr_db=snr_db))
            for snr_db in sc['snr_db']
        ]
    except (InvalidGridError, OffGridSourceError, ValueError) as e:
        raise InputError(str(e))
    if not scenarios:
        raise InputError("No SNR levels given")
    _run_bench(run, scenarios, n=sc['M'], p=G)


RUNNERS = {
    'select': run_select,
    'regression-bench': run_regression_bench,
    'doa-bench': run_doa_bench,
}


@click.group()
@click.version_option(package_name="ctrex-selector")
def main():
    """FDR-controlled variable selection for complex-valued linear models."""


@main.command('select')
@click.option('--x', 'x_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Predictor table (paired <name>.re,<name>.im columns).')
@click.option('--y', 'y_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Response table with one complex column.')
@click.option('--intercept/--no-intercept', default=True, show_default=True,
              help='Center columns and response before selection.')
@_selector_options
def select_command(x_path, y_path, intercept, alpha, k, l, t_max, v_grid, dummies, seed,
                   out, fmt, threads, verbose):
    """Select variables of y = X beta + noise at a target FDR."""
    overrides = _overrides(k, l, t_max, v_grid, dummies)
    overrides['intercept'] = intercept
    run = RunConfig(command='select', alpha=alpha, seed=seed, overrides=overrides,
                    inputs={'x': x_path, 'y': y_path}, out=out, fmt=fmt,
                    threads=threads, verbose=verbose)
    run_select(run)


@main.command('regression-bench')
@click.option('--p', type=click.IntRange(min=2), default=1000, show_default=True)
@click.option('--n', type=click.IntRange(min=2), default=300, show_default=True)
@click.option('--s', type=click.IntRange(min=0), default=5, show_default=True)
@click.option('--snr', default=','.join(str(v) for v in REGRESSION_SNRS), callback=_float_list,
              show_default=True, help='Comma-separated linear SNR levels.')
@click.option('--trials', type=click.IntRange(min=1), default=100, show_default=True)
@click.option('--timing/--no-timing', default=False, show_default=True,
              help='Record wall time per trial (documents are then not byte-reproducible).')
@_selector_options
def regression_bench_command(p, n, s, snr, trials, timing, alpha, k, l, t_max, v_grid, dummies,
                             seed, out, fmt, threads, verbose):
    """Monte-Carlo FDR/TPR of sparse complex regression over an SNR grid."""
    run = RunConfig(command='regression-bench', alpha=alpha, seed=seed, trials=trials,
                    overrides=_overrides(k, l, t_max, v_grid, dummies),
                    scenario={'p': p, 'n': n, 's': s, 'snr': list(snr)}, timing=timing,
                    out=out, fmt=fmt, threads=threads, verbose=verbose)
    run_regression_bench(run)


@main.command('doa-bench')
@click.option('--m', 'm', type=click.IntRange(min=2), default=80, show_default=True,
              help='Sensors in the uniform linear array.')
@click.option('--resolution', type=float, default=1.0, show_default=True,
              help='Grid resolution in degrees; must divide 180.')
@click.option('--angles', default='35,40,45', callback=_float_list, show_default=True,
              help='Comma-separated source angles in degrees.')
@click.option('--preset', type=click.Choice(sorted(DOA_PRESETS)), default='homogeneous',
              show_default=True, help='Source power preset.')
@click.option('--powers', default=None, callback=_float_list,
              help='Comma-separated source powers (overrides --preset).')
@click.option('--snr-db', 'snr_db', default=','.join(str(v) for v in DOA_SNRS_DB),
              callback=_float_list, show_default=True, help='Comma-separated SNR levels in dB.')
@click.option('--trials', type=click.IntRange(min=1), default=100, show_default=True)
@click.option('--timing/--no-timing', default=False, show_default=True,
              help='Record wall time per trial (documents are then not byte-reproducible).')
@_selector_options
def doa_bench_command(m, resolution, angles, preset, powers, snr_db, trials, timing, alpha, k, l,
                      t_max, v_grid, dummies, seed, out, fmt, threads, verbose):
    """Single-snapshot DOA estimation benchmark over an SNR grid in dB."""
    powers = powers if powers is not None else DOA_PRESETS[preset]
    run = RunConfig(command='doa-bench', alpha=alpha, seed=seed, trials=trials,
                    overrides=_overrides(k, l, t_max, v_grid, dummies),
                    scenario={'M': m, 'resolution': resolution, 'angles': list(angles),
                              'powers': list(powers), 'snr_db': list(snr_db)},
                    timing=timing, out=out, fmt=fmt, threads=threads, verbose=verbose)
    run_doa_bench(run)


@main.command('replay')
@click.argument('document', type=click.Path(exists=True, dir_okay=False))
@click.option('--out', type=click.Path(dir_okay=False), default=None,
              help='Output file (stdout when omitted).')
@click.option('--format', 'fmt', type=click.Choice(['json', 'csv']), default=None)
@click.option('--threads', type=click.IntRange(min=1), default=1, envvar='CTREX_THREADS',
              show_envvar=True)
@click.option('--verbose', is_flag=True)
def replay_command(document, out, fmt, threads, verbose):
    """Re-run a command from the configuration embedded in a result document."""
    try:
        config = read_result_document(document)['config']
    except (ValueError, KeyError, TypeError) as e:
        raise InputError(f"{document}: not a result document ({e})")
    run = RunConfig.from_document(config, out=out, fmt=fmt, threads=threads, verbose=verbose)
    if run.command not in RUNNERS:
        raise InputError(f"{document}: unknown command '{run.command}'")
    RUNNERS[run.command](run)


if __name__ == '__main__':
    main()
