"""
Command-line surface.

Every subcommand resolves a Scenario (built-in defaults < environment < scenario
file < flags), runs one analysis and writes JSON or CSV to stdout or --out.
Progress and errors go to stderr. Exit codes: 0 success, 1 invalid input,
2 numerical failure.
"""
import json
from functools import wraps
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import click
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from core import log
from core.errors import GameError, InvalidInputError, NumericalError
from core.export import emit, to_csv, to_json
from core.settings import Settings, load_settings
from games.abm import (
    PairingModel,
    PopulationConfig,
    child_seed,
    difference_z,
    estimate_roles,
    estimate_single_locus,
    evolve_population,
)
from games.analytics import (
    Mode,
    equilibrium_roles,
    equilibrium_single,
    hamilton_comparison,
    threshold_bounds_roles,
    threshold_bounds_single,
    threshold_curve,
    threshold_roles,
    threshold_single,
)
from games.dynamics import SingleLocusSystem, TwoLocusSystem, fixed_points, fixed_points_single, integrate, vector_field
from games.figures import build_figure, figure_numbers
from games.game_core import (
    PayoffMatrix,
    check_pd,
    classify_ordinal,
    decompose,
    is_trivial,
    pure_equilibria,
    strong_altruism_map,
    synergy_class,
)
from games.strategies import NAMED, play_match, resolve_genome, round_robin


class Scenario(BaseModel):
    """Every input a subcommand can consume. Reports embed it so a run can be repeated."""

    model_config = ConfigDict(extra="forbid", frozen=True, allow_inf_nan=False)

    payoffs: Tuple[float, float, float, float] = (5.0, 3.0, 1.0, 0.0)
    r: float = Field(5 / 12, ge=0, le=1)
    fc: float = Field(0.5, ge=0, le=1)
    mode: Mode = Mode.SINGLE
    dt: float = Field(0.01, gt=0)
    t_end: float = Field(200.0, ge=0)
    grid_n: int = Field(21, ge=2)
    samples: int = Field(101, ge=2)
    n: int = Field(100_000, ge=1)
    size: int = Field(10_000, ge=2)
    generations: int = Field(300, ge=0)
    replicates: int = Field(1, ge=1)
    seed: int = 12345
    start: Optional[Tuple[float, ...]] = Field(None, min_length=1, max_length=2)

    @field_validator("payoffs", mode="before")
    @classmethod
    def _payoff_text(cls, value: Any) -> Any:
        if isinstance(value, str):
            return PayoffMatrix.parse(value).as_tuple()
        return value

    @field_validator("start", mode="before")
    @classmethod
    def _start_text(cls, value: Any) -> Any:
        if isinstance(value, str):
            try:
                return tuple(float(part) for part in value.split(","))
            except ValueError as exc:
                raise ValueError(f"start must be f1[,f2], got {value!r}") from exc
        return value

    @property
    def matrix(self) -> PayoffMatrix:
        return PayoffMatrix.of(*self.payoffs)

    def initial_state(self) -> Tuple[float, ...]:
        """--start, else fc at every locus the mode uses."""
        loci = 1 if self.mode is Mode.SINGLE else 2
        state = self.start or (self.fc,) * loci
        if len(state) != loci:
            raise InvalidInputError(f"{self.mode.value} mode needs a start with {loci} coordinate(s), got {len(state)}")
        return state

    def metadata(self) -> Dict[str, Any]:
        header = self.model_dump(mode="json")
        header["payoffs"] = str(self.matrix)
        if self.start is not None:
            header["start"] = ",".join(f"{v:g}" for v in self.start)
        return header


def load_scenario(path: str | Path) -> Dict[str, Any]:
    """Read a scenario document, or the `scenario` object embedded in a JSON report."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read scenario file {path}: {exc}") from exc
    if isinstance(data, dict) and isinstance(data.get("scenario"), dict):
        data = data["scenario"]
    if not isinstance(data, dict):
        raise InvalidInputError(f"scenario file {path} must hold a JSON object")
    # validate on load so unknown keys are reported against the file
    Scenario.model_validate(data)
    return data


def resolve_scenario(settings: Settings, file: Optional[str], flags: Dict[str, Any]) -> Scenario:
    values: Dict[str, Any] = {
        "dt": settings.dt,
        "t_end": settings.t_end,
        "grid_n": settings.grid_n,
        "n": settings.abm_n,
        "size": settings.population_size,
        "generations": settings.generations,
        "seed": settings.seed,
    }
    if file:
        values.update(load_scenario(file))
    values.update({key: value for key, value in flags.items() if value is not None})
    return Scenario.model_validate(values)


SCENARIO_FLAGS = ("payoffs", "r", "fc", "mode", "seed", "n", "grid_n", "dt", "t_end", "samples", "start", "generations", "size", "replicates")


def scenario_options(func):
    """Attach the shared scenario flags plus --format/--out/--scenario and pass a resolved Scenario."""
    options = [
        click.option("--payoffs", help="Payoff quadruple T,R,P,S."),
        click.option("--r", "r", type=float, help="Coefficient of relatedness in [0, 1]."),
        click.option("--fc", type=float, help="Frequency of cooperation (the other locus in roles mode)."),
        click.option("--mode", type=click.Choice([m.value for m in Mode])),
        click.option("--seed", type=int),
        click.option("--n", "n", type=int, help="Monte Carlo sample count."),
        click.option("--grid", "grid_n", type=int, help="Vector-field grid points per axis."),
        click.option("--dt", type=float),
        click.option("--t-end", "t_end", type=float),
        click.option("--samples", type=int, help="Threshold curve resolution."),
        click.option("--start", help="Starting frequencies f1[,f2]."),
        click.option("--generations", type=int),
        click.option("--size", type=int, help="Population size for evolve."),
        click.option("--replicates", type=int, help="Independent evolve runs."),
        click.option("--format", "fmt", type=click.Choice(["json", "csv"]), help="Output format."),
        click.option("--out", type=click.Path(dir_okay=False), help="Write to this file instead of stdout."),
        click.option("--scenario", "scenario_file", type=click.Path(exists=True, dir_okay=False)),
    ]

    @wraps(func)
    @click.pass_obj
    def wrapper(settings: Settings, fmt, out, scenario_file, **kwargs):
        flags = {key: kwargs.pop(key) for key in SCENARIO_FLAGS}
        scenario = resolve_scenario(settings, scenario_file, flags)
        return func(scenario=scenario, settings=settings, fmt=fmt, out=out, **kwargs)

    for option in reversed(options):
        wrapper = option(wrapper)
    return wrapper


def _report(scenario: Scenario, out: Optional[str], **payload: Any) -> None:
    emit(to_json({"scenario": scenario.model_dump(mode="json"), **payload}), out)


def _table(scenario: Scenario, out: Optional[str], columns: Sequence[str], rows, **extra: Any) -> None:
    emit(to_csv(columns, rows, metadata={**scenario.metadata(), **extra}), out)


def _bounds(bounds) -> Dict[str, Optional[float]]:
    return {"at_zero": bounds.at_zero, "at_one": bounds.at_one, "lo": bounds.lo, "hi": bounds.hi}


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--quiet", is_flag=True, help="Silence progress lines; warnings and errors still print.")
@click.pass_context
def cli(ctx: click.Context, quiet: bool) -> None:
    """Kin selection in symmetric 2x2 games: thresholds, dynamics and simulation."""
    settings = load_settings()
    if quiet:
        settings = settings.model_copy(update={"quiet": True})
    log.set_quiet(settings.quiet)
    ctx.obj = settings


@cli.command()
@scenario_options
def classify(scenario: Scenario, settings: Settings, fmt: Optional[str], out: Optional[str]) -> None:
    """Taxonomy, synergy class and strong-altruism map of a matrix."""
    m = scenario.matrix
    dec = decompose(m)
    game = classify_ordinal(m)
    synergy = synergy_class(m, settings.additivity_tol)
    altruism = strong_altruism_map(m)
    if fmt == "csv":
        _table(
            scenario, out, ["class", "synergy", "b", "c", "d", "strong_altruism"],
            [(game.value, synergy.kind.value, dec.b, dec.c, dec.d, altruism.altruist.value if altruism else None)],
        )
        return
    _report(
        scenario, out,
        **{"class": game.value, "synergy": synergy.kind.value, "d": dec.d, "b": dec.b, "c": dec.c},
        strong_altruism=altruism,
        trivial=is_trivial(m),
        pd_check=check_pd(m),
        pure_equilibria=[[a.value, b.value] for a, b in pure_equilibria(m)],
        hamilton=hamilton_comparison(m),
    )


@cli.command("decompose")
@scenario_options
def decompose_matrix(scenario: Scenario, settings: Settings, fmt: Optional[str], out: Optional[str]) -> None:
    """Cost, benefit and synergy of a matrix."""
    dec = decompose(scenario.matrix)
    if fmt == "csv":
        _table(scenario, out, ["b", "c", "d"], [(dec.b, dec.c, dec.d)])
    else:
        _report(scenario, out, b=dec.b, c=dec.c, d=dec.d)


@cli.command()
@click.option("--curve", is_flag=True, help="Sample the threshold over f_c in [0, 1].")
@scenario_options
def threshold(scenario: Scenario, settings: Settings, fmt: Optional[str], out: Optional[str], curve: bool) -> None:
    """Relatedness threshold at the given f_c, or the whole curve."""
    m = scenario.matrix
    single = scenario.mode is Mode.SINGLE
    bounds = threshold_bounds_single(m) if single else threshold_bounds_roles(m)
    if curve:
        result = threshold_curve(m, scenario.mode, scenario.samples)
        if fmt == "csv":
            _table(scenario, out, ["f_c", "r_prime"], result.points, interval_lo=result.lo, interval_hi=result.hi)
        else:
            _report(scenario, out, curve=result, bounds=_bounds(bounds))
        return
    value = (threshold_single if single else threshold_roles)(m, scenario.fc)
    if value.out_of_range:
        log.warn(f"threshold {value.value:g} lies outside [0, 1]")
    if fmt == "csv":
        _table(scenario, out, ["f_c", "r_prime", "defined", "out_of_range"],
               [(scenario.fc, value.value, value.defined, value.out_of_range)])
    else:
        _report(scenario, out, f_c=scenario.fc, threshold=value, bounds=_bounds(bounds))


@cli.command()
@scenario_options
def equilibrium(scenario: Scenario, settings: Settings, fmt: Optional[str], out: Optional[str]) -> None:
    """Mixed equilibrium, its stability and the interval of r where it exists."""
    m = scenario.matrix
    if scenario.mode is Mode.SINGLE:
        report = equilibrium_single(m, scenario.r)
        points = fixed_points_single(m, scenario.r, settings=settings)
    else:
        report = equilibrium_roles(m, scenario.r)
        points = fixed_points(m, scenario.r, settings=settings)
    if fmt == "csv":
        _table(scenario, out, ["f_star", "stable", "interval_lo", "interval_hi", "outcome"],
               [(report.f_star, report.stable, report.interval_lo, report.interval_hi, report.outcome)])
    else:
        _report(scenario, out, equilibrium=report, fixed_points=points)


@cli.command()
@scenario_options
def phase(scenario: Scenario, settings: Settings, fmt: Optional[str], out: Optional[str]) -> None:
    """Replicator vector field on a grid (two loci in roles mode, a line otherwise)."""
    m = scenario.matrix
    if scenario.mode is Mode.ROLES:
        columns = ["f1", "f2", "df1", "df2"]
        rows = vector_field(TwoLocusSystem(m, scenario.r), scenario.grid_n)
    else:
        system = SingleLocusSystem(m, scenario.r)
        columns = ["f", "df"]
        rows = [(f, float(system.velocity([f])[0])) for f in (i / (scenario.grid_n - 1) for i in range(scenario.grid_n))]
    if fmt == "json":
        _report(scenario, out, columns=columns, rows=rows)
    else:
        _table(scenario, out, columns, rows)


@cli.command()
@scenario_options
def simulate(scenario: Scenario, settings: Settings, fmt: Optional[str], out: Optional[str]) -> None:
    """Integrate the replicator dynamics from --start."""
    m = scenario.matrix
    system = SingleLocusSystem(m, scenario.r) if scenario.mode is Mode.SINGLE else TwoLocusSystem(m, scenario.r)
    trajectory = integrate(system, scenario.initial_state(), scenario.dt, scenario.t_end, settings=settings)
    if trajectory.converged_at is not None:
        log.success(f"Converged to {tuple(round(v, 6) for v in trajectory.final)} at t={trajectory.converged_at:g}")
    if fmt == "json":
        _report(scenario, out, trajectory=trajectory)
        return
    columns = ["t", "f"] if system.dimension == 1 else ["t", "f1", "f2"]
    rows = [(t, *state) for t, state in zip(trajectory.times, trajectory.states)]
    _table(scenario, out, columns, rows, converged_at=trajectory.converged_at)


@cli.group()
def abm() -> None:
    """Agent-based Monte Carlo checks and finite-population evolution."""


@abm.command()
@scenario_options
def estimate(scenario: Scenario, settings: Settings, fmt: Optional[str], out: Optional[str]) -> None:
    """Sampled fitnesses against the closed forms at (r, fc)."""
    m = scenario.matrix
    log.info(f"Sampling {scenario.n} pairings per allele ({scenario.mode.value}, seed={scenario.seed})")
    if scenario.mode is Mode.SINGLE:
        c, d = estimate_single_locus(m, PairingModel(r=scenario.r, f_c=scenario.fc), scenario.n, scenario.seed)
        names = ("w_c", "w_d")
    else:
        c, d = estimate_roles(m, scenario.r, scenario.fc, scenario.n, scenario.seed)
        names = ("i_c", "i_d")
    diff, joint, z = difference_z(c, d)
    if fmt == "csv":
        rows = [(names[0], c.mean, c.std_error, c.closed_form, c.z_score), (names[1], d.mean, d.std_error, d.closed_form, d.z_score)]
        _table(scenario, out, ["quantity", "mean", "std_error", "closed_form", "z_score"], rows)
    else:
        _report(scenario, out, **{names[0]: c, names[1]: d}, difference={"estimate": diff, "std_error": joint, "z_score": z})


@abm.command()
@scenario_options
def evolve(scenario: Scenario, settings: Settings, fmt: Optional[str], out: Optional[str]) -> None:
    """Finite-population evolution; --replicates derives one seed per run from --seed."""
    cfg = PopulationConfig(
        size=scenario.size,
        initial=scenario.initial_state(),
        r=scenario.r,
        generations=scenario.generations,
        seed=scenario.seed,
    )
    seeds = [scenario.seed] if scenario.replicates == 1 else [child_seed(scenario.seed, i) for i in range(scenario.replicates)]
    series = [evolve_population(cfg.model_copy(update={"seed": s}), scenario.matrix, scenario.mode) for s in seeds]
    if fmt == "json":
        _report(scenario, out, series=series)
        return
    roles = scenario.mode is Mode.ROLES
    columns = ["replicate", "seed", "generation", "f1"] + (["f2"] if roles else [])
    rows: List[Tuple[Any, ...]] = []
    for index, run in enumerate(series):
        for g, f1 in enumerate(run.f1):
            rows.append((index, run.seed, g, f1, run.f2[g]) if roles else (index, run.seed, g, f1))
    _table(scenario, out, columns, rows, fitness_shift=series[0].fitness_shift, constant_r_idealisation=True)


@cli.command()
@click.argument("first")
@click.argument("second")
@scenario_options
def match(scenario: Scenario, settings: Settings, fmt: Optional[str], out: Optional[str], first: str, second: str) -> None:
    """Iterated play between two strategies, given by name or 5-letter genome."""
    g1, g2 = resolve_genome(first), resolve_genome(second)
    outcome = play_match(g1, g2, scenario.matrix)
    if fmt == "csv":
        rows = [
            (i, a1.value, a2.value, scenario.matrix.payoff(a1, a2), scenario.matrix.payoff(a2, a1), i >= outcome.cycle_start)
            for i, (a1, a2) in enumerate(outcome.transcript)
        ]
        _table(scenario, out, ["round", "first", "second", "payoff_first", "payoff_second", "in_cycle"], rows,
               genomes=f"{g1} {g2}")
        return
    _report(
        scenario, out,
        genomes={"first": str(g1), "second": str(g2)},
        alleles={"first": g1.alleles(), "second": g2.alleles()},
        outcome=outcome,
    )


@cli.command("round-robin")
@click.argument("strategies", nargs=-1)
@scenario_options
def round_robin_cmd(scenario: Scenario, settings: Settings, fmt: Optional[str], out: Optional[str], strategies: Tuple[str, ...]) -> None:
    """Long-run mean payoff of every strategy against every other (defaults to the named ones)."""
    names = list(strategies) or list(NAMED)
    table = round_robin(names, scenario.matrix)
    if fmt == "csv":
        _table(scenario, out, ["strategy", *names], [(row, *table[row].values()) for row in names])
    else:
        _report(scenario, out, table=table)


@cli.command()
@click.argument("number", type=int)
@click.option("--samples", type=int, default=101, show_default=True)
@click.option("--grid", "grid_n", type=int)
@click.option("--dt", type=float)
@click.option("--t-end", "t_end", type=float)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--out", type=click.Path(file_okay=False), help="Directory for one CSV per table plus a JSON report.")
@click.pass_obj
def figure(settings: Settings, number: int, samples: int, grid_n: Optional[int], dt: Optional[float],
           t_end: Optional[float], fmt: str, out: Optional[str]) -> None:
    """Data behind figure 1, 3, 4 or 5."""
    if number not in figure_numbers():
        raise InvalidInputError(f"figure must be one of {list(figure_numbers())}, got {number}")
    overrides = {key: value for key, value in {"dt": dt, "t_end": t_end}.items() if value is not None}
    settings = Settings.model_validate({**settings.model_dump(), **overrides})
    data = build_figure(number, settings, samples=samples, grid_n=grid_n)
    header = data.metadata()
    scenario = _figure_scenario(number, data, settings, samples).model_dump(mode="json")
    if out is None:
        if fmt == "csv":
            name, table = next(iter(data.tables.items()))
            emit(to_csv(table.columns, table.rows, metadata={**header, "table": name}))
        else:
            emit(to_json({"scenario": scenario, "metadata": header, "tables": data.tables, "reports": data.reports}))
        return
    directory = Path(out)
    for name, table in data.tables.items():
        emit(to_csv(table.columns, table.rows, metadata={**header, "table": name}), directory / f"figure{number}_{name}.csv")
    emit(to_json({"scenario": scenario, "metadata": header, "reports": data.reports}), directory / f"figure{number}_report.json")


def _figure_scenario(number: int, data, settings: Settings, samples: int) -> Scenario:
    """The scenario a figure was built from, so its report loads back with --scenario."""
    params = data.parameters
    start = params.get("start")
    values: Dict[str, Any] = {
        "payoffs": params["payoffs"],
        "mode": Mode.SINGLE if number == 1 else Mode.ROLES,
        "dt": settings.dt,
        "t_end": settings.t_end,
        "grid_n": params.get("grid_n", settings.grid_n),
        "samples": samples,
        "seed": settings.seed,
    }
    if "r" in params:
        values["r"] = params["r"]
    if start is not None:
        values["start"] = start if isinstance(start, (tuple, list)) else (start,)
    return Scenario.model_validate(values)


def _describe(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        where = ".".join(str(p) for p in err["loc"]) or "value"
        parts.append(f"{where}: {err['msg']}")
    return "; ".join(parts)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code instead of exiting."""
    try:
        result = cli.main(args=list(argv) if argv is not None else None, prog_name="kin-games", standalone_mode=False)
    except click.ClickException as exc:
        log.error(exc.format_message())
        return 1
    except click.Abort:
        log.error("aborted")
        return 1
    except NumericalError as exc:
        log.error(str(exc))
        return 2
    except ValidationError as exc:
        log.error(_describe(exc))
        return 1
    except GameError as exc:
        log.error(str(exc))
        return 1
    return result if isinstance(result, int) else 0
