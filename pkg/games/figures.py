# Figure orchestration: gathers analytics and dynamics output into the data
# tables behind each figure, tagging which parameters are published values and
# which are defaults chosen by this tool.
from typing import Any, Dict, List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from core import log
from core.errors import InvalidInputError
from core.settings import DEFAULTS, Settings
from games.analytics import (
    Mode,
    equilibrium_roles,
    equilibrium_single,
    threshold_curve,
)
from games.dynamics import (
    SingleLocusSystem,
    TwoLocusSystem,
    fixed_points,
    integrate,
    vector_field,
)
from games.game_core import PayoffMatrix, preset

PUBLISHED = "published"
TOOL_DEFAULT = "tool_default"


class Table(BaseModel):
    model_config = ConfigDict(frozen=True)

    columns: List[str]
    rows: List[Tuple[Any, ...]]


class FigureData(BaseModel):
    model_config = ConfigDict(frozen=True)

    figure: int
    title: str
    parameters: Dict[str, Any]
    sources: Dict[str, str]
    tables: Dict[str, Table]
    reports: Dict[str, Any] = Field(default_factory=dict)

    def metadata(self) -> Dict[str, Any]:
        header: Dict[str, Any] = {"figure": self.figure, "title": self.title}
        for key, value in self.parameters.items():
            header[key] = value
            header[f"{key}_source"] = self.sources.get(key, TOOL_DEFAULT)
        return header


FIGURE_DEFAULTS = {
    1: dict(matrix="canonical", r=5 / 12, start=0.2),
    3: dict(matrix="canonical"),
    4: dict(matrix="canonical", r=5 / 12, start=(0.9, 0.1)),
    5: dict(matrix="positive_synergy", r=0.3, start=(0.8, 0.8)),
}


def _threshold_table(m: PayoffMatrix, mode: Mode, samples: int) -> Tuple[Table, Dict[str, Any]]:
    curve = threshold_curve(m, mode, samples)
    return (
        Table(columns=["f_c", "r_prime"], rows=[tuple(p) for p in curve.points]),
        {"interval_lo": curve.lo, "interval_hi": curve.hi},
    )


def _trajectory_table(trajectory) -> Table:
    names = ["f"] if len(trajectory.states[0]) == 1 else ["f1", "f2"]
    return Table(
        columns=["t", *names],
        rows=[(t, *state) for t, state in zip(trajectory.times, trajectory.states)],
    )


def figure_one(settings: Settings = DEFAULTS, samples: int = 101) -> FigureData:
    """Single-locus threshold curve, plus convergence to the mixed equilibrium at r = 5/12."""
    defaults = FIGURE_DEFAULTS[1]
    m = preset(defaults["matrix"])
    threshold, bounds = _threshold_table(m, Mode.SINGLE, samples)
    trajectory = integrate(SingleLocusSystem(m, defaults["r"]), [defaults["start"]], settings.dt, settings.t_end, settings=settings)
    eq = equilibrium_single(m, defaults["r"])
    return FigureData(
        figure=1,
        title="Relatedness threshold at a single locus, negatively non-additive payoffs",
        parameters={"payoffs": str(m), "r": defaults["r"], "start": defaults["start"], "samples": samples, "dt": settings.dt, "t_end": settings.t_end},
        sources={"payoffs": PUBLISHED, "r": PUBLISHED},
        tables={"threshold": threshold, "trajectory": _trajectory_table(trajectory)},
        reports={"bounds": bounds, "equilibrium": eq},
    )


def figure_three(settings: Settings = DEFAULTS, samples: int = 101) -> FigureData:
    """Role-separated threshold curve as a function of the other locus' cooperation frequency."""
    m = preset(FIGURE_DEFAULTS[3]["matrix"])
    threshold, bounds = _threshold_table(m, Mode.ROLES, samples)
    return FigureData(
        figure=3,
        title="Relatedness threshold at two loci, negatively non-additive payoffs",
        parameters={"payoffs": str(m), "samples": samples},
        sources={"payoffs": PUBLISHED},
        tables={"threshold": threshold},
        reports={"bounds": bounds},
    )


def _phase_figure(number: int, title: str, settings: Settings, grid_n: int) -> FigureData:
    defaults = FIGURE_DEFAULTS[number]
    m = preset(defaults["matrix"])
    r = defaults["r"]
    system = TwoLocusSystem(m, r)
    log.info(f"Building figure {number} data (payoffs {m}, r={r:g})")
    field = vector_field(system, grid_n)
    points = fixed_points(m, r, settings=settings)
    trajectory = integrate(system, defaults["start"], settings.dt, settings.t_end, settings=settings)
    return FigureData(
        figure=number,
        title=title,
        parameters={"payoffs": str(m), "r": r, "grid_n": grid_n, "start": defaults["start"], "dt": settings.dt, "t_end": settings.t_end},
        sources={"payoffs": PUBLISHED},
        tables={
            "vector_field": Table(columns=["f1", "f2", "df1", "df2"], rows=field),
            "trajectory": _trajectory_table(trajectory),
        },
        reports={"fixed_points": points, "equilibrium": equilibrium_roles(m, r)},
    )


def figure_four(settings: Settings = DEFAULTS, grid_n: int = DEFAULTS.grid_n) -> FigureData:
    return _phase_figure(4, "Selection on the merciful/exploitative and forgiving/vengeful loci, negative synergy", settings, grid_n)


def figure_five(settings: Settings = DEFAULTS, grid_n: int = DEFAULTS.grid_n) -> FigureData:
    return _phase_figure(5, "Selection on the merciful/exploitative and forgiving/vengeful loci, positive synergy", settings, grid_n)


def build_figure(number: int, settings: Settings = DEFAULTS, *, samples: int = 101, grid_n: int | None = None) -> FigureData:
    grid_n = grid_n or settings.grid_n
    builders = {
        1: lambda: figure_one(settings, samples),
        3: lambda: figure_three(settings, samples),
        4: lambda: figure_four(settings, grid_n),
        5: lambda: figure_five(settings, grid_n),
    }
    if number not in builders:
        raise InvalidInputError(f"figure must be one of {sorted(builders)}, got {number}")
    return builders[number]()


def figure_numbers() -> Sequence[int]:
    return tuple(sorted(FIGURE_DEFAULTS))
