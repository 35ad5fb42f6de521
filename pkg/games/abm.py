"""
Agent-based Monte Carlo oracle.

Fitnesses are estimated by playing sampled pairings exactly as the closed forms
assume them (a same-allele partner with probability r, otherwise a population
draw; or, with separated roles, a recipient whose action depends only on the
other locus). Finite populations are evolved by fitness-proportional resampling.

Every run owns its random streams, spawned from one seed, so identical seeds
give bit-identical output.
"""
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from core import log
from core.errors import InvalidInputError
from games.analytics import KinContext, Mode, fitness_single, inclusive_fitness_roles
from games.game_core import PayoffMatrix, preset


class PairingModel(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    r: float = Field(ge=0, le=1)
    f_c: float = Field(ge=0, le=1)


class EstimateReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean: float
    std_error: float
    samples: int = Field(gt=0, serialization_alias="n")
    seed: int
    closed_form: Optional[float] = None
    z_score: Optional[float] = None
    partner_cooperation: Optional[float] = None


class PopulationConfig(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    size: int = Field(ge=2)
    initial: Tuple[float, ...] = Field(min_length=1, max_length=2)
    r: float = Field(ge=0, le=1)
    generations: int = Field(ge=0)
    seed: int
    fitness_shift: Optional[float] = None

    @field_validator("initial")
    @classmethod
    def _frequencies(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(not 0.0 <= f <= 1.0 for f in value):
            raise ValueError(f"initial frequencies must lie in [0, 1], got {value}")
        return value


class EvolutionSeries(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: Mode
    seed: int
    fitness_shift: float
    generation: List[int]
    f1: List[float]
    f2: Optional[List[float]] = None
    metadata: Dict[str, object] = Field(default_factory=dict)

    @property
    def terminal(self) -> Tuple[float, ...]:
        if self.f2 is None:
            return (self.f1[-1],)
        return (self.f1[-1], self.f2[-1])


class OracleComparison(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: Mode
    matrix: str
    r: float
    f_c: float
    estimate: float
    closed_form: float
    std_error: float
    z_score: float
    within: bool


def _streams(seed: int, count: int) -> List[np.random.Generator]:
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(count)]


def child_seed(seed: int, index: int) -> int:
    """Deterministic per-replicate seed derived from a base seed and a counter."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _report(values: np.ndarray, seed: int, closed_form: float, **extra) -> EstimateReport:
    n = values.size
    mean = float(values.mean())
    if n > 1 and np.ptp(values) > 0:
        std_error = float(values.std(ddof=1) / np.sqrt(n))
    else:
        std_error = 0.0
    z = (mean - closed_form) / std_error if std_error > 0 else 0.0
    return EstimateReport(
        mean=mean, std_error=std_error, samples=n, seed=seed,
        closed_form=closed_form, z_score=z, **extra,
    )


def _check_n(n: int) -> None:
    if n < 1:
        raise InvalidInputError(f"sample count n must be >= 1, got {n}")


def estimate_single_locus(
    m: PayoffMatrix, pm: PairingModel, n: int, seed: int
) -> Tuple[EstimateReport, EstimateReport]:
    """Sample w_c and w_d: partner shares the focal allele with probability r, else cooperates with probability f_c."""
    _check_n(n)
    w_c, w_d = fitness_single(m, KinContext(r=pm.r, f_c=pm.f_c))
    reports = []
    for focal_coop, rng, closed in zip((True, False), _streams(seed, 2), (w_c, w_d)):
        related = rng.random(n) < pm.r
        partner_coop = np.where(related, focal_coop, rng.random(n) < pm.f_c)
        if focal_coop:
            payoff = np.where(partner_coop, m.r, m.s)
        else:
            payoff = np.where(partner_coop, m.t, m.p)
        reports.append(_report(payoff, seed, closed, partner_cooperation=float(partner_coop.mean())))
    return reports[0], reports[1]


def estimate_roles(
    m: PayoffMatrix, r: float, f_c_other: float, n: int, seed: int
) -> Tuple[EstimateReport, EstimateReport]:
    """
    Sample i_c and i_d with the focal player as potential altruist.

    The recipient cooperates with probability f_c_other whatever r is; r only
    weights the recipient's payoff in the focal allele's inclusive fitness.
    """
    _check_n(n)
    pm = PairingModel(r=r, f_c=f_c_other)
    i_c, i_d = inclusive_fitness_roles(m, pm.r, pm.f_c)
    reports = []
    for focal_coop, rng, closed in zip((True, False), _streams(seed, 2), (i_c, i_d)):
        partner_coop = rng.random(n) < pm.f_c
        if focal_coop:
            value = np.where(partner_coop, m.r + pm.r * m.r, m.s + pm.r * m.t)
        else:
            value = np.where(partner_coop, m.t + pm.r * m.s, m.p + pm.r * m.p)
        reports.append(_report(value, seed, closed, partner_cooperation=float(partner_coop.mean())))
    return reports[0], reports[1]


def difference_z(c: EstimateReport, d: EstimateReport) -> Tuple[float, float, float]:
    """(estimated difference, joint standard error, z against the closed-form difference)."""
    estimate = c.mean - d.mean
    closed = c.closed_form - d.closed_form
    joint = float(np.hypot(c.std_error, d.std_error))
    z = (estimate - closed) / joint if joint > 0 else 0.0
    return estimate, joint, z


ORACLE_LEVELS = (0.0, 0.25, 0.5, 0.75, 1.0)
ORACLE_MATRICES = ("canonical", "additive", "positive_synergy")


def oracle_grid(n: int, seed: int, sigmas: float = 3.0) -> List[OracleComparison]:
    """
    Compare Monte Carlo fitness differences with the closed forms over
    r x f_c x matrix x mode. Zero-variance cells must agree exactly.
    """
    comparisons = []
    index = 0
    for mode in (Mode.SINGLE, Mode.ROLES):
        for name in ORACLE_MATRICES:
            m = preset(name)
            for r in ORACLE_LEVELS:
                for f in ORACLE_LEVELS:
                    cell_seed = child_seed(seed, index)
                    index += 1
                    if mode is Mode.SINGLE:
                        c, d = estimate_single_locus(m, PairingModel(r=r, f_c=f), n, cell_seed)
                    else:
                        c, d = estimate_roles(m, r, f, n, cell_seed)
                    estimate, joint, z = difference_z(c, d)
                    closed = c.closed_form - d.closed_form
                    if joint > 0:
                        within = abs(z) <= sigmas
                    else:
                        within = abs(estimate - closed) <= 1e-12 * max(1.0, m.max_abs())
                    comparisons.append(OracleComparison(
                        mode=mode, matrix=name, r=r, f_c=f, estimate=estimate,
                        closed_form=closed, std_error=joint, z_score=z, within=within,
                    ))
    misses = sum(not c.within for c in comparisons)
    log.info(f"Oracle grid: {len(comparisons) - misses}/{len(comparisons)} cells within {sigmas:g} standard errors")
    return comparisons


# ---------------------------------------------------------------------------
# finite populations


def default_fitness_shift(m: PayoffMatrix, r: float) -> float:
    return 1.0 - (1.0 + r) * min(0.0, min(m.as_tuple()))


def _resample(rng: np.random.Generator, carriers: np.ndarray, fitness: np.ndarray) -> np.ndarray:
    """Fitness-proportional resampling of a biallelic locus; returns the new carrier mask."""
    total = fitness.sum()
    coop_weight = fitness[carriers].sum()
    count = rng.binomial(carriers.size, coop_weight / total)
    new = np.zeros(carriers.size, dtype=bool)
    new[:count] = True
    return new


def _initial_locus(size: int, frequency: float) -> np.ndarray:
    locus = np.zeros(size, dtype=bool)
    locus[: int(round(frequency * size))] = True
    return locus


def evolve_population(cfg: PopulationConfig, m: PayoffMatrix, mode: Mode | str = Mode.SINGLE) -> EvolutionSeries:
    """
    Wright-Fisher style evolution of cooperation-allele frequencies.

    Each generation every individual's fitness is sampled from the matching
    pairing model, shifted by a run-constant offset, and the next generation's
    alleles are drawn in proportion to fitness. In roles mode the two loci are
    resampled separately, each with its own inclusive-fitness weights.
    """
    mode = Mode(mode)
    expected_loci = 1 if mode is Mode.SINGLE else 2
    if len(cfg.initial) != expected_loci:
        raise InvalidInputError(
            f"{mode.value} mode needs {expected_loci} initial frequenc{'y' if expected_loci == 1 else 'ies'}, "
            f"got {len(cfg.initial)}"
        )
    shift = default_fitness_shift(m, cfg.r) if cfg.fitness_shift is None else cfg.fitness_shift
    if mode is Mode.SINGLE:
        lowest = min(m.as_tuple())
    else:
        lowest = min(m.r + cfg.r * m.r, m.s + cfg.r * m.t, m.t + cfg.r * m.s, m.p + cfg.r * m.p)
    if lowest + shift <= 0:
        raise InvalidInputError(
            f"fitness shift {shift:g} leaves non-positive fitness; a shift above {-lowest:g} is required"
        )

    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    r, n = cfg.r, cfg.size
    loci = [_initial_locus(n, f) for f in cfg.initial]
    history = [[float(locus.mean())] for locus in loci]
    log.info(f"Evolving {n} individuals for {cfg.generations} generations ({mode.value}, seed={cfg.seed})")

    for _ in range(cfg.generations):
        if mode is Mode.SINGLE:
            (own,) = loci
            f = own.mean()
            related = rng.random(n) < r
            partner = np.where(related, own, rng.random(n) < f)
            payoff = np.where(own, np.where(partner, m.r, m.s), np.where(partner, m.t, m.p))
            loci = [_resample(rng, own, payoff + shift)]
        else:
            updated = []
            for index, own in enumerate(loci):
                other_f = loci[1 - index].mean()
                partner = rng.random(n) < other_f
                value = np.where(
                    own,
                    np.where(partner, m.r + r * m.r, m.s + r * m.t),
                    np.where(partner, m.t + r * m.s, m.p + r * m.p),
                )
                updated.append(_resample(rng, own, value + shift))
            loci = updated
        for series, locus in zip(history, loci):
            series.append(float(locus.mean()))

    return EvolutionSeries(
        mode=mode,
        seed=cfg.seed,
        fitness_shift=shift,
        generation=list(range(cfg.generations + 1)),
        f1=history[0],
        f2=history[1] if mode is Mode.ROLES else None,
        metadata={"constant_r_idealisation": True, "r": r, "size": n},
    )


def replicate_evolution(
    cfg: PopulationConfig, m: PayoffMatrix, mode: Mode | str, seeds: Sequence[int]
) -> List[EvolutionSeries]:
    return [evolve_population(cfg.model_copy(update={"seed": s}), m, mode) for s in seeds]
