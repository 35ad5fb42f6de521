# Deterministic two-dimensional strategies encoded on five loci, and exact
# iterated play between them.
import math
from typing import Dict, Iterable, List, Tuple

from pydantic import BaseModel, ConfigDict, Field

from core.errors import InvalidInputError
from games.game_core import Action, C, D, PayoffMatrix

JointAction = Tuple[Action, Action]

# Locus order of the text form, with (cooperation allele, defection allele) names.
LOCI: Dict[str, Tuple[str, str]] = {
    "initial": ("friendly", "suspicious"),
    "on_cc": ("constructive", "destructive"),
    "on_cd": ("forgiving", "vengeful"),
    "on_dc": ("merciful", "exploitative"),
    "on_dd": ("dovish", "hawkish"),
}


class Genome(BaseModel):
    """Five binary loci: the opening move and one response per previous joint action."""

    model_config = ConfigDict(frozen=True)

    initial: Action
    on_cc: Action
    on_cd: Action
    on_dc: Action
    on_dd: Action

    @classmethod
    def parse(cls, text: str) -> "Genome":
        code = text.strip().upper()
        if len(code) != 5 or set(code) - {"C", "D"}:
            raise InvalidInputError(f"genome must be 5 characters over {{C, D}}, got {text!r}")
        return cls(**{locus: Action(ch) for locus, ch in zip(LOCI, code)})

    def locus_for(self, own_last: Action, opp_last: Action) -> Action:
        return {
            (C, C): self.on_cc,
            (C, D): self.on_cd,
            (D, C): self.on_dc,
            (D, D): self.on_dd,
        }[(own_last, opp_last)]

    def alleles(self) -> List[str]:
        names = []
        for locus, (coop, defect) in LOCI.items():
            names.append(coop if getattr(self, locus) is C else defect)
        return names

    def __str__(self) -> str:
        return "".join(getattr(self, locus).value for locus in LOCI)


NAMED = {
    "AllC": "CCCCC",
    "AllD": "DDDDD",
    "TFT": "CCDCD",
    "Pavlov": "CCDDC",
}


def named_strategy(name: str) -> Genome:
    for key, code in NAMED.items():
        if key.lower() == name.strip().lower():
            return Genome.parse(code)
    raise InvalidInputError(f"unknown strategy {name!r}; expected one of {list(NAMED)}")


def resolve_genome(token: str) -> Genome:
    """Accept either a strategy name or a 5-character genome code."""
    for key in NAMED:
        if key.lower() == token.strip().lower():
            return named_strategy(key)
    return Genome.parse(token)


def next_action(g: Genome, own_last: Action, opp_last: Action) -> Action:
    return g.locus_for(own_last, opp_last)


class MatchOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    transcript: List[JointAction]
    cycle_start: int = Field(ge=0)
    cycle_length: int = Field(ge=1, le=4)
    mean_payoffs: Tuple[float, float]
    opening_payoffs: List[Tuple[float, float]]

    def cycle(self) -> List[JointAction]:
        return self.transcript[self.cycle_start:]


def play_match(g1: Genome, g2: Genome, m: PayoffMatrix) -> MatchOutcome:
    """
    Play until the joint action repeats. The joint state has four values, so a
    repeat happens within five rounds; the long-run mean is the cycle average.
    """
    state: JointAction = (g1.initial, g2.initial)
    seen: Dict[JointAction, int] = {}
    transcript: List[JointAction] = []
    while state not in seen:
        seen[state] = len(transcript)
        transcript.append(state)
        a1, a2 = state
        state = (next_action(g1, a1, a2), next_action(g2, a2, a1))
    start = seen[state]
    cycle = transcript[start:]
    mean1 = math.fsum(m.payoff(a1, a2) for a1, a2 in cycle) / len(cycle)
    mean2 = math.fsum(m.payoff(a2, a1) for a1, a2 in cycle) / len(cycle)
    return MatchOutcome(
        transcript=transcript,
        cycle_start=start,
        cycle_length=len(cycle),
        mean_payoffs=(mean1, mean2),
        opening_payoffs=[(m.payoff(a1, a2), m.payoff(a2, a1)) for a1, a2 in transcript[:start]],
    )


def round_robin(genomes: Dict[str, Genome] | Iterable[str], m: PayoffMatrix) -> Dict[str, Dict[str, float]]:
    """Long-run mean payoff of each row strategy against each column strategy."""
    if not isinstance(genomes, dict):
        genomes = {token: resolve_genome(token) for token in genomes}
    table: Dict[str, Dict[str, float]] = {}
    for row_name, row in genomes.items():
        table[row_name] = {
            col_name: play_match(row, col, m).mean_payoffs[0] for col_name, col in genomes.items()
        }
    return table
