# Symmetric 2x2 games: payoff matrices, cost/benefit/synergy decomposition,
# the non-trivial symmetric taxonomy and donation-game realisability.
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from core.errors import InvalidInputError
from core.settings import DEFAULTS


class Action(str, Enum):
    COOPERATE = "C"
    DEFECT = "D"

    def flipped(self) -> "Action":
        return Action.DEFECT if self is Action.COOPERATE else Action.COOPERATE


C = Action.COOPERATE
D = Action.DEFECT


class PayoffMatrix(BaseModel):
    """
    Row-player payoffs of a symmetric 2x2 game, in fitness units.

    t: defect against a cooperator, r: mutual cooperation,
    p: mutual defection, s: cooperate against a defector.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    t: float
    r: float
    p: float
    s: float

    @classmethod
    def of(cls, t: float, r: float, p: float, s: float) -> "PayoffMatrix":
        return cls(t=t, r=r, p=p, s=s)

    @classmethod
    def parse(cls, text: str) -> "PayoffMatrix":
        """Parse the "T,R,P,S" quadruple form."""
        parts = [part.strip() for part in text.split(",")]
        if len(parts) != 4 or not all(parts):
            raise InvalidInputError(f"payoffs must be four comma-separated numbers T,R,P,S, got {text!r}")
        try:
            values = [float(part) for part in parts]
        except ValueError as exc:
            raise InvalidInputError(f"payoffs must be decimal numbers: {exc}") from exc
        return cls.of(*values)

    def payoff(self, own: Action, opponent: Action) -> float:
        if own is C:
            return self.r if opponent is C else self.s
        return self.t if opponent is C else self.p

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.t, self.r, self.p, self.s)

    def max_abs(self) -> float:
        return max(abs(v) for v in self.as_tuple())

    def normalized(self) -> "PayoffMatrix":
        scale = self.max_abs()
        if scale == 0:
            return self
        return PayoffMatrix.of(*(v / scale for v in self.as_tuple()))

    def relabeled(self) -> "PayoffMatrix":
        """The same game with the two actions swapped."""
        return PayoffMatrix.of(t=self.s, r=self.p, p=self.r, s=self.t)

    def __str__(self) -> str:
        return ",".join(f"{v:g}" for v in self.as_tuple())


class DonationDecomposition(BaseModel):
    model_config = ConfigDict(frozen=True)

    b: float
    c: float
    d: float


class GameClass(str, Enum):
    PRISONERS_DILEMMA = "PrisonersDilemma"
    CHICKEN = "Chicken"
    BATTLE_OF_SEXES = "BattleOfSexes"
    APOLOGY = "Apology"
    DEGENERATE = "Degenerate"
    OTHER_OR_TRIVIAL = "OtherOrTrivial"


class Additivity(str, Enum):
    ADDITIVE = "additive"
    POSITIVE = "positive"
    NEGATIVE = "negative"


class AdditivityClass(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Additivity
    tolerance: float = Field(ge=0)
    d: float


class HawkDoveParams(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    v: float = Field(gt=0, description="resource value V")
    c_cost: float = Field(ge=0, description="contest cost C")


class PDCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    is_pd: bool
    violations: List[str]


class StrongAltruismMap(BaseModel):
    model_config = ConfigDict(frozen=True)

    altruist: Action
    decomposition: DonationDecomposition
    b_exceeds_c: bool


PRESETS = {
    "apology": (1.0, -1.0, -2.0, 2.0),
    "battle_of_sexes": (2.0, -1.0, -2.0, 1.0),
    "chicken": (2.0, 1.0, -2.0, -1.0),
    "prisoners_dilemma": (5.0, 3.0, 1.0, 0.0),
    "canonical": (5.0, 3.0, 1.0, 0.0),
    "ordinal_pd": (2.0, 1.0, -1.0, -2.0),
    "additive": (6.0, 4.0, 2.0, 0.0),
    "positive_synergy": (6.0, 5.0, 2.0, 0.0),
}


def preset(name: str) -> PayoffMatrix:
    """Named matrices, with the A action of the ordinal tables mapped to Cooperate."""
    key = name.strip().lower().replace("-", "_")
    if key not in PRESETS:
        raise InvalidInputError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    return PayoffMatrix.of(*PRESETS[key])


def decompose(m: PayoffMatrix) -> DonationDecomposition:
    return DonationDecomposition(b=m.t - m.p, c=m.p - m.s, d=m.r - m.s - m.t + m.p)


def donation_matrix(dec: DonationDecomposition) -> PayoffMatrix:
    """Synergistic donation layout with the mutual non-altruist baseline at 0."""
    return PayoffMatrix.of(t=dec.b, r=dec.b - dec.c + dec.d, p=0.0, s=-dec.c)


def has_ties(m: PayoffMatrix) -> bool:
    return len(set(m.as_tuple())) < 4


def is_trivial(m: PayoffMatrix) -> bool:
    """True when one symmetric outcome is ranked best by both players."""
    t, r, p, s = m.as_tuple()
    return (r > t and r > p and r > s) or (p > t and p > r and p > s)


def classify_ordinal(m: PayoffMatrix) -> GameClass:
    t, r, p, s = m.as_tuple()
    if has_ties(m):
        return GameClass.DEGENERATE
    if t > r > p > s:
        return GameClass.PRISONERS_DILEMMA
    if t > r > s > p:
        return GameClass.CHICKEN
    if t > s > r > p:
        return GameClass.BATTLE_OF_SEXES
    if s > t > r > p:
        return GameClass.APOLOGY
    return GameClass.OTHER_OR_TRIVIAL


def check_pd(m: PayoffMatrix) -> PDCheck:
    t, r, p, s = m.as_tuple()
    violations = []
    if not t > r:
        violations.append("T>R")
    if not r > p:
        violations.append("R>P")
    if not p > s:
        violations.append("P>S")
    if not t + s < 2 * r:
        violations.append("T+S<2R")
    return PDCheck(is_pd=not violations, violations=violations)


def strong_altruism_map(m: PayoffMatrix) -> Optional[StrongAltruismMap]:
    """
    Find an action whose use as the altruist type gives a donation game with
    a genuine cost and benefit.

    An assignment qualifies when c > 0, b > 0 and two altruists together do better
    than two non-altruists (b - c + d > 0, which is b > c when d = 0).
    Cooperate is tried first, then Defect.
    """
    for altruist, oriented in ((C, m), (D, m.relabeled())):
        dec = decompose(oriented)
        if dec.c > 0 and dec.b > 0 and dec.b - dec.c + dec.d > 0:
            return StrongAltruismMap(altruist=altruist, decomposition=dec, b_exceeds_c=dec.b > dec.c)
    return None


def hawk_dove_matrix(params: HawkDoveParams) -> PayoffMatrix:
    """Averaged Hawk-Dove payoffs with Dove as the cooperative action."""
    v, cost = params.v, params.c_cost
    return PayoffMatrix.of(t=v, r=v / 2, p=(v - cost) / 2, s=0.0)


def synergy_class(m: PayoffMatrix, tol: float = DEFAULTS.additivity_tol) -> AdditivityClass:
    """
    Sign of the synergistic effect d, judged on the matrix scaled to max |payoff| = 1.
    """
    if tol < 0:
        raise InvalidInputError(f"tolerance must be >= 0, got {tol}")
    d = decompose(m).d
    scaled = decompose(m.normalized()).d
    if abs(scaled) <= tol:
        kind = Additivity.ADDITIVE
    elif scaled > 0:
        kind = Additivity.POSITIVE
    else:
        kind = Additivity.NEGATIVE
    return AdditivityClass(kind=kind, tolerance=tol, d=d)


def pure_equilibria(m: PayoffMatrix) -> List[Tuple[Action, Action]]:
    """Pure Nash equilibria of the one-shot symmetric game, row player first."""
    found = []
    for a1 in (C, D):
        for a2 in (C, D):
            row_ok = m.payoff(a1, a2) >= m.payoff(a1.flipped(), a2)
            col_ok = m.payoff(a2, a1) >= m.payoff(a2.flipped(), a1)
            if row_ok and col_ok:
                found.append((a1, a2))
    return found
