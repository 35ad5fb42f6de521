# Replicator dynamics for the single-locus game and the coupled role-separated
# two-locus game: velocity fields, RK4 integration, fixed-point classification.
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import brentq

from core import log
from core.errors import IntegrationError, InvalidInputError
from core.settings import DEFAULTS, Settings
from games.analytics import equilibrium_roles, equilibrium_single
from games.game_core import PayoffMatrix, decompose


class TwoLocusState(BaseModel):
    """Cooperation-allele frequencies at the forgiving/vengeful (f1) and merciful/exploitative (f2) loci."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    f1: float = Field(ge=0, le=1)
    f2: float = Field(ge=0, le=1)

    def as_array(self) -> np.ndarray:
        return np.array([self.f1, self.f2], dtype=float)


class FixedPointClass(str, Enum):
    STABLE_NODE = "stable node"
    UNSTABLE_NODE = "unstable node"
    SADDLE = "saddle"
    STABLE_SPIRAL = "stable spiral"
    UNSTABLE_SPIRAL = "unstable spiral"
    NON_HYPERBOLIC = "non-hyperbolic"


class FixedPointReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    location: Tuple[float, ...]
    eigenvalues: List[Tuple[float, float]]  # (real, imag)
    classification: FixedPointClass
    kind: str
    jacobian_agrees: bool


class Trajectory(BaseModel):
    model_config = ConfigDict(frozen=True)

    times: List[float]
    states: List[Tuple[float, ...]]
    system: str
    matrix: PayoffMatrix
    r: float
    dt: float
    t_end: float
    converged_at: Optional[float]

    @property
    def final(self) -> Tuple[float, ...]:
        return self.states[-1]


class BasinRun(BaseModel):
    model_config = ConfigDict(frozen=True)

    starts: List[Tuple[float, ...]]
    terminal: List[Tuple[float, ...]]
    converged_at: List[Optional[float]]


# ---------------------------------------------------------------------------
# systems


class SingleLocusSystem:
    name = "single"
    dimension = 1

    def __init__(self, matrix: PayoffMatrix, r: float):
        if not 0.0 <= r <= 1.0:
            raise InvalidInputError(f"r must lie in [0, 1], got {r}")
        self.matrix = matrix
        self.r = float(r)
        self.d = decompose(matrix).d

    def _advantage(self, f: np.ndarray) -> np.ndarray:
        m, r = self.matrix, self.r
        w_c = r * m.r + (1 - r) * (f * m.r + (1 - f) * m.s)
        w_d = r * m.p + (1 - r) * (f * m.t + (1 - f) * m.p)
        return w_c - w_d

    def velocity(self, state: np.ndarray) -> np.ndarray:
        state = np.asarray(state, dtype=float)
        f = state[..., 0]
        return (f * (1 - f) * self._advantage(f))[..., None]

    def jacobian(self, state: np.ndarray) -> np.ndarray:
        f = float(np.asarray(state, dtype=float).reshape(-1)[0])
        slope = (1 - self.r) * self.d
        return np.array([[(1 - 2 * f) * self._advantage(f) + f * (1 - f) * slope]])


class TwoLocusSystem:
    name = "two_locus"
    dimension = 2

    def __init__(self, matrix: PayoffMatrix, r: float):
        if not 0.0 <= r <= 1.0:
            raise InvalidInputError(f"r must lie in [0, 1], got {r}")
        self.matrix = matrix
        self.r = float(r)
        self.d = decompose(matrix).d

    def inclusive(self, f_other: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        m, r = self.matrix, self.r
        i_c = m.r * f_other + m.s * (1 - f_other) + r * (m.r * f_other + m.t * (1 - f_other))
        i_d = m.t * f_other + m.p * (1 - f_other) + r * (m.s * f_other + m.p * (1 - f_other))
        return i_c, i_d

    def _locus(self, f_self: np.ndarray, f_other: np.ndarray) -> np.ndarray:
        i_c, i_d = self.inclusive(f_other)
        return f_self * (i_c - (f_self * i_c + (1 - f_self) * i_d))

    def velocity(self, state: np.ndarray) -> np.ndarray:
        state = np.asarray(state, dtype=float)
        f1, f2 = state[..., 0], state[..., 1]
        return np.stack([self._locus(f1, f2), self._locus(f2, f1)], axis=-1)

    def jacobian(self, state: np.ndarray) -> np.ndarray:
        f1, f2 = (float(v) for v in np.asarray(state, dtype=float).reshape(-1)[:2])
        gain1 = np.subtract(*self.inclusive(f2))
        gain2 = np.subtract(*self.inclusive(f1))
        cross = (1 + self.r) * self.d
        return np.array([
            [(1 - 2 * f1) * gain1, f1 * (1 - f1) * cross],
            [f2 * (1 - f2) * cross, (1 - 2 * f2) * gain2],
        ])


def velocity_single(m: PayoffMatrix, r: float, f: float) -> float:
    if not 0.0 <= f <= 1.0:
        raise InvalidInputError(f"f must lie in [0, 1], got {f}")
    return float(SingleLocusSystem(m, r).velocity(np.array([f]))[0])


def velocity_two_locus(m: PayoffMatrix, r: float, s: TwoLocusState) -> Tuple[float, float]:
    df1, df2 = TwoLocusSystem(m, r).velocity(s.as_array())
    return float(df1), float(df2)


# ---------------------------------------------------------------------------
# integration


def _rk4_step(system, state: np.ndarray, dt: float) -> np.ndarray:
    k1 = system.velocity(state)
    k2 = system.velocity(state + 0.5 * dt * k1)
    k3 = system.velocity(state + 0.5 * dt * k2)
    k4 = system.velocity(state + dt * k3)
    return state + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _clamp(state: np.ndarray, t: float, clamp_tol: float) -> np.ndarray:
    if not np.all(np.isfinite(state)):
        raise IntegrationError("state is no longer finite; reduce the step size", t)
    excursion = float(max(np.max(-state), np.max(state - 1.0), 0.0))
    if excursion >= clamp_tol:
        raise IntegrationError(
            f"state left the unit square by {excursion:.3g}; reduce the step size", t
        )
    return np.clip(state, 0.0, 1.0)


def _check_start(system, s0) -> np.ndarray:
    if isinstance(s0, TwoLocusState):
        s0 = s0.as_array()
    state = np.atleast_1d(np.asarray(s0, dtype=float))
    if state.shape[-1] != system.dimension:
        raise InvalidInputError(f"start state needs {system.dimension} coordinate(s), got {state.shape[-1]}")
    if not np.all(np.isfinite(state)) or np.any(state < 0) or np.any(state > 1):
        raise InvalidInputError(f"start state must lie in the unit square, got {state.tolist()}")
    return state


def integrate(
    system,
    s0,
    dt: float = DEFAULTS.dt,
    t_end: float = DEFAULTS.t_end,
    *,
    stop_on_convergence: bool = True,
    settings: Settings = DEFAULTS,
) -> Trajectory:
    """
    Fixed-step classical RK4 from s0.

    Overshoots below the clamp tolerance are clipped back into the square; larger
    excursions abort with IntegrationError carrying the time.
    """
    if dt <= 0:
        raise InvalidInputError(f"dt must be > 0, got {dt}")
    if t_end < 0:
        raise InvalidInputError(f"t_end must be >= 0, got {t_end}")
    state = _check_start(system, s0)
    steps = int(round(t_end / dt))
    times = [0.0]
    states = [tuple(float(v) for v in state)]
    converged_at = None
    if np.linalg.norm(system.velocity(state)) < settings.convergence_tol:
        converged_at = 0.0

    for step in range(1, steps + 1):
        if converged_at is not None and stop_on_convergence:
            break
        t = step * dt
        state = _clamp(_rk4_step(system, state, dt), t, settings.clamp_tol)
        times.append(t)
        states.append(tuple(float(v) for v in state))
        if converged_at is None and np.linalg.norm(system.velocity(state)) < settings.convergence_tol:
            converged_at = t

    if converged_at is None:
        log.warn(f"{system.name} trajectory from {states[0]} did not converge by t={times[-1]:g}")
    return Trajectory(
        times=times,
        states=states,
        system=system.name,
        matrix=system.matrix,
        r=system.r,
        dt=dt,
        t_end=t_end,
        converged_at=converged_at,
    )


def integrate_many(
    system,
    starts: Sequence[Sequence[float]],
    dt: float = DEFAULTS.dt,
    t_end: float = DEFAULTS.t_end,
    *,
    settings: Settings = DEFAULTS,
) -> BasinRun:
    """RK4 on a batch of starting states at once; results keep the start order."""
    if dt <= 0:
        raise InvalidInputError(f"dt must be > 0, got {dt}")
    state = _check_start(system, np.asarray(starts, dtype=float).reshape(-1, system.dimension))
    initial = state.copy()
    converged: List[Optional[float]] = [None] * len(state)
    steps = int(round(t_end / dt))
    log.info(f"Integrating {len(state)} {system.name} trajectories to t={t_end:g}")
    for step in range(1, steps + 1):
        t = step * dt
        state = _clamp(_rk4_step(system, state, dt), t, settings.clamp_tol)
        speeds = np.linalg.norm(system.velocity(state), axis=-1)
        for i in np.flatnonzero(speeds < settings.convergence_tol):
            if converged[i] is None:
                converged[i] = t
        if all(c is not None for c in converged):
            break
    return BasinRun(
        starts=[tuple(row) for row in initial.tolist()],
        terminal=[tuple(row) for row in state.tolist()],
        converged_at=converged,
    )


def vector_field(system, grid_n: int = DEFAULTS.grid_n) -> List[Tuple[float, float, float, float]]:
    """Velocity on a uniform grid over the unit square, boundaries included (f1 outer, f2 inner)."""
    if grid_n < 2:
        raise InvalidInputError(f"grid_n must be >= 2, got {grid_n}")
    axis = np.linspace(0.0, 1.0, grid_n)
    f1, f2 = np.meshgrid(axis, axis, indexing="ij")
    points = np.stack([f1.ravel(), f2.ravel()], axis=-1)
    velocity = system.velocity(points)
    return [
        (float(a), float(b), float(da), float(db))
        for (a, b), (da, db) in zip(points, velocity)
    ]


# ---------------------------------------------------------------------------
# fixed points


def classify_eigenvalues(eigenvalues: Sequence[complex], tol: float = 1e-9) -> FixedPointClass:
    eigs = [complex(e) for e in eigenvalues]
    if any(abs(e.real) <= tol for e in eigs):
        return FixedPointClass.NON_HYPERBOLIC
    if any(abs(e.imag) > tol for e in eigs):
        return FixedPointClass.STABLE_SPIRAL if eigs[0].real < 0 else FixedPointClass.UNSTABLE_SPIRAL
    if all(e.real < 0 for e in eigs):
        return FixedPointClass.STABLE_NODE
    if all(e.real > 0 for e in eigs):
        return FixedPointClass.UNSTABLE_NODE
    return FixedPointClass.SADDLE


def finite_difference_jacobian(system, state: Sequence[float], h: float = DEFAULTS.fd_step) -> np.ndarray:
    """Central differences of the velocity field; the field is polynomial, so stepping outside the square is harmless."""
    x = np.asarray(state, dtype=float)
    jac = np.empty((system.dimension, system.dimension))
    for j in range(system.dimension):
        step = np.zeros_like(x)
        step[j] = h
        jac[:, j] = (system.velocity(x + step) - system.velocity(x - step)) / (2 * h)
    return jac


def _report(system, location: Sequence[float], kind: str, settings: Settings) -> FixedPointReport:
    numeric = finite_difference_jacobian(system, location, settings.fd_step)
    analytic = system.jacobian(location)
    scale = max(1.0, float(np.max(np.abs(analytic))))
    agrees = bool(np.max(np.abs(numeric - analytic)) <= 1e-5 * scale)
    if not agrees:
        log.warn(f"finite-difference Jacobian disagrees with the analytic one at {tuple(location)}")
    eigs = np.linalg.eigvals(numeric)
    return FixedPointReport(
        location=tuple(float(v) for v in location),
        eigenvalues=[(float(e.real), float(e.imag)) for e in eigs],
        classification=classify_eigenvalues(eigs),
        kind=kind,
        jacobian_agrees=agrees,
    )


def _edge_roots(system, fixed_axis: int, fixed_value: float, samples: int = 201) -> List[float]:
    free_axis = 1 - fixed_axis

    def component(x: float) -> float:
        point = np.empty(2)
        point[fixed_axis] = fixed_value
        point[free_axis] = x
        return float(system.velocity(point)[free_axis])

    xs = np.linspace(0.0, 1.0, samples)[1:-1]
    values = np.array([component(x) for x in xs])
    if np.max(np.abs(values)) < 1e-12:
        log.warn(f"continuum of fixed points along the edge f{fixed_axis + 1}={fixed_value:g}; not enumerated")
        return []
    roots = []
    for lo, hi, v_lo, v_hi in zip(xs[:-1], xs[1:], values[:-1], values[1:]):
        if v_lo == 0.0:
            roots.append(float(lo))
        elif v_lo * v_hi < 0:
            roots.append(float(brentq(component, lo, hi, xtol=1e-14)))
    return roots


def fixed_points(m: PayoffMatrix, r: float, *, settings: Settings = DEFAULTS) -> List[FixedPointReport]:
    """
    Corners, the symmetric interior equilibrium when it exists, and any edge
    equilibria (one locus fixed, the other mixed) of the coupled two-locus flow.
    """
    system = TwoLocusSystem(m, r)
    reports = [
        _report(system, corner, "corner", settings)
        for corner in ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0))
    ]
    for axis in (0, 1):
        for value in (0.0, 1.0):
            for root in _edge_roots(system, axis, value):
                location = [0.0, 0.0]
                location[axis] = value
                location[1 - axis] = root
                reports.append(_report(system, location, "edge", settings))
    eq = equilibrium_roles(m, r)
    if eq.f_star is not None:
        reports.append(_report(system, (eq.f_star, eq.f_star), "interior", settings))
    return reports


def fixed_points_single(m: PayoffMatrix, r: float, *, settings: Settings = DEFAULTS) -> List[FixedPointReport]:
    system = SingleLocusSystem(m, r)
    reports = [_report(system, (0.0,), "boundary", settings), _report(system, (1.0,), "boundary", settings)]
    eq = equilibrium_single(m, r)
    if eq.f_star is not None:
        reports.append(_report(system, (eq.f_star,), "interior", settings))
    return reports
