"""Fractional sine-Gordon equation on ``(-L, L)``::

    u_tt - Jbar0 a_alpha D^alpha u + J1 u + J2 sin u = 0,   Jbar0 = J0 |dx|**min(alpha, 2)

where ``D^alpha`` is the Riesz derivative (symbol ``-|k|**alpha``).  The field
lives on the same nodes as the chain, ``x_i = i dx``; the Riesz operator is
evaluated on a grid refined by ``h_ratio`` (linear interpolation to the half
nodes, injection back).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .kernel import FractionalOrder, a_alpha, riemann_zeta
from .lattice import BlowUpError, ChainParams, ModelParams, Trajectory, check_finite, n_steps_for, rk4_generic
from .riesz import EdgePolicy, GridFunction, RieszOperator, RieszOperatorConfig, Scheme

__all__ = [
    "CFL_LIMIT",
    "CFLError",
    "FieldParams",
    "FieldState",
    "cfl_bound",
    "cfl_check",
    "default_dt",
    "fsg_rhs",
    "simulate_fsg",
    "step_central",
    "step_rk4_field",
]

CFL_LIMIT = 0.5


class CFLError(ValueError):
    """Explicit central differencing requested with ``dt / dx**alpha >= 1/2``."""


@dataclass(frozen=True)
class FieldParams:
    model: ModelParams
    n_points: int
    half_length: float
    h_ratio: int = 2
    scheme: Scheme = Scheme.GL
    edge_policy: EdgePolicy = EdgePolicy.PERIODIC
    zero_mode: bool = False
    """Add the ``k = 0`` lattice stiffness ``2 J0 zeta(1 + alpha)`` to the on-site term."""

    def __post_init__(self) -> None:
        ChainParams(self.n_points, self.half_length)  # same grid invariants as the chain
        if int(self.h_ratio) != self.h_ratio or self.h_ratio < 1:
            raise ValueError("h_ratio must be a positive integer")
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "edge_policy", EdgePolicy(self.edge_policy))
        alpha = self.model.alpha.alpha
        if not 0.0 < alpha < 2.0 or abs(alpha - 1.0) < 1e-9:
            raise ValueError(f"fractional sine-Gordon needs 0 < alpha < 2, alpha != 1; got {alpha}")

    @property
    def alpha(self) -> float:
        return self.model.alpha.alpha

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n_points

    @property
    def h(self) -> float:
        return self.dx / self.h_ratio

    @property
    def jbar0(self) -> float:
        return self.model.j0 * abs(self.dx) ** min(self.alpha, 2.0)

    @property
    def x(self) -> np.ndarray:
        half = self.n_points // 2
        return np.arange(-half, half + 1) * self.dx

    @property
    def center(self) -> int:
        return self.n_points // 2

    @cached_property
    def operator(self) -> RieszOperator:
        grid = GridFunction(-self.half_length + 0.5 * self.dx, self.dx, np.zeros(self.n_points))
        cfg = RieszOperatorConfig(self.h, self.half_length, self.scheme, self.edge_policy)
        return RieszOperator(grid, cfg, self.alpha)

    @cached_property
    def coupling(self) -> float:
        return self.jbar0 * a_alpha(self.model.alpha)

    @cached_property
    def onsite_linear(self) -> float:
        extra = 2.0 * self.model.j0 * riemann_zeta(1.0 + self.alpha) if self.zero_mode else 0.0
        return self.model.j1 + extra


@dataclass
class FieldState:
    """``v`` is carried by RK4, ``u_prev`` (the field one step back) by central differencing."""

    t: float
    u: np.ndarray
    v: np.ndarray | None = None
    u_prev: np.ndarray | None = None


def _accel(u: np.ndarray, params: FieldParams) -> np.ndarray:
    m = params.model
    out = params.coupling * params.operator(u)
    out -= params.onsite_linear * u
    if m.j2 != 0.0:
        out -= m.j2 * np.sin(u)
    return out


def fsg_rhs(state: FieldState, params: FieldParams) -> np.ndarray:
    """Acceleration ``Jbar0 a_alpha D^alpha u - J1 u - J2 sin u``."""
    return _accel(np.asarray(state.u, dtype=np.float64), params)


def cfl_bound(dx: float, order: FractionalOrder | float) -> float:
    return CFL_LIMIT * dx ** float(order)


def cfl_check(dt: float, dx: float, order: FractionalOrder | float) -> bool:
    if not (dt >= 0.0 and dx > 0.0):
        raise ValueError("dt must be non-negative and dx positive")
    return dt / dx ** float(order) < CFL_LIMIT


def default_dt(params: FieldParams, stepper: str) -> float:
    if stepper == "central":
        return min(0.01, 0.45 * params.dx**params.alpha)
    return 0.01


def step_central(state: FieldState, params: FieldParams, dt: float, step: int = 0) -> FieldState:
    """``u(t + dt) = 2 u(t) - u(t - dt) + dt**2 a(u(t))``.

    Without ``u_prev`` the step is a Taylor start from ``(u, v)``:
    ``u(dt) = u + dt v + dt**2 / 2 a(u)``.
    """
    if dt == 0.0:
        return FieldState(state.t, state.u.copy(), None if state.v is None else state.v.copy(),
                          None if state.u_prev is None else state.u_prev.copy())
    a = _accel(state.u, params)
    if state.u_prev is None:
        v = np.zeros_like(state.u) if state.v is None else state.v
        u_next = state.u + dt * v + 0.5 * dt * dt * a
    else:
        u_next = 2.0 * state.u - state.u_prev + dt * dt * a
    check_finite((u_next,), step, state.t + dt, state)
    return FieldState(state.t + dt, u_next, (u_next - state.u) / dt, state.u)


def step_rk4_field(state: FieldState, params: FieldParams, dt: float, step: int = 0) -> FieldState:
    if dt == 0.0:
        return FieldState(state.t, state.u.copy(), state.v.copy())
    v = np.zeros_like(state.u) if state.v is None else state.v
    u_new, v_new = rk4_generic(state.u, v, lambda u: _accel(u, params), dt)
    check_finite((u_new, v_new), step, state.t + dt, state)
    return FieldState(state.t + dt, u_new, v_new)


def simulate_fsg(
    params: FieldParams,
    u0: np.ndarray,
    t_end: float,
    dt: float | None = None,
    stepper: str = "rk4",
    snapshot_every: int = 20,
    v0: np.ndarray | None = None,
    force: bool = False,
) -> Trajectory:
    """Integrate from ``(u0, v0)`` (``v0`` defaults to rest) up to ``t_end``.

    ``stepper`` is ``"rk4"`` or ``"central"``; the latter refuses time steps
    that violate ``dt / dx**alpha < 1/2`` unless ``force`` is set.  Snapshot
    velocities of the central scheme are the backward difference
    ``(u(t) - u(t - dt)) / dt``.
    """
    if stepper not in ("rk4", "central"):
        raise ValueError(f"unknown time stepper {stepper!r}")
    if dt is None:
        dt = default_dt(params, stepper)
    u0 = np.asarray(u0, dtype=np.float64)
    if u0.shape != (params.n_points,):
        raise ValueError(f"initial field must have {params.n_points} samples")
    v0 = np.zeros_like(u0) if v0 is None else np.asarray(v0, dtype=np.float64)
    n_steps = n_steps_for(t_end, dt)
    if stepper == "central" and n_steps and not force and not cfl_check(dt, params.dx, params.alpha):
        raise CFLError(
            f"dt={dt} violates dt/dx^alpha < 1/2 (bound {cfl_bound(params.dx, params.alpha):.6g}); "
            "use force to run anyway"
        )
    snapshot_every = max(1, int(snapshot_every))
    c = params.center
    traj = Trajectory(params.x)
    traj.add_snapshot(0.0, u0, v0)
    traj.trace_t.append(0.0)
    traj.trace_u.append(float(u0[c]))
    state = FieldState(0.0, u0.copy(), v0.copy())
    stepfn = step_rk4_field if stepper == "rk4" else step_central
    for step in range(1, n_steps + 1):
        try:
            state = stepfn(state, params, dt, step=step)
        except BlowUpError as exc:
            exc.partial = traj
            traj.blowup = exc
            raise
        state.t = step * dt
        traj.trace_t.append(state.t)
        traj.trace_u.append(float(state.u[c]))
        if step % snapshot_every == 0 or step == n_steps:
            traj.add_snapshot(state.t, state.u, state.v)
    return traj
