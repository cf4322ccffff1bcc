"""Finite chain of oscillators with power-law long-range coupling.

Equations of motion for sites ``n = -N/2 .. N/2``::

    u_n'' + J0 * sum_{m != n} u_m / |n - m|**(1 + alpha) + J1 u_n + J2 sin(u_n) = 0

The interaction sum runs over the stored sites only (open chain).  It is a
symmetric Toeplitz product, evaluated with a zero-padded FFT convolution.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy import fft as sfft

from .kernel import FractionalOrder

__all__ = [
    "BLOWUP_THRESHOLD",
    "BlowUpError",
    "Boundary",
    "ChainParams",
    "ChainState",
    "CouplingKernel",
    "ModelParams",
    "Trajectory",
    "build_kernel",
    "chain_accel",
    "chain_energy",
    "chain_rhs",
    "init_breather",
    "init_kink",
    "rk4_step",
    "simulate_chain",
]

BLOWUP_THRESHOLD = 1.0e12


class Boundary(str, enum.Enum):
    KINK_SHIFT = "kink"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class ModelParams:
    """Physical constants; mass is 1 and the on-site period is ``2 pi``."""

    alpha: FractionalOrder
    j0: float
    j1: float
    j2: float

    def __post_init__(self) -> None:
        if not isinstance(self.alpha, FractionalOrder):
            object.__setattr__(self, "alpha", FractionalOrder(self.alpha))
        for name in ("j0", "j1", "j2"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be finite and non-negative, got {value}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class ChainParams:
    """``n_oscillators = N + 1`` sites equally spaced by ``dx = 2L / (N + 1)``."""

    n_oscillators: int
    half_length: float
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self) -> None:
        n = self.n_oscillators
        if int(n) != n or n < 3 or n % 2 == 0:
            raise ValueError(f"n_oscillators must be an odd integer >= 3 (N even), got {n}")
        if not self.half_length > 0.0:
            raise ValueError("half_length must be positive")
        object.__setattr__(self, "n_oscillators", int(n))
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n_oscillators

    @property
    def indices(self) -> np.ndarray:
        half = self.n_oscillators // 2
        return np.arange(-half, half + 1)

    @property
    def x(self) -> np.ndarray:
        return self.indices * self.dx

    @property
    def center(self) -> int:
        return self.n_oscillators // 2


@dataclass
class ChainState:
    t: float
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        self.u = np.asarray(self.u, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)
        if self.u.shape != self.v.shape or self.u.ndim != 1:
            raise ValueError("u and v must be 1-d arrays of equal length")

    def copy(self) -> ChainState:
        return ChainState(self.t, self.u.copy(), self.v.copy())


class CouplingKernel:
    """Weights ``1 / d**(1 + alpha)`` for ``d = 1..N`` plus a cached FFT of the
    symmetric Toeplitz row, so that ``apply`` is an O(N log N) matvec."""

    def __init__(self, weights: np.ndarray):
        weights = np.asarray(weights, dtype=np.float64)
        if weights.ndim != 1 or weights.size < 1:
            raise ValueError("weights must be a non-empty 1-d array")
        self.weights = weights
        self.size = weights.size + 1
        n = self.size
        self._nfft = sfft.next_fast_len(2 * n - 1, real=True)
        row = np.zeros(self._nfft)
        row[1:n] = weights
        row[self._nfft - n + 1 :] = weights[::-1]
        self._row_hat = sfft.rfft(row)

    def apply(self, u: np.ndarray) -> np.ndarray:
        """``sum_{m != n} u_m / |n - m|**(1 + alpha)`` for every site ``n``."""
        if u.shape[-1] != self.size:
            raise ValueError(f"expected {self.size} sites, got {u.shape[-1]}")
        u_hat = sfft.rfft(u, n=self._nfft)
        return sfft.irfft(u_hat * self._row_hat, n=self._nfft)[: self.size]

    def apply_naive(self, u: np.ndarray) -> np.ndarray:
        n = self.size
        out = np.zeros(n)
        for i in range(n):
            acc = 0.0
            for j in range(n):
                if i != j:
                    acc += u[j] * self.weights[abs(i - j) - 1]
            out[i] = acc
        return out


def build_kernel(params: ChainParams, order: FractionalOrder | float) -> CouplingKernel:
    alpha = float(order)
    d = np.arange(1, params.n_oscillators, dtype=np.float64)
    return CouplingKernel(d ** -(1.0 + alpha))


def chain_accel(u: np.ndarray, model: ModelParams, kernel: CouplingKernel) -> np.ndarray:
    dv = -model.j1 * u - model.j2 * np.sin(u)
    if model.j0 != 0.0:
        dv -= model.j0 * kernel.apply(u)
    return dv


def chain_rhs(
    state: ChainState, model: ModelParams, kernel: CouplingKernel
) -> tuple[np.ndarray, np.ndarray]:
    """``(du/dt, dv/dt)`` for the open chain."""
    return state.v.copy(), chain_accel(state.u, model, kernel)


def chain_energy(state: ChainState, model: ModelParams, kernel: CouplingKernel) -> float:
    u, v = state.u, state.v
    h = 0.5 * np.dot(v, v) + 0.5 * model.j1 * np.dot(u, u) + model.j2 * np.sum(1.0 - np.cos(u))
    if model.j0 != 0.0:
        h += 0.5 * model.j0 * np.dot(u, kernel.apply(u))
    return float(h)


class BlowUpError(RuntimeError):
    """Numerical divergence; carries the step index and the last finite state."""

    def __init__(self, step: int, t: float, last_state=None, partial=None):
        super().__init__(f"numerical blow-up at step {step} (t={t:.6g})")
        self.step = step
        self.t = t
        self.last_state = last_state
        self.partial = partial


def check_finite(arrays, step: int, t: float, last_state=None) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)) or np.max(np.abs(a)) > BLOWUP_THRESHOLD:
            raise BlowUpError(step, t, last_state)


def rk4_generic(
    u: np.ndarray, v: np.ndarray, accel: Callable[[np.ndarray], np.ndarray], dt: float
) -> tuple[np.ndarray, np.ndarray]:
    """One classical RK4 step for ``u'' = accel(u)`` written as a first-order system."""
    a1 = accel(u)
    u2 = u + 0.5 * dt * v
    v2 = v + 0.5 * dt * a1
    a2 = accel(u2)
    u3 = u + 0.5 * dt * v2
    v3 = v + 0.5 * dt * a2
    a3 = accel(u3)
    u4 = u + dt * v3
    v4 = v + dt * a3
    a4 = accel(u4)
    u_new = u + (dt / 6.0) * (v + 2.0 * v2 + 2.0 * v3 + v4)
    v_new = v + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    return u_new, v_new


def rk4_step(
    state: ChainState, model: ModelParams, kernel: CouplingKernel, dt: float, step: int = 0
) -> ChainState:
    if dt < 0.0:
        raise ValueError("dt must be non-negative")
    if dt == 0.0:
        return state.copy()

    u, v = rk4_generic(state.u, state.v, lambda u: chain_accel(u, model, kernel), dt)
    check_finite((u, v), step, state.t + dt, state)
    return ChainState(state.t + dt, u, v)


def init_kink(params: ChainParams, model: ModelParams | None = None, kappa: float = 0.001) -> ChainState:
    """``u_n = 4 arctan(kappa exp(x_n))`` at rest."""
    if not kappa > 0.0:
        raise ValueError("kappa must be positive")
    x = params.x
    # arctan(e^y) = pi/2 - arctan(e^-y) avoids overflow for large y
    y = math.log(kappa) + x
    u = np.where(y <= 0.0, 4.0 * np.arctan(np.exp(np.minimum(y, 0.0))),
                 2.0 * math.pi - 4.0 * np.arctan(np.exp(-np.maximum(y, 0.0))))
    return ChainState(0.0, u, np.zeros_like(u))


def init_breather(
    params: ChainParams, model: ModelParams | None = None, nu: float = 1.0, kappa: float = 0.05
) -> ChainState:
    """``u_n = 4 arctan(nu / (kappa cosh(x_n)))`` at rest."""
    if not (nu > 0.0 and kappa > 0.0):
        raise ValueError("nu and kappa must be positive")
    x = np.abs(params.x)
    # nu / (kappa cosh x) = 2 nu e^-x / (kappa (1 + e^-2x)), finite for any x
    e = np.exp(-x)
    u = 4.0 * np.arctan(2.0 * nu * e / (kappa * (1.0 + e * e)))
    return ChainState(0.0, u, np.zeros_like(u))


@dataclass
class Trajectory:
    """Snapshots every ``snapshot_every`` steps plus the center trace at every step."""

    x: np.ndarray
    times: list[float] = field(default_factory=list)
    u: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)
    trace_t: list[float] = field(default_factory=list)
    trace_u: list[float] = field(default_factory=list)
    energy: list[tuple[float, float]] = field(default_factory=list)
    blowup: BlowUpError | None = None

    def add_snapshot(self, t: float, u: np.ndarray, v: np.ndarray) -> None:
        self.times.append(t)
        self.u.append(u.copy())
        self.v.append(v.copy())

    def snapshot_at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        return self.u[i]

    @property
    def trace(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.trace_t), np.asarray(self.trace_u)


def n_steps_for(t_end: float, dt: float) -> int:
    if t_end < 0.0:
        raise ValueError("t_end must be non-negative")
    if t_end == 0.0:
        return 0
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    return int(round(t_end / dt))


def simulate_chain(
    chain: ChainParams,
    model: ModelParams,
    initial: ChainState,
    t_end: float,
    dt: float = 0.05,
    snapshot_every: int = 20,
    record_energy: bool = True,
) -> Trajectory:
    """Integrate the chain with RK4 from ``initial`` up to ``t_end``.

    Time is ``step * dt`` (no accumulated round-off), which keeps output
    bit-identical between runs.  On divergence a :class:`BlowUpError` is raised
    whose ``partial`` attribute holds the trajectory up to the last finite step.
    """
    kernel = build_kernel(chain, model.alpha)
    n_steps = n_steps_for(t_end, dt)
    snapshot_every = max(1, int(snapshot_every))
    c = chain.center
    traj = Trajectory(chain.x)
    state = replace(initial.copy(), t=0.0)
    traj.add_snapshot(0.0, state.u, state.v)
    traj.trace_t.append(0.0)
    traj.trace_u.append(float(state.u[c]))
    if record_energy:
        traj.energy.append((0.0, chain_energy(state, model, kernel)))
    for step in range(1, n_steps + 1):
        try:
            state = rk4_step(state, model, kernel, dt, step=step)
        except BlowUpError as exc:
            exc.partial = traj
            traj.blowup = exc
            raise
        state.t = step * dt
        traj.trace_t.append(state.t)
        traj.trace_u.append(float(state.u[c]))
        if step % snapshot_every == 0 or step == n_steps:
            traj.add_snapshot(state.t, state.u, state.v)
            if record_energy:
                traj.energy.append((state.t, chain_energy(state, model, kernel)))
    return traj
