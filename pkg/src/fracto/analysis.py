"""Scenario presets, lattice-vs-continuum comparison and tail diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import fft as sfft
from scipy import special, stats

from .fsg import FieldParams, simulate_fsg
from .kernel import FractionalOrder
from .lattice import (
    BlowUpError,
    Boundary,
    ChainParams,
    ChainState,
    ModelParams,
    Trajectory,
    init_breather,
    init_kink,
    rk4_generic,
    simulate_chain,
)
from .riesz import EdgePolicy, GridFunction, Scheme

__all__ = [
    "ComparisonReport",
    "DualityResult",
    "NoCrossoverError",
    "Scenario",
    "breather_preset",
    "crossover_locate",
    "dispersion_probe",
    "kink_preset",
    "run_duality",
    "tail_slope",
]


@dataclass(frozen=True)
class Scenario:
    name: str
    model: ModelParams
    chain: ChainParams
    kappa: float
    nu: float | None
    t_end: float
    alphas: tuple[float, ...]

    def with_alpha(self, alpha: float) -> Scenario:
        return replace(self, model=replace(self.model, alpha=FractionalOrder(alpha)))

    def resized(self, n_sites: int, half_length: float) -> Scenario:
        return replace(self, chain=ChainParams(n_sites, half_length, self.chain.boundary))

    def initial_state(self) -> ChainState:
        if self.name == "kink":
            return init_kink(self.chain, self.model, self.kappa)
        return init_breather(self.chain, self.model, self.nu, self.kappa)

    @property
    def edge_policy(self) -> EdgePolicy:
        return EdgePolicy.KINK if self.chain.boundary is Boundary.KINK_SHIFT else EdgePolicy.PERIODIC


def kink_preset(alpha: float = 1.21) -> Scenario:
    return Scenario(
        name="kink",
        model=ModelParams(FractionalOrder(alpha), j0=0.01, j1=0.2, j2=0.01),
        chain=ChainParams(1001, 500.0, Boundary.KINK_SHIFT),
        kappa=0.001,
        nu=None,
        t_end=100.0,
        alphas=(1.21,),
    )


def breather_preset(alpha: float = 1.21) -> Scenario:
    return Scenario(
        name="breather",
        model=ModelParams(FractionalOrder(alpha), j0=0.01, j1=0.1, j2=0.1),
        chain=ChainParams(1001, 500.0, Boundary.PERIODIC),
        kappa=0.05,
        nu=1.0,
        t_end=100.0,
        alphas=(1.21, 1.51, 1.91),
    )


# -- tail diagnostics -------------------------------------------------------


def _as_xy(snapshot) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(snapshot, GridFunction):
        return snapshot.x, snapshot.values
    x, u = snapshot
    return np.asarray(x, dtype=np.float64), np.asarray(u, dtype=np.float64)


def tail_slope(snapshot, window: tuple[float, float]) -> tuple[float, float]:
    """Least-squares slope of ``log|u|`` against ``log x`` on ``x1 <= x <= x2``.

    Returns ``(slope, r_squared)``.
    """
    x, u = _as_xy(snapshot)
    x1, x2 = window
    if not 0.0 < x1 < x2:
        raise ValueError("window needs 0 < x1 < x2")
    mask = (x >= x1) & (x <= x2)
    if mask.sum() < 10:
        raise ValueError(f"degenerate window [{x1}, {x2}]: {mask.sum()} samples, need 10")
    au = np.abs(u[mask])
    if np.any(au <= 1e-14):
        raise ValueError("|u| must exceed 1e-14 on the fit window")
    fit = stats.linregress(np.log(x[mask]), np.log(au))
    return float(fit.slope), float(fit.rvalue**2)


class NoCrossoverError(ValueError):
    """A two-regime fit does not beat the best single-regime fit."""


def _sse_line(x: np.ndarray, y: np.ndarray) -> float:
    if x.size < 3:
        return 0.0
    xm = x - x.mean()
    ym = y - y.mean()
    sxx = xm @ xm
    if sxx == 0.0:
        return float(ym @ ym)
    return float(ym @ ym - (xm @ ym) ** 2 / sxx)


def _prefix_sse(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """SSE of the straight-line fit to ``(x[:j], y[:j])`` for every ``j``."""
    n = np.arange(1, x.size + 1, dtype=np.float64)
    sx, sy = np.cumsum(x), np.cumsum(y)
    sxx, syy, sxy = np.cumsum(x * x), np.cumsum(y * y), np.cumsum(x * y)
    vxx = sxx - sx * sx / n
    vyy = syy - sy * sy / n
    vxy = sxy - sx * sy / n
    with np.errstate(divide="ignore", invalid="ignore"):
        sse = np.where(vxx > 0.0, vyy - vxy * vxy / vxx, vyy)
    return np.maximum(sse, 0.0)


def crossover_locate(
    snapshot,
    x_min: float | None = None,
    x_max: float | None = None,
    core_fraction: float = 0.1,
    min_points: int = 5,
    min_gain: float = 0.05,
) -> float:
    """Position where exponential decay hands over to a power law.

    Over ``x_min <= x <= x_max`` (positive side) the profile is split at each
    sample ``x*``: ``log|u|`` is fitted linearly in ``x`` to the left and
    linearly in ``log x`` to the right.  The split with the smallest total
    squared residual wins.  ``x_min`` defaults to the first sample beyond the
    core, i.e. past the last site where ``|u| >= core_fraction * max|u|``.
    """
    x, u = _as_xy(snapshot)
    au = np.abs(u)
    pos = x > 0.0
    if x_min is None:
        core = np.nonzero(pos & (au >= core_fraction * au.max()))[0]
        start = core.max() + 1 if core.size else int(np.argmax(pos))
        x_min = float(x[min(start, x.size - 1)])
    if x_max is None:
        x_max = float(x.max())
    mask = pos & (x >= x_min) & (x <= x_max) & (au > 0.0)
    X = x[mask]
    if X.size < 2 * min_points + 1:
        raise ValueError(f"need at least {2 * min_points + 1} samples, got {X.size}")
    Y = np.log(au[mask])
    LX = np.log(X)
    left = _prefix_sse(X, Y)  # left[j-1] = SSE on first j samples
    right = _prefix_sse(LX[::-1], Y[::-1])[::-1]  # right[j] = SSE on samples j..end
    j = np.arange(min_points, X.size - min_points + 1)
    total = left[j - 1] + right[j]
    best = int(np.argmin(total))
    single = min(_sse_line(X, Y), _sse_line(LX, Y))
    if total[best] > (1.0 - min_gain) * single:
        raise NoCrossoverError(
            f"two-regime fit (SSE {total[best]:.4g}) does not improve on a single regime (SSE {single:.4g})"
        )
    return float(X[j[best]])


# -- lattice vs field comparison --------------------------------------------


@dataclass
class ComparisonReport:
    alpha: float
    center_trace_rmse: float
    center_trace_linf: float
    trace_amplitude: float
    rmse_relative: float
    field_linf_over_time: list[tuple[float, float]] = field(default_factory=list)
    tail_slope: float | None = None
    tail_r2: float | None = None
    crossover_x: float | None = None
    failed: bool = False
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "center_trace_rmse": self.center_trace_rmse,
            "center_trace_linf": self.center_trace_linf,
            "trace_amplitude": self.trace_amplitude,
            "rmse_relative": self.rmse_relative,
            "field_linf_over_time": [list(p) for p in self.field_linf_over_time],
            "tail_slope": self.tail_slope,
            "tail_r2": self.tail_r2,
            "crossover_x": self.crossover_x,
            "failed": self.failed,
            "reason": self.reason,
        }


@dataclass
class DualityResult:
    report: ComparisonReport
    lattice: Trajectory | None
    field: Trajectory | None


def _steps(every: float, dt: float) -> int:
    return max(1, int(round(every / dt)))


def compare_trajectories(lat: Trajectory, fld: Trajectory, alpha: float) -> ComparisonReport:
    """Center-trace and per-snapshot field discrepancies (field trace is
    interpolated onto the lattice trace times)."""
    tl, ul = lat.trace
    tf, uf = fld.trace
    uf_on_l = np.interp(tl, tf, uf) if tl.size > 1 else uf[: tl.size]
    diff = ul - uf_on_l
    rmse = float(np.sqrt(np.mean(diff * diff)))
    linf = float(np.max(np.abs(diff)))
    amp = 0.5 * float(ul.max() - ul.min())
    rel = rmse / amp if amp > 0.0 else (0.0 if rmse == 0.0 else math.inf)
    f_times = {round(t, 9): i for i, t in enumerate(fld.times)}
    field_linf = []
    for i, t in enumerate(lat.times):
        j = f_times.get(round(t, 9))
        if j is not None:
            field_linf.append((t, float(np.max(np.abs(lat.u[i] - fld.u[j])))))
    return ComparisonReport(alpha, rmse, linf, amp, rel, field_linf)


def run_duality(
    scenario: Scenario,
    alpha: float | None = None,
    *,
    t_end: float | None = None,
    lattice_dt: float = 0.05,
    fsg_dt: float | None = None,
    stepper: str = "rk4",
    scheme: Scheme | str = Scheme.GL,
    h_ratio: int = 2,
    edge_policy: EdgePolicy | str | None = None,
    zero_mode: bool = False,
    snapshot_every: float = 5.0,
    tail_window: tuple[float, float] = (0.2, 0.8),
    core_fraction: float = 0.1,
    force: bool = False,
) -> DualityResult:
    """Run chain and field from the same samples and compare them.

    A blow-up in either arm does not raise; the report comes back with
    ``failed=True`` and the reason.
    """
    if alpha is not None:
        scenario = scenario.with_alpha(alpha)
    alpha = scenario.model.alpha.alpha
    t_end = scenario.t_end if t_end is None else t_end
    chain = scenario.chain
    init = scenario.initial_state()
    params = FieldParams(
        scenario.model,
        chain.n_oscillators,
        chain.half_length,
        h_ratio=h_ratio,
        scheme=Scheme(scheme),
        edge_policy=scenario.edge_policy if edge_policy is None else EdgePolicy(edge_policy),
        zero_mode=zero_mode,
    )
    if fsg_dt is None:
        from .fsg import default_dt

        fsg_dt = default_dt(params, stepper)

    lat = fld = None
    failure = ""
    try:
        lat = simulate_chain(chain, scenario.model, init, t_end, lattice_dt, _steps(snapshot_every, lattice_dt))
    except BlowUpError as exc:
        lat = exc.partial
        failure = f"lattice: {exc}"
    try:
        fld = simulate_fsg(
            params, init.u, t_end, fsg_dt, stepper, _steps(snapshot_every, fsg_dt), force=force
        )
    except BlowUpError as exc:
        fld = exc.partial
        failure = (failure + "; " if failure else "") + f"fsg: {exc}"

    if failure:
        report = ComparisonReport(alpha, math.inf, math.inf, math.nan, math.inf, failed=True, reason=failure)
        return DualityResult(report, lat, fld)

    report = compare_trajectories(lat, fld, alpha)
    L = chain.half_length
    snap = (lat.x, lat.u[-1])
    try:
        report.tail_slope, report.tail_r2 = tail_slope(snap, (tail_window[0] * L, tail_window[1] * L))
    except ValueError:
        pass
    try:
        report.crossover_x = crossover_locate(snap, x_max=tail_window[1] * L, core_fraction=core_fraction)
    except ValueError:
        pass
    return DualityResult(report, lat, fld)


# -- linear dispersion ------------------------------------------------------


def periodic_coupling_row(n_sites: int, alpha: float) -> np.ndarray:
    """Circulant row ``c_d = sum_p |d + p M|**-(1 + alpha)`` over all periodic images."""
    s = 1.0 + alpha
    m = float(n_sites)
    d = np.arange(1, n_sites, dtype=np.float64)
    row = np.empty(n_sites)
    row[0] = 2.0 * special.zeta(s, 1.0) * m**-s
    row[1:] = m**-s * (special.zeta(s, d / m) + special.zeta(s, 1.0 - d / m))
    return row


def dispersion_probe(
    model: ModelParams,
    chain: ChainParams,
    k: float,
    eps: float = 1.0e-6,
    dt: float = 0.02,
    half_periods: int = 24,
) -> float:
    """Oscillation frequency of a small cosine mode on the linearised periodic chain.

    The chain is closed into a ring whose coupling includes every periodic
    image, so ``cos(k x_n)`` is an exact normal mode when ``k`` fits the ring.
    The mode amplitude is integrated with RK4 and the frequency is read from
    the spacing of its zero crossings.
    """
    m = chain.n_oscillators
    dx = chain.dx
    cycles = k * m * dx / (2.0 * math.pi)
    if abs(cycles - round(cycles)) > 1e-9 * max(1.0, abs(cycles)):
        raise ValueError(f"k={k} is not commensurate with the ring (2 pi j / {m * dx})")
    x = chain.x
    mode = np.cos(k * x)
    row = periodic_coupling_row(m, model.alpha.alpha)
    row_hat = sfft.rfft(row)
    onsite = model.j1 + model.j2  # sin u ~ u

    def accel(u):
        out = -onsite * u
        if model.j0 != 0.0:
            out -= model.j0 * sfft.irfft(sfft.rfft(u) * row_hat, n=m)
        return out

    norm = 1.0 / float(mode @ mode)
    u = eps * mode
    v = np.zeros(m)
    t = 0.0
    amp_prev = 1.0
    crossings: list[float] = []
    max_steps = 10_000_000
    for _ in range(max_steps):
        u, v = rk4_generic(u, v, accel, dt)
        t_new = t + dt
        amp = float(mode @ u) * norm / eps
        if amp_prev > 0.0 >= amp or amp_prev < 0.0 <= amp:
            crossings.append(t + dt * amp_prev / (amp_prev - amp))
            if len(crossings) > half_periods:
                break
        amp_prev, t = amp, t_new
    else:  # pragma: no cover
        raise RuntimeError("mode did not oscillate")
    span = crossings[-1] - crossings[0]
    return math.pi * (len(crossings) - 1) / span
