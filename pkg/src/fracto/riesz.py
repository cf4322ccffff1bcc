"""Grid discretisations of the Riesz fractional derivative, ``0 < alpha < 2``.

The Riesz derivative has Fourier symbol ``-|k|**alpha``.  Three discretisations
are provided, plus a spectral reference used as a test oracle:

* ``GL`` - left/right Grunwald-Letnikov sums combined as
  ``-(D_left + D_right) / (2 cos(pi alpha / 2))``;
* ``GL_SHIFTED`` - the same with both sums shifted by one node;
* ``INTEGRAL_B`` - quadrature of the hypersingular integral
  ``C(alpha) * int_0^L [u(x+eta) - 2u(x) + u(x-eta)] / eta**(1+alpha) deta``;
* ``SPECTRAL`` - multiply Fourier modes by ``-|k|**alpha``.

Edge policies decide what the sums see beyond the grid:

* ``ZERO`` - literal finite-interval sums on ``(-L, L)``: the left sum at ``x``
  has ``floor((x + L) / h)`` terms, the right one ``floor((L - x) / h)``, and
  any sample that still falls outside is zero;
* ``PERIODIC`` - the grid is one period of a periodic medium, so the sums
  extend over the whole periodic continuation.  The infinite GL sums are
  evaluated exactly as circulants with symbol ``(1 - exp(-i theta))**alpha``;
* ``KINK`` - ``u(x + 2L) = u(x) + 2 pi``.  The linear ramp is removed before
  the periodic evaluation; the GL sums annihilate it when ``alpha > 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy import signal, special

from .kernel import FractionalOrder, gamma_real

__all__ = [
    "EdgePolicy",
    "GlWeights",
    "GridFunction",
    "RieszOperator",
    "RieszOperatorConfig",
    "Scheme",
    "gl_weights",
    "gl_weight_gamma",
    "refine",
    "riesz_apply",
    "riesz_integral_b",
    "rl_left",
    "rl_right",
    "spectral_oracle",
]

KINK_JUMP = 2.0 * math.pi
_GRID_TOL = 1.0e-9


class Scheme(str, enum.Enum):
    GL = "gl"
    GL_SHIFTED = "gl_shifted"
    INTEGRAL_B = "integral_b"
    SPECTRAL = "spectral"


class EdgePolicy(str, enum.Enum):
    ZERO = "zero"
    PERIODIC = "periodic"
    KINK = "kink"


@dataclass(frozen=True)
class GlWeights:
    alpha: float
    w: np.ndarray

    def __len__(self) -> int:
        return self.w.size


_BERNOULLI = special.bernoulli(24)
_DIRECT_GAMMA_MAX = 150


def _bernoulli_poly(n: int, x: float) -> float:
    return sum(math.comb(n, k) * _BERNOULLI[k] * x ** (n - k) for k in range(n + 1))


def _log_gamma_ratio(z: float, a: float, b: float, terms: int = 12) -> float:
    """``log(Gamma(z + a) / Gamma(z + b))`` for large ``z`` by the Stirling series
    of the ratio, which avoids the cancellation of two large log-gammas."""
    s = (a - b) * math.log(z)
    for n in range(1, terms + 1):
        s += (-1) ** (n + 1) * (_bernoulli_poly(n + 1, a) - _bernoulli_poly(n + 1, b)) / (n * (n + 1) * z**n)
    return s


def gl_weight_gamma(alpha: float, q: int) -> float:
    """Closed form ``Gamma(q - alpha) / (Gamma(1 + q) Gamma(-alpha))``."""
    if q == 0:
        return 1.0
    if abs(alpha - round(alpha)) < 1e-12:
        n = int(round(alpha))
        return (-1.0) ** q * math.comb(n, q) if n >= 0 else math.nan
    g = gamma_real(-alpha)
    if q <= _DIRECT_GAMMA_MAX:
        return math.gamma(q - alpha) / (math.gamma(q + 1.0) * g)
    return math.exp(_log_gamma_ratio(float(q), -alpha, 1.0)) / g


def gl_weights(order: FractionalOrder | float, count: int) -> GlWeights:
    """``w_0 = 1``, ``w_q = (1 - (alpha + 1) / q) w_{q-1}`` for ``q = 1..count``."""
    alpha = float(order)
    if count < 0:
        raise ValueError("count must be non-negative")
    q = np.arange(1, count + 1, dtype=np.float64)
    factors = 1.0 - (alpha + 1.0) / q
    w = np.empty(count + 1)
    w[0] = 1.0
    w[1:] = np.cumprod(factors)
    if abs(alpha - round(alpha)) > 1e-9:
        for qq in {1, min(7, count), count}:
            if qq >= 1:
                ref = gl_weight_gamma(alpha, qq)
                if abs(w[qq] - ref) > 1e-9 * abs(ref):
                    raise ArithmeticError(f"GL weight recursion drifted at q={qq}")
    return GlWeights(alpha, w)


@dataclass(frozen=True)
class GridFunction:
    """Samples ``values[i] = u(x0 + i h)``."""

    x0: float
    h: float
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError("values must be 1-d")
        if not self.h > 0.0:
            raise ValueError("grid spacing must be positive")
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.size)

    def with_values(self, values: np.ndarray) -> GridFunction:
        return GridFunction(self.x0, self.h, values)


@dataclass(frozen=True)
class RieszOperatorConfig:
    """``h`` is the operator step; it must divide the sample spacing."""

    h: float
    half_length: float
    scheme: Scheme = Scheme.GL
    edge_policy: EdgePolicy = EdgePolicy.ZERO

    def __post_init__(self) -> None:
        if not (self.h > 0.0 and self.half_length > 0.0):
            raise ValueError("h and half_length must be positive")
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "edge_policy", EdgePolicy(self.edge_policy))


def _refine_factor(u: GridFunction, cfg: RieszOperatorConfig) -> int:
    ratio = u.h / cfg.h
    r = int(round(ratio))
    if r < 1 or abs(ratio - r) > 1e-9 * max(1.0, ratio):
        raise ValueError(f"operator step h={cfg.h} does not divide grid spacing {u.h}")
    return r


def _extend(values: np.ndarray, lo: int, hi: int, policy: EdgePolicy) -> np.ndarray:
    """Values on indices ``-lo .. M-1+hi`` using the edge policy."""
    m = values.size
    idx = np.arange(-lo, m + hi)
    if policy is EdgePolicy.ZERO:
        out = np.zeros(idx.size)
        out[lo : lo + m] = values
        return out
    wrapped = values[np.mod(idx, m)]
    if policy is EdgePolicy.KINK:
        wrapped = wrapped + KINK_JUMP * np.floor_divide(idx, m)
    return wrapped


def refine(u: GridFunction, factor: int, policy: EdgePolicy = EdgePolicy.ZERO) -> GridFunction:
    """Linear interpolation onto a grid ``factor`` times finer (same ``x0``).

    For periodic and kink policies the fine grid keeps the period: it has
    ``factor * M`` points, the last ``factor - 1`` of them between the final
    sample and its right neighbour from the extension.  With the zero policy
    the fine grid stops at the last sample (``factor * (M - 1) + 1`` points).
    """
    if factor == 1:
        return u
    ext = _extend(u.values, 0, 1, policy)
    frac = np.arange(factor) / factor
    fine = (ext[:-1, None] * (1.0 - frac) + ext[1:, None] * frac).ravel()
    if policy is EdgePolicy.ZERO:
        fine = fine[: factor * (u.size - 1) + 1]
    return GridFunction(u.x0, u.h / factor, fine)


def _check_inside(grid: GridFunction, L: float) -> None:
    tol = _GRID_TOL * max(1.0, L)
    if grid.x0 < -L - tol or grid.x0 + grid.h * (grid.size - 1) > L + tol:
        raise ValueError("grid must lie inside [-L, L]")


def _check_period(grid: GridFunction, L: float) -> None:
    if abs(grid.size * grid.h - 2.0 * L) > _GRID_TOL * max(1.0, L):
        raise ValueError(
            f"periodic/kink extension needs size*h == 2L (got {grid.size * grid.h} vs {2 * L})"
        )


def _riesz_prefactor(alpha: float) -> float:
    c = math.cos(math.pi * alpha / 2.0)
    if abs(c) < 1e-12:
        raise ValueError("Riesz GL form is singular at alpha = 1 (cos(pi alpha / 2) = 0)")
    return -1.0 / (2.0 * c)


def _gl_symbols(m: int, alpha: float, shifted: bool) -> tuple[np.ndarray, np.ndarray]:
    """Circulant symbols of the infinite left/right GL sums on an m-point period."""
    theta = 2.0 * np.pi * sfft.fftfreq(m)
    z = np.exp(-1j * theta)
    left = np.zeros(m, dtype=complex)
    nz = theta != 0.0
    left[nz] = (1.0 - z[nz]) ** alpha
    right = np.conj(left)
    if shifted:
        left = left / z
        right = right * z
    return left, right


def _zero_left_sum(vals: np.ndarray, w: np.ndarray, c_lo: int, shifted: bool) -> np.ndarray:
    """``sum_{q=0}^{i + c_lo} w_q u(x_i - (q - s) h)`` with zero exterior, ``s`` = shift."""
    m = vals.size
    if not shifted:
        return signal.fftconvolve(vals, w[:m])[:m]
    ext = np.append(vals, 0.0)
    out = signal.fftconvolve(ext, w[: m + 1])[1 : m + 1]
    if c_lo == 0:
        # q = i + 1 would reach x_0 - ... beyond K_-; drop the u[0] term
        out -= w[1 : m + 1] * vals[0]
    return out


class RieszOperator:
    """Riesz derivative on a fixed grid, with tables prepared once.

    ``grid`` fixes the sample locations; ``cfg.h`` must divide its spacing.
    Calling the operator maps a value array to the derivative on the same grid.
    """

    def __init__(self, grid: GridFunction, cfg: RieszOperatorConfig, order: FractionalOrder | float):
        self.cfg = cfg
        self.alpha = float(order)
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"Riesz discretisations need 0 < alpha <= 2, got {self.alpha}")
        self.grid = grid
        self.factor = _refine_factor(grid, cfg)
        if cfg.edge_policy is EdgePolicy.ZERO:
            self.fine_size = (grid.size - 1) * self.factor + 1
        else:
            self.fine_size = grid.size * self.factor
        self.fine_x0 = grid.x0
        L = cfg.half_length
        fine = GridFunction(grid.x0, cfg.h, np.zeros(self.fine_size))
        policy = cfg.edge_policy
        if policy is EdgePolicy.ZERO:
            _check_inside(grid, L)
        else:
            _check_period(fine, L)
        if policy is EdgePolicy.KINK and cfg.scheme in (Scheme.GL, Scheme.GL_SHIFTED) and self.alpha <= 1.0:
            raise ValueError("kink extension with GL sums needs alpha > 1 (ramp sum diverges)")
        self._ramp = None
        if policy is EdgePolicy.KINK:
            self._ramp = (KINK_JUMP / (2.0 * L)) * fine.x
        self._setup()

    # -- setup -----------------------------------------------------------
    def _setup(self) -> None:
        cfg, a, m = self.cfg, self.alpha, self.fine_size
        h = cfg.h
        scheme, policy = cfg.scheme, cfg.edge_policy
        if scheme is Scheme.SPECTRAL:
            k = 2.0 * np.pi * sfft.rfftfreq(m, d=h)
            self._symbol = -(k**a)
        elif scheme in (Scheme.GL, Scheme.GL_SHIFTED):
            pref = _riesz_prefactor(a) * h**-a
            shifted = scheme is Scheme.GL_SHIFTED
            if policy is EdgePolicy.ZERO:
                self._weights = gl_weights(a, m + 1).w
                L = cfg.half_length
                x_last = self.fine_x0 + h * (m - 1)
                self._c_lo = int(math.floor((self.fine_x0 + L) / h + 1e-9))
                self._c_hi = int(math.floor((L - x_last) / h + 1e-9))
                self._pref = pref
            else:
                left, right = _gl_symbols(m, a, shifted)
                self._symbol = pref * (left + right).real[: m // 2 + 1]
        elif scheme is Scheme.INTEGRAL_B:
            self._setup_integral_b()
        else:  # pragma: no cover
            raise ValueError(scheme)

    def _setup_integral_b(self) -> None:
        a, h, L = self.alpha, self.cfg.h, self.cfg.half_length
        if not 0.0 < a < 2.0:
            raise ValueError("integral representation needs 0 < alpha < 2")
        panel = 2.0 * h
        n_panels = int(math.floor(L / panel + 1e-9))
        if n_panels < 1:
            raise ValueError("half_length must cover at least one quadrature panel (2h)")
        self._pref = gamma_real(1.0 + a) * math.sin(math.pi * a / 2.0) / math.pi
        # first panel (0, 2h): bracket ~ eta^2 u'' integrated exactly
        self._first = panel ** (2.0 - a) / (2.0 - a) / h**2
        j = np.arange(2, n_panels + 1)
        offsets = 2 * j - 1  # midpoints eta_j = (2j - 1) h sit on grid nodes
        coef = panel / (offsets * h) ** (1.0 + a)
        pad = int(offsets[-1]) if offsets.size else 1
        kern = np.zeros(2 * pad + 1)
        kern[pad + offsets] = coef
        kern[pad - offsets] = coef
        self._ib_pad = max(pad, 1)
        self._ib_kernel = kern
        self._ib_sum = 2.0 * coef.sum()

    # -- application -----------------------------------------------------
    def _to_fine(self, values: np.ndarray) -> np.ndarray:
        if self.factor == 1:
            return values
        g = GridFunction(self.grid.x0, self.grid.h, values)
        return refine(g, self.factor, self.cfg.edge_policy).values

    def __call__(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        if values.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} samples, got {values.size}")
        fine = self._to_fine(values)
        out = self.apply_fine(fine)
        return out[:: self.factor]

    def apply_fine(self, fine: np.ndarray) -> np.ndarray:
        scheme, policy = self.cfg.scheme, self.cfg.edge_policy
        if scheme is Scheme.INTEGRAL_B:
            return self._integral_b(fine)
        if policy is EdgePolicy.KINK:
            fine = fine - self._ramp
        if scheme is Scheme.GL or scheme is Scheme.GL_SHIFTED:
            if policy is EdgePolicy.ZERO:
                shifted = scheme is Scheme.GL_SHIFTED
                left = _zero_left_sum(fine, self._weights, self._c_lo, shifted)
                right = _zero_left_sum(fine[::-1], self._weights, self._c_hi, shifted)[::-1]
                return self._pref * (left + right)
        return sfft.irfft(sfft.rfft(fine) * self._symbol, n=fine.size)

    def _integral_b(self, fine: np.ndarray) -> np.ndarray:
        pad = self._ib_pad
        ext = _extend(fine, pad, pad, self.cfg.edge_policy)
        far = signal.fftconvolve(ext, self._ib_kernel, mode="valid")
        d2 = ext[pad + 1 : pad + 1 + fine.size] - 2.0 * fine + ext[pad - 1 : pad - 1 + fine.size]
        return self._pref * (far - self._ib_sum * fine + self._first * d2)


def _side_sum(u: GridFunction, cfg: RieszOperatorConfig, weights: GlWeights, left: bool) -> GridFunction:
    a = weights.alpha
    op_cfg = RieszOperatorConfig(cfg.h, cfg.half_length, Scheme.GL, cfg.edge_policy)
    r = _refine_factor(u, op_cfg)
    fine = refine(u, r, cfg.edge_policy)
    shifted = cfg.scheme is Scheme.GL_SHIFTED
    vals = fine.values
    m = vals.size
    L = cfg.half_length
    h = cfg.h
    if cfg.edge_policy is EdgePolicy.ZERO:
        _check_inside(fine, L)
        if weights.w.size < m + 1:
            raise ValueError(f"need at least {m + 1} GL weights, got {weights.w.size}")
        if left:
            c = int(math.floor((fine.x0 + L) / h + 1e-9))
            out = _zero_left_sum(vals, weights.w, c, shifted)
        else:
            c = int(math.floor((L - fine.x[-1]) / h + 1e-9))
            out = _zero_left_sum(vals[::-1], weights.w, c, shifted)[::-1]
    else:
        _check_period(fine, L)
        if cfg.edge_policy is EdgePolicy.KINK:
            if a <= 1.0:
                raise ValueError("kink extension with GL sums needs alpha > 1")
            vals = vals - (KINK_JUMP / (2.0 * L)) * fine.x
        lsym, rsym = _gl_symbols(m, a, shifted)
        sym = lsym if left else rsym
        out = sfft.ifft(sfft.fft(vals) * sym).real
    return GridFunction(u.x0, u.h, (out * h**-a)[::r])


def rl_left(u: GridFunction, cfg: RieszOperatorConfig, weights: GlWeights) -> GridFunction:
    """Left Riemann-Liouville derivative, GL form ``h**-alpha sum_q w_q u(x - q h)``.

    With ``cfg.scheme == GL_SHIFTED`` the samples are ``u(x - (q - 1) h)``.
    """
    return _side_sum(u, cfg, weights, left=True)


def rl_right(u: GridFunction, cfg: RieszOperatorConfig, weights: GlWeights) -> GridFunction:
    """Right Riemann-Liouville derivative, mirror image of :func:`rl_left`."""
    return _side_sum(u, cfg, weights, left=False)


def riesz_apply(u: GridFunction, cfg: RieszOperatorConfig, order: FractionalOrder | float) -> GridFunction:
    alpha = float(order)
    if cfg.scheme in (Scheme.GL, Scheme.GL_SHIFTED):
        _riesz_prefactor(alpha)
    op = RieszOperator(u, cfg, alpha)
    return u.with_values(op(u.values))


def riesz_integral_b(u: GridFunction, cfg: RieszOperatorConfig, order: FractionalOrder | float) -> GridFunction:
    """Truncated singular-integral form on ``eta in (0, L]``.

    Composite midpoint rule with panels of width ``2h`` whose midpoints
    ``(2j - 1) h`` coincide with grid nodes.  On the first panel the bracket is
    replaced by ``eta**2 u''`` (second difference) and integrated exactly.
    """
    alpha = float(order)
    if not 0.0 < alpha < 2.0 or abs(alpha - 1.0) < 1e-9:
        raise ValueError("integral representation needs 0 < alpha < 2, alpha != 1")
    cfg_b = RieszOperatorConfig(cfg.h, cfg.half_length, Scheme.INTEGRAL_B, cfg.edge_policy)
    op = RieszOperator(u, cfg_b, alpha)
    return u.with_values(op(u.values))


def spectral_oracle(u: GridFunction, order: FractionalOrder | float) -> GridFunction:
    """Multiply the discrete Fourier modes of one period by ``-|k|**alpha``."""
    alpha = float(order)
    k = 2.0 * np.pi * sfft.rfftfreq(u.size, d=u.h)
    out = sfft.irfft(sfft.rfft(u.values) * -(k**alpha), n=u.size)
    return u.with_values(out)
