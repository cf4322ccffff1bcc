"""Special functions and the analytic spectra linking the chain to the continuum.

The lattice coupling ``J0 * sum_{m != n} u_m / |n - m|**(1 + alpha)`` has the
Fourier symbol ``J(k) = 2 * sum_n cos(k n dx) / n**(1 + alpha)``.  Its small-k
expansion produces the fractional ``|k|**alpha`` term that turns into the Riesz
derivative of the continuum equation.  Everything here is a pure function.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special

__all__ = [
    "AccuracyWarning",
    "DirectSum",
    "FractionalOrder",
    "PoleError",
    "a_alpha",
    "continuum_symbol",
    "coupling_spectrum_direct",
    "coupling_spectrum_series",
    "crossover_k0",
    "gamma_real",
    "riemann_zeta",
    "transform_symbol",
]

INTEGER_TOL = 1.0e-9
GAMMA_POLE_TOL = 1.0e-12
ZETA_POLE_TOL = 1.0e-9

DEFAULT_N_MAX = 1_000_000
DEFAULT_N_TERMS = 40
SERIES_RTOL = 1.0e-14

_CHUNK = 1 << 18


class PoleError(ValueError):
    """Raised when a special function is evaluated at (or next to) a pole."""


class AccuracyWarning(UserWarning):
    """A truncated series was cut off before its terms started to decrease."""


@dataclass(frozen=True)
class FractionalOrder:
    """Interaction exponent ``alpha`` in ``(0, 4)``.

    Integer values are accepted so that the direct lattice sums can still be
    evaluated; operations that need a genuinely fractional order call
    :meth:`require_fractional`.
    """

    alpha: float

    def __post_init__(self) -> None:
        a = float(self.alpha)
        if not math.isfinite(a) or not 0.0 < a < 4.0:
            raise ValueError(f"fractional order must lie in (0, 4), got alpha={self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    @property
    def is_integer(self) -> bool:
        return abs(self.alpha - round(self.alpha)) <= INTEGER_TOL

    def require_fractional(self) -> float:
        if self.is_integer:
            raise ValueError(
                f"alpha={self.alpha} is an integer; this operation needs a "
                "non-integer fractional order (alpha not in {1, 2, 3})"
            )
        return self.alpha

    def __float__(self) -> float:
        return self.alpha


def _order(order: FractionalOrder | float) -> FractionalOrder:
    return order if isinstance(order, FractionalOrder) else FractionalOrder(order)


def gamma_real(x: float) -> float:
    """Gamma function on the real line, rejecting the poles at 0, -1, -2, ..."""
    x = float(x)
    if x <= 0.0 and abs(x - round(x)) < GAMMA_POLE_TOL:
        raise PoleError(f"Gamma has a pole at x={x}")
    return math.gamma(x)


def riemann_zeta(s: float) -> float:
    """Riemann zeta for real ``s != 1``, negative arguments included."""
    s = float(s)
    if abs(s - 1.0) <= ZETA_POLE_TOL:
        raise PoleError(f"zeta has a pole at s={s}")
    if s >= 0.0:
        return float(special.zeta(s))
    # functional equation keeps the evaluation on the convergent side
    if abs(s / 2.0 - round(s / 2.0)) < 1e-15:
        return 0.0
    return (
        2.0**s
        * math.pi ** (s - 1.0)
        * math.sin(math.pi * s / 2.0)
        * math.gamma(1.0 - s)
        * float(special.zeta(1.0 - s))
    )


def a_alpha(order: FractionalOrder | float) -> float:
    """Coefficient ``2 Gamma(-alpha) cos(pi alpha / 2)`` of the ``|k|**alpha`` term."""
    alpha = _order(order).require_fractional()
    return 2.0 * gamma_real(-alpha) * math.cos(math.pi * alpha / 2.0)


class DirectSum(NamedTuple):
    value: float
    tail_bound: float


def coupling_spectrum_direct(
    order: FractionalOrder | float,
    k: float,
    dx: float = 1.0,
    n_max: int = DEFAULT_N_MAX,
    tail_correction: bool = True,
) -> DirectSum:
    """Truncated cosine sum ``2 * sum_{n <= n_max} cos(k n dx) / n**(1 + alpha)``.

    The returned ``tail_bound`` is the worst-case size of the dropped terms,
    ``2 * n_max**(-alpha) / alpha``.  When ``k dx`` is a multiple of ``2 pi``
    the tail is not oscillating and, with ``tail_correction``, it is added back
    through the Euler-Maclaurin formula; the bound then refers to the
    uncorrected sum.
    """
    alpha = _order(order).alpha
    if n_max < 1000:
        raise ValueError(f"n_max must be at least 1000, got {n_max}")
    s = 1.0 + alpha
    theta = float(k) * float(dx)
    total = 0.0
    for start in range(1, n_max + 1, _CHUNK):
        n = np.arange(start, min(start + _CHUNK, n_max + 1), dtype=np.float64)
        total += float(np.sum(np.cos(theta * n) * n**-s))
    value = 2.0 * total
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if tail_correction and abs(wrapped) < 1e-12:
        value += 2.0 * _zeta_tail(s, n_max)
    return DirectSum(value, 2.0 * n_max ** (-alpha) / alpha)


def _zeta_tail(s: float, n: int) -> float:
    """Euler-Maclaurin estimate of ``sum_{m > n} m**(-s)``."""
    n = float(n)
    return (
        n ** (1.0 - s) / (s - 1.0)
        - 0.5 * n**-s
        + s * n ** (-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n ** (-s - 3.0) / 720.0
    )


def coupling_spectrum_series(
    order: FractionalOrder | float,
    k: float,
    dx: float = 1.0,
    n_terms: int = DEFAULT_N_TERMS,
) -> float:
    """Polylogarithm expansion of the lattice symbol.

    ``a_alpha |dx k|**alpha + 2 sum_n zeta(1 + alpha - 2n) / (2n)! (dx)**(2n) (-k**2)**n``,
    valid for ``|k dx| < 2 pi``.  Summation stops after ``n_terms`` terms or once
    a term drops below ``1e-14`` of the running sum.
    """
    order = _order(order)
    alpha = order.require_fractional()
    z = abs(float(k) * float(dx))
    if z >= 2.0 * math.pi:
        raise ValueError(f"series needs |k dx| < 2 pi, got {z}")
    if n_terms < 1:
        raise ValueError("n_terms must be positive")

    total = 2.0 * riemann_zeta(1.0 + alpha)
    if z == 0.0:
        return total
    total += a_alpha(order) * z**alpha
    z2 = z * z
    prev = math.inf
    converged = False
    for n in range(1, n_terms):
        term = 2.0 * riemann_zeta(1.0 + alpha - 2 * n) * (-z2) ** n / math.factorial(2 * n)
        total += term
        mag = abs(term)
        if mag <= SERIES_RTOL * abs(total):
            converged = True
            break
        if mag > prev and n > 2:
            break
        prev = mag
    if not converged:
        warnings.warn(
            f"polylog series for alpha={alpha}, k dx={z} not converged after "
            f"{n_terms} terms (last term {term:.3e})",
            AccuracyWarning,
            stacklevel=2,
        )
    return total


def _branch(order: FractionalOrder | float) -> tuple[float, int]:
    alpha = _order(order).alpha
    if 0.0 < alpha < 2.0 and abs(alpha - 1.0) > INTEGER_TOL:
        return alpha, 0
    if 2.0 < alpha < 4.0 and abs(alpha - 3.0) > INTEGER_TOL and abs(alpha - 2.0) > INTEGER_TOL:
        return alpha, 1
    raise ValueError(f"alpha={alpha} is outside (0,2) and (2,4) or is an integer")


def transform_symbol(order: FractionalOrder | float, k: float, dx: float = 1.0) -> float:
    """Infrared symbol of the lattice coupling with the lattice-scale correction kept.

    ``a |k|**alpha - |dx|**(2 - alpha) zeta(alpha - 1) k**2`` for ``0 < alpha < 2``;
    ``|dx|**(alpha - 2) a |k|**alpha - zeta(alpha - 1) k**2`` for ``2 < alpha < 4``.
    """
    alpha, branch = _branch(order)
    ak = a_alpha(alpha) * abs(k) ** alpha
    zk = riemann_zeta(alpha - 1.0) * k * k
    adx = abs(dx)
    if branch == 0:
        return ak - adx ** (2.0 - alpha) * zk
    return adx ** (alpha - 2.0) * ak - zk


def continuum_symbol(order: FractionalOrder | float, k: float) -> float:
    """``a |k|**alpha`` below ``alpha = 2``, ``-zeta(alpha - 1) k**2`` above."""
    alpha, branch = _branch(order)
    if branch == 0:
        return a_alpha(alpha) * abs(k) ** alpha
    return -riemann_zeta(alpha - 1.0) * k * k


def crossover_k0(order: FractionalOrder | float, dx: float) -> float:
    """Wavenumber where the ``|k|**alpha`` and ``k**2`` terms are equally large."""
    alpha, _ = _branch(order)
    if dx <= 0.0:
        raise ValueError("dx must be positive")
    ratio = abs(a_alpha(alpha) / riemann_zeta(alpha - 1.0))
    return ratio ** (1.0 / (2.0 - alpha)) / dx
