"""Closed-form and transform-domain solutions of the tempered space-fractional
Cattaneo equation

    D_t^{2b} u + 2k D_t^b u = [lam^a - (lam - d^2/dx^2)^a] u,

together with the Dirichlet problem on the half line.

The Fourier symbol of the space operator is ``-theta(xi)`` with
``theta(xi) = (lam + xi^2)^a - lam^a``; the characteristic function is the
combination of Mittag-Leffler functions at the roots ``r1, r2`` of
``r^2 + 2k r + theta = 0``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .special_fn import MLParams, dirichlet_kernel, mittag_leffler, mittag_leffler_real
from .transforms import GridFunction, LaplaceInverterConfig, laplace_invert

__all__ = [
    "CattaneoParams",
    "SpectralSymbols",
    "BoundarySignal",
    "boundary_signal",
    "theta",
    "levy_exponent",
    "laplace_exponent",
    "spectral_symbols",
    "char_fn",
    "fourier_laplace",
    "l_beta_laplace",
    "mean_subordinator",
    "variance_paper",
    "variance_time_change",
    "beta1_space_laplace",
    "dirichlet_laplace",
    "dirichlet_invert",
    "dirichlet_special_case",
]


@dataclass(frozen=True)
class CattaneoParams:
    """Model parameters.

    Parameters
    ----------
    alpha : float
        Space order, in ``(0, 1]``.
    beta : float
        Time order, in ``(0, 1]``. Simulation needs ``beta < 1/2``
        (see :meth:`require_simulable`).
    lam : float
        Tempering rate, ``>= 0``.
    k : float
        Damping, ``>= 0``.
    """

    alpha: float
    beta: float
    lam: float
    k: float

    def __post_init__(self):
        for name in ("alpha", "beta", "lam", "k"):
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise ValueError(f"{name} must be a finite real, got {v!r}")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if not 0 < self.beta <= 1:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta!r}")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam!r}")
        if self.k < 0:
            raise ValueError(f"k must be >= 0, got {self.k!r}")

    @property
    def simulable(self) -> bool:
        return 0 < self.beta < 0.5 and self.alpha < 1 and self.k > 0

    def require_simulable(self):
        """Raise unless the process representation applies.

        The time change ``L`` inverts ``H1^{2b}(s) + (2k)^{1/b} H2^b(s)``; the
        index ``2b`` of ``H1`` is a stable index only for ``b < 1/2``.
        """
        if not 0 < self.beta < 0.5:
            raise ValueError(
                f"simulation requires beta in (0, 1/2) (stable index 2*beta < 1), got beta={self.beta}"
            )
        if not self.alpha < 1:
            raise ValueError(f"simulation requires alpha in (0, 1), got alpha={self.alpha}")
        if not self.k > 0:
            raise ValueError(f"simulation requires k > 0, got k={self.k}")


# {{{ symbols


def theta(p: CattaneoParams, xi):
    """``(lam + xi^2)^alpha - lam^alpha``, the symbol of the space operator."""
    xi2 = np.square(xi)
    if p.alpha == 1:
        return xi2 * 1.0
    if p.lam == 0:
        return xi2**p.alpha
    la = p.lam**p.alpha
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        # expm1/log1p keeps accuracy when xi^2 << lam
        small = la * np.expm1(p.alpha * np.log1p(xi2 / p.lam))
        direct = (p.lam + xi2) ** p.alpha - la
    out = np.where(xi2 < p.lam, small, direct)
    return out if out.ndim else float(out)


def levy_exponent(p: CattaneoParams, xi):
    """``(xi^2/2 + lam)^alpha - lam^alpha``: the exponent for unit-variance Brownian
    motion. Not used by :func:`char_fn`, which follows the variance-``2s``
    convention (``levy_exponent(p, sqrt(2) xi) == theta(p, xi)``)."""
    return theta(p, np.asarray(xi) / math.sqrt(2.0))


def laplace_exponent(p: CattaneoParams, s):
    """``phi(s) = s^{2b} + 2k s^b`` of the summed stable subordinators."""
    return s ** (2 * p.beta) + 2 * p.k * s**p.beta


@dataclass(frozen=True)
class SpectralSymbols:
    theta: float
    r1: complex
    r2: complex
    psi: float
    phi_s: Callable


def spectral_symbols(p: CattaneoParams, xi: float) -> SpectralSymbols:
    """Symbols at one frequency; ``r1, r2 = -k ± sqrt(k^2 - theta)``."""
    th = float(theta(p, xi))
    sq = cmath.sqrt(p.k * p.k - th)
    return SpectralSymbols(
        theta=th,
        r1=-p.k + sq,
        r2=-p.k - sq,
        psi=float(levy_exponent(p, xi)),
        phi_s=lambda s: laplace_exponent(p, s),
    )


# }}}


# {{{ characteristic function


def _char_fn_at(p: CattaneoParams, th: float, t: float) -> complex:
    sq = cmath.sqrt(p.k * p.k - th)
    ml = MLParams(p.beta, 1.0)
    tb = t**p.beta
    w = p.k / sq
    e1 = mittag_leffler(ml, (-p.k + sq) * tb)
    e2 = mittag_leffler(ml, (-p.k - sq) * tb)
    return 0.5 * ((1 + w) * e1 + (1 - w) * e2)


def char_fn(p: CattaneoParams, xi: float, t: float) -> complex:
    """Characteristic function ``u_hat(xi, t)`` of the solution.

    ``0.5 [(1 + k/q) E_b(r1 t^b) + (1 - k/q) E_b(r2 t^b)]`` with
    ``q = sqrt(k^2 - theta)`` on the principal branch. For ``k^2 < theta`` the
    roots and weights are conjugate pairs, so the imaginary parts cancel. At
    the confluent point ``k^2 = theta`` (where the formula is 0/0 but the
    solution is smooth in ``theta``) the mean of the values at
    ``theta ± 1e-6 k^2`` is returned.

    Parameters
    ----------
    p : CattaneoParams
    xi : float
    t : float
        ``t >= 0``; ``t = 0`` gives 1.

    Returns
    -------
    complex
    """
    if not (math.isfinite(t) and t >= 0):
        raise ValueError(f"t must be finite and >= 0, got {t!r}")
    th = float(theta(p, xi))
    if th == 0 or t == 0:
        return 1 + 0j
    k2 = p.k * p.k
    if abs(k2 - th) <= 1e-7 * k2:
        eps = 1e-6 * k2
        return 0.5 * (_char_fn_at(p, th - eps, t) + _char_fn_at(p, th + eps, t))
    return _char_fn_at(p, th, t)


def fourier_laplace(p: CattaneoParams, xi: float, s):
    """``(s^{2b-1} + 2k s^{b-1}) / (s^{2b} + 2k s^b + theta(xi))`` (principal branch)."""
    s = np.asarray(s, dtype=complex)
    sb = s**p.beta
    num = (sb * sb + 2 * p.k * sb) / s
    out = num / (sb * sb + 2 * p.k * sb + float(theta(p, xi)))
    return complex(out) if out.ndim == 0 else out


def l_beta_laplace(p: CattaneoParams, x: float, s):
    """Time-Laplace transform of the density of the inverse subordinator at ``x``:
    ``(s^{2b-1} + 2k s^{b-1}) exp(-x (s^{2b} + 2k s^b))``."""
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x!r}")
    s = np.asarray(s, dtype=complex)
    phi = laplace_exponent(p, s)
    out = phi / s * np.exp(-x * phi)
    return complex(out) if out.ndim == 0 else out


# }}}


# {{{ moments


def mean_subordinator(p: CattaneoParams, t: float) -> float:
    """``U(t) = E L(t) = t^{2b} E_{b, 2b+1}(-2k t^b)``."""
    if not (math.isfinite(t) and t >= 0):
        raise ValueError(f"t must be finite and >= 0, got {t!r}")
    if t == 0:
        return 0.0
    ml = MLParams(p.beta, 2 * p.beta + 1)
    return t ** (2 * p.beta) * mittag_leffler_real(ml, -2 * p.k * t**p.beta)


def variance_paper(p: CattaneoParams, t: float) -> float:
    """Closed-form variance as published:
    ``alpha lam^{alpha-2} [1 - alpha + alpha lam^alpha] U(t)``, and
    ``alpha (1 - alpha) U(t)`` for ``lam = 0``.

    This rests on ``E[B(T)^2] = E[T^2]``; see :func:`variance_time_change`
    for the value implied by ``E[B(s)^2] = 2s``.
    """
    u = mean_subordinator(p, t)
    a = p.alpha
    if p.lam == 0:
        return a * (1 - a) * u
    return a * p.lam ** (a - 2) * (1 - a + a * p.lam**a) * u


def variance_time_change(p: CattaneoParams, t: float) -> float:
    """``Var W(t) = U(t) Var X(1)`` with ``Var X(1) = 2 E T(1) = 2 alpha lam^{alpha-1}``.

    Infinite for ``lam = 0`` (untempered stable time has no mean).
    """
    if p.lam == 0:
        return math.inf
    return 2 * p.alpha * p.lam ** (p.alpha - 1) * mean_subordinator(p, t)


# }}}


# {{{ beta = 1


def _sinhc(z: complex) -> complex:
    if abs(z) < 1e-4:
        return 1 + z * z / 6
    return cmath.sinh(z) / z


def beta1_space_laplace(p: CattaneoParams, s: complex, t: float) -> complex:
    """Space-Laplace transform of the ``beta = 1`` solution.

    ``e^{-kt}/2 [(1 + k/q) e^{qt} + (1 - k/q) e^{-qt}]`` with
    ``q = sqrt(k^2 - psi(s))`` and ``psi(s) = (s + lam)^alpha - lam^alpha``,
    evaluated as ``e^{-kt} [cosh(qt) + k t sinh(qt)/(qt)]``, which is regular
    at ``q = 0``. It solves ``u'' + 2k u' = -psi(s) u`` with ``u(0) = 1``,
    ``u'(0) = 0``.
    """
    s = complex(s)
    if not t >= 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    psi = (s + p.lam) ** p.alpha - p.lam**p.alpha
    q = cmath.sqrt(p.k * p.k - psi)
    return cmath.exp(-p.k * t) * (cmath.cosh(q * t) + p.k * t * _sinhc(q * t))


# }}}


# {{{ Dirichlet problem


@dataclass(frozen=True)
class BoundarySignal:
    """Boundary datum ``phi(t)`` with its Laplace transform."""

    name: str
    func: Callable
    laplace: Callable

    def grid(self, t_max: float, n: int) -> GridFunction:
        return GridFunction.sample(self.func, 0.0, t_max / (n - 1), n)


def boundary_signal(name: str, rate: float = 1.0) -> BoundarySignal:
    """Built-in boundary signals: "one" (``1``), "exp" (``e^{-rate t}``), "zero"."""
    if name in ("one", "constant"):
        return BoundarySignal("one", lambda t: np.ones_like(np.asarray(t, dtype=float)), lambda s: 1 / s)
    if name == "exp":
        return BoundarySignal(
            f"exp({rate:g})",
            lambda t: np.exp(-rate * np.asarray(t, dtype=float)),
            lambda s: 1 / (s + rate),
        )
    if name == "zero":
        return BoundarySignal("zero", lambda t: np.zeros_like(np.asarray(t, dtype=float)), lambda s: 0 * s)
    raise ValueError(f"unknown boundary signal {name!r}; expected one of 'one', 'exp', 'zero'")


def dirichlet_laplace(p: CattaneoParams, x: float, s, phi_laplace):
    """``phi~(s) e^{-lam x} E_{alpha,1}[-(s^2 + 2ks + lam^alpha) x^alpha]``.

    ``phi_laplace`` is the value ``phi~(s)`` (array-compatible with ``s``).
    """
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x!r}")
    s = np.asarray(s, dtype=complex)
    phl = np.asarray(phi_laplace, dtype=complex)
    if x == 0:
        out = phl * np.ones_like(s)
    else:
        c = s * s + 2 * p.k * s + p.lam**p.alpha
        ml = mittag_leffler(MLParams(p.alpha, 1.0), -c * x**p.alpha)
        out = phl * math.exp(-p.lam * x) * ml
    return complex(out) if out.ndim == 0 else out


def dirichlet_invert(
    p: CattaneoParams, x: float, t: float, signal: BoundarySignal, cfg: LaplaceInverterConfig | None = None
) -> float:
    """Talbot inversion of :func:`dirichlet_laplace` at ``(x, t)``.

    The transform grows like ``exp(|s|^{2/alpha} x)`` in the sectors around
    the imaginary axis, so by default a classic Talbot contour is used whose
    scale ``mu = 0.5 max(1, x)^{-alpha/2}`` does not depend on ``t``. It crosses
    those sectors close to the origin.
    """
    if cfg is None:
        nodes = 64
        mu = 0.5 * max(1.0, x) ** (-p.alpha / 2)
        # classic contour scale is 0.25 * t_scale * nodes / t
        cfg = LaplaceInverterConfig(
            contour="classic", nodes=nodes, t_scale=mu * t / (0.25 * nodes), tol=1e-8, atol=1e-12
        )
    return laplace_invert(lambda s: dirichlet_laplace(p, x, s, signal.laplace(s)), t, cfg)


def dirichlet_special_case(p: CattaneoParams, x: float, t: float, phi, n: int = 2001) -> float:
    """Convolution solution for ``k = lam^{alpha/2}``:

        u(x, t) = e^{-lam x} ∫_0^t phi(t - z) e^{-k z} K(x, z) dz,

    with ``K`` from :func:`cattaneo.special_fn.dirichlet_kernel`, by the
    trapezoid rule on ``n`` nodes. ``K(x, z) = O(z)`` as ``z -> 0`` for
    ``x > 0``, so the integrand is regular. At ``x = 0`` the kernel is not
    defined and the boundary value ``phi(t)`` is returned.

    Parameters
    ----------
    phi : GridFunction, BoundarySignal or callable
        Boundary datum; a GridFunction is linearly interpolated and must start
        at 0 and cover ``[0, t]``.
    """
    if abs(p.k - p.lam ** (p.alpha / 2)) > 1e-12 * max(1.0, p.k):
        raise ValueError(f"special case needs k = lam^(alpha/2) = {p.lam ** (p.alpha / 2)!r}, got k={p.k!r}")
    if not 0 < p.alpha < 1:
        raise ValueError("special case needs alpha in (0, 1)")
    if not (t > 0 and x >= 0):
        raise ValueError("need t > 0 and x >= 0")

    if isinstance(phi, GridFunction):
        if phi.x0 != 0 or phi.x[-1] < t * (1 - 1e-12):
            raise ValueError("boundary grid must start at 0 and cover [0, t]")

        def f(tt):
            return np.interp(tt, phi.x, phi.values)
    elif isinstance(phi, BoundarySignal):
        f = phi.func
    else:
        f = phi

    if x == 0:
        return float(f(np.array([t]))[0])
    z = np.linspace(0.0, t, n)
    ker = np.zeros(n)
    for i in range(1, n):
        ker[i] = dirichlet_kernel(p.alpha, x, z[i])
    vals = np.asarray(f(t - z), dtype=float) * np.exp(-p.k * z) * ker
    h = z[1] - z[0]
    integral = h * (vals.sum() - 0.5 * (vals[0] + vals[-1]))
    return float(math.exp(-p.lam * x) * integral)


# }}}
