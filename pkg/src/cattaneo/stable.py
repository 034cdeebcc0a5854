"""One-sided stable and tempered stable laws: densities and exact samplers.

A unit one-sided ``alpha``-stable variable has ``E exp(-u S) = exp(-u^alpha)``;
at time ``t`` the subordinator is ``t^(1/alpha) S``. Its tempered version has
density ``exp(-lam x + lam^alpha t) h_alpha(x, t)`` and Laplace exponent
``(u + lam)^alpha - lam^alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .transforms import LaplaceInverterConfig, NonConvergence, laplace_invert

__all__ = [
    "StableParams",
    "TemperedParams",
    "RngStream",
    "SamplerExhausted",
    "kanter_factor",
    "sample_stable",
    "sample_tempered",
    "stable_density",
    "tempered_density",
]


class SamplerExhausted(RuntimeError):
    """A rejection sampler hit its retry budget."""


@dataclass(frozen=True)
class StableParams:
    alpha: float
    t: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not (math.isfinite(self.t) and self.t > 0):
            raise ValueError(f"t must be finite and > 0, got {self.t!r}")


@dataclass(frozen=True)
class TemperedParams:
    alpha: float
    lam: float
    t: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lambda must be finite and >= 0, got {self.lam!r}")
        if not (math.isfinite(self.t) and self.t > 0):
            raise ValueError(f"t must be finite and > 0, got {self.t!r}")

    @property
    def untempered(self) -> StableParams:
        return StableParams(self.alpha, self.t)


_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream keyed by ``(master_seed, stream_id)``.

    Backed by the counter-based Philox generator with the 128-bit key
    ``(master_seed, stream_id)``; distinct keys give independent streams and
    the same key always reproduces the same draws. ``stage`` selects a
    disjoint block of the counter space (the top 64-bit word), separating the
    independent components of one trajectory.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            v = getattr(self, name)
            if int(v) != v or not 0 <= v <= _MASK64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def generator(self, stage: int = 0) -> np.random.Generator:
        bits = np.random.Philox(key=[int(self.master_seed), int(self.stream_id)], counter=[0, 0, 0, int(stage)])
        return np.random.Generator(bits)

    def child(self, stream_id: int) -> "RngStream":
        return RngStream(self.master_seed, stream_id)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


# {{{ sampling


def kanter_factor(alpha: float, u):
    """Kanter's function ``A(u)`` on ``(0, pi)``.

    ``A(u) = sin(a u)^(a/(1-a)) sin((1-a) u) / sin(u)^(1/(1-a))``; with
    ``U ~ Unif(0, pi)`` and ``E ~ Exp(1)``, ``(A(U)/E)^((1-a)/a)`` is unit
    one-sided stable.
    """
    a = alpha
    return np.sin(a * u) ** (a / (1 - a)) * np.sin((1 - a) * u) / np.sin(u) ** (1 / (1 - a))


def _unit_stable(alpha: float, gen: np.random.Generator, size):
    # u in (0, pi]: A(u) is 0/0 at u = 0
    u = math.pi * (1.0 - gen.random(size))
    e = gen.standard_exponential(size)
    return (kanter_factor(alpha, u) / e) ** ((1 - alpha) / alpha)


def sample_stable(p: StableParams, rng, size=None):
    """Exact draw(s) of ``h_alpha(., t)`` by Kanter's representation.

    Parameters
    ----------
    p : StableParams
    rng : RngStream or numpy.random.Generator
        An ``RngStream`` is turned into a fresh generator (stage 0), so the
        same stream always yields the same draws.
    size : int or tuple, optional

    Returns
    -------
    float or numpy.ndarray
    """
    gen = _as_generator(rng)
    s = p.t ** (1 / p.alpha) * _unit_stable(p.alpha, gen, size)
    return float(s) if size is None else s


def sample_tempered(p: TemperedParams, rng, size=None, max_tries: int = 100_000):
    """Exact draw(s) of the tempered stable law by split exponential tilting.

    ``t`` is split into ``m = ceil(lam^alpha t)`` equal pieces. For each piece a
    stable increment ``S`` is proposed and kept with probability
    ``exp(-lam S)``; the accepted increments are summed. The acceptance rate
    per piece is ``exp(-lam^alpha t / m) >= 1/e``.

    Raises
    ------
    SamplerExhausted
        If some piece is still unaccepted after ``max_tries`` proposals.
    """
    gen = _as_generator(rng)
    if p.lam == 0:
        s = p.t ** (1 / p.alpha) * _unit_stable(p.alpha, gen, size)
        return float(s) if size is None else s

    m = max(1, math.ceil(p.lam**p.alpha * p.t))
    scale = (p.t / m) ** (1 / p.alpha)
    if size is None:
        return _tempered_scalar(p.alpha, p.lam, m, scale, gen, max_tries)
    shape = () if size is None else tuple(np.atleast_1d(size).astype(int))
    n = int(np.prod(shape)) * m
    out = np.empty(n)
    pending = np.arange(n)
    tries = 0
    while pending.size:
        tries += 1
        if tries > max_tries:
            raise SamplerExhausted(
                f"tempered sampler: {pending.size} increments unaccepted after {max_tries} proposals"
            )
        s = scale * _unit_stable(p.alpha, gen, pending.size)
        keep = gen.uniform(size=pending.size) < np.exp(-p.lam * s)
        out[pending[keep]] = s[keep]
        pending = pending[~keep]
    total = out.reshape(shape + (m,)).sum(axis=-1)
    return float(total) if size is None else total


def _tempered_scalar(a: float, lam: float, m: int, scale: float, gen, max_tries: int) -> float:
    # same algorithm as the vectorised path, without array overhead
    c1, c2, c3 = a / (1 - a), 1 / (1 - a), (1 - a) / a
    total = 0.0
    for _ in range(m):
        for _ in range(max_tries):
            u, v = gen.random(2)
            u = math.pi * (1.0 - u)
            e = gen.standard_exponential()
            fac = math.sin(a * u) ** c1 * math.sin((1 - a) * u) / math.sin(u) ** c2
            x = scale * (fac / e) ** c3
            if v < math.exp(-lam * x):
                total += x
                break
        else:
            raise SamplerExhausted(f"tempered sampler: increment unaccepted after {max_tries} proposals")
    return total


# }}}


# {{{ densities

# the density is flat-zero to double precision near x = 0; use an absolute floor
_TALBOT = LaplaceInverterConfig(tol=1e-10, atol=1e-14)


def _hyperbolic_config(alpha: float) -> LaplaceInverterConfig:
    # exp(-s^alpha) is bounded for |arg s| <= pi / (2 alpha)
    sector = min(math.pi / 2, math.pi * (1 - alpha) / (2 * alpha))
    return LaplaceInverterConfig(
        contour="hyperbolic", sector=sector, nodes=64, tol=1e-10, atol=1e-13, max_nodes=16384
    )


def _density_inversion(alpha: float, x: float) -> float:
    def f(s):
        with np.errstate(over="ignore"):
            return np.exp(-(s**alpha))

    # for alpha > 1/2 the transform grows on the wings of a Talbot contour
    cfg = _TALBOT if alpha <= 0.5 else _hyperbolic_config(alpha)
    return laplace_invert(f, x, cfg)


def _log_kanter(alpha: float, u: float) -> float:
    a = alpha
    return (
        a / (1 - a) * math.log(math.sin(a * u))
        + math.log(math.sin((1 - a) * u))
        - math.log(math.sin(u)) / (1 - a)
    )


def _density_integral(alpha: float, x: float) -> float:
    # h(x, 1) = (1/pi) ∫_0^pi A(u) c x^(-c-1) exp(-A(u) x^-c) du,  c = a/(1-a)
    c = alpha / (1 - alpha)
    log_xc = -c * math.log(x)

    def g(u):
        if not 0 < u < math.pi:
            return 0.0
        la = _log_kanter(alpha, u) + log_xc
        if la > 700:
            return 0.0
        return math.exp(la - math.exp(la))

    # the integrand peaks where A(u) x^-c = 1, ever closer to pi and narrower
    # as alpha -> 1: split there and on a geometric ladder towards both ends
    pts = {0.0, math.pi}
    pts.update(_peak(alpha, log_xc) or [])
    pts.update(math.pi * (1 - 10.0**-k) for k in range(1, 8))
    pts.update(math.pi * 10.0**-k for k in range(1, 4))
    pts = sorted(pts)
    val = sum(
        integrate.quad(g, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)[0] for lo, hi in zip(pts, pts[1:])
    )
    return val * c / x / math.pi


def _peak(alpha: float, log_xc: float):
    # A is increasing on (0, pi); bisect log A(u) + log_xc = 0
    lo, hi = 1e-12, math.pi - 1e-12
    f_lo, f_hi = _log_kanter(alpha, lo) + log_xc, _log_kanter(alpha, hi) + log_xc
    if f_lo >= 0 or f_hi <= 0:
        return None
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _log_kanter(alpha, mid) + log_xc < 0:
            lo = mid
        else:
            hi = mid
    return [0.5 * (lo + hi)]


def _density_auto(alpha: float, x: float) -> float:
    try:
        return _density_inversion(alpha, x)
    except NonConvergence:
        return _density_integral(alpha, x)


_ROUTES = {"auto": _density_auto, "inversion": _density_inversion, "integral": _density_integral}


def stable_density(p: StableParams, x, method: str = "auto"):
    """Density ``h_alpha(x, t)`` of the one-sided stable subordinator.

    Parameters
    ----------
    p : StableParams
    x : float or array_like
        Points ``> 0``.
    method : {"auto", "inversion", "integral"}
        "inversion" inverts ``exp(-t s^alpha)`` numerically (Talbot contour
        for ``alpha <= 1/2``, hyperbolic contour inside the sector where the
        transform is bounded otherwise); "integral" integrates Zolotarev's
        representation (the density of Kanter's variable) with adaptive
        quadrature. The two are independent routes. "auto" uses "inversion"
        and switches to "integral" if the inversion fails its node-doubling
        test.

    Returns
    -------
    float or numpy.ndarray
    """
    xs = np.asarray(x, dtype=float)
    if np.any(~(xs > 0)) or not np.all(np.isfinite(xs)):
        raise ValueError("stable_density needs finite x > 0")
    try:
        route = _ROUTES[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}") from None
    sc_ = p.t ** (-1 / p.alpha)
    vals = np.array([max(route(p.alpha, xi * sc_), 0.0) * sc_ for xi in xs.ravel()])
    vals = vals.reshape(xs.shape)
    return float(vals) if vals.ndim == 0 else vals


def tempered_density(p: TemperedParams, x, method: str = "auto"):
    """Tempered stable density ``exp(-lam x + lam^alpha t) h_alpha(x, t)``."""
    h = stable_density(p.untempered, x, method)
    if p.lam == 0:
        return h
    w = np.exp(-p.lam * np.asarray(x, dtype=float) + p.lam**p.alpha * p.t)
    out = w * h
    return float(out) if np.ndim(out) == 0 else out


# }}}
